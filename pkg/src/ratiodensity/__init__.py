"""Ratios-conjecture and Petersson-side 1-level density numerics."""
