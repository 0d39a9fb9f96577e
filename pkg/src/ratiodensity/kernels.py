"""Backend selection for the hot loops.

The compiled extension is used when it was built and RD_PURE_PYTHON is not
set; otherwise the numpy fallback is used. Both expose the same functions.
"""

from __future__ import annotations

import os

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

_want_pure = os.environ.get("RD_PURE_PYTHON", "").strip() not in ("", "0")
BACKEND = "compiled" if (_compiled is not None and not _want_pure) else "python"
_impl = BACKENDS[BACKEND]


def use_backend(name):
    """Switch the active backend ("compiled" or "python")."""
    global BACKEND, _impl
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available")
    BACKEND = name
    _impl = BACKENDS[name]


def kloosterman_enum(m, n, c):
    return _impl.kloosterman_enum(int(m), int(n), int(c))


def kloosterman_table(c, mmax, nmax):
    return _impl.kloosterman_table(int(c), int(mmax), int(nmax))


def residual_product(u, p, logp, peel=False):
    import numpy as np

    return _impl.residual_product(
        np.ascontiguousarray(u, dtype=complex),
        np.ascontiguousarray(p, dtype=float),
        np.ascontiguousarray(logp, dtype=float),
        int(bool(peel)),
    )


def chi_direct_product(u, p, logp):
    import numpy as np

    u = complex(u)
    return _impl.chi_direct_product(
        u.real, u.imag,
        np.ascontiguousarray(p, dtype=float),
        np.ascontiguousarray(logp, dtype=float),
    )
