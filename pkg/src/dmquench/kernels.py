"""Backend selection for the hot per-mode kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``DMQUENCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("DMQUENCH_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass



def _c(*arrays):
    return [np.ascontiguousarray(a, dtype=float) for a in arrays]


def mode_observables(eps0, epsf, deps, cphi0, sphi0, dsin, dh0f, beta):
    """Per-mode ``(mean, var, logratio, logz0)``; see ``_pykernels.mode_observables``."""
    return _impl.mode_observables(*_c(eps0, epsf, deps, cphi0, sphi0, dsin), float(dh0f), float(beta))


def chi_grid(u, w1, w2, p00, p11, pc, c2, s2):
    """``chi(u)`` on a real grid; see ``_pykernels.chi_grid``."""
    return _impl.chi_grid(*_c(u, w1, w2, p00, p11, pc, c2, s2))
