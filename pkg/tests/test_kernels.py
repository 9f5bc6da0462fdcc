import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given

from dmquench import _pykernels, kernels
from dmquench.model import build_mode_table
from dmquench.thermo import gibbs_log_weights

from .conftest import small_setups

try:
    from dmquench import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")


def _inputs(setup):
    t = build_mode_table(setup)
    args = [np.ascontiguousarray(a, dtype=float) for a in (t.eps0, t.epsf, t.deps, t.cphi0, t.sphi0, t.dsin)]
    return t, args, setup.h0 - setup.hf, setup.beta


@needs_ext
@given(small_setups())
def test_mode_observables_backends_agree(setup):
    _, args, dh, beta = _inputs(setup)
    py = _pykernels.mode_observables(*args, dh, beta)
    c = _ckernels.mode_observables(*args, dh, beta)
    for a, b in zip(py, c):
        np.testing.assert_allclose(b, a, rtol=1e-13, atol=1e-300)


@needs_ext
@given(small_setups())
def test_chi_grid_backends_agree(setup):
    t = build_mode_table(setup)
    logw, logz = gibbs_log_weights(t.eps0, t.dsin, setup.beta)
    p = np.exp(logw - logz[:, None])
    args = [np.ascontiguousarray(a, dtype=float) for a in (2 * t.deps, 2 * (t.eps0 + t.epsf), p[:, 0], p[:, 3], p[:, 1] + p[:, 2], t.cos2, t.sin2)]
    u = np.linspace(-3.0, 3.0, 257)
    np.testing.assert_allclose(_ckernels.chi_grid(u, *args), _pykernels.chi_grid(u, *args), rtol=0, atol=1e-13)


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, DMQUENCH_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", "import dmquench.kernels as k; print(k.BACKEND)"], env=env, capture_output=True, text=True)
    assert r.stdout.strip() == "python"


def test_dispatch_accepts_non_contiguous_input():
    x = np.linspace(0.1, 1.0, 20)[::2]
    out = kernels.mode_observables(x, x + 0.1, -0.1 + 0 * x, np.cos(x), np.sin(x), 0.1 * x, -0.01, 2.0)
    assert all(o.shape == (10,) for o in out)
