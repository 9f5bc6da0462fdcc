"""Pure numpy implementation of the per-mode kernels.

Must stay numerically equivalent to ``_ckernels.pyx``; ``tests/test_kernels.py``
pins the two against each other.
"""

import numpy as np

_CHUNK = 512


def mode_observables(eps0, epsf, deps, cphi0, sphi0, dsin, dh0f, beta):
    """Per-mode mean work, work variance and thermal log-ratio.

    ``dh0f`` is ``h0 - hf`` and ``deps`` is ``eps0 - epsf``. Returns
    ``(mean, var, logratio, logz0)`` where ``logratio`` is
    ``ln[(cosh 2b epsf + cosh 4b D s)/(cosh 2b eps0 + cosh 4b D s)]`` and
    ``logz0 = ln[2 cosh 2b eps0 + 2 cosh 4b D s]``.
    """
    a = 2.0 * beta * eps0
    af = 2.0 * beta * epsf
    b = np.abs(4.0 * beta * dsin)
    m = np.maximum(a, b)
    ea_p = np.exp(a - m)
    ea_m = np.exp(-a - m)
    cb = np.exp(b - m) + np.exp(-b - m)
    ca = ea_p + ea_m
    den = ca + cb
    # e^{a-m} - e^{-a-m} without cancellation for small a
    mean = 2.0 * dh0f * cphi0 * (ea_p * -np.expm1(-2.0 * a)) / den
    var = 4.0 * dh0f * dh0f * (sphi0 * sphi0 * ca * ca + ca * cb + 4.0 * cphi0 * cphi0 * np.exp(-2.0 * m)) / (den * den)

    logz0 = m + np.log(den)
    mf = np.maximum(af, b)
    logzf = mf + np.log(np.exp(af - mf) + np.exp(-af - mf) + np.exp(b - mf) + np.exp(-b - mf))
    logratio = logzf - logz0
    # Ratios near 1 (nearby fields, or a dominant cross state) cancel in the
    # difference of logs. Use log1p of the exact difference instead:
    # 2 cosh af - 2 cosh a = 4 sinh(hs) sinh(d), hs = (af + a)/2, d = (af - a)/2,
    # scaled by e^-m and rearranged so that nothing overflows.
    small = np.abs(logratio) <= 0.5
    if np.any(small):
        hs = 0.5 * (af + a)[small]
        d = (-beta * deps)[small]
        top = np.maximum(a, af)[small] - m[small]
        q = np.sign(d) * -np.expm1(-2.0 * hs) * -np.expm1(-2.0 * np.abs(d)) * np.exp(top) / den[small]
        logratio[small] = np.log1p(q)
    return mean, var, logratio, logz0


def chi_grid(u, w1, w2, p00, p11, pc, c2, s2):
    """Characteristic function ``prod_k chi_k(u)`` at real ``u``.

    Per mode ``chi_k = pc + p00 (c2 e^{iu w1} + s2 e^{iu w2}) + p11 (c2 e^{-iu w1} + s2 e^{-iu w2})``
    where ``w1 = 2(eps0 - epsf)`` and ``w2 = 2(eps0 + epsf)``.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty(u.shape, dtype=complex)
    for start in range(0, u.size, _CHUNK):
        uu = u[start:start + _CHUNK, None]
        e1 = np.exp(1j * uu * w1)
        e2 = np.exp(1j * uu * w2)
        chi = pc + p00 * (c2 * e1 + s2 * e2) + p11 * (c2 * np.conj(e1) + s2 * np.conj(e2))
        out[start:start + _CHUNK] = np.prod(chi, axis=1)
    return out
