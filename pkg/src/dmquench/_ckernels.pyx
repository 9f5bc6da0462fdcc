# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-mode kernels; same contract as ``_pykernels``."""

import numpy as np

from libc.math cimport exp, expm1, log, log1p, fabs, cos, sin


def mode_observables(const double[::1] eps0, const double[::1] epsf, const double[::1] deps,
                     const double[::1] cphi0, const double[::1] sphi0, const double[::1] dsin,
                     double dh0f, double beta):
    cdef Py_ssize_t n = eps0.shape[0], i
    mean_a = np.empty(n)
    var_a = np.empty(n)
    ratio_a = np.empty(n)
    logz_a = np.empty(n)
    cdef double[::1] mean = mean_a, var = var_a, ratio = ratio_a, logz = logz_a
    cdef double a, af, b, m, mf, ea_p, ea_m, ca, cb, den, denf, hs, d, top, sg
    with nogil:
        for i in range(n):
            a = 2.0 * beta * eps0[i]
            af = 2.0 * beta * epsf[i]
            b = fabs(4.0 * beta * dsin[i])
            m = a if a > b else b
            ea_p = exp(a - m)
            ea_m = exp(-a - m)
            cb = exp(b - m) + exp(-b - m)
            ca = ea_p + ea_m
            den = ca + cb
            # e^{a-m} - e^{-a-m} without cancellation for small a
            mean[i] = 2.0 * dh0f * cphi0[i] * (ea_p * -expm1(-2.0 * a)) / den
            var[i] = 4.0 * dh0f * dh0f * (sphi0[i] * sphi0[i] * ca * ca + ca * cb
                                          + 4.0 * cphi0[i] * cphi0[i] * exp(-2.0 * m)) / (den * den)
            logz[i] = m + log(den)
            mf = af if af > b else b
            denf = exp(af - mf) + exp(-af - mf) + exp(b - mf) + exp(-b - mf)
            ratio[i] = (mf + log(denf)) - logz[i]
            if fabs(ratio[i]) <= 0.5:
                # exact difference 4 sinh(hs) sinh(d) e^-m, see _pykernels
                hs = 0.5 * (af + a)
                d = -beta * deps[i]
                top = (a if a > af else af) - m
                sg = 1.0 if d > 0 else (-1.0 if d < 0 else 0.0)
                ratio[i] = log1p(sg * -expm1(-2.0 * hs) * -expm1(-2.0 * fabs(d)) * exp(top) / den)
    return mean_a, var_a, ratio_a, logz_a


def chi_grid(const double[::1] u, const double[::1] w1, const double[::1] w2,
             const double[::1] p00, const double[::1] p11, const double[::1] pc,
             const double[::1] c2, const double[::1] s2):
    cdef Py_ssize_t nu = u.shape[0], nk = w1.shape[0], j, i
    out_a = np.empty(nu, dtype=np.complex128)
    cdef double complex[::1] out = out_a
    cdef double re, im, tr, ti, c1, s1, cc2, ss2, ar, ai, br, bi
    with nogil:
        for j in range(nu):
            re = 1.0
            im = 0.0
            for i in range(nk):
                c1 = cos(u[j] * w1[i])
                s1 = sin(u[j] * w1[i])
                cc2 = cos(u[j] * w2[i])
                ss2 = sin(u[j] * w2[i])
                # p00 (c2 e1 + s2 e2) + p11 conj(c2 e1 + s2 e2)
                ar = c2[i] * c1 + s2[i] * cc2
                ai = c2[i] * s1 + s2[i] * ss2
                br = pc[i] + (p00[i] + p11[i]) * ar
                bi = (p00[i] - p11[i]) * ai
                tr = re * br - im * bi
                ti = re * bi + im * br
                re = tr
                im = ti
            out[j] = re + 1j * im
    return out_a
