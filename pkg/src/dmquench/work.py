"""Work statistics of the sudden field quench under two-point energy measurements.

Each (k, -k) block contributes independently, so the characteristic function
factorises over positive wave vectors and the work distribution is the
convolution of six-atom single-mode distributions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import NumericError, SizeLimitError
from .model import ModeTable, QuenchSetup, build_mode_table
from .thermo import delta_free_energy, gibbs_log_weights

L_EXACT_MAX = 16
MERGE_TOL = 1e-9
CROOKS_FLOOR = 1e-14


def _table(setup: QuenchSetup, table: ModeTable | None) -> ModeTable:
    if table is None:
        return build_mode_table(setup)
    if table.setup != setup:
        raise ValueError("mode table was built for a different setup")
    return table


# ---------------------------------------------------------------------------
# per-mode atoms and characteristic function
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkAtoms:
    """Six work atoms per positive wave vector.

    Columns, in order: |00> followed by a measurement in the post-quench
    vacuum (cos^2 theta) or pair state (sin^2 theta); the same for |11>; then
    the two cross states, which do no work.
    """

    k: np.ndarray
    values: np.ndarray
    log_probs: np.ndarray

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def convolve(self, merge_tol: float = MERGE_TOL) -> "WorkDistribution":
        """Distribution of the total work: the convolution over all modes."""
        values = np.zeros(1)
        logp = np.zeros(1)
        for w, lp in zip(self.values, self.log_probs):
            values, logp = _merge(
                (values[:, None] + w[None, :]).ravel(), (logp[:, None] + lp[None, :]).ravel(), merge_tol
            )
        return WorkDistribution(
            values=values,
            weights=np.exp(logp),
            kind="atoms",
            log_weights=logp,
            meta={"method": "exact", "merge_tol": merge_tol},
        )


def _merge(values, logp, tol):
    """Sort atoms by value and merge neighbours closer than ``tol``.

    A merged atom carries the summed probability at the probability-weighted
    mean position, so the first moment is unchanged.
    """
    keep = np.isfinite(logp)
    values, logp = values[keep], logp[keep]
    order = np.argsort(values, kind="stable")
    values, logp = values[order], logp[order]
    starts = np.flatnonzero(np.concatenate(([True], np.diff(values) > tol)))
    if len(starts) == len(values):
        return values, logp
    gid = np.repeat(np.arange(len(starts)), np.diff(np.append(starts, len(values))))
    gmax = np.maximum.reduceat(logp, starts)
    wts = np.exp(logp - gmax[gid])
    total = np.add.reduceat(wts, starts)
    v0 = values[starts]
    merged_values = v0 + np.add.reduceat(wts * (values - v0[gid]), starts) / total
    return merged_values, gmax + np.log(total)


def mode_atoms(setup: QuenchSetup, table: ModeTable | None = None) -> WorkAtoms:
    t = _table(setup, table)
    logw, logz = gibbs_log_weights(t.eps0, t.dsin, setup.beta)
    logp = logw - logz[:, None]
    with np.errstate(divide="ignore"):
        lc, ls = np.log(t.cos2), np.log(t.sin2)
    w1 = 2.0 * t.deps
    w2 = 2.0 * (t.eps0 + t.epsf)
    zero = np.zeros_like(w1)
    values = np.stack([w1, w2, -w1, -w2, zero, zero], axis=1)
    log_probs = np.stack(
        [logp[:, 0] + lc, logp[:, 0] + ls, logp[:, 3] + lc, logp[:, 3] + ls, logp[:, 1], logp[:, 2]], axis=1
    )
    return WorkAtoms(k=t.k, values=values, log_probs=log_probs)


def _complex_logsumexp(terms: np.ndarray) -> np.ndarray:
    """``log sum exp`` over the last axis for complex terms; real parts may be -inf."""
    re = terms.real
    m = np.max(re, axis=-1, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.exp(terms - m), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(s) + m[..., 0]


def mode_log_char_fn(setup: QuenchSetup, u, table: ModeTable | None = None) -> np.ndarray:
    """Per-mode ``ln chi_k(u)`` with shape ``u.shape + (L/2,)``.

    Each mode's bracket (pre-quench Gibbs weight times post-quench overlap
    phases, plus the u-independent cross-state weights ``e^{+-4 beta D sin k}``)
    is divided by its value at ``u = 0``, which is the mode partition function,
    and logged on the principal branch.

    Raises
    ------
    NumericError
        If a bracket under- or overflows beyond the log-space range.
    """
    t = _table(setup, table)
    logw, _ = gibbs_log_weights(t.eps0, t.dsin, setup.beta)
    with np.errstate(divide="ignore"):
        lc, ls = np.log(t.cos2), np.log(t.sin2)
    w1 = 2.0 * t.deps
    w2 = 2.0 * (t.eps0 + t.epsf)
    zero = np.zeros_like(w1)
    values = np.stack([w1, w2, -w1, -w2, zero, zero], axis=1)
    log_brackets = np.stack(
        [logw[:, 0] + lc, logw[:, 0] + ls, logw[:, 3] + lc, logw[:, 3] + ls, logw[:, 1], logw[:, 2]], axis=1
    ).astype(complex)
    u = np.asarray(u, dtype=complex)[..., None, None]
    terms = log_brackets + 1j * u * values
    # cross states: iu (E_f - E_0) vanishes identically
    terms[..., 4:] = log_brackets[:, 4:]
    # normalising by the same six terms at u = 0 (rather than by ln Z_k) makes
    # an identity quench give two identical sums, so ln chi_k = 0 exactly
    out = _complex_logsumexp(terms) - _complex_logsumexp(log_brackets).real
    bad = ~np.isfinite(out)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise NumericError(f"characteristic function out of log-space range at mode index {int(idx[-1])}")
    return out


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


@dataclass(frozen=True)
class CharFnValue:
    u: complex
    value: complex
    log_value: complex
    flagged: bool = False


def char_fn(setup: QuenchSetup, u: complex, table: ModeTable | None = None) -> CharFnValue:
    """Characteristic function of work ``chi(u) = <e^{iuW}>``.

    ``|Im u| > beta`` is allowed but probes exponentially small tails; such
    values are flagged and a warning is issued.
    """
    u = complex(u)
    flagged = abs(u.imag) > setup.beta
    if flagged:
        warnings.warn(f"|Im u| = {abs(u.imag)} exceeds beta = {setup.beta}", RuntimeWarning, stacklevel=2)
    if u == 0:
        return CharFnValue(u=u, value=1.0 + 0j, log_value=0j, flagged=False)
    log_value = _fsum_complex(mode_log_char_fn(setup, u, table))
    with np.errstate(over="ignore"):
        value = complex(np.exp(log_value))
    return CharFnValue(u=u, value=value, log_value=log_value, flagged=flagged)


def _log1p_complex(z: np.ndarray) -> np.ndarray:
    """Principal ``ln(1 + z)`` accurate for small complex ``z``."""
    x, y = z.real, z.imag
    return 0.5 * np.log1p(2.0 * x + x * x + y * y) + 1j * np.arctan2(y, 1.0 + x)


def mode_log_char_fn_real(setup: QuenchSetup, u, table: ModeTable | None = None) -> np.ndarray:
    """Per-mode ``ln chi_k(u)`` for real ``u`` with relative precision near ``u = 0``.

    Uses ``chi_k - 1 = sum_j p_j (e^{iuw_j} - 1)`` with
    ``e^{ix} - 1 = -2 sin^2(x/2) + i sin x``.
    """
    atoms = mode_atoms(setup, table)
    p = atoms.probs
    x = np.asarray(u, dtype=float)[..., None, None] * atoms.values
    dchi = np.sum(p * (-2.0 * np.sin(0.5 * x) ** 2 + 1j * np.sin(x)), axis=-1)
    return _log1p_complex(dchi)


def log_char_fn(setup: QuenchSetup, u, table: ModeTable | None = None) -> np.ndarray:
    """Vectorised ``ln chi(u)`` for an array of ``u``."""
    per_mode = mode_log_char_fn(setup, u, table)
    flat = per_mode.reshape(-1, per_mode.shape[-1])
    out = np.array([_fsum_complex(row) for row in flat])
    return out.reshape(np.shape(u))


def jarzynski_log_residual(setup: QuenchSetup, table: ModeTable | None = None) -> float:
    """``|ln chi(i beta) + beta Delta F|``; zero for exact two-point statistics."""
    lv = char_fn(setup, 1j * setup.beta, table).log_value
    return abs(lv + setup.beta * delta_free_energy(setup))


# ---------------------------------------------------------------------------
# closed-form moments
# ---------------------------------------------------------------------------


def mode_moments(setup: QuenchSetup, table: ModeTable | None = None):
    """Per-mode ``(<w>_k, sigma_k^2, logratio_k)``.

    ``logratio_k = ln[(cosh 2b epsf + cosh 4b D s)/(cosh 2b eps0 + cosh 4b D s)]``.
    """
    t = _table(setup, table)
    mean, var, ratio, _ = kernels.mode_observables(
        t.eps0, t.epsf, t.deps, t.cphi0, t.sphi0, t.dsin, setup.h0 - setup.hf, setup.beta
    )
    return mean, var, ratio


def mean_and_variance(setup: QuenchSetup, table: ModeTable | None = None) -> tuple[float, float]:
    """Mean work and work variance, summed over positive wave vectors."""
    mean, var, _ = mode_moments(setup, table)
    return math.fsum(mean), math.fsum(var)


# ---------------------------------------------------------------------------
# cumulants by numerical differentiation of ln chi
# ---------------------------------------------------------------------------

# central-difference stencils: offsets (in units of the step) and weights
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
}
_LEVELS = 8


class Cumulants(NamedTuple):
    values: np.ndarray
    errors: np.ndarray


def _derivative(f, n: int, h0: float):
    """Richardson-extrapolated n-th derivative of ``f`` at 0 from central differences.

    Steps run ``h0 * 2^(levels-1) .. h0``; the tableau entry with the smallest
    consecutive-difference estimate is returned, with that estimate inflated
    by a round-off bound.
    """
    offsets, weights = _STENCILS[n]
    steps = h0 * 2.0 ** np.arange(_LEVELS - 1, -1, -1)
    if steps[-1] == 0.0 or steps[-1] ** n == 0.0 or 0.0 + steps[-1] * min(abs(o) for o in offsets if o) == 0.0:
        raise NumericError("step-size underflow in numerical differentiation")
    pts = np.array([o * h for h in steps for o in offsets])
    vals = f(pts).reshape(_LEVELS, len(offsets))
    raw = (vals @ np.asarray(weights)) / steps**n
    tab = [[raw[0]]]
    best, best_err = raw[-1], np.inf
    for j in range(1, _LEVELS):
        row = [raw[j]]
        for lev in range(1, j + 1):
            r = row[lev - 1] + (row[lev - 1] - tab[j - 1][lev - 1]) / (4.0**lev - 1.0)
            err = max(abs(r - row[lev - 1]), abs(r - tab[j - 1][lev - 1]))
            if err < best_err:
                best, best_err = r, err
            row.append(r)
        tab.append(row)
    roundoff = 8.0 * np.finfo(float).eps * np.max(np.abs(vals)) * np.sum(np.abs(weights)) / steps[-1] ** n
    return best, max(best_err, roundoff)


def cumulants_numeric(setup: QuenchSetup, n_max: int = 4, table: ModeTable | None = None) -> Cumulants:
    """Work cumulants ``K_n = (-i)^n d^n/du^n ln chi(u)|_0`` for ``n = 1..n_max``.

    The base step is ``eps^(1/(n+2)) / max(sqrt(K2), w_k max)``: a rough
    ``K2`` comes from a probe second difference, and the largest single-mode
    work jump caps the step when ``K2`` is tiny because large jumps are rare.
    """
    if n_max not in (1, 2, 3, 4):
        raise ValueError(f"n_max must be in 1..4, got {n_max}")
    t = _table(setup, table)

    def f(u):
        per_mode = mode_log_char_fn_real(setup, u, t)
        return np.array([_fsum_complex(row) for row in per_mode])

    if setup.hf == setup.h0:
        z = np.zeros(n_max)
        return Cumulants(z, z.copy())
    scale = float(np.max(2.0 * (t.eps0 + t.epsf)))
    probe = 1e-4 / scale
    fp = f(np.array([-probe, 0.0, probe])).real
    k2_probe = -(fp[0] - 2.0 * fp[1] + fp[2]) / probe**2
    u_scale = max(math.sqrt(max(k2_probe, 0.0)), scale)
    atoms = mode_atoms(setup, t)
    probs = np.exp(atoms.log_probs)
    values, errors = [], []
    eps = np.finfo(float).eps
    for n in range(1, n_max + 1):
        h0 = eps ** (1.0 / (n + 2)) / u_scale
        d, err = _derivative(f, n, h0)
        kn = ((-1j) ** n * d).real
        values.append(kn)
        # atoms of opposite sign cancel inside each mode: the n-th derivative
        # cannot be resolved below eps times the absolute n-th moment
        floor = 8.0 * eps * float(np.sum(probs * np.abs(atoms.values) ** n))
        errors.append(max(err, floor))
    return Cumulants(np.array(values), np.array(errors))


# ---------------------------------------------------------------------------
# work distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorkDistribution:
    """Either exact atoms (``kind="atoms"``) or a uniform-grid density (``kind="histogram"``).

    A histogram is the work density convolved with a Gaussian resolution
    kernel of width ``kernel_sigma`` and sampled at bin centres.
    """

    values: np.ndarray
    weights: np.ndarray
    kind: str
    log_weights: np.ndarray | None = None
    bin_width: float | None = None
    kernel_sigma: float = 0.0
    meta: dict = field(default_factory=dict)

    def _masses(self) -> np.ndarray:
        return self.weights if self.kind == "atoms" else self.weights * self.bin_width

    def total(self) -> float:
        return math.fsum(self._masses())

    def mean(self) -> float:
        return math.fsum(self._masses() * self.values) / self.total()

    def variance(self) -> float:
        """Variance; for histograms the resolution-kernel variance is removed."""
        mu = self.mean()
        v = math.fsum(self._masses() * (self.values - mu) ** 2) / self.total()
        return v - self.kernel_sigma**2

    def smoothed(self, centers: np.ndarray, sigma: float, period: float | None = None) -> np.ndarray:
        """Gaussian-smoothed density of an atom list at uniform ``centers``, optionally periodised."""
        if self.kind != "atoms":
            raise ValueError("only atom distributions can be smoothed")
        centers = np.asarray(centers, dtype=float)
        dw = centers[1] - centers[0]
        n = len(centers)
        out = np.zeros(n)
        half = int(math.ceil(12.0 * sigma / dw)) + 1
        norm = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
        for w, p in zip(self.values, self.weights):
            if p == 0.0:
                continue
            c = int(round((w - centers[0]) / dw))
            idx = np.arange(c - half, c + half + 1)
            d = centers[0] + idx * dw - w
            g = p * norm * np.exp(-0.5 * (d / sigma) ** 2)
            if period is None:
                ok = (idx >= 0) & (idx < n)
                np.add.at(out, idx[ok], g[ok])
            else:
                np.add.at(out, idx % n, g)
        return out


def work_pdf_exact(setup: QuenchSetup, merge_tol: float = MERGE_TOL, table: ModeTable | None = None) -> WorkDistribution:
    """Exact work distribution by enumerating all two-point-measurement outcomes.

    Raises
    ------
    SizeLimitError
        For ``L > 16``; use :func:`work_pdf_fft` instead.
    """
    if setup.params.L > L_EXACT_MAX:
        raise SizeLimitError(
            f"exact enumeration limited to L <= {L_EXACT_MAX} (got L={setup.params.L}); use work_pdf_fft"
        )
    return mode_atoms(setup, table).convolve(merge_tol)


KERNEL_BINS = 3.0
_MARGIN_SIGMAS = 12.0
_GUARD_SIGMAS = 6.0
ALIAS_MASS_TOL = 1e-8


def work_support(setup: QuenchSetup, table: ModeTable | None = None) -> float:
    """Largest possible ``|W|``: ``sum_k (2 eps0 + 2 epsf)``."""
    t = _table(setup, table)
    return math.fsum(2.0 * (t.eps0 + t.epsf))


def work_pdf_fft(
    setup: QuenchSetup,
    n_samples: int = 2**16,
    w_max: float | None = None,
    kernel_bins: float = KERNEL_BINS,
    table: ModeTable | None = None,
) -> WorkDistribution:
    """Work density from an inverse DFT of ``chi(u)`` on the grid conjugate to ``[-w_max, w_max)``.

    The bin width is ``2 w_max / n_samples`` and ``u`` is sampled with spacing
    ``pi / w_max``. Samples are multiplied by a Gaussian of width
    ``kernel_bins`` bins, which makes the truncated sum converge; the result
    is the work density smoothed at that resolution. With ``kernel_bins=0``
    the raw transform is returned (exact only when all atoms sit on bin
    centres).

    Raises
    ------
    NumericError
        "increase w_max" when the periodic reconstruction puts more than 1e-8
        of probability into the edge bins, or wraps mass around.
    """
    if n_samples < 1024 or n_samples & (n_samples - 1):
        raise ValueError(f"n_samples must be a power of two >= 1024, got {n_samples}")
    t = _table(setup, table)
    support = work_support(setup, t)
    if w_max is None:
        frac = 2.0 * _MARGIN_SIGMAS * kernel_bins / n_samples
        w_max = max(support, 1e-12) / (1.0 - frac)
    if not w_max > 0:
        raise ValueError("w_max must be positive")
    dw = 2.0 * w_max / n_samples
    sigma = kernel_bins * dw
    du = math.pi / w_max
    half = n_samples // 2

    logw, logz = gibbs_log_weights(t.eps0, t.dsin, setup.beta)
    p = np.exp(logw - logz[:, None])
    u_pos = np.arange(half + 1) * du
    chi_pos = kernels.chi_grid(
        u_pos, 2.0 * t.deps, 2.0 * (t.eps0 + t.epsf), p[:, 0], p[:, 3], p[:, 1] + p[:, 2], t.cos2, t.sin2
    )
    chi = np.empty(n_samples, dtype=complex)
    chi[half:] = chi_pos[:half]
    chi[:half] = np.conj(chi_pos[half:0:-1])
    u = (np.arange(n_samples) - half) * du
    a = chi * np.exp(-0.5 * (sigma * u) ** 2)
    dens = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a))).real / (2.0 * w_max)
    dens = np.clip(dens, 0.0, None)
    centers = (np.arange(n_samples) - half) * dw

    dist = WorkDistribution(
        values=centers,
        weights=dens,
        kind="histogram",
        bin_width=dw,
        kernel_sigma=sigma,
        meta={
            "method": "fft",
            "n_samples": n_samples,
            "w_max": w_max,
            "bin_width": dw,
            "du": du,
            "kernel": "gaussian",
            "kernel_sigma": sigma,
            "support": support,
        },
    )
    guard = max(1, int(math.ceil(_GUARD_SIGMAS * kernel_bins)))
    edge_mass = (dens[:guard].sum() + dens[-guard:].sum()) * dw
    if edge_mass > ALIAS_MASS_TOL:
        raise NumericError(f"edge-bin mass {edge_mass:.3g} exceeds {ALIAS_MASS_TOL:g}: increase w_max")
    mean_exact, var_exact = mean_and_variance(setup, t)
    if abs(dist.mean() - mean_exact) > 1e-6 * max(1.0, math.sqrt(var_exact), abs(mean_exact)):
        raise NumericError("reconstructed mean inconsistent with the work support (aliasing): increase w_max")
    return dist


def total_variation(p: WorkDistribution, q: WorkDistribution) -> float:
    """Total-variation distance ``(1/2) int |p - q|`` on the histogram grid of one argument.

    When one side is an atom list it is smoothed with the other's kernel and
    periodised the same way, so the result isolates reconstruction error.
    """
    if p.kind == "atoms" and q.kind == "histogram":
        p, q = q, p
    if p.kind != "histogram":
        raise ValueError("at least one distribution must be a histogram")
    if q.kind == "atoms":
        period = 2.0 * p.meta["w_max"] if "w_max" in p.meta else None
        other = q.smoothed(p.values, p.kernel_sigma, period)
    else:
        if q.values.shape != p.values.shape or not np.allclose(q.values, p.values):
            raise ValueError("histograms on different grids")
        other = q.weights
    return 0.5 * math.fsum(np.abs(p.weights - other)) * p.bin_width


# ---------------------------------------------------------------------------
# fluctuation theorems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CrooksReport:
    max_deviation: float
    n_checked: int
    missing: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.missing


def crooks_check(setup: QuenchSetup, floor: float = CROOKS_FLOOR, merge_tol: float = MERGE_TOL) -> CrooksReport:
    """Check ``ln P_F(W) - ln P_R(-W) = beta (W - Delta F)`` atom by atom.

    Every forward atom above ``floor`` must have a reverse partner at ``-W``;
    unmatched atoms are listed in ``missing``.
    """
    fwd = work_pdf_exact(setup, merge_tol)
    rev = work_pdf_exact(setup.reversed(), merge_tol)
    dF = delta_free_energy(setup)
    match_tol = 10.0 * merge_tol
    dev, checked, missing = 0.0, 0, []
    for w, lp, p in zip(fwd.values, fwd.log_weights, fwd.weights):
        if p <= floor:
            continue
        j = int(np.searchsorted(rev.values, -w))
        cand = [i for i in (j - 1, j) if 0 <= i < len(rev.values)]
        i = min(cand, key=lambda i: abs(rev.values[i] + w)) if cand else None
        if i is None or abs(rev.values[i] + w) > match_tol:
            missing.append(float(w))
            continue
        dev = max(dev, abs(lp - rev.log_weights[i] - setup.beta * (w - dF)))
        checked += 1
    return CrooksReport(max_deviation=dev, n_checked=checked, missing=tuple(missing))
