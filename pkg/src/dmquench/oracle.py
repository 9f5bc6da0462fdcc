"""Brute-force reference for single (k, -k) blocks.

Each block Hamiltonian is assembled as an explicit 4x4 matrix from two-mode
fermion operators and diagonalised numerically in extended precision. No
closed-form Bogoliubov angle is used to build anything here; the mode table
is consulted only when a result is compared against it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .model import QuenchSetup, build_mode_table, k_grid
from .thermo import STATES, grid_index

# Base working precision for the eigensolves, in decimal digits.
DPS = 40


def _precision(beta: float, k: float, gamma: float, D: float, *fields) -> int:
    """Digits needed so eigenvector round-off stays far below the smallest Gibbs weight."""
    scale = max(abs(h) + 1.0 + abs(gamma) + 2.0 * abs(D) for h in fields)
    return DPS + int(math.ceil(8.0 * beta * scale / math.log(10.0)))


def _fermion_ops():
    """Annihilators ``c_k``, ``c_-k`` on the basis |n_k n_-k> in ``STATES`` order."""
    basis = [(0, 0), (1, 0), (0, 1), (1, 1)]
    index = {b: i for i, b in enumerate(basis)}
    ops = []
    for mode in range(2):
        a = np.zeros((4, 4))
        for j, occ in enumerate(basis):
            if occ[mode] == 0:
                continue
            sign = (-1) ** sum(occ[:mode])
            new = list(occ)
            new[mode] = 0
            a[index[tuple(new)], j] = sign
        ops.append(a)
    return ops


_CK, _CMK = _fermion_ops()
_NK = _CK.T @ _CK
_NMK = _CMK.T @ _CMK
_ONE = np.eye(4)


@dataclass(frozen=True)
class BlockHamiltonian:
    """One (k, -k) block in the occupation basis, ``STATES`` order."""

    k: float
    h: float
    gamma: float
    D: float
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def build_block(k: float, h: float, gamma: float, D: float, phase: complex = 1.0) -> BlockHamiltonian:
    """Assemble the block Hamiltonian of the pair (k, -k).

    ``sum_{q=+-k} (h - cos k + 2 D sin q)(2 n_q - 1)`` plus the pairing
    ``-2 i gamma sin k c_k^+ c_-k^+ + h.c.``. The constant is chosen so the
    matrix is traceless, matching the block energies used for the Gibbs
    weights. ``phase`` multiplies the pairing amplitude (a gauge choice that
    leaves the spectrum unchanged).
    """
    if not 0.0 < k < math.pi:
        raise ValueError(f"k must lie in (0, pi), got {k!r}")
    m = _assemble(math.cos(k), math.sin(k), h, gamma, D, complex(phase), np.asarray)
    return BlockHamiltonian(k=float(k), h=float(h), gamma=float(gamma), D=float(D), matrix=np.asarray(m, dtype=complex))


def _assemble(cos_k, sin_k, h, gamma, D, phase, wrap):
    x = h - cos_k
    ds = D * sin_k
    pair = wrap(_CK.T @ _CMK.T) * (-2j * gamma * sin_k * phase)
    m = wrap(2.0 * _NK - _ONE) * (x + 2 * ds) + wrap(2.0 * _NMK - _ONE) * (x - 2 * ds)
    return m + pair + wrap((_CK.T @ _CMK.T).T) * (2j * gamma * sin_k * phase.conjugate())


def _mp_block(k: float, h: float, gamma: float, D: float):
    """The same block assembled in mpmath arithmetic.

    Assembling in floats would round ``(x + 2 D s) - (x - 2 D s)`` differently
    for the two fields and give the field-independent cross states a
    spurious work value of order 1e-16.
    """
    k = mpmath.mpf(k)
    m = _assemble(mpmath.cos(k), mpmath.sin(k), mpmath.mpf(h), mpmath.mpf(gamma), mpmath.mpf(D), mpmath.mpc(1), mpmath.matrix)
    return m


def _mp_eigh(a):
    e, q = mpmath.eighe(a)
    order = sorted(range(4), key=lambda i: e[i])
    return [e[i] for i in order], [[q[r, i] for r in range(4)] for i in order]


@dataclass(frozen=True)
class BruteForceStats:
    """Exhaustive two-point-measurement table for one block.

    ``transition[m, n] = |<m_f|n_0>|^2`` with eigenstates sorted by energy.
    ``values``/``probs`` hold all 16 (pre, post) outcomes. ``resolution``
    is the working precision times the block energy scale: differences from
    an exact value below it (``resolution * scale`` for the variance) are
    eigensolver noise, e.g. from rotations inside a degenerate eigenspace.
    """

    k: float
    mean: float
    variance: float
    values: np.ndarray
    probs: np.ndarray
    transition: np.ndarray
    e0: np.ndarray
    ef: np.ndarray
    resolution: float = 0.0
    scale: float = 1.0


def brute_force_work_stats(setup: QuenchSetup, k: float) -> BruteForceStats:
    """Work statistics of one block by explicit diagonalisation.

    The pre- and post-quench blocks are diagonalised independently; the
    initial state is Gibbs in the pre-quench eigenbasis. Everything runs in
    mpmath with enough digits that eigenvector round-off stays below the
    smallest Gibbs weight, so large ``beta`` loses no relative precision.
    """
    p = setup.params
    k = float(k_grid(p)[grid_index(p, k)])
    digits = _precision(setup.beta, k, p.gamma, p.D, setup.h0, setup.hf)
    scale = 2.0 * max(abs(h) + 1.0 + abs(p.gamma) + 2.0 * abs(p.D) for h in (setup.h0, setup.hf))
    with mpmath.workdps(digits):
        e0, v0 = _mp_eigh(_mp_block(k, setup.h0, p.gamma, p.D))
        ef, vf = _mp_eigh(_mp_block(k, setup.hf, p.gamma, p.D))
        beta = mpmath.mpf(setup.beta)
        logw = [-beta * e for e in e0]
        top = max(logw)
        weights = [mpmath.exp(lw - top) for lw in logw]
        z = mpmath.fsum(weights)
        weights = [w / z for w in weights]
        trans = [
            [abs(mpmath.fsum(mpmath.conj(vf[m][r]) * v0[n][r] for r in range(4))) ** 2 for n in range(4)]
            for m in range(4)
        ]
        values, probs = [], []
        for n in range(4):
            for m in range(4):
                values.append(ef[m] - e0[n])
                probs.append(weights[n] * trans[m][n])
        mean = mpmath.fsum(pr * w for pr, w in zip(probs, values))
        var = mpmath.fsum(pr * (w - mean) ** 2 for pr, w in zip(probs, values))
        return BruteForceStats(
            k=k,
            mean=float(mean),
            variance=float(var),
            values=np.array([float(v) for v in values]),
            probs=np.array([float(v) for v in probs]),
            transition=np.array([[float(t) for t in row] for row in trans]),
            e0=np.array([float(e) for e in e0]),
            ef=np.array([float(e) for e in ef]),
            resolution=10.0 ** (-digits) * scale,
            scale=scale,
        )


@dataclass(frozen=True)
class EigenstateMapReport:
    """Overlap check for one block; ``skipped`` is set when labels are ambiguous."""

    k: float
    max_deviation: float
    overlaps: np.ndarray | None
    skipped: bool = False
    reason: str = ""


def _label(vectors, energies, tol: float):
    """Map numerically obtained eigenvectors onto ``STATES`` labels.

    Pair-sector vectors (support on |00>, |11>) are ordered by energy, lower
    first; cross-sector vectors are named after their dominant component.
    Returns ``None`` and a reason if a vector straddles sectors or a
    degeneracy makes the assignment ambiguous.
    """
    pair, labels = [], [None] * 4
    for i, v in enumerate(vectors):
        w = [float(abs(c) ** 2) for c in v]
        wp = w[0] + w[3]
        if wp > 1.0 - tol:
            pair.append(i)
        elif wp < tol:
            if min(w[1], w[2]) > tol:
                return None, "degenerate cross sector"
            labels[i] = 1 if w[1] > w[2] else 2
        else:
            return None, "eigenvector mixes sectors"
    if len(pair) != 2:
        return None, "pair sector not resolved"
    lo, hi = sorted(pair, key=lambda i: energies[i])
    if float(energies[hi] - energies[lo]) < tol:
        return None, "degenerate pair sector"
    labels[lo], labels[hi] = 0, 3
    if sorted(labels) != [0, 1, 2, 3]:
        return None, "duplicate labels"
    return labels, ""


def block_overlaps(k: float, h0: float, hf: float, gamma: float, D: float, tol: float = 1e-9):
    """Overlaps ``|<m_f|n_0>|^2`` of one block at any ``k`` in (0, pi).

    Rows are post-quench states and columns pre-quench states, both in
    ``STATES`` order after labelling. Returns ``(overlaps, "")``, or
    ``(None, reason)`` when the labelling is ambiguous.
    """
    with mpmath.workdps(DPS):
        e0, v0 = _mp_eigh(_mp_block(k, h0, gamma, D))
        ef, vf = _mp_eigh(_mp_block(k, hf, gamma, D))
        lab0, why0 = _label(v0, e0, tol)
        labf, whyf = _label(vf, ef, tol)
        if lab0 is None or labf is None:
            return None, why0 or whyf
        ov = np.zeros((4, 4))
        for m in range(4):
            for n in range(4):
                amp = mpmath.fsum(mpmath.conj(vf[m][r]) * v0[n][r] for r in range(4))
                ov[labf[m], lab0[n]] = float(abs(amp) ** 2)
    return ov, ""


def verify_eigenstate_map(setup: QuenchSetup, k: float, branch: str = "atan2", tol: float = 1e-9) -> EigenstateMapReport:
    """Compare numerical overlaps ``|<m_f|n_0>|^2`` with the closed-form mixing pattern.

    The expected pattern has ``cos^2 theta`` on the diagonal of the pair
    sector, ``sin^2 theta`` off it, and the identity on the cross states,
    with ``theta`` taken from the mode table built with ``branch``.
    """
    p = setup.params
    i = grid_index(p, k)
    k = float(k_grid(p)[i])
    table = build_mode_table(setup, branch)
    c2, s2 = float(table.cos2[i]), float(table.sin2[i])
    ov, why = block_overlaps(k, setup.h0, setup.hf, p.gamma, p.D, tol)
    if ov is None:
        return EigenstateMapReport(k=k, max_deviation=0.0, overlaps=None, skipped=True, reason=why)
    expected = np.eye(4)
    expected[0, 0] = expected[3, 3] = c2
    expected[0, 3] = expected[3, 0] = s2
    return EigenstateMapReport(k=k, max_deviation=float(np.max(np.abs(ov - expected))), overlaps=ov)


def char_fn_verbatim(setup: QuenchSetup, u: complex) -> complex:
    """Characteristic function as a plain product of four-term mode brackets.

    Uses unscaled exponentials and ``Z(h0) = 2^L prod_k cosh(beta zeta_k)``
    over all wave vectors, so it overflows at large ``beta`` or ``L``; it is
    meant only as a literal cross-check at small ``beta``.
    """
    t = build_mode_table(setup)
    b = setup.beta
    prod = 1.0 + 0.0j
    z = 2.0 ** setup.params.L
    for e0, ef, c2, s2, ds in zip(t.eps0, t.epsf, t.cos2, t.sin2, t.dsin):
        e0, ef, c2, s2, ds = float(e0), float(ef), float(c2), float(s2), float(ds)
        bracket = (
            cmath.exp(2 * (1j * u + b) * e0) * (cmath.exp(-2j * u * ef) * c2 + cmath.exp(2j * u * ef) * s2)
            + cmath.exp(-2 * (1j * u + b) * e0) * (cmath.exp(-2j * u * ef) * s2 + cmath.exp(2j * u * ef) * c2)
            + cmath.exp(4 * ds * (1j * u + b)) * cmath.exp(-4j * u * ds)
            + cmath.exp(-4 * ds * (1j * u + b)) * cmath.exp(4j * u * ds)
        )
        prod *= bracket
        z *= math.cosh(b * (e0 + 2 * ds)) * math.cosh(b * (e0 - 2 * ds))
    return prod / z


__all__ = [
    "STATES",
    "BlockHamiltonian",
    "BruteForceStats",
    "EigenstateMapReport",
    "brute_force_work_stats",
    "block_overlaps",
    "build_block",
    "char_fn_verbatim",
    "verify_eigenstate_map",
]
