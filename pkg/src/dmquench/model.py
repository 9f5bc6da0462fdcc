"""Chain parameters, the wave-vector grid and single-mode spectral quantities.

Energies are in units of the exchange coupling; hbar = k_B = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GaplessModeError

BRANCHES = ("atan2", "naive")


@dataclass(frozen=True)
class ModelParams:
    """Static description of the chain: size ``L``, anisotropy ``gamma``, DM strength ``D``."""

    L: int
    gamma: float
    D: float

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L:
            raise ValueError(f"L must be an integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.L < 2 or self.L % 2:
            raise ValueError(f"L must be an even integer >= 2, got {self.L}")
        if not -1.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if not np.isfinite(self.D):
            raise ValueError(f"D must be finite, got {self.D}")

    def with_size(self, L: int) -> "ModelParams":
        return replace(self, L=L)


@dataclass(frozen=True)
class QuenchSetup:
    """A sudden quench h0 -> hf of a thermal chain at inverse temperature ``beta``."""

    params: ModelParams
    h0: float
    hf: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not (np.isfinite(self.h0) and np.isfinite(self.hf)):
            raise ValueError("fields must be finite")

    @property
    def dh(self) -> float:
        return self.hf - self.h0

    def reversed(self) -> "QuenchSetup":
        """The backward protocol hf -> h0 at the same temperature."""
        return replace(self, h0=self.hf, hf=self.h0)


def k_grid(params: ModelParams) -> np.ndarray:
    """Positive antiperiodic wave vectors ``(2n - 1) pi / L`` for ``n = 1 .. L/2``."""
    n = np.arange(1, params.L // 2 + 1)
    return (2 * n - 1) * np.pi / params.L


def epsilon(k, h, gamma):
    """Single-particle energy ``sqrt((h - cos k)^2 + gamma^2 sin^2 k)``."""
    return np.hypot(h - np.cos(k), gamma * np.sin(k))


def zeta(k, h, gamma, D):
    """Quasiparticle energy including the DM shift, ``epsilon + 2 D sin k``; negative in the gapless phase."""
    return epsilon(k, h, gamma) + 2.0 * D * np.sin(k)


def bogoliubov_angle(k, h, gamma, branch: str = "atan2"):
    """Angle phi with ``eps cos(phi) = h - cos k`` and ``eps sin(phi) = gamma sin k``.

    ``branch="naive"`` uses the single-argument arctangent, which is off by
    pi whenever ``h < cos k``. It exists only as a negative control for the
    verification suite.

    Raises
    ------
    GaplessModeError
        If both ``h - cos k`` and ``gamma sin k`` vanish.
    """
    x = np.asarray(h - np.cos(k), dtype=float)
    y = np.asarray(gamma * np.sin(k), dtype=float)
    x, y = np.broadcast_arrays(x, y)
    if np.any((x == 0.0) & (y == 0.0)):
        raise GaplessModeError("gapless mode: h == cos k and gamma sin k == 0")
    if branch == "atan2":
        phi = np.arctan2(y, x)
        phi = np.where(phi == -np.pi, np.pi, phi)
    elif branch == "naive":
        with np.errstate(divide="ignore"):
            phi = np.arctan(y / x)
    else:
        raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCHES}")
    return phi[()] if phi.ndim == 0 else phi


def bogoliubov_cos_sin(k, h, gamma, branch: str = "atan2"):
    """``(cos phi, sin phi)`` for the angle returned by :func:`bogoliubov_angle`.

    Evaluated as ratios of the rotation vector rather than through the angle,
    so they keep full relative precision near ``cos phi = 0``.
    """
    x = np.asarray(h - np.cos(k), dtype=float)
    y = np.asarray(gamma * np.sin(k), dtype=float)
    eps = np.hypot(x, y)
    if np.any(eps == 0.0):
        raise GaplessModeError("gapless mode: h == cos k and gamma sin k == 0")
    if branch == "atan2":
        return x / eps, y / eps
    if branch == "naive":
        sign = np.where(x < 0, -1.0, 1.0)
        return sign * x / eps, sign * y / eps
    raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCHES}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModeTable:
    """Per-mode cache of pre- and post-quench spectral data, one entry per positive k.

    ``theta`` is half the difference of the post- and pre-quench Bogoliubov angles.
    ``cphi0``/``sphi0`` are cos/sin of ``phi0``; ``cos2``/``sin2`` are
    ``cos^2 theta``/``sin^2 theta``.
    """

    setup: QuenchSetup
    k: np.ndarray
    eps0: np.ndarray
    epsf: np.ndarray
    zeta0: np.ndarray
    zetaf: np.ndarray
    phi0: np.ndarray
    phif: np.ndarray
    theta: np.ndarray
    dsin: np.ndarray
    cphi0: np.ndarray
    sphi0: np.ndarray
    branch: str = "atan2"
    cos2: np.ndarray = field(init=False, repr=False)
    sin2: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cos2", _frozen(np.cos(self.theta) ** 2))
        object.__setattr__(self, "sin2", _frozen(np.sin(self.theta) ** 2))

    def __len__(self):
        return len(self.k)

    @property
    def deps(self) -> np.ndarray:
        """``eps0 - epsf`` evaluated without cancellation."""
        s = self.setup
        c = np.cos(self.k)
        return (s.h0 - s.hf) * ((s.h0 - c) + (s.hf - c)) / (self.eps0 + self.epsf)


def build_mode_table(setup: QuenchSetup, branch: str = "atan2") -> ModeTable:
    """Tabulate every single-mode quantity for ``setup`` on the positive k grid."""
    p = setup.params
    k = k_grid(p)
    eps0 = epsilon(k, setup.h0, p.gamma)
    epsf = epsilon(k, setup.hf, p.gamma)
    phi0 = bogoliubov_angle(k, setup.h0, p.gamma, branch)
    phif = bogoliubov_angle(k, setup.hf, p.gamma, branch)
    dsin = p.D * np.sin(k)
    cphi0, sphi0 = bogoliubov_cos_sin(k, setup.h0, p.gamma, branch)
    dphi = phif - phi0
    y = p.gamma * np.sin(k)
    if branch == "atan2":
        # Both angles share the sign of y, so the principal difference is exact;
        # this form avoids cancellation when hf is close to h0.
        c = np.cos(k)
        exact = np.arctan2(y * (setup.h0 - setup.hf), (setup.h0 - c) * (setup.hf - c) + y * y)
        # Stored angles that round onto -pi are mapped to +pi; keep the same
        # 2 pi branch as their plain difference (theta shifts by pi, which
        # leaves every physical quantity unchanged).
        exact = exact + 2.0 * np.pi * np.round((dphi - exact) / (2.0 * np.pi))
        dphi = np.where(y != 0.0, exact, dphi)
    return ModeTable(
        setup=setup,
        k=_frozen(k),
        eps0=_frozen(eps0),
        epsf=_frozen(epsf),
        zeta0=_frozen(eps0 + 2.0 * dsin),
        zetaf=_frozen(epsf + 2.0 * dsin),
        phi0=_frozen(phi0),
        phif=_frozen(phif),
        theta=_frozen(0.5 * dphi),
        dsin=_frozen(dsin),
        cphi0=_frozen(cphi0),
        sphi0=_frozen(sphi0),
        branch=branch,
    )
