"""Parameter sweeps over (D, h0), CSV output and critical-point scans."""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .entropy import entropy_production
from .errors import ConfigError
from .model import ModelParams, QuenchSetup, build_mode_table
from .thermo import delta_free_energy
from .work import mean_and_variance

BASE_COLUMNS = ("h0", "hf", "D", "gamma", "beta", "L", "mean_work", "variance", "s_irr")
DERIVATIVE_COLUMNS = ("d_mean_dh0", "d_var_dh0")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def parse_grid(text, key: str) -> np.ndarray:
    """Parse a scalar or a ``min:max:steps`` grid into a 1-d array.

    Raises
    ------
    ConfigError
        Naming ``key`` when the grid text is malformed, empty or not increasing.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return np.array([float(text)])
    s = str(text).strip()
    parts = s.split(":")
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ValueError
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(key, f"expected a number or min:max:steps, got {s!r}") from None
    if steps < 1:
        raise ConfigError(key, f"grid {s!r} is empty")
    if steps == 1:
        if lo != hi:
            raise ConfigError(key, f"a one-point grid needs min == max, got {s!r}")
        return np.array([lo])
    if not hi > lo:
        raise ConfigError(key, f"grid {s!r} is not increasing")
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(key, f"grid {s!r} has non-finite bounds")
    return np.linspace(lo, hi, steps)


def _parse_bool(value, key):
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {value!r}")


@dataclass
class SweepConfig:
    """Effective configuration of a sweep, critical scan or pdf run.

    ``D`` and ``h0`` hold the raw grid specs; use :meth:`grid` to expand them.
    """

    gamma: float = 0.5
    beta: float = 100.0
    L: int = 2000
    dh: float = 0.01
    D: str = "0"
    h0: str = "0:2:401"
    workers: int = 0
    delta_f: bool = False
    out: str = "-"
    method: str = "auto"
    samples: int = 2**16
    wmax: float | None = None
    verbose: bool = False
    seed: int = 0

    def grid(self, key: str) -> np.ndarray:
        return parse_grid(getattr(self, key), key)

    def validate(self) -> "SweepConfig":
        if not -1.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma", f"must lie in [-1, 1], got {self.gamma}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ConfigError("beta", f"must be positive, got {self.beta}")
        if self.L < 2 or self.L % 2:
            raise ConfigError("L", f"must be an even integer >= 2, got {self.L}")
        if not math.isfinite(self.dh):
            raise ConfigError("dh", "must be finite")
        if self.workers < 0:
            raise ConfigError("workers", f"must be >= 0, got {self.workers}")
        if self.method not in ("auto", "exact", "fft"):
            raise ConfigError("method", f"expected auto, exact or fft, got {self.method!r}")
        self.grid("D")
        self.grid("h0")
        return self

    def items(self):
        """Effective key/value pairs in declaration order, for output headers."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    @property
    def n_workers(self) -> int:
        return self.workers or os.cpu_count() or 1


def _cast(key: str, value):
    kinds = {f.name: f.type for f in fields(SweepConfig)}
    if key not in kinds:
        raise ConfigError(key, "unknown configuration key")
    kind = kinds[key]
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if kind == "bool":
            return _parse_bool(value, key)
        if kind == "float | None":
            return None if value in (None, "", "none", "None") else float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"cannot parse {value!r} as {kind}") from None


def read_config_file(path: str) -> dict:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}", f"expected key = value, got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def make_config(defaults: dict | None = None, file_values: dict | None = None, overrides: dict | None = None) -> SweepConfig:
    """Merge defaults, config-file values and flag overrides (flags win), then validate."""
    merged = {}
    for layer in (defaults or {}, file_values or {}, overrides or {}):
        for key, value in layer.items():
            if value is not None:
                merged[key] = _cast(key, value)
    return SweepConfig(**merged).validate()


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    h0: float
    hf: float
    D: float
    gamma: float
    beta: float
    L: int
    mean_work: float
    variance: float
    s_irr: float
    d_mean_dh0: float | None = None
    d_var_dh0: float | None = None
    delta_F: float | None = None


def point_observables(params: ModelParams, h0: float, dh: float, beta: float, with_delta_f: bool = False):
    """``(mean, variance, s_irr, delta_F or None)`` at one grid point."""
    setup = QuenchSetup(params, h0, h0 + dh, beta)
    table = build_mode_table(setup)
    mean, var = mean_and_variance(setup, table)
    s_irr = entropy_production(setup, table)
    dF = delta_free_energy(setup) if with_delta_f else None
    return mean, var, s_irr, dF


def central_differences(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``(y[i+1] - y[i-1]) / (x[i+1] - x[i-1])`` for interior points, NaN at the ends."""
    d = np.full(len(x), np.nan)
    if len(x) >= 3:
        d[1:-1] = (y[2:] - y[:-2]) / (x[2:] - x[:-2])
    return d


def _line(args) -> list[SweepRow]:
    gamma, D, L, h0s, dh, beta, with_df = args
    params = ModelParams(L, gamma, D)
    vals = [point_observables(params, h0, dh, beta, with_df) for h0 in h0s]
    mean = np.array([v[0] for v in vals])
    var = np.array([v[1] for v in vals])
    dm = central_differences(h0s, mean)
    dv = central_differences(h0s, var)
    rows = []
    for i, h0 in enumerate(h0s):
        interior = 0 < i < len(h0s) - 1
        rows.append(
            SweepRow(
                h0=float(h0), hf=float(h0 + dh), D=float(D), gamma=gamma, beta=beta, L=L,
                mean_work=vals[i][0], variance=vals[i][1], s_irr=vals[i][2],
                d_mean_dh0=float(dm[i]) if interior else None,
                d_var_dh0=float(dv[i]) if interior else None,
                delta_F=vals[i][3],
            )
        )
    return rows


def _run_lines(cfg: SweepConfig, with_df: bool) -> list[list[SweepRow]]:
    h0s = cfg.grid("h0")
    jobs = [(cfg.gamma, float(D), cfg.L, h0s, cfg.dh, cfg.beta, with_df) for D in cfg.grid("D")]
    n = min(cfg.n_workers, len(jobs))
    if n <= 1:
        return [_line(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        # map preserves submission order, so output is independent of n.
        return list(pool.map(_line, jobs))


def sweep(cfg: SweepConfig) -> list[SweepRow]:
    """Evaluate every (D, h0) grid point, D outer and h0 inner.

    Derivative columns are filled for interior h0 points when the h0 grid has
    at least three points.
    """
    return [row for line in _run_lines(cfg, cfg.delta_f) for row in line]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


# Settings that cannot change any emitted number; left out of headers so
# output bytes do not depend on them.
_NOT_ECHOED = ("workers",)


def header_lines(cfg: SweepConfig, extra: dict | None = None) -> list[str]:
    lines = [f"#{k}={v}" for k, v in cfg.items() if k not in _NOT_ECHOED]
    lines += [f"#{k}={v}" for k, v in (extra or {}).items()]
    return lines


def sweep_columns(cfg: SweepConfig) -> tuple[str, ...]:
    cols = BASE_COLUMNS
    if len(cfg.grid("h0")) >= 3:
        cols = cols + DERIVATIVE_COLUMNS
    if cfg.delta_f:
        cols = cols + ("delta_F",)
    return cols


def rows_to_csv(cfg: SweepConfig, rows: list[SweepRow]) -> str:
    """Render rows with the effective config as ``#key=value`` comment lines."""
    cols = sweep_columns(cfg)
    buf = io.StringIO(newline="")
    for line in header_lines(cfg):
        buf.write(line + "\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(getattr(r, c)) for c in cols) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# critical-point scan
# ---------------------------------------------------------------------------


def theory_critical_field(D: float, gamma: float) -> float:
    """1 for ``|D| < |gamma|/2``, otherwise ``sqrt(4 D^2 - gamma^2 + 1)``."""
    if abs(D) < abs(gamma) / 2:
        return 1.0
    return math.sqrt(4.0 * D * D - gamma * gamma + 1.0)


@dataclass(frozen=True)
class Minimum:
    """A strict local minimum of a derivative curve, refined by a parabola."""

    h0: float
    value: float
    grid_h0: float


def _parabola_vertex(x, y):
    """Vertex of the parabola through three points; falls back to the middle point."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if not a > 0:
        return x1, y1
    xv = -b / (2.0 * a)
    c = y1 - a * x1 * x1 - b * x1
    return xv, a * xv * xv + b * xv + c


def local_minima(x: np.ndarray, y: np.ndarray) -> list[Minimum]:
    """Strict interior local minima of ``y(x)`` ranked by depth, deepest first.

    NaN entries (the ends of a central-difference curve) are ignored.
    """
    ok = np.flatnonzero(np.isfinite(y))
    xs, ys = x[ok], y[ok]
    found = []
    for i in range(1, len(xs) - 1):
        if ys[i] < ys[i - 1] and ys[i] < ys[i + 1]:
            xv, yv = _parabola_vertex(xs[i - 1:i + 2], ys[i - 1:i + 2])
            found.append(Minimum(h0=float(xv), value=float(yv), grid_h0=float(xs[i])))
    return sorted(found, key=lambda m: m.value)


@dataclass(frozen=True)
class CriticalEstimate:
    """Derivative-minimum locations for one DM strength.

    ``h_star_mean``/``h_star_var`` are the deepest minima of d<W>/dh0 and
    dSigma^2/dh0, or ``None`` when the scanned interval contains none.
    """

    D: float
    h_star_mean: float | None
    h_star_var: float | None
    h_theory: float
    minima_mean: tuple = field(default=(), repr=False)
    minima_var: tuple = field(default=(), repr=False)

    @property
    def flags(self) -> list[str]:
        out = ["parabola_refined"]
        if len(self.minima_mean) > 1 or len(self.minima_var) > 1:
            out.append("multiple_minima_ranked_by_depth")
        if self.h_star_mean is None or self.h_star_var is None:
            out.append("minimum_absent")
        return out


def critical_scan(cfg: SweepConfig) -> list[CriticalEstimate]:
    """Locate minima of d<W>/dh0 and dSigma^2/dh0 over the h0 grid for each D.

    Raises
    ------
    ConfigError
        If the h0 grid has fewer than five points, which leaves no room for
        an interior minimum with a neighbour on each side.
    """
    h0s = cfg.grid("h0")
    if len(h0s) < 5:
        raise ConfigError("h0", "critical scan needs an h0 grid with at least 5 points")
    out = []
    for line in _run_lines(cfg, False):
        D = line[0].D
        dm = np.array([np.nan if r.d_mean_dh0 is None else r.d_mean_dh0 for r in line])
        dv = np.array([np.nan if r.d_var_dh0 is None else r.d_var_dh0 for r in line])
        mm, mv = local_minima(h0s, dm), local_minima(h0s, dv)
        out.append(
            CriticalEstimate(
                D=D,
                h_star_mean=mm[0].h0 if mm else None,
                h_star_var=mv[0].h0 if mv else None,
                h_theory=theory_critical_field(D, cfg.gamma),
                minima_mean=tuple(mm),
                minima_var=tuple(mv),
            )
        )
    return out


def critical_to_csv(cfg: SweepConfig, estimates: list[CriticalEstimate]) -> str:
    buf = io.StringIO(newline="")
    flags = sorted({f for e in estimates for f in e.flags})
    for line in header_lines(cfg, {"flags": ";".join(flags)}):
        buf.write(line + "\n")
    if cfg.verbose:
        buf.write("D,h_theory,observable,rank,h0,grid_h0,derivative\n")
        for e in estimates:
            for name, mins in (("mean", e.minima_mean), ("var", e.minima_var)):
                for rank, m in enumerate(mins):
                    buf.write(",".join([_fmt(e.D), _fmt(e.h_theory), name, str(rank), _fmt(m.h0), _fmt(m.grid_h0), _fmt(m.value)]) + "\n")
        return buf.getvalue()
    buf.write("D,h_theory,h_star_mean,h_star_var,n_minima_mean,n_minima_var\n")
    for e in estimates:
        buf.write(
            ",".join([_fmt(e.D), _fmt(e.h_theory), _fmt(e.h_star_mean), _fmt(e.h_star_var), str(len(e.minima_mean)), str(len(e.minima_var))])
            + "\n"
        )
    return buf.getvalue()
