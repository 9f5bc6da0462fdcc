"""Self-verification suites behind ``dmquench verify``.

Each suite draws its random setups from a generator seeded by
``(seed, suite index)``, so reports are reproducible and independent of how
many worker processes run the suites.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .entropy import extensivity_check, irr_entropy
from .model import ModelParams, QuenchSetup, build_mode_table, k_grid
from .oracle import brute_force_work_stats, verify_eigenstate_map
from .work import crooks_check, jarzynski_log_residual, mode_moments

JARZYNSKI_TOL = 1e-10
CROOKS_TOL = 1e-9
ROUTE_TOL = 1e-9
ORACLE_TOL = 1e-12
ORACLE_TOL_COLD = 1e-9
MAP_TOL = 1e-10
EXTENSIVITY_TOL = 1e-4


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    metric: float
    tolerance: float
    n: int
    note: str = ""


def random_small_setup(rng: np.random.Generator, L_max: int = 16) -> QuenchSetup:
    """Random setup with even ``L <= L_max``, ``beta`` log-uniform on [0.01, 100]."""
    L = 2 * int(rng.integers(1, L_max // 2 + 1))
    params = ModelParams(L, float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
    beta = float(10.0 ** rng.uniform(-2, 2))
    return QuenchSetup(params, float(rng.uniform(0, 2.5)), float(rng.uniform(0, 2.5)), beta)


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / abs(b) if b != 0 else math.inf


def suite_jarzynski(rng, n=200, **_):
    worst = max(jarzynski_log_residual(random_small_setup(rng)) for _ in range(n))
    return SuiteResult("jarzynski", worst <= JARZYNSKI_TOL, worst, JARZYNSKI_TOL, n)


def suite_crooks(rng, n=200, **_):
    worst, missing = 0.0, 0
    for _ in range(n):
        r = crooks_check(random_small_setup(rng))
        worst = max(worst, r.max_deviation)
        missing += len(r.missing)
    ok = worst <= CROOKS_TOL and missing == 0
    return SuiteResult("crooks", ok, worst, CROOKS_TOL, n, f"unmatched atoms: {missing}")


def suite_route_equality(rng, n=100, **_):
    worst, negative = 0.0, 0
    for _ in range(n):
        params = ModelParams(
            int(rng.choice([2, 8, 64, 500])), float(rng.choice([0.1, 0.5, 0.8])), float(rng.uniform(0, 1))
        )
        setup = QuenchSetup(params, float(rng.uniform(0, 2)), float(rng.uniform(0, 2)), float(rng.choice([0.1, 1, 5, 100])))
        rep = irr_entropy(setup)
        worst = max(worst, rep.route_gap / max(1.0, rep.s_irr))
        negative += rep.s_irr < -1e-12
    return SuiteResult("route_equality", worst <= ROUTE_TOL and not negative, worst, ROUTE_TOL, n, f"negative: {negative}")


def _oracle_draw(rng, beta):
    L = 2 * int(rng.integers(1, 33))
    params = ModelParams(L, float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
    setup = QuenchSetup(params, float(rng.uniform(0, 2.5)), float(rng.uniform(0, 2.5)), beta)
    return setup, int(rng.integers(L // 2))


def oracle_mode_error(setup: QuenchSetup, i: int, branch: str = "atan2") -> float:
    """Worst relative error of closed-form mode mean/variance against the brute-force block."""
    k = k_grid(setup.params)[i]
    ref = brute_force_work_stats(setup, k)
    mean, var, _ = mode_moments(setup, build_mode_table(setup, branch))
    errs = []
    for got, want, floor in ((float(mean[i]), ref.mean, ref.resolution), (float(var[i]), ref.variance, ref.resolution * ref.scale)):
        # both sides below the oracle's resolution agree to the oracle's precision
        errs.append(0.0 if abs(got - want) <= floor and abs(want) <= floor else _rel(got, want))
    return max(errs)


def suite_oracle(rng, n=1000, n_cold=100, branch="atan2", **_):
    warm = max(oracle_mode_error(*_oracle_draw(rng, float(rng.uniform(0.01, 5))), branch=branch) for _ in range(n))
    cold = max(oracle_mode_error(*_oracle_draw(rng, 100.0), branch=branch) for _ in range(n_cold))
    ok = warm <= ORACLE_TOL and cold <= ORACLE_TOL_COLD
    return SuiteResult("oracle_equivalence", ok, max(warm, cold), ORACLE_TOL, n + n_cold, f"beta<=5: {warm:.3g}; beta=100: {cold:.3g}")


def suite_eigenstate_map(rng, n=200, branch="atan2", **_):
    worst, skipped = 0.0, 0
    for _ in range(n):
        setup, i = _oracle_draw(rng, 1.0)
        r = verify_eigenstate_map(setup, k_grid(setup.params)[i], branch)
        skipped += r.skipped
        worst = max(worst, r.max_deviation)
    return SuiteResult("eigenstate_map", worst <= MAP_TOL, worst, MAP_TOL, n, f"skipped: {skipped}")


# Quenches crossing h = cos k, where a single-argument arctangent picks the wrong branch.
BRANCH_GUARD_SETUPS = (
    QuenchSetup(ModelParams(12, 0.5, 0.3), 0.2, 1.5, 1.0),
    QuenchSetup(ModelParams(16, 0.8, 0.1), 0.0, 0.9, 5.0),
    QuenchSetup(ModelParams(8, -0.4, 0.6), 1.2, 0.3, 0.5),
)


def suite_branch_guard(rng=None, branch="atan2", **_):
    worst_map, worst_oracle, n = 0.0, 0.0, 0
    for setup in BRANCH_GUARD_SETUPS:
        for i, k in enumerate(k_grid(setup.params)):
            worst_map = max(worst_map, verify_eigenstate_map(setup, k, branch).max_deviation)
            worst_oracle = max(worst_oracle, oracle_mode_error(setup, i, branch))
            n += 1
    ok = worst_map <= MAP_TOL and worst_oracle <= ORACLE_TOL
    return SuiteResult(
        "branch_guard", ok, max(worst_map, worst_oracle), MAP_TOL, n,
        f"branch={branch}; map: {worst_map:.3g}; oracle: {worst_oracle:.3g}",
    )


def suite_extensivity(rng=None, **_):
    vals = extensivity_check(ModelParams(1000, 0.5, 0.6), 0.5, 0.51, 100.0, [1000, 2000, 4000])
    worst = max(_rel(a, b) for a in vals for b in vals)
    return SuiteResult("extensivity", worst <= EXTENSIVITY_TOL, worst, EXTENSIVITY_TOL, len(vals))


SUITES = (
    suite_jarzynski,
    suite_crooks,
    suite_route_equality,
    suite_oracle,
    suite_eigenstate_map,
    suite_branch_guard,
    suite_extensivity,
)


def _run_one(args):
    index, seed, branch = args
    rng = np.random.default_rng([seed, index])
    return SUITES[index](rng, branch=branch)


def run_suites(seed: int = 0, branch: str = "atan2", workers: int = 1) -> list[SuiteResult]:
    """Run every suite; ``branch="naive"`` injects the single-argument arctangent."""
    jobs = [(i, seed, branch) for i in range(len(SUITES))]
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_one, jobs))


def summary_json(results: list[SuiteResult], seed: int, branch: str) -> str:
    payload = {
        "seed": seed,
        "branch": branch,
        "passed": all(r.passed for r in results),
        "suites": [asdict(r) for r in results],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def summary_table(results: list[SuiteResult]) -> str:
    lines = [f"{'suite':<20} {'status':<6} {'metric':>12} {'tol':>9} {'n':>6}  note"]
    for r in results:
        lines.append(f"{r.name:<20} {'PASS' if r.passed else 'FAIL':<6} {r.metric:>12.3e} {r.tolerance:>9.1e} {r.n:>6}  {r.note}")
    return "\n".join(lines) + "\n"
