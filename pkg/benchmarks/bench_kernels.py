"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--L 20000] [--samples 4096] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from dmquench import _pykernels
from dmquench.model import ModelParams, QuenchSetup, build_mode_table
from dmquench.thermo import gibbs_log_weights

try:
    from dmquench import _ckernels
except ImportError:
    _ckernels = None


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=20000)
    ap.add_argument("--samples", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    setup = QuenchSetup(ModelParams(args.L, 0.5, 0.6), 0.8, 0.81, 5.0)
    t = build_mode_table(setup)
    obs = [np.ascontiguousarray(a) for a in (t.eps0, t.epsf, t.deps, t.cphi0, t.sphi0, t.dsin)]
    logw, logz = gibbs_log_weights(t.eps0, t.dsin, setup.beta)
    p = np.exp(logw - logz[:, None])
    chi = [np.ascontiguousarray(a) for a in (2 * t.deps, 2 * (t.eps0 + t.epsf), p[:, 0], p[:, 3], p[:, 1] + p[:, 2], t.cos2, t.sin2)]
    u = np.linspace(-2.0, 2.0, args.samples)

    cases = {
        "mode_observables": lambda mod: mod.mode_observables(*obs, setup.h0 - setup.hf, setup.beta),
        "chi_grid": lambda mod: mod.chi_grid(u, *chi),
    }
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"L={args.L} modes={len(t)} samples={args.samples} best of {args.repeat}")
    print(f"{'kernel':<18} {'backend':<8} {'seconds':>10} {'speedup':>8}")
    for name, fn in cases.items():
        base = None
        for label, mod in backends:
            best = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            base = base or best
            print(f"{name:<18} {label:<8} {best:>10.4f} {base / best:>7.1f}x")


if __name__ == "__main__":
    main()
