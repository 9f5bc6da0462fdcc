"""Command-line entry point: ``dmquench {sweep,critical,pdf,verify}``.

Exit status: 0 success, 1 verification failure, 2 configuration error,
3 numeric error (overflow, aliasing, gapless mode).
"""

from __future__ import annotations

import argparse
import hashlib
import io
import sys

from .errors import ConfigError, GaplessModeError, NumericError, SizeLimitError
from .model import ModelParams, QuenchSetup
from .sweep import (
    SweepConfig,
    critical_scan,
    critical_to_csv,
    header_lines,
    make_config,
    read_config_file,
    rows_to_csv,
    sweep,
)
from .verify import run_suites, summary_json, summary_table
from .work import L_EXACT_MAX, work_pdf_exact, work_pdf_fft

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "sweep": {"h0": "0:2:401", "D": "0"},
    "critical": {"h0": "0.5:2.0:301", "D": "0.30:1.00:15"},
    "pdf": {"L": 8, "beta": 5.0, "h0": "0.5", "D": "0.3"},
    "verify": {},
}


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("model and run options")
    g.add_argument("--gamma", help="anisotropy, in [-1, 1]")
    g.add_argument("--beta", help="inverse temperature")
    g.add_argument("--L", help="chain length (even)")
    g.add_argument("--dh", help="quench amplitude hf - h0")
    g.add_argument("--D", help="DM strength: a number or min:max:steps")
    g.add_argument("--h0", help="initial field: a number or min:max:steps")
    g.add_argument("--out", help="output path, '-' for stdout")
    g.add_argument("--workers", help="worker processes (0 = all cores)")
    g.add_argument("--config", help="flat key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmquench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="observables on a (D, h0) grid as CSV")
    _common(p)
    p.add_argument("--delta-f", dest="delta_f", action="store_const", const=True, help="add a delta_F column")

    p = sub.add_parser("critical", help="derivative minima over h0 for each D")
    _common(p)
    p.add_argument("--verbose", action="store_const", const=True, help="list every minimum found")

    p = sub.add_parser("pdf", help="work distribution at a single point")
    _common(p)
    p.add_argument("--method", choices=("auto", "exact", "fft"))
    p.add_argument("--samples", help="FFT length (power of two)")
    p.add_argument("--wmax", help="FFT half-window in work units")

    p = sub.add_parser("verify", help="run the verification suites")
    _common(p)
    p.add_argument("--seed", help="seed for the random setups")
    p.add_argument("--inject-naive-arctan", action="store_true", help="negative control: use the single-argument arctangent")
    p.add_argument("--json", dest="json_path", help="also write a JSON summary to this path ('-' for stdout)")
    return parser


_NON_CONFIG = {"command", "config", "inject_naive_arctan", "json_path"}


def _config(args: argparse.Namespace) -> SweepConfig:
    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    file_values = read_config_file(args.config) if args.config else None
    return make_config(DEFAULTS[args.command], file_values, overrides)


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _single_point(cfg: SweepConfig) -> QuenchSetup:
    D, h0 = cfg.grid("D"), cfg.grid("h0")
    if len(D) != 1:
        raise ConfigError("D", "pdf needs a single value")
    if len(h0) != 1:
        raise ConfigError("h0", "pdf needs a single value")
    return QuenchSetup(ModelParams(cfg.L, cfg.gamma, float(D[0])), float(h0[0]), float(h0[0]) + cfg.dh, cfg.beta)


def pdf_csv(cfg: SweepConfig) -> str:
    """Work distribution as CSV with a metadata header."""
    setup = _single_point(cfg)
    method = cfg.method
    if method == "auto":
        method = "exact" if cfg.L <= L_EXACT_MAX else "fft"
    if method == "exact":
        if cfg.L > L_EXACT_MAX:
            raise SizeLimitError(f"exact method limited to L <= {L_EXACT_MAX} (got L={cfg.L}); use --method fft")
        dist = work_pdf_exact(setup)
        cols = ("work", "probability")
        grid = {"n_atoms": len(dist.values)}
    else:
        dist = work_pdf_fft(setup, n_samples=cfg.samples, w_max=cfg.wmax)
        cols = ("work", "density")
        grid = {"n_samples": cfg.samples, "bin_width": format(dist.bin_width, ".17g"), "kernel_sigma": format(dist.kernel_sigma, ".17g")}
        grid.update({k: format(v, ".17g") if isinstance(v, float) else v for k, v in sorted(dist.meta.items()) if k != "method"})
    inputs = "\n".join(f"{k}={v}" for k, v in cfg.items() if k != "workers")
    extra = {"resolved_method": method, **grid, "input_sha256": hashlib.sha256(inputs.encode()).hexdigest()}
    buf = io.StringIO(newline="")
    for line in header_lines(cfg, extra):
        buf.write(line + "\n")
    buf.write(",".join(cols) + "\n")
    for w, p in zip(dist.values, dist.weights):
        buf.write(f"{format(float(w), '.17g')},{format(float(p), '.17g')}\n")
    return buf.getvalue()


def _run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.command == "sweep":
        _emit(rows_to_csv(cfg, sweep(cfg)), cfg.out)
    elif args.command == "critical":
        _emit(critical_to_csv(cfg, critical_scan(cfg)), cfg.out)
    elif args.command == "pdf":
        _emit(pdf_csv(cfg), cfg.out)
    else:
        branch = "naive" if args.inject_naive_arctan else "atan2"
        results = run_suites(cfg.seed, branch, workers=cfg.n_workers)
        _emit(summary_table(results), cfg.out)
        if args.json_path:
            _emit(summary_json(results, cfg.seed, branch), args.json_path)
        return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (NumericError, GaplessModeError) as exc:
        print(f"dmquench: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SizeLimitError, ValueError, OSError) as exc:
        print(f"dmquench: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
