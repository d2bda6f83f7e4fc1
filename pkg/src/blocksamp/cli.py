"""Command-line front end: simulate, estimate, coverage, sweep, oracle.

Exit status is 0 on success, 1 for configuration or usage errors and 2 for
failures while running.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .errors import BlockSamplingError, ConfigError
from .harness import (
    METHODS,
    ExperimentConfig,
    config_from_mapping,
    load_config,
    load_series,
    run_coverage,
    run_single,
    sweep,
    write_rows,
)
from .oracle import HermiteSpec, sample_volterra, sample_limit, zeta
from .process import DEFAULT_TAIL_TOL, DEFAULT_TRUNCATION, MODEL_NAMES, preset_model, simulate_window

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _tail_tol(raw: str):
    if raw.lower() in ("none", "off"):
        return None
    try:
        return float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'none', got {raw!r}")


def _add_model_args(p, required=True):
    p.add_argument("--model", choices=MODEL_NAMES, required=required)
    p.add_argument("--beta", type=float, required=required)
    p.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION, help="moving-average length M")
    p.add_argument("--tail-tol", type=_tail_tol, default=DEFAULT_TAIL_TOL,
                   help="max discarded tail variance ratio, or 'none' to disable the check")
    p.add_argument("--seed", type=int, default=20240601)


def _add_run_args(p):
    # unset flags stay absent so they never override config-file values
    sup = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="INI file with one [section] per experiment")
    p.add_argument("--model", choices=MODEL_NAMES, default=sup)
    p.add_argument("--beta", type=float, default=sup)
    p.add_argument("--n", type=int, default=sup)
    p.add_argument("--c", type=float, default=sup)
    p.add_argument("--method", choices=METHODS, default=sup)
    p.add_argument("--alpha", type=float, default=sup)
    p.add_argument("--reps", type=int, default=sup)
    p.add_argument("--seed", type=int, default=sup)
    p.add_argument("--truncation", type=int, default=sup)
    p.add_argument("--tail-tol", type=_tail_tol, default=sup)
    p.add_argument("--workers", type=int, default=sup)
    p.add_argument("--paired", action="store_true", default=sup,
                   help="draw the same series for both methods")
    p.add_argument("--replicate-offset", type=int, default=sup)
    p.add_argument("--out", default=sup)


_RUN_FIELDS = {
    "model": "model", "beta": "beta", "n": "n", "c": "c", "method": "method",
    "alpha": "alpha", "reps": "reps", "seed": "master_seed", "truncation": "truncation",
    "tail_tol": "tail_tol", "workers": "workers", "paired": "paired",
    "replicate_offset": "replicate_offset", "out": "output",
}


def _overrides(args) -> dict:
    given = vars(args)
    return {key: given[attr] for attr, key in _RUN_FIELDS.items() if attr in given}


def _configs(args) -> list[ExperimentConfig]:
    over = _overrides(args)
    if args.config:
        base = load_config(args.config)
        if not base:
            raise ConfigError(f"{args.config}: no experiment sections")
        return [ExperimentConfig(**{**cfg.echo(), **over}) for cfg in base]
    return [config_from_mapping(over)]


def _emit(text: str, path=None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_simulate(args) -> int:
    model = preset_model(args.model, args.beta, args.truncation, args.tail_tol)
    y = simulate_window(model, args.n, args.past, args.seed, tuple(args.substream))
    if args.out:
        y.to_csv(args.out)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["index", "y"])
        for i, v in zip(y.index, y.values):
            w.writerow([int(i), repr(float(v))])
    return EXIT_OK


def cmd_estimate(args) -> int:
    if (args.data is None) == (args.model is None):
        raise ConfigError("give exactly one of --data or --model/--beta")
    if args.data is not None:
        y = load_series(args.data)
        n = y.size
    else:
        if args.beta is None or args.n is None:
            raise ConfigError("simulation needs --beta and --n")
        n = args.n
    l = args.l if args.l is not None else int(np.floor(args.c * np.sqrt(n) + 1e-9))
    if args.data is None:
        model = preset_model(args.model, args.beta, args.truncation, args.tail_tol)
        past = 2 * l if args.method == "h_hat" else 0
        y = simulate_window(model, n, past, args.seed)
    res = run_single(y, args.method, l, args.alpha)
    if args.dist_out:
        res.dist.to_csv(args.dist_out)
    _emit(json.dumps(res.to_dict(), indent=2), args.out)
    return EXIT_OK


def cmd_coverage(args) -> int:
    cfgs = _configs(args)
    if len(cfgs) != 1:
        raise ConfigError(f"coverage runs one experiment, the config has {len(cfgs)}; use sweep")
    report = run_coverage(cfgs[0])
    if cfgs[0].output:
        write_rows([report.row()], cfgs[0].output)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfgs = _configs(args)
    rows = sweep(cfgs)
    write_rows(rows, getattr(args, "out", None) or sys.stdout)
    return EXIT_RUNTIME if any(r["error"] for r in rows) else EXIT_OK


def cmd_oracle(args) -> int:
    if args.zeta:
        z = zeta(args.r, args.beta, args.tol)
        _emit(json.dumps({"r": z.r, "beta": z.beta, "zeta": z.value, "error": z.error}), args.out)
        return EXIT_OK
    spec = HermiteSpec(args.r, args.beta, args.n, args.truncation)
    if args.raw:
        values = np.sort(sample_volterra(spec, args.reps, args.seed))
    else:
        values = sample_limit(spec, args.reps, args.seed).values
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["value"])
        for v in values:
            w.writerow([repr(float(v))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="blocksamp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write one simulated series as CSV (index, y)")
    _add_model_args(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--past", type=int, default=0, help="length of the past block before Y_1")
    s.add_argument("--substream", type=int, nargs="*", default=[])
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="intervals and scale diagnostics for one series")
    e.add_argument("--data", help="one-column file, or CSV with a 'y' column")
    _add_model_args(e, required=False)
    e.add_argument("--n", type=int)
    e.add_argument("--method", choices=METHODS, default="h_hat")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--l", type=int, help="block length")
    g.add_argument("--c", type=float, default=1.0, help="block length floor(c sqrt(n))")
    e.add_argument("--alpha", type=float, default=0.1)
    e.add_argument("--dist-out", help="write the studentized block-sum distribution here")
    e.add_argument("--out")
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("coverage", help="Monte Carlo coverage of one configuration")
    _add_run_args(c)
    c.set_defaults(func=cmd_coverage)

    w = sub.add_parser("sweep", help="coverage table over every section of a config file")
    _add_run_args(w)
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="limit-law samples or the squared-norm constant zeta")
    o.add_argument("--r", type=int, default=1, help="Volterra order (1 or 2)")
    o.add_argument("--beta", type=float, required=True)
    o.add_argument("--n", type=int, default=2000)
    o.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)
    o.add_argument("--reps", type=int, default=10_000)
    o.add_argument("--seed", type=int, default=20240601)
    o.add_argument("--raw", action="store_true", help="unnormalized partial sums")
    o.add_argument("--zeta", action="store_true", help="print zeta(r, beta) instead of samples")
    o.add_argument("--tol", type=float, default=1e-6)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlockSamplingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
