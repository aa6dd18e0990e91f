"""Command line entry point: ``drto {run,bench,verify-alloc,export-trace}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .channel import write_trace
from .config import ALGORITHMS, ExperimentConfig
from .harness import bench_runtime, channel_trace, run_experiment, verify_allocator

log = logging.getLogger("drto")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _algo_list(text: str) -> list[str]:
    algos = [a.strip() for a in text.split(",") if a.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
    return algos


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    if getattr(args, "algo", None):
        cfg.algorithms = tuple(a for group in args.algo for a in group)
    if getattr(args, "seed", None):
        cfg.seeds = tuple(args.seed)
    if getattr(args, "frames", None) is not None:
        cfg.total_frames = args.frames
    if getattr(args, "trace", None) is not None:
        cfg.trace_path = Path(args.trace)
    if getattr(args, "out", None) is not None:
        cfg.output_dir = Path(args.out)
    # re-run validation after overrides
    ExperimentConfig.__post_init__(cfg)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.no_ratio:
        cfg.compute_ratio = False
    if args.no_timing:
        cfg.record_timing = False
    if cfg.output_dir is None:
        cfg.output_dir = Path("results")
    summary = run_experiment(cfg, progress=log.info)
    print(json.dumps(summary.aggregates(), indent=2, sort_keys=True))
    log.info("wrote %s", cfg.output_dir)
    return 0


def cmd_bench(args) -> int:
    cfg = _load(args)
    if not args.algo:
        cfg.algorithms = ("drto", "ddlo", "cd", "enum")
    table = bench_runtime(cfg, args.n, warmup=args.warmup, progress=log.info)
    width = max(len(a) for a in table)
    print(f"{'algorithm':<{width}}  " + "  ".join(f"N={n:<9}" for n in args.n))
    for algo, row in table.items():
        print(f"{algo:<{width}}  " + "  ".join(f"{row[n] * 1e3:9.4f}ms" for n in args.n))
    if cfg.output_dir is not None:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        with open(cfg.output_dir / "bench.json", "w") as fh:
            json.dump({a: {str(n): t for n, t in row.items()} for a, row in table.items()},
                      fh, indent=2)
    return 0


def cmd_verify_alloc(args) -> int:
    result = verify_allocator(trials=args.trials, max_n=args.max_n, seed=args.seed)
    ok = result["max_relative_cost_gap"] < 1e-6 and result["max_kkt_spread"] < 1e-6
    print(json.dumps({**result, "pass": ok}, indent=2))
    return 0 if ok else 1


def cmd_export_trace(args) -> int:
    cfg = _load(args)
    seed = cfg.seeds[0]
    trace = channel_trace(cfg, seed)
    write_trace(args.output, trace)
    log.info("wrote %d frames to %s", len(trace), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drto", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, algo=True):
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--seed", type=_int_list, help="comma-separated seeds")
        p.add_argument("--frames", type=int, help="number of time frames")
        p.add_argument("--trace", type=Path, help="channel trace CSV to replay")
        p.add_argument("--out", type=Path, help="output directory")
        if algo:
            p.add_argument("--algo", type=_algo_list, action="append",
                           help=f"comma-separated subset of {','.join(ALGORITHMS)}")

    p = sub.add_parser("run", help="run an experiment and write CSV/JSON results")
    common(p)
    p.add_argument("--no-ratio", action="store_true",
                   help="skip the per-frame enumeration used for cost ratios")
    p.add_argument("--no-timing", action="store_true",
                   help="leave the timing columns empty so CSVs are byte-reproducible")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="serial per-frame runtime benchmark")
    common(p)
    p.add_argument("--n", type=_int_list, default=[5, 7, 10], help="ST counts, e.g. 5,7,10")
    p.add_argument("--warmup", type=int, default=None, help="frames excluded from timing")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify-alloc", help="closed-form vs numeric bandwidth allocation")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--max-n", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_alloc)

    p = sub.add_parser("export-trace", help="write a channel trace CSV")
    common(p, algo=False)
    p.add_argument("output", type=Path)
    p.set_defaults(func=cmd_export_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"drto: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
