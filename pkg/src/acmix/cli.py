"""Command line interface.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import bench, corpus
from .container import compress, decompress
from .contexts import ContextFamilyConfig
from .discovery import WINDOW_CAP_DEFAULT, DiscoveryConfig, discover
from .errors import AcmixError, InvalidArgument
from .predictor import MAX_TABLE_BITS, MIN_TABLE_BITS
from .spectrum import Mode

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
MEM_ENV = "ACMIX_MEM"
DEFAULT_MEM_MIB = 16
SLOT_BYTES = 4


class UsageError(Exception):
    pass


def _int_in(lo, hi=None):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
        if v < lo or (hi is not None and v > hi):
            bound = f">= {lo}" if hi is None else f"in {lo}..{hi}"
            raise argparse.ArgumentTypeError(f"must be {bound}, got {v}")
        return v

    return parse


def table_bits_for(mem_mib: int) -> int:
    """Largest counter table fitting in ``mem_mib`` MiB, within the
    supported range."""
    slots = max(1, mem_mib * (1 << 20) // SLOT_BYTES)
    return max(MIN_TABLE_BITS, min(MAX_TABLE_BITS, slots.bit_length() - 1))


def _default_mem() -> int:
    raw = os.environ.get(MEM_ENV)
    if raw is None:
        return DEFAULT_MEM_MIB
    try:
        v = int(raw)
    except ValueError:
        raise UsageError(f"{MEM_ENV} must be an integer number of MiB, got {raw!r}")
    if v < 1:
        raise UsageError(f"{MEM_ENV} must be >= 1")
    return v


def _add_discovery_flags(p):
    p.add_argument("--n", type=_int_in(1, 255), default=10, help="number of lags to select")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CENTERED.value)
    p.add_argument("--min-lag", type=_int_in(1), default=1)
    p.add_argument("--max-lag", type=_int_in(1), default=None)
    p.add_argument("--window", type=_int_in(1), default=WINDOW_CAP_DEFAULT,
                   help="bytes of the input used for lag discovery")


def _add_model_flags(p):
    p.add_argument("--channels", type=_int_in(1, 255), default=1)
    p.add_argument("--pair-n", type=_int_in(0, 255), default=7)
    p.add_argument("--triple-n", type=_int_in(0, 255), default=5)
    p.add_argument("--planar", action="store_true", help="add the planar template family")
    p.add_argument("--planar-lags", type=_int_in(1, 255), default=6)
    p.add_argument("--planar-dedup", action="store_true",
                   help="skip planar lags that repeat a fixed template neighbour")
    p.add_argument("--mem", type=_int_in(1), default=None,
                   help=f"counter table budget in MiB (default ${MEM_ENV} or {DEFAULT_MEM_MIB})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acmix", description="Autocorrelation-driven context mixing compressor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print the most autocorrelated lags as CSV")
    p.add_argument("path")
    _add_discovery_flags(p)

    p = sub.add_parser("compress")
    p.add_argument("input")
    p.add_argument("output")
    _add_discovery_flags(p)
    _add_model_flags(p)

    p = sub.add_parser("decompress")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("gen-corpus", help="write the synthetic test corpus")
    p.add_argument("dir")
    p.add_argument("--seed", type=_int_in(0), default=0)

    p = sub.add_parser("bench", help="compare discovered lags with adjacent lags 1..n")
    p.add_argument("dir")
    p.add_argument("--baseline", choices=bench.BASELINES, action="append",
                   help="configuration to run; repeatable, default both")
    p.add_argument("--csv", dest="csv_out", default=None, help="write the report here instead of stdout")
    _add_discovery_flags(p)
    _add_model_flags(p)
    return parser


def _discovery(args) -> DiscoveryConfig:
    try:
        return DiscoveryConfig(n=args.n, min_lag=args.min_lag, max_lag=args.max_lag,
                               window_cap=args.window, mode=Mode(args.mode))
    except InvalidArgument as e:
        raise UsageError(str(e)) from e


def _family(args) -> ContextFamilyConfig:
    n = args.n
    pair = min(args.pair_n, n)
    triple = min(args.triple_n, pair)
    if args.planar and args.planar_lags > n:
        raise UsageError(f"--planar-lags {args.planar_lags} exceeds --n {n}")
    return ContextFamilyConfig(n, pair, triple, args.channels, args.planar,
                               args.planar_lags if args.planar else 0, args.planar_dedup)


def _table_bits(args) -> int:
    return table_bits_for(args.mem if args.mem is not None else _default_mem())


def cmd_analyze(args, out) -> int:
    config = _discovery(args)
    data = Path(args.path).read_bytes()
    if not data:
        raise AcmixError(f"{args.path} is empty")
    lags = discover(data, config)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("rank", "lag", "score"))
    for i, (lag, score) in enumerate(zip(lags.lags, lags.scores), 1):
        w.writerow((i, lag, repr(score)))
    return EXIT_OK


def cmd_compress(args, out) -> int:
    discovery, family, table_bits = _discovery(args), _family(args), _table_bits(args)
    data = Path(args.input).read_bytes()
    archive = compress(data, discovery, family, table_bits)
    Path(args.output).write_bytes(archive)
    print(f"{args.input}: {len(data)} -> {len(archive)} bytes", file=out)
    return EXIT_OK


def cmd_decompress(args, out) -> int:
    data = decompress(Path(args.input).read_bytes())
    Path(args.output).write_bytes(data)
    print(f"{args.input}: {len(data)} bytes restored", file=out)
    return EXIT_OK


def cmd_gen_corpus(args, out) -> int:
    for path in corpus.write_corpus(args.dir, args.seed):
        print(path, file=out)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    discovery, family, table_bits = _discovery(args), _family(args), _table_bits(args)
    if not Path(args.dir).is_dir():
        raise AcmixError(f"{args.dir} is not a directory")
    baselines = tuple(dict.fromkeys(args.baseline or bench.BASELINES))
    records = bench.bench_directory(args.dir, baselines, discovery=discovery,
                                    family=family, table_bits=table_bits)
    report = bench.to_csv(records)
    if args.csv_out:
        Path(args.csv_out).write_text(report)
    else:
        out.write(report)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "compress": cmd_compress,
    "decompress": cmd_decompress,
    "gen-corpus": cmd_gen_corpus,
    "bench": cmd_bench,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"acmix: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (AcmixError, OSError) as e:
        print(f"acmix: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
