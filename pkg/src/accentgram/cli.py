"""Command-line entry point.

Subcommands mirror the pipeline stages (extract, stats, manova, cda,
classify, plot) plus `all`. Exit codes: 0 success, 1 usage error, 2
input/data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import DataError, NumericalError
from .mfcc import MfccConfig
from .pipeline import (
    RunConfig,
    load_features,
    load_manifest,
    run_all,
    run_cda_stage,
    run_classify_stage,
    run_extract,
    run_manova_stage,
    run_plot_stage,
    run_stats,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    """Bad flags or flag combinations; exits 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _open_fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a fraction in (0, 1), got {text!r}")
    return value


def _feature_list(text: str) -> tuple[int, ...]:
    try:
        features = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not features or any(f < 1 for f in features):
        raise argparse.ArgumentTypeError(f"feature indices must be >= 1, got {text!r}")
    if len(set(features)) != len(features):
        raise argparse.ArgumentTypeError(f"duplicate feature index in {text!r}")
    return features


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="CSV of path,group,speaker_id")
    common.add_argument("--audio-root", help="base directory for relative manifest paths")
    common.add_argument("--out", required=True, help="output directory for all artifacts")
    common.add_argument("--seed", type=_non_negative_int, default=42, help="RNG seed (default 42)")
    common.add_argument(
        "--test-fraction", type=_open_fraction, default=0.30, help="held-out fraction (default 0.30)"
    )
    common.add_argument("--trees", type=_positive_int, default=500, help="forest size (default 500)")
    common.add_argument(
        "--features",
        type=_feature_list,
        default=(1, 2, 5),
        help="reduced feature set and boxplot selection (default 1,2,5)",
    )
    common.add_argument("--alpha", type=_open_fraction, default=0.05, help="significance level (default 0.05)")
    common.add_argument("--window-ms", type=_positive_float, default=25.0, help="analysis window (default 25)")
    common.add_argument("--hop-ms", type=_positive_float, default=10.0, help="hop between frames (default 10)")
    common.add_argument("--n-mels", type=_positive_int, default=128, help="mel filterbank size (default 128)")
    common.add_argument("--n-mfcc", type=_positive_int, default=13, help="coefficients kept (default 13)")
    common.add_argument(
        "--repeats", type=_positive_int, default=1, help="repeated-split evaluations (default 1)"
    )
    common.add_argument(
        "--keep-going", action="store_true", help="log per-file extraction failures and continue"
    )

    parser = _Parser(prog="accentgram", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler, needs_manifest in (
        ("extract", _cmd_extract, True),
        ("stats", _cmd_stats, False),
        ("manova", _cmd_manova, False),
        ("cda", _cmd_cda, False),
        ("classify", _cmd_classify, False),
        ("plot", _cmd_plot, False),
        ("all", _cmd_all, True),
    ):
        cmd = sub.add_parser(name, parents=[common])
        cmd.set_defaults(func=handler, needs_manifest=needs_manifest)
    return parser


def _build_config(args: argparse.Namespace) -> RunConfig:
    mfcc = MfccConfig(
        window_ms=args.window_ms, hop_ms=args.hop_ms, n_mels=args.n_mels, n_mfcc=args.n_mfcc
    )
    return RunConfig(
        mfcc=mfcc,
        alpha=args.alpha,
        seed=args.seed,
        test_fraction=args.test_fraction,
        n_trees=args.trees,
        reduced_features=args.features,
        repeats=args.repeats,
        keep_going=args.keep_going,
    )


def _manifest(args: argparse.Namespace):
    if not args.manifest:
        raise UsageError(f"{args.command} requires --manifest")
    return load_manifest(args.manifest, args.audio_root)


def _cmd_extract(args, config):
    run_extract(_manifest(args), config, args.out)


def _cmd_stats(args, config):
    run_stats(load_features(args.out), config, args.out)


def _cmd_manova(args, config):
    run_manova_stage(load_features(args.out), args.out)


def _cmd_cda(args, config):
    run_cda_stage(load_features(args.out), args.out)


def _cmd_classify(args, config):
    run_classify_stage(load_features(args.out), config, args.out)


def _cmd_plot(args, config):
    run_plot_stage(load_features(args.out), config, args.out)


def _cmd_all(args, config):
    run_all(_manifest(args), config, args.out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        args.func(args, config)
    except (UsageError, ValueError) as exc:
        print(f"accentgram: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"accentgram: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"accentgram: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
