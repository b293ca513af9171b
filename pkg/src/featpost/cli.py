"""Command line front end: synth | fit | transform | spectrum | isotropy | eval | verify | sweep.

Diagnostics go to stderr; data and reports go to files or stdout. Identical
flags, seeds, and inputs always produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys

from . import evaluation
from . import io as fio
from .errors import (ConvergenceError, FileFormatError, PartitionOverflowError,
                     ValidationError)
from .isotropy import isotropy_report
from .postprocess import FeaturePostprocessor, spectrum_summary
from .synth import SynthSpec, generate

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_FORMAT = 4
EXIT_INVALID_INPUT = 5
EXIT_NUMERIC = 6


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_MISSING_FILE
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (ConvergenceError, PartitionOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_FILE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="featpost",
        description="Feature postprocessing: common-mean removal plus "
                    "dominating-direction projection, with isotropy and "
                    "evaluation reporting.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("synth", help="generate a synthetic labeled feature set")
    p.add_argument("--n-per-class", type=int, default=100, help="rows per class")
    p.add_argument("--n-classes", type=int, default=2, help="number of classes")
    p.add_argument("--dim", type=int, default=16, help="feature dimension")
    p.add_argument("--offset-norm", type=float, default=0.0,
                   help="norm of the planted common offset vector")
    p.add_argument("--spike-variances", type=str, default="",
                   help="comma-separated variances of planted dominating directions")
    p.add_argument("--base-variance", type=float, default=1.0,
                   help="noise variance on unplanted axes")
    p.add_argument("--class-sep", type=float, default=0.0,
                   help="pairwise distance between class centroids")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--output", required=True, help="feature file to write")
    p.add_argument("--labels", required=True, help="label file to write")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("fit", help="fit a postprocessing model and print the spectrum")
    p.add_argument("--input", required=True, help="feature file")
    p.add_argument("--model", required=True, help="model file to write")
    p.add_argument("--t", type=int, default=1, help="directions to remove")
    p.add_argument("--pca-dim", type=int, default=None,
                   help="cap on extracted components (default: feature dimension)")
    p.add_argument("--k", type=int, default=None,
                   help="eigenvalues in the printed summary (default: min(10, dim))")
    _format_flag(p)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("transform", help="apply a fitted model to a feature file")
    p.add_argument("--input", required=True, help="feature file")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--output", required=True, help="feature file to write")
    p.set_defaults(handler=_cmd_transform)

    p = sub.add_parser("spectrum", help="print the spectrum summary of a feature file")
    p.add_argument("--input", required=True, help="feature file")
    p.add_argument("--k", type=int, default=None,
                   help="eigenvalues to report (default: min(10, dim))")
    _format_flag(p)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("isotropy", help="print the isotropy report of a feature file")
    p.add_argument("--input", required=True, help="feature file")
    _format_flag(p)
    p.set_defaults(handler=_cmd_isotropy)

    p = sub.add_parser("eval", help="before/after classification accuracy")
    _eval_flags(p)
    p.add_argument("--evaluator", choices=["nearest_centroid", "knn"],
                   default="nearest_centroid", help="classifier to run")
    p.add_argument("--k", type=int, default=5, help="neighbours for knn")
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean",
                   help="distance metric for knn")
    p.add_argument("--test-fraction", type=float, default=0.3,
                   help="stratified test fraction")
    p.add_argument("--fit-on", choices=["train", "all"], default="train",
                   help="rows used to fit the postprocessing model")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("verify", help="before/after pair-verification accuracy")
    _eval_flags(p)
    p.add_argument("--pairs", type=int, default=None,
                   help="same/different pairs per side (default: half the rows)")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("sweep", help="accuracy and isotropy for every t in [0, t-max]")
    _eval_flags(p)
    p.add_argument("--t-max", type=int, default=10, help="largest t to evaluate")
    p.add_argument("--evaluator", choices=["nearest_centroid", "knn"],
                   default="nearest_centroid", help="classifier to run")
    p.add_argument("--k", type=int, default=5, help="neighbours for knn")
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean",
                   help="distance metric for knn")
    p.add_argument("--test-fraction", type=float, default=0.3,
                   help="stratified test fraction")
    p.add_argument("--fit-on", choices=["train", "all"], default="train",
                   help="rows used to fit the postprocessing model")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def _format_flag(p) -> None:
    p.add_argument("--format", choices=["text", "machine"], default="text",
                   help="report rendering: key = value lines or JSON")


def _eval_flags(p) -> None:
    p.add_argument("--input", required=True, help="feature file")
    p.add_argument("--labels", required=True, help="label file")
    p.add_argument("--t", type=int, default=1, help="directions to remove")
    p.add_argument("--pca-dim", type=int, default=None,
                   help="cap on extracted components (default: feature dimension)")
    p.add_argument("--seed", type=int, default=0, help="split/pair seed")
    p.add_argument("--l2-normalize", choices=["off", "before", "after"], default="off",
                   help="L2-normalize rows before or after postprocessing")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    _format_flag(p)


def _emit(text: str, output) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_synth(args) -> int:
    spikes = tuple(float(v) for v in args.spike_variances.split(",") if v.strip())
    spec = SynthSpec(n_per_class=args.n_per_class, n_classes=args.n_classes,
                     dim=args.dim, offset_norm=args.offset_norm,
                     spike_variances=spikes, base_variance=args.base_variance,
                     class_sep=args.class_sep, seed=args.seed)
    F, labels = generate(spec)
    fio.write_features(args.output, F)
    fio.write_labels(args.labels, labels)
    print(f"wrote {F.shape[0]}x{F.shape[1]} features to {args.output}, "
          f"labels to {args.labels}", file=sys.stderr)
    return EXIT_OK


def _cmd_fit(args) -> int:
    F = fio.read_features(args.input)
    model = FeaturePostprocessor(t=args.t, pca_dim=args.pca_dim).fit(F)
    fio.write_model(args.model, model)
    k = args.k if args.k is not None else min(10, F.shape[1])
    summary = spectrum_summary(F, k)
    sys.stdout.write(fio.format_report(summary, fmt=args.format))
    return EXIT_OK


def _cmd_transform(args) -> int:
    F = fio.read_features(args.input)
    model = fio.read_model(args.model)
    fio.write_features(args.output, model.transform(F))
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    F = fio.read_features(args.input)
    k = args.k if args.k is not None else min(10, F.shape[1])
    sys.stdout.write(fio.format_report(spectrum_summary(F, k), fmt=args.format))
    return EXIT_OK


def _cmd_isotropy(args) -> int:
    F = fio.read_features(args.input)
    sys.stdout.write(fio.format_report(isotropy_report(F), fmt=args.format))
    return EXIT_OK


def _cmd_eval(args) -> int:
    F = fio.read_features(args.input)
    labels = fio.read_labels(args.labels)
    report = evaluation.compare(
        F, labels, t=args.t, evaluator=args.evaluator,
        params={"k": args.k, "metric": args.metric}, seed=args.seed,
        test_fraction=args.test_fraction, fit_on=args.fit_on,
        pca_dim=args.pca_dim, normalize=args.l2_normalize)
    _emit(fio.format_report(report, fmt=args.format), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    F = fio.read_features(args.input)
    labels = fio.read_labels(args.labels)
    params = {"n_pairs": args.pairs} if args.pairs is not None else {}
    report = evaluation.compare(
        F, labels, t=args.t, evaluator="pair_verify", params=params,
        seed=args.seed, pca_dim=args.pca_dim, normalize=args.l2_normalize)
    _emit(fio.format_report(report, fmt=args.format), args.output)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    F = fio.read_features(args.input)
    labels = fio.read_labels(args.labels)
    rows = evaluation.sweep(
        F, labels, t_max=args.t_max, evaluator=args.evaluator,
        params={"k": args.k, "metric": args.metric}, seed=args.seed,
        test_fraction=args.test_fraction, fit_on=args.fit_on,
        pca_dim=args.pca_dim, normalize=args.l2_normalize)
    lines = ["t,accuracy_before,accuracy_after,m_empirical"]
    for row in rows:
        rep = row["report"]
        lines.append(f"{row['t']},{rep.accuracy_before!r},{rep.accuracy_after!r},"
                     f"{row['m_empirical']!r}")
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
