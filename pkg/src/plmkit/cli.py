"""Command line interface: batch experiments over the CSV file formats.

Exit codes: 0 success, 1 input/format error, 2 numerical failure when
``--strict`` is set.  All outputs are deterministic given flags and seeds.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .abstention import SurenessScore, calibrate_threshold, distance_bc, distance_wlw
from .core import (
    CouplingConfig,
    LabeledBatch,
    Method,
    PlmError,
    Posterior,
    Stabilization,
)
from .coupling import couple, theta_map
from .datagen import BlobSpec, bayes_posterior_blobs, generate_blobs
from .ensemble import CorrectionPatch, bootstrap_recombine, ensemble_summary, partial_correct
from .fileio import (
    FORMAT_VERSION,
    FormatError,
    read_distances,
    read_labels,
    read_pairwise,
    read_patch,
    read_posteriors,
    write_confusion,
    write_distances,
    write_labels,
    write_pairwise,
    write_posteriors,
    write_summaries,
)
from .metrics import accuracy, argmax_predict, confusion_matrix, worst_confused_pair

_METHODS = {"wlw": Method.WU_LIN_WENG, "bc": Method.BAYES_COVARIANT}
_STABILIZERS = {
    "none": Stabilization.NONE,
    "clip": Stabilization.CLIP,
    "drop": Stabilization.DROP_CLASSES,
}


def _config(args) -> CouplingConfig:
    return CouplingConfig(
        method=_METHODS[args.method],
        stabilization=_STABILIZERS[args.stabilize],
        tau=args.tau,
        rho=args.rho,
    )


def _add_coupling_flags(sub, default_stabilize="none"):
    sub.add_argument("--method", choices=sorted(_METHODS), default="wlw")
    sub.add_argument("--stabilize", choices=sorted(_STABILIZERS), default=default_stabilize)
    sub.add_argument("--tau", type=float, default=1e-3)
    sub.add_argument("--rho", type=float, default=1e-3)


def cmd_restrict(args) -> int:
    posteriors = read_posteriors(args.input)
    write_pairwise(args.output, [(sid, theta_map(p)) for sid, p in posteriors])
    return 0


def cmd_couple(args) -> int:
    matrices = read_pairwise(args.input)
    config = _config(args)
    results, failures = [], []
    for sid, m in matrices:
        try:
            results.append((sid, couple(m, config)))
        except PlmError as exc:
            failures.append((sid, str(exc)))
    write_posteriors(args.output, results)
    if failures:
        with open(args.output, "a", encoding="utf-8", newline="\n") as fh:
            for sid, msg in failures:
                fh.write(f"# failed: {sid}: {msg}\n")
        for sid, msg in failures:
            print(f"failed: {sid}: {msg}", file=sys.stderr)
        if args.strict:
            return 2
    return 0


def cmd_correct(args) -> int:
    posteriors = read_posteriors(args.posteriors)
    labels = read_labels(args.labels, c=posteriors[0][1].c if posteriors else None)
    truth = labels.labels_by_id()
    rows = []
    for patch_path in args.patch:
        triples = read_patch(patch_path)
        patch = CorrectionPatch(pairs=tuple(triples))
        for mname, method in sorted(_METHODS.items()):
            config = CouplingConfig(method=method)
            preds = []
            for sid, p in posteriors:
                q = couple(partial_correct(p, patch), config)
                preds.append((sid, argmax_predict(q)))
            multi_acc = accuracy(preds, labels)
            pair_accs = []
            for i, j, q in triples:
                pair_samples = [sid for sid, _ in posteriors if truth[sid] in (i, j)]
                if pair_samples:
                    predicted = i if q >= 0.5 else j
                    hits = sum(1 for sid in pair_samples if truth[sid] == predicted)
                    pair_accs.append(hits / len(pair_samples))
            pair_acc = sum(pair_accs) / len(pair_accs) if pair_accs else float("nan")
            rows.append((patch_path, mname, pair_acc, multi_acc))
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {FORMAT_VERSION}\n")
        fh.write("patch,method,pairwise_accuracy,multiclass_accuracy\n")
        for patch_path, mname, pa, ma in rows:
            fh.write(f"{patch_path},{mname},{pa:.17g},{ma:.17g}\n")
        if args.ols:
            for mname in sorted(_METHODS):
                pts = [(pa, ma) for _, m, pa, ma in rows if m == mname and np.isfinite(pa)]
                if len(pts) >= 2:
                    x, y = np.array(pts).T
                    slope, intercept = np.polyfit(x, y, 1)
                    fh.write(f"# ols {mname}: slope={slope:.17g} intercept={intercept:.17g}\n")
    return 0


def cmd_bootstrap(args) -> int:
    per_file = [dict(read_pairwise(path)) for path in args.inputs]
    ids = list(dict(read_pairwise(args.inputs[0])))
    for path, d in zip(args.inputs, per_file):
        if set(d) != set(ids):
            raise FormatError(f"{path}: sample_ids differ from {args.inputs[0]}")
    config = CouplingConfig(method=_METHODS[args.method])
    summaries = []
    for s_index, sid in enumerate(ids):
        sources = [d[sid] for d in per_file]
        # per-sample seed offset keeps samples independent of processing order
        recombined = bootstrap_recombine(sources, args.n, args.seed + s_index)
        summaries.append((sid, ensemble_summary(recombined, config)))
    write_summaries(args.output, summaries)
    return 0


def cmd_distance(args) -> int:
    matrices = read_pairwise(args.input)
    method = _METHODS[args.method]
    scores = []
    for sid, m in matrices:
        if method is Method.WU_LIN_WENG:
            d = distance_wlw(m)
        else:
            d = distance_bc(m, tau=args.tau)
        scores.append(SurenessScore(sample_id=sid, method=method, distance=d))
    write_distances(args.output, scores)
    return 0


def cmd_calibrate(args) -> int:
    distances = [d for _, _, d in read_distances(args.input)]
    threshold = calibrate_threshold(distances, args.quantile)
    print(f"{threshold:.17g}")
    return 0


def cmd_evaluate(args) -> int:
    posteriors = read_posteriors(args.posteriors)
    labels = read_labels(args.labels, c=posteriors[0][1].c if posteriors else None)
    preds = [(sid, argmax_predict(p)) for sid, p in posteriors]
    acc = accuracy(preds, labels)
    counts = confusion_matrix(preds, labels)
    write_confusion(args.confusion, counts)
    worst = worst_confused_pair(counts)
    print(f"accuracy: {acc:.17g}")
    if worst is None:
        print("worst_confused_pair: none")
    else:
        i, j = worst
        print(f"worst_confused_pair: ({i},{j}) errors={counts[i, j] + counts[j, i]}")
    return 0


def cmd_synth(args) -> int:
    if args.dim is None:
        args.dim = args.c
    means = np.zeros((args.c, args.dim))
    for k in range(args.c):
        means[k, k % args.dim] += args.separation
    spec = BlobSpec(
        c=args.c,
        dim=args.dim,
        means=means,
        scale=args.scale,
        n_per_class=args.n_per_class,
        seed=args.seed,
    )
    features, batch = generate_blobs(spec)
    write_labels(args.labels, batch)
    posteriors = [
        (sid, bayes_posterior_blobs(spec, x))
        for (sid, _), x in zip(batch.samples, features)
    ]
    write_posteriors(args.posteriors, posteriors)
    if args.features:
        with open(args.features, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {FORMAT_VERSION}\n")
            fh.write("sample_id," + ",".join(f"x_{d}" for d in range(args.dim)) + "\n")
            for (sid, _), x in zip(batch.samples, features):
                fh.write(sid + "," + ",".join(f"{v:.17g}" for v in x) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plmkit",
        description="Pairwise-coupling meta-classification over CSV files.",
    )
    parser.add_argument(
        "--version", action="version", version=f"plmkit {__version__} (format {FORMAT_VERSION})"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("restrict", help="posterior file -> pairwise likelihood file")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_restrict)

    s = sub.add_parser("couple", help="pairwise likelihood file -> posterior file")
    s.add_argument("input")
    s.add_argument("output")
    _add_coupling_flags(s)
    s.add_argument("--strict", action="store_true", help="exit 2 if any sample fails")
    s.set_defaults(func=cmd_couple)

    s = sub.add_parser("correct", help="apply pair patches and report accuracies")
    s.add_argument("posteriors")
    s.add_argument("labels")
    s.add_argument("output")
    s.add_argument("--patch", action="append", required=True, help="patch CSV (repeatable)")
    s.add_argument("--ols", action="store_true", help="append OLS slope/intercept per method")
    s.set_defaults(func=cmd_correct)

    s = sub.add_parser("bootstrap", help="recombine pairwise files into an ensemble summary")
    s.add_argument("inputs", nargs="+", help="two or more pairwise files")
    s.add_argument("output")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", choices=sorted(_METHODS), default="wlw")
    s.set_defaults(func=cmd_bootstrap)

    s = sub.add_parser("distance", help="manifold distances for a pairwise file")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--method", choices=sorted(_METHODS), default="bc")
    s.add_argument("--tau", type=float, default=1e-3)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("calibrate", help="quantile threshold from a distance file")
    s.add_argument("input")
    s.add_argument("--quantile", type=float, default=0.95)
    s.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("evaluate", help="accuracy and confusion matrix of a posterior file")
    s.add_argument("posteriors")
    s.add_argument("labels")
    s.add_argument("confusion", help="output confusion-matrix CSV")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("synth", help="generate a Gaussian-blob dataset")
    s.add_argument("posteriors", help="output posterior CSV (exact blob posteriors)")
    s.add_argument("labels", help="output labels CSV")
    s.add_argument("--features", help="optional output feature CSV")
    s.add_argument("--c", type=int, default=3)
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--separation", type=float, default=3.0)
    s.add_argument("--n-per-class", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PlmError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
