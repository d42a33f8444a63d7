"""Command-line front end: ``bluerank {rank,recover,classify,mask-image,synth}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import dataio, evaluation, selection
from .errors import BluerankError
from .graph import GraphParams

log = logging.getLogger("bluerank")

THREADS_ENV = "BLUERANK_THREADS"
# execution-only settings, left out of artifacts so outputs are byte-identical across them
EXECUTION_ONLY = ("parallelism", "output", "command", "verbose")


def _default_parallelism():
    return os.cpu_count() or 1


def _add_dataset_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV dataset")
    src.add_argument("--images", help="IDX image file (MNIST layout)")
    p.add_argument("--labels", help="IDX label file for --images")
    p.add_argument("--label-column", help="CSV column holding class labels")
    p.add_argument("--no-header", action="store_true", help="CSV has no header row")
    p.add_argument("--limit", type=int, help="random (stratified if labelled) subset size for --images")
    p.add_argument(
        "--standardize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="z-score columns (default: on for CSV, off for images)",
    )
    p.add_argument("--seed", type=int, default=0)


def _add_ranking_args(p, with_method=True):
    if with_method:
        p.add_argument("--method", choices=selection.METHODS, default="blue_noise")
    p.add_argument("--k-neighbors", type=int, default=10)
    p.add_argument("--k0", type=int, default=selection.DEFAULT_K0)
    p.add_argument("--weighting", choices=("heat_kernel", "binary"), default="heat_kernel")
    p.add_argument("--bandwidth", type=float, help="fixed heat-kernel width (default: median kNN distance)")
    p.add_argument("--mask-policy", default="zero", help="'zero' or a numeric constant")
    p.add_argument(
        "--reuse-bandwidth",
        action="store_true",
        help="masked graphs reuse the unmasked heat-kernel width",
    )
    p.add_argument("--parallelism", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="bluerank", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="rank dimensions, write JSON and a text list")
    _add_dataset_args(p)
    _add_ranking_args(p)
    p.add_argument("--output", required=True, help="ranking JSON path; the text list goes next to it as .txt")

    p = sub.add_parser("recover", help="neighbor-recovery curve of a ranking")
    _add_dataset_args(p)
    _add_ranking_args(p)
    p.add_argument("--ranking", help="ranking JSON (default: rank with --method)")
    p.add_argument("--sizes", help="comma-separated subset sizes")
    p.add_argument("--n-neighbors", type=int, default=evaluation.DEFAULT_N_NEIGHBORS)
    p.add_argument("--output", required=True)

    p = sub.add_parser("classify", help="incremental-feature F1 curve of a ranking")
    _add_dataset_args(p)
    _add_ranking_args(p)
    p.add_argument("--ranking", help="ranking JSON (default: rank with --method)")
    p.add_argument("--counts", help="comma-separated feature counts")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--output", required=True)

    p = sub.add_parser("mask-image", help="write the top-ranked pixels as a PGM mask")
    p.add_argument("--ranking", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--top", type=int, required=True)
    p.add_argument("--output", required=True)

    p = sub.add_parser("synth", help="write a planted two-cluster dataset as CSV")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--informative", type=int, default=2)
    p.add_argument("--noise", type=int, default=8)
    p.add_argument("--separation", type=float, default=5.0)
    p.add_argument("--noise-scale", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    return parser


def run_config(args):
    """Artifact-embedded record of every result-affecting setting."""
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in EXECUTION_ONLY}
    cfg["command"] = args.command
    return cfg


def load_dataset(args):
    """Return ``(raw, prepared)``; prepared is standardized when requested."""
    if args.input:
        if not Path(args.input).is_file():
            raise BluerankError(f"input file not found: {args.input}")
        raw = dataio.load_csv(args.input, has_header=not args.no_header, label_column=args.label_column)
        standardize = True if args.standardize is None else args.standardize
    else:
        for path in (args.images, args.labels):
            if path and not Path(path).is_file():
                raise BluerankError(f"input file not found: {path}")
        raw = dataio.load_idx_images(args.images, args.labels, args.limit, args.seed)
        standardize = bool(args.standardize)
    return raw, dataio.standardize(raw) if standardize else raw


def _mask_policy(text):
    if text == "zero":
        return "zero"
    try:
        return float(text)
    except ValueError:
        raise BluerankError(f"--mask-policy must be 'zero' or a number, got {text!r}") from None


def _parallelism(args):
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise BluerankError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return args.parallelism or _default_parallelism()


def compute_ranking(args, raw, prepared):
    """Rank with ``args.method``; variance-type baselines always see raw values."""
    if args.method == "blue_noise":
        params = selection.ScoringParams(
            k0=args.k0,
            graph=GraphParams(args.k_neighbors, args.weighting, args.bandwidth),
            mask_policy=_mask_policy(args.mask_policy),
            recompute_bandwidth=not args.reuse_bandwidth,
        )
        k0_eff = selection.resolve_k0(params.k0, prepared.n)
        if k0_eff != params.k0:
            log.warning("k0=%d clamped to %d for N=%d", params.k0, k0_eff, prepared.n)
        return selection.rank_dimensions(prepared, params, _parallelism(args))
    if args.method == "pcoa":
        return selection.pcoa_rank(raw)
    if args.method == "variance":
        return selection.variance_rank(raw)
    return selection.random_rank(raw, args.seed)


def _with_config(ranking, cfg):
    params = dict(ranking.params, run_config=cfg)
    return selection.ImportanceRanking(
        ranking.scores, ranking.order, ranking.method, params, ranking.feature_names
    )


def _ranking_for(args, raw, prepared):
    if args.ranking:
        ranking = selection.ImportanceRanking.load(args.ranking)
        if len(ranking.order) != raw.d:
            raise BluerankError(
                f"dimension mismatch: ranking has {len(ranking.order)} dimensions, dataset has {raw.d}"
            )
        return ranking
    return compute_ranking(args, raw, prepared)


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise BluerankError(f"expected comma-separated integers, got {text!r}") from None


def default_sizes(d):
    grid = {1, 2, 5, d}
    grid |= {m * 10**e for e in range(1, 7) for m in (1, 2, 5) if m * 10**e < d}
    return sorted(grid)


def cmd_rank(args):
    raw, prepared = load_dataset(args)
    ranking = _with_config(compute_ranking(args, raw, prepared), run_config(args))
    out = Path(args.output)
    out.write_text(ranking.to_json())
    out.with_suffix(".txt").write_text(ranking.to_text())
    log.info("wrote %s and %s", out, out.with_suffix(".txt"))


def cmd_recover(args):
    raw, prepared = load_dataset(args)
    ranking = _ranking_for(args, raw, prepared)
    sizes = _int_list(args.sizes) if args.sizes else default_sizes(raw.d)
    # recovery is measured on the data as the ranking saw it
    curve = evaluation.recovery_curve(prepared, ranking, sizes, args.n_neighbors)
    meta = {
        "run_config": run_config(args),
        "ranking_method": ranking.method,
        "ranking_params": ranking.params,
        "n_neighbors": args.n_neighbors,
        "metric": "neighbor_recovery",
    }
    evaluation.write_curve(args.output, curve.subset_sizes, curve.recovery, meta)


def cmd_classify(args):
    raw, prepared = load_dataset(args)
    if raw.labels is None:
        raise BluerankError("classify needs labels (--label-column or --labels)")
    if args.folds < 2:
        raise BluerankError(f"--folds must be >= 2, got {args.folds}")
    ranking = _ranking_for(args, raw, prepared)
    counts = _int_list(args.counts) if args.counts else list(range(1, raw.d + 1))
    curve = evaluation.f1_curve(prepared, ranking, counts, args.folds, args.knn_k, args.seed)
    meta = {
        "run_config": run_config(args),
        "ranking_method": ranking.method,
        "ranking_params": ranking.params,
        "classifier": curve.classifier,
        "f1_averaging": "macro",
        "stratified_folds": True,
        "metric": "f1",
    }
    evaluation.write_curve(args.output, curve.feature_counts, curve.f1, meta)


def cmd_mask_image(args):
    ranking = selection.ImportanceRanking.load(args.ranking)
    comment = json.dumps({"run_config": run_config(args), "ranking_method": ranking.method}, sort_keys=True)
    evaluation.export_mask_image(ranking, args.rows, args.cols, args.top, args.output, comment)


def cmd_synth(args):
    ds = dataio.make_planted_dataset(
        args.n, args.informative, args.noise, args.separation, args.noise_scale, args.seed
    )
    dataio.save_csv(ds, args.output)


COMMANDS = {
    "rank": cmd_rank,
    "recover": cmd_recover,
    "classify": cmd_classify,
    "mask-image": cmd_mask_image,
    "synth": cmd_synth,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except (BluerankError, ValueError, OSError) as exc:
        print(f"bluerank {args.command}: error: {exc}".replace("\n", " "), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
