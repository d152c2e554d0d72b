"""Command-line pipeline: select-ccf / localize / eval / all.

The three stages write and read plain files (ccf.json, results.json,
report.json/.csv), so ablation runs can recombine cached intermediates.
All randomness flows from the single --seed flag, and two runs with the
same configuration and inputs produce byte-identical outputs.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import CcflocError
from .evaluation import corloc
from .features import (
    build_activation_matrix,
    cluster_kernels,
    load_ccf_set,
    save_ccf_set,
    select_ccfs,
    select_ccfs_top_k,
)
from .propagation import LocalizeParams, localize_image, write_pgm
from .tensor_store import Box, load_manifest, load_tensor, save_tensor


@dataclass
class RunConfig:
    manifest: str = ""
    ccf: str = ""
    results: str = ""
    out: str = "out"
    k_clusters: int = 5
    rank: int = 1
    top_k: int = 1
    mu: float = 1.0
    threshold: float = 0.25
    superpixels: int = 300
    compactness: float = 10.0
    seed: int = 0
    propagation_enabled: bool = True
    largest_component: bool = False
    dump_maps: bool = False
    workers: int = 1
    iou_threshold: float = 0.5

    def validate(self):
        if self.k_clusters < 1:
            raise CcflocError("--k-clusters must be >= 1")
        if not 1 <= self.rank <= self.k_clusters:
            raise CcflocError("--rank must lie in [1, k_clusters]")
        if not 1 <= self.top_k <= self.k_clusters:
            raise CcflocError("--top-k must lie in [1, k_clusters]")
        if self.rank > 1 and self.top_k > 1:
            raise CcflocError("--rank and --top-k are mutually exclusive")
        if self.mu <= 0:
            raise CcflocError("--mu must be > 0")
        if not 0.0 < self.threshold <= 1.0:
            raise CcflocError("--threshold must lie in (0, 1]")
        if self.superpixels < 1:
            raise CcflocError("--superpixels must be >= 1")
        if self.compactness <= 0:
            raise CcflocError("--compactness must be > 0")
        if self.workers < 1:
            raise CcflocError("--workers must be >= 1")
        if not 0.0 < self.iou_threshold < 1.0:
            raise CcflocError("--iou-threshold must lie in (0, 1)")

    def localize_params(self):
        return LocalizeParams(
            mu=self.mu,
            threshold=self.threshold,
            target_count=self.superpixels,
            compactness=self.compactness,
            seed=self.seed,
            propagation_enabled=self.propagation_enabled,
            largest_component=self.largest_component,
        )


def cmd_select_ccf(config):
    config.validate()
    manifest = load_manifest(config.manifest)
    stacks = {e.id: load_tensor(e.features_path) for e in manifest.images}
    matrix = build_activation_matrix(manifest, stacks)
    clustering = cluster_kernels(matrix, config.k_clusters, config.seed)
    if config.top_k > 1:
        ccf_set = select_ccfs_top_k(clustering, config.top_k)
    else:
        ccf_set = select_ccfs(clustering, config.rank)

    os.makedirs(config.out, exist_ok=True)
    ccf_path = os.path.join(config.out, "ccf.json")
    save_ccf_set(ccf_path, ccf_set, clustering, manifest.class_name, config.seed)

    print(f"class {manifest.class_name}: {matrix.shape[0]} kernels, "
          f"{matrix.shape[1]} images")
    print("rank  cluster  kernels  mean_activation")
    for r, c in enumerate(clustering.ranking, start=1):
        n_members = int((clustering.assignment == c).sum())
        print(f"{r:>4}  {int(c):>7}  {n_members:>7}  {clustering.cluster_scores[c]:>15.4f}")
    print(f"selected {len(ccf_set.kernel_ids)} kernels -> {ccf_path}")
    return ccf_path


def _localize_one(args):
    entry, ccf_set, params, maps_dir = args
    try:
        result = localize_image(entry, ccf_set, params)
    except Exception as exc:  # per-image failures are recorded, not fatal
        return {"id": entry.id, "pred_box": None, "degenerate": True,
                "error": str(exc)}
    if maps_dir is not None:
        save_tensor(
            os.path.join(maps_dir, entry.id + ".ccft"),
            result.likelihood_map.astype("float32"),
        )
        write_pgm(os.path.join(maps_dir, entry.id + ".pgm"), result.likelihood_map)
    box = list(result.pred_box.as_tuple()) if result.pred_box else None
    return {"id": entry.id, "pred_box": box, "degenerate": result.degenerate}


def cmd_localize(config):
    config.validate()
    manifest = load_manifest(config.manifest)
    ccf_set = load_ccf_set(config.ccf)
    params = config.localize_params()

    os.makedirs(config.out, exist_ok=True)
    maps_dir = None
    if config.dump_maps:
        maps_dir = os.path.join(config.out, "maps")
        os.makedirs(maps_dir, exist_ok=True)

    jobs = [(entry, ccf_set, params, maps_dir) for entry in manifest.images]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_localize_one, jobs))
    else:
        records = [_localize_one(job) for job in jobs]
    order = {entry.id: i for i, entry in enumerate(manifest.images)}
    records.sort(key=lambda r: order[r["id"]])

    results_path = os.path.join(config.out, "results.json")
    with open(results_path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
    n_boxed = sum(1 for r in records if r["pred_box"])
    n_failed = sum(1 for r in records if "error" in r)
    print(f"localized {len(records)} images ({n_boxed} boxes, "
          f"{n_failed} errors) -> {results_path}")
    return results_path


def cmd_eval(config):
    config.validate()
    manifest = load_manifest(config.manifest)
    with open(config.results, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    predictions = {}
    for rec in records:
        box = rec.get("pred_box")
        predictions[rec["id"]] = Box(*box) if box else None

    report = corloc(predictions, manifest, config.iou_threshold)

    os.makedirs(config.out, exist_ok=True)
    json_path = os.path.join(config.out, "report.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    csv_path = os.path.join(config.out, "report.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("class,n_images,corloc\n")
        fh.write(report.csv_row() + "\n")
    print(f"CorLoc {report.corloc:.2f} ({report.n_correct}/{report.n_images}) "
          f"-> {json_path}")
    return json_path


def cmd_all(config):
    ccf_path = cmd_select_ccf(config)
    config.ccf = ccf_path
    results_path = cmd_localize(config)
    config.results = results_path
    return cmd_eval(config)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ccfloc",
        description="Object co-localization: consistent-feature selection "
        "plus geodesic activation propagation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_manifest=True):
        p.add_argument("--manifest", required=need_manifest,
                       help="dataset manifest JSON")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("select-ccf", help="pick the consistent kernel set")
    common(p)
    p.add_argument("--k-clusters", type=int, default=5)
    p.add_argument("--rank", type=int, default=1,
                   help="which ranked cluster to take (1 = best)")
    p.add_argument("--top-k", type=int, default=1,
                   help="union of the clusters at ranks 1..k")

    p = sub.add_parser("localize", help="produce per-image boxes")
    common(p)
    p.add_argument("--ccf", required=True, help="ccf.json from select-ccf")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--superpixels", type=int, default=300)
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--no-propagation", action="store_true")
    p.add_argument("--largest-component", action="store_true")
    p.add_argument("--dump-maps", action="store_true")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("eval", help="CorLoc report from results.json")
    common(p)
    p.add_argument("--results", required=True, help="results.json from localize")
    p.add_argument("--iou-threshold", type=float, default=0.5)

    p = sub.add_parser("all", help="select-ccf + localize + eval")
    common(p)
    p.add_argument("--k-clusters", type=int, default=5)
    p.add_argument("--rank", type=int, default=1)
    p.add_argument("--top-k", type=int, default=1)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=0.25)
    p.add_argument("--superpixels", type=int, default=300)
    p.add_argument("--compactness", type=float, default=10.0)
    p.add_argument("--no-propagation", action="store_true")
    p.add_argument("--largest-component", action="store_true")
    p.add_argument("--dump-maps", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--iou-threshold", type=float, default=0.5)

    return parser


def _config_from_args(args):
    config = RunConfig()
    mapping = {
        "manifest": "manifest", "ccf": "ccf", "results": "results",
        "out": "out", "k_clusters": "k_clusters", "rank": "rank",
        "top_k": "top_k", "mu": "mu", "threshold": "threshold",
        "superpixels": "superpixels", "compactness": "compactness",
        "seed": "seed", "largest_component": "largest_component",
        "dump_maps": "dump_maps", "workers": "workers",
        "iou_threshold": "iou_threshold",
    }
    for arg_name, field_name in mapping.items():
        if hasattr(args, arg_name) and getattr(args, arg_name) is not None:
            setattr(config, field_name, getattr(args, arg_name))
    if getattr(args, "no_propagation", False):
        config.propagation_enabled = False
    return config


def main(argv=None):
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    handlers = {
        "select-ccf": cmd_select_ccf,
        "localize": cmd_localize,
        "eval": cmd_eval,
        "all": cmd_all,
    }
    try:
        handlers[args.command](config)
    except CcflocError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
