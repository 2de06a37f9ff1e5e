"""Command-line entry point.

Subcommands: synth, detect, eval, curate, catalog, pipeline. Every
subcommand supports --format json|text. Exit codes: 0 success, 1
validation/usage error, 2 I/O error.
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path
from typing import Any, Optional

from figharvest import config as config_mod
from figharvest.curate.diff import (
    ErrorBreakdown,
    breakdown_effort,
    diff_pages,
    session_stats,
)
from figharvest.curate.session import SessionStatus, SessionStore
from figharvest.detect import detect_corpus, list_pages, run_adapter
from figharvest.evaluation import evaluate
from figharvest.interchange import (
    labels_as_predictions,
    read_labels_file,
    read_predictions_file,
    write_labels_file,
    write_predictions_file,
)
from figharvest.labels import LabelSource, PageLabels, RegionLabel
from figharvest.synth import compose_corpus, generate_demo_pool, load_asset_pool


class CliParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message: str) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _emit(args: argparse.Namespace, payload: dict[str, Any], text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _load_toml_spec(spec_path: Optional[str], config_path: Optional[str],
                    seed: Optional[int]):
    """PageSpec from --spec TOML (root keys or a [synth] table), config
    file fallback, then flag overrides."""
    base = config_mod.load_config(config_path)
    if spec_path:
        spec_cfg = config_mod.load_config(spec_path)
        section = spec_cfg.get("synth", spec_cfg)
        base = dict(base)
        base["synth"] = section
    return config_mod.page_spec_from(base, seed=seed)


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out)
    spec = _load_toml_spec(args.spec, args.config, args.seed)
    if args.assets:
        manifest = Path(args.assets)
    else:
        manifest = generate_demo_pool(out / "assets", seed=spec.seed)
    pool = load_asset_pool(manifest)
    corpus = compose_corpus(args.pages, spec, pool, out)
    payload = {
        "pages": corpus.n_pages,
        "out": str(out),
        "category_totals": corpus.category_totals,
        "class_totals": corpus.class_totals,
        "dropped_assets": corpus.dropped_assets,
        "labels_digest": corpus.labels_digest,
    }
    placed = sum(corpus.category_totals.values())
    _emit(args, payload,
          f"wrote {corpus.n_pages} pages to {out} "
          f"({placed} assets placed, {corpus.dropped_assets} dropped, "
          f"{corpus.class_totals['figure']} figures, {corpus.class_totals['table']} tables)")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    cfg_file = config_mod.load_config(args.config)
    workers = config_mod.detect_workers(cfg_file, args.workers)
    if args.baseline:
        baseline_cfg = config_mod.baseline_config_from(
            cfg_file, ink_threshold=args.ink_threshold,
            merge_distance=args.merge_distance, min_area=args.min_area)
        preds = detect_corpus(args.pages, baseline_cfg, workers=workers)
        detector = "baseline"
    else:
        preds = run_adapter(args.adapter, args.pages, workers=workers)
        detector = "adapter"
    write_predictions_file(args.out, preds.values())
    total = sum(len(p.predictions) for p in preds.values())
    payload = {"detector": detector, "pages": len(preds), "predictions": total,
               "out": str(args.out)}
    _emit(args, payload,
          f"{detector}: {total} predictions on {len(preds)} pages -> {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg_file = config_mod.load_config(args.config)
    cfg = config_mod.eval_config_from(
        cfg_file, iou_threshold=args.iou,
        allow_multibox=(False if args.no_multibox else None))
    gt_pages = read_labels_file(args.gt)
    pred_pages = read_predictions_file(args.pred)
    report = evaluate(gt_pages, pred_pages, cfg)
    if args.report:
        report.write_json(args.report)
    if report.divergences:
        print(f"note: {len(report.divergences)} greedy-vs-optimal matching "
              f"divergence(s) recorded in the report", file=sys.stderr)
    _emit(args, report.to_json_dict(include_pages=False), report.summary_line())
    return 0


def _session_base_from_predictions(path: str) -> tuple[dict[str, list[RegionLabel]], int]:
    pred_pages = read_predictions_file(path)
    base = {}
    total = 0
    for page_id, pset in pred_pages.items():
        labels = [
            RegionLabel(label_id=f"m{idx:04d}", bbox=p.bbox, cls=p.cls,
                        source=LabelSource.MACHINE)
            for idx, p in enumerate(pset.predictions)
        ]
        base[page_id] = labels
        total += len(labels)
    return base, total


def cmd_curate_init(args: argparse.Namespace) -> int:
    from PIL import Image

    pages = list_pages(args.pages)
    page_ids = {pid for pid, _ in pages}
    base, n_labels = _session_base_from_predictions(args.machine)
    unknown = sorted(set(base) - page_ids)
    if unknown:
        raise ValueError(f"machine labels reference pages missing from "
                         f"{args.pages}: {unknown[:5]}")
    for pid, _ in pages:
        base.setdefault(pid, [])
    base = {pid: base[pid] for pid, _ in pages}
    with Image.open(pages[0][1]) as first:
        page_size = first.size
    raster_dir = str(pages[0][1].parent.resolve())
    doc_id = args.doc_id or Path(args.pages).resolve().name
    store = SessionStore(args.store)
    store.create(doc_id, page_size, base, raster_dir=raster_dir, year=args.year)
    payload = {"doc_id": doc_id, "pages": len(base), "machine_labels": n_labels,
               "store": str(args.store)}
    _emit(args, payload,
          f"created session '{doc_id}' with {len(base)} pages, "
          f"{n_labels} machine labels")
    return 0


def cmd_curate_serve(args: argparse.Namespace) -> int:
    from figharvest.curate.server import serve

    serve(args.store, args.port, host=args.host)
    return 0


def cmd_curate_diff(args: argparse.Namespace) -> int:
    cfg_file = config_mod.load_config(args.config)
    cfg = config_mod.eval_config_from(cfg_file, iou_threshold=args.iou)
    machine = {pid: page.labels for pid, page in
               read_labels_file(args.machine, source=LabelSource.MACHINE).items()}
    curated = {pid: page.labels for pid, page in
               read_labels_file(args.curated).items()}
    per_page = diff_pages(machine, curated, cfg)
    merged = ErrorBreakdown()
    for bd in per_page.values():
        merged.extend(bd)
    totals = merged.counts()
    effort = breakdown_effort(merged)
    payload = {"pages": len(per_page), "totals": totals, "effort_percent": effort}
    text = (f"{len(per_page)} pages: "
            + " ".join(f"{k}={v}" for k, v in totals.items())
            + f" effort={effort:.2f}%")
    _emit(args, payload, text)
    return 0


def cmd_curate_export(args: argparse.Namespace) -> int:
    store = SessionStore(args.store)
    session = store.load(args.doc_id)
    current = session.current_labels()
    pages = [PageLabels(page_id=pid, labels=current[pid]) for pid in session.page_ids]
    write_labels_file(args.out, pages)
    total = sum(len(p.labels) for p in pages)
    payload = {"doc_id": args.doc_id, "pages": len(pages), "labels": total,
               "out": str(args.out)}
    _emit(args, payload, f"exported {total} labels on {len(pages)} pages -> {args.out}")
    return 0


def cmd_curate_stats(args: argparse.Namespace) -> int:
    store = SessionStore(args.store)
    sessions = [store.load(doc_id) for doc_id in store.list_ids()]
    stats = session_stats(sessions)
    payload = stats.to_json_dict()
    text = (f"{stats.n_sessions} sessions / {stats.n_pages} pages: "
            + " ".join(f"{k}={v}" for k, v in stats.histogram.items())
            + f" effort={stats.effort_percent:.2f}% "
            f"fine_tune={stats.fine_tune_rate:.3f}")
    _emit(args, payload, text)
    return 0


def cmd_catalog_ingest(args: argparse.Namespace) -> int:
    from figharvest.catalog import CatalogConfig, ingest, save_catalog

    cfg = CatalogConfig(year_min=args.year_min, year_max=args.year_max,
                        stemming=args.stemming)
    catalog, report = ingest(args.papers, args.images, cfg)
    save_catalog(catalog, args.store)
    payload = {**report.to_json_dict(), "digest": catalog.digest(),
               "store": str(args.store)}
    lines = [f"ingested {report.n_papers} papers, {report.n_images} images -> {args.store}"]
    for w in report.warnings:
        lines.append(f"warning: {w}")
    for r in report.rejected_images:
        lines.append(f"rejected: {r}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_catalog_query(args: argparse.Namespace) -> int:
    from figharvest.catalog import Query, TermMode, load_catalog

    catalog = load_catalog(args.store)
    year_range = None
    if args.year_min is not None or args.year_max is not None:
        year_range = (args.year_min if args.year_min is not None else -10**9,
                      args.year_max if args.year_max is not None else 10**9)
    q = Query(
        terms=args.terms,
        term_mode=TermMode(args.mode),
        authors=args.authors,
        venues=frozenset(args.venues.split(",")) if args.venues else None,
        year_range=year_range,
        image_type=args.type,
    )
    results = catalog.search(q)
    shown = results[:args.limit] if args.limit else results
    payload = {"count": len(results),
               "results": [img.to_record() for img in shown]}
    lines = [f"{len(results)} images"]
    for img in shown:
        paper = catalog.papers[img.doi]
        lines.append(f"  {img.image_id}  {img.type.value}  {paper.year}  "
                     f"{paper.venue}  {img.doi}#{img.in_paper_index}")
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_catalog_stats(args: argparse.Namespace) -> int:
    from figharvest.catalog import load_catalog

    catalog = load_catalog(args.store)
    full = catalog.stats()
    totals = full["totals"]
    text = (f"{totals['papers']} papers, {totals['images']} images "
            f"({totals['figures']} figures + {totals['tables']} tables), "
            f"avg {totals['avg_images_per_page']:.3f} images/page\n"
            + " ".join(f"{v}={full['by_venue'][v]}" for v in full["by_venue"]))
    _emit(args, full, text)
    return 0


def cmd_catalog_serve(args: argparse.Namespace) -> int:
    from figharvest.catalog.server import serve

    serve(args.store, args.port, host=args.host)
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg_file = config_mod.load_config(args.config)
    spec = config_mod.page_spec_from(cfg_file, seed=args.seed)
    eval_cfg = config_mod.eval_config_from(
        cfg_file, iou_threshold=args.iou,
        allow_multibox=(False if args.no_multibox else None))
    baseline_cfg = config_mod.baseline_config_from(cfg_file)
    workers = config_mod.detect_workers(cfg_file, args.workers)

    with tempfile.TemporaryDirectory(prefix="figharvest-pipeline-") as scratch:
        out = Path(args.out) if args.out else Path(scratch)
        manifest = generate_demo_pool(out / "assets", seed=spec.seed)
        pool = load_asset_pool(manifest)
        corpus = compose_corpus(args.pages, spec, pool, out / "corpus")
        preds = detect_corpus(out / "corpus", baseline_cfg, workers=workers)
        preds_path = out / "predictions.jsonl"
        write_predictions_file(preds_path, preds.values())
        gt_pages = read_labels_file(out / "corpus" / "labels.jsonl")
        report = evaluate(gt_pages, read_predictions_file(preds_path), eval_cfg)
        if args.report:
            report.write_json(args.report)

    payload = {
        "pages": args.pages,
        "seed": spec.seed,
        "gt_labels": sum(corpus.class_totals.values()),
        "predictions": sum(len(p.predictions) for p in preds.values()),
        **report.to_json_dict(include_pages=False),
    }
    _emit(args, payload, report.summary_line())
    return 0


def build_parser() -> CliParser:
    parser = CliParser(prog="figharvest",
                       description="Figure/table harvesting toolkit: synthesize "
                                   "pages, detect regions, grade detections, "
                                   "curate labels, browse the catalog.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text",
                        help="output format (default: text)")
    common.add_argument("--config", default=None,
                        help=f"TOML config path (default: ${config_mod.ENV_VAR})")

    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--spec", default=None, help="page spec TOML")
    p.add_argument("--assets", default=None,
                   help="asset manifest JSONL (default: generate a demo pool)")
    p.add_argument("--pages", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", parents=[common], help="run a detector over pages")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--baseline", action="store_true",
                       help="use the built-in rule-based detector")
    group.add_argument("--adapter", default=None, metavar="'CMD {page} {out}'",
                       help="external detector command template")
    p.add_argument("--pages", required=True, help="corpus dir or raster dir")
    p.add_argument("--out", required=True, help="predictions JSONL to write")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--ink-threshold", type=int, default=None)
    p.add_argument("--merge-distance", type=int, default=None)
    p.add_argument("--min-area", type=int, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", parents=[common], help="grade predictions against ground truth")
    p.add_argument("--gt", required=True, help="ground-truth labels JSONL")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--iou", type=float, default=None)
    p.add_argument("--no-multibox", action="store_true",
                   help="disable composite multi-box credit")
    p.add_argument("--report", default=None, help="write full JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("curate", help="curation sessions")
    curate_sub = p.add_subparsers(dest="curate_command", required=True, metavar="ACTION")

    c = curate_sub.add_parser("init", parents=[common],
                              help="create a session from machine predictions")
    c.add_argument("--store", required=True)
    c.add_argument("--machine", required=True, help="machine predictions JSONL")
    c.add_argument("--pages", required=True, help="corpus dir or raster dir")
    c.add_argument("--doc-id", default=None)
    c.add_argument("--year", type=int, default=None)
    c.set_defaults(func=cmd_curate_init)

    c = curate_sub.add_parser("serve", parents=[common], help="serve the curation API")
    c.add_argument("--store", required=True)
    c.add_argument("--port", type=int, required=True)
    c.add_argument("--host", default="127.0.0.1")
    c.set_defaults(func=cmd_curate_serve)

    c = curate_sub.add_parser("diff", parents=[common],
                              help="classify machine vs curated labels")
    c.add_argument("--machine", required=True, help="machine labels JSONL")
    c.add_argument("--curated", required=True, help="curated labels JSONL")
    c.add_argument("--iou", type=float, default=None)
    c.set_defaults(func=cmd_curate_diff)

    c = curate_sub.add_parser("export", parents=[common],
                              help="write a session's current labels")
    c.add_argument("--store", required=True)
    c.add_argument("--doc-id", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_curate_export)

    c = curate_sub.add_parser("stats", parents=[common],
                              help="aggregate effort/error stats over sessions")
    c.add_argument("--store", required=True)
    c.set_defaults(func=cmd_curate_stats)

    p = sub.add_parser("catalog", help="metadata catalog")
    cat_sub = p.add_subparsers(dest="catalog_command", required=True, metavar="ACTION")

    c = cat_sub.add_parser("ingest", parents=[common], help="build a catalog store")
    c.add_argument("--papers", required=True)
    c.add_argument("--images", required=True)
    c.add_argument("--store", required=True)
    c.add_argument("--year-min", type=int, default=1990)
    c.add_argument("--year-max", type=int, default=2019)
    c.add_argument("--stemming", action="store_true")
    c.set_defaults(func=cmd_catalog_ingest)

    c = cat_sub.add_parser("query", parents=[common], help="search the catalog")
    c.add_argument("--store", required=True)
    c.add_argument("--terms", default=None)
    c.add_argument("--mode", choices=("title_and_abstract", "author_keywords"),
                   default="title_and_abstract")
    c.add_argument("--authors", default=None)
    c.add_argument("--venues", default=None, help="comma-separated subset")
    c.add_argument("--year-min", type=int, default=None)
    c.add_argument("--year-max", type=int, default=None)
    c.add_argument("--type", choices=("figure", "table", "both"), default="both")
    c.add_argument("--limit", type=int, default=None)
    c.set_defaults(func=cmd_catalog_query)

    c = cat_sub.add_parser("stats", parents=[common], help="catalog statistics")
    c.add_argument("--store", required=True)
    c.set_defaults(func=cmd_catalog_stats)

    c = cat_sub.add_parser("serve", parents=[common], help="serve the catalog API")
    c.add_argument("--store", required=True)
    c.add_argument("--port", type=int, required=True)
    c.add_argument("--host", default="127.0.0.1")
    c.set_defaults(func=cmd_catalog_serve)

    p = sub.add_parser("pipeline", parents=[common],
                       help="synth -> baseline detect -> eval in one go")
    p.add_argument("--pages", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None,
                   help="keep artifacts here (default: temp dir)")
    p.add_argument("--iou", type=float, default=None)
    p.add_argument("--no-multibox", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
