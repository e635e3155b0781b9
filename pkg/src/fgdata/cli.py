"""Command-line entry point.

Subcommands: ingest, process, review-serve, export, expand (contours /
histogram / replace-bg), bench (run / report), analyze (tsne / cam).
Exit codes: 0 success, 1 runtime failure (diagnostic on stderr), 2 usage.
Every command prints the resolved configuration digest.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .analyze import TsneConfig, compare_distributions, tsne_embed, cluster_metrics
from .bench import (
    ManifestDataSource,
    ResultsStore,
    make_cross_protocol,
    reference_rows,
    run_experiment,
    write_report,
)
from .config import RunConfig, load_run_config
from .expand import extract_contours, foreground_histogram, histogram_csv_rows, replace_background
from .gradcam import TinyConvNet, grad_cam
from .images import load_image, save_image
from .ingest import load_source_dataset
from .manifest import load_manifest, save_manifest
from .models import extract_features
from .pipeline import PipelineConfig, export_release, process_dataset
from .service import ReviewStore, create_review_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fgdata",
        description="foreground-only dataset engineering: build, review, expand, evaluate",
    )
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="config override (repeatable)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a manifest from a source dataset tree")
    p.add_argument("--kind", required=True, choices=["cub", "cars", "aircraft", "generic"])
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name")

    p = sub.add_parser("process", help="run detect/segment/composite over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--source-root", required=True)
    p.add_argument("--out-root", required=True)
    p.add_argument("--out", required=True, help="output foreground manifest path")
    p.add_argument("--detector", help="detector backend id override")
    p.add_argument("--segmenter", help="segmenter backend id override")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--stats-out", help="write pipeline stats JSON here")

    p = sub.add_parser("review-serve", help="serve the review API and UI")
    p.add_argument("--manifest", required=True)
    p.add_argument("--source-root", required=True)
    p.add_argument("--out-root", required=True)
    p.add_argument("--log", help="decision log path (default <manifest>.decisions.jsonl)")
    p.add_argument("--ui", help="directory of built UI assets")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("export", help="materialize the release foreground dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--source-root", required=True)
    p.add_argument("--out-root", required=True)
    p.add_argument("--out", required=True, help="release manifest path")
    p.add_argument("--policy", choices=["drop", "keep-source"], default="drop")

    p = sub.add_parser("expand", help="modality expansion utilities")
    ex = p.add_subparsers(dest="expand_command", required=True)

    q = ex.add_parser("contours", help="trace mask boundary polygons")
    q.add_argument("--manifest", required=True)
    q.add_argument("--record", required=True)
    q.add_argument("--out", required=True, help="JSON output path")

    q = ex.add_parser("histogram", help="foreground color histogram as CSV")
    q.add_argument("--manifest", required=True)
    q.add_argument("--record", required=True)
    q.add_argument("--source-root", required=True)
    q.add_argument("--bins", type=int, default=8)
    q.add_argument("--out", required=True)

    q = ex.add_parser("replace-bg", help="re-composite a record onto a new background")
    q.add_argument("--manifest", required=True)
    q.add_argument("--record", required=True)
    q.add_argument("--source-root", required=True)
    q.add_argument("--background", required=True)
    q.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="cross-validation experiments")
    bench_sub = p.add_subparsers(dest="bench_command", required=True)

    q = bench_sub.add_parser("run", help="run the 4-way protocol on a manifest pair")
    q.add_argument("--source-manifest", required=True)
    q.add_argument("--source-images", required=True)
    q.add_argument("--fg-manifest", required=True)
    q.add_argument("--fg-images", required=True)
    q.add_argument("--backbones", default="toy-linear", help="comma-separated backend ids")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--results", required=True, help="results store directory")
    q.add_argument("--workers", type=int, default=1)

    q = bench_sub.add_parser("report", help="render table, claims, charts")
    q.add_argument("--results", help="results store directory (omit with --reference)")
    q.add_argument("--reference", action="store_true", help="use the shipped reference table")
    q.add_argument("--out-dir", required=True)

    p = sub.add_parser("analyze", help="feature distribution and saliency analysis")
    an = p.add_subparsers(dest="analyze_command", required=True)

    q = an.add_parser("tsne", help="project a manifest's embeddings to 2-D")
    q.add_argument("--manifest", required=True)
    q.add_argument("--images", required=True)
    q.add_argument("--subset", required=True, choices=["train", "test", "all"])
    q.add_argument("--compare-manifest", help="optional foreground manifest for side-by-side")
    q.add_argument("--compare-images")
    q.add_argument("--out-dir", required=True)

    q = an.add_parser("cam", help="class activation heatmap with the bundled toy model")
    q.add_argument("--image", required=True)
    q.add_argument("--target", type=int, default=0)
    q.add_argument("--layer", default="conv2")
    q.add_argument("--model-seed", type=int, default=0)
    q.add_argument("--out", required=True)

    return parser


def _pipeline_config(cfg: RunConfig, args, source_root, out_root) -> PipelineConfig:
    detector = cfg.detector
    if getattr(args, "detector", None):
        detector = type(detector)(**{**detector.__dict__, "backend_id": args.detector})
    segmenter = cfg.segmenter
    if getattr(args, "segmenter", None):
        segmenter = type(segmenter)(**{**segmenter.__dict__, "backend_id": args.segmenter})
    return PipelineConfig(
        detector=detector,
        segmenter=segmenter,
        composite=cfg.composite,
        thresholds=cfg.thresholds,
        source_root=Path(source_root),
        out_root=Path(out_root),
        config_digest=cfg.digest(),
    )


def _manifest_features(manifest, images_root, subset, extractor):
    records = [
        r
        for r in manifest.subset(subset)
        if (Path(images_root) / (r.fg_path or r.source_path)).exists()
    ]
    images = [load_image(Path(images_root) / (r.fg_path or r.source_path)) for r in records]
    feats = extract_features(images, extractor)
    labels = np.array([r.class_id for r in records])
    return feats, labels


def _cmd_ingest(args, cfg: RunConfig) -> int:
    errors: list[str] = []
    manifest = load_source_dataset(args.root, args.kind, name=args.name, errors=errors)
    manifest.provenance["config_digest"] = cfg.digest()
    save_manifest(manifest, args.out)
    for err in errors:
        print(f"warning: {err}", file=sys.stderr)
    print(
        f"ingested {len(manifest.records)} records, {len(manifest.classes)} classes -> {args.out}"
    )
    return 0


def _cmd_process(args, cfg: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    pipe_cfg = _pipeline_config(cfg, args, args.source_root, args.out_root)
    fg, stats = process_dataset(manifest, pipe_cfg, parallelism=args.workers)
    save_manifest(fg, args.out)
    print(
        f"processed {stats.processed}: {stats.clean} clean, {stats.flagged} flagged "
        f"({stats.images_per_second:.1f} images/s)"
    )
    for kind, count in sorted(stats.per_flag.items()):
        print(f"  {kind}: {count}")
    if args.stats_out:
        Path(args.stats_out).write_text(json.dumps(stats.__dict__, indent=1))
    print(f"foreground manifest -> {args.out}")
    return 0


def _cmd_review_serve(args, cfg: RunConfig) -> int:
    import uvicorn

    manifest = load_manifest(args.manifest)
    pipe_cfg = _pipeline_config(cfg, args, args.source_root, args.out_root)
    log_path = args.log or f"{args.manifest}.decisions.jsonl"
    store = ReviewStore(manifest, pipe_cfg, log_path, manifest_path=Path(args.manifest))
    ui_dir = Path(args.ui) if args.ui else _default_ui_dir()
    app = create_review_app(store, ui_dir=ui_dir)
    print(f"review queue: {store.stats()['queue_depth']} pending")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _default_ui_dir():
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def _cmd_export(args, cfg: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    pipe_cfg = _pipeline_config(cfg, args, args.source_root, args.out_root)
    released = export_release(manifest, pipe_cfg, policy=args.policy)
    save_manifest(released, args.out)
    print(f"released {len(released.records)}/{len(manifest.records)} records -> {args.out}")
    return 0


def _cmd_expand(args, cfg: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    record = manifest.record_by_id(args.record)
    if args.expand_command == "contours":
        if record.mask is None:
            print(f"record {args.record!r} has no mask", file=sys.stderr)
            return 1
        contours = extract_contours(record.mask)
        payload = {
            "record_id": record.record_id,
            "polygons": [p.tolist() for p in contours.polygons],
            "areas": contours.areas,
        }
        Path(args.out).write_text(json.dumps(payload, indent=1))
        print(f"{len(contours.polygons)} polygon(s) -> {args.out}")
        return 0
    if args.expand_command == "histogram":
        if record.mask is None:
            print(f"record {args.record!r} has no mask", file=sys.stderr)
            return 1
        image = load_image(Path(args.source_root) / record.source_path)
        hist = foreground_histogram(image.pixels, record.mask, args.bins)
        with open(args.out, "w") as fh:
            fh.write("r_bin,g_bin,b_bin,count\n")
            for row in histogram_csv_rows(hist):
                fh.write(",".join(str(v) for v in row) + "\n")
        print(f"histogram over {hist.total} foreground pixels -> {args.out}")
        return 0
    # replace-bg
    if record.mask is None:
        print(f"record {args.record!r} has no mask", file=sys.stderr)
        return 1
    image = load_image(Path(args.source_root) / record.source_path)
    background = load_image(args.background)
    if background.pixels.shape != image.pixels.shape:
        from PIL import Image as PILImage

        resized = PILImage.fromarray(background.pixels).resize(
            (image.width, image.height), PILImage.BILINEAR
        )
        background_pixels = np.asarray(resized)
    else:
        background_pixels = background.pixels
    out = replace_background(image.pixels, record.mask, background_pixels)
    save_image(out, args.out)
    print(f"composited onto new background -> {args.out}")
    return 0


def _cmd_bench(args, cfg: RunConfig) -> int:
    if args.bench_command == "run":
        source_manifest = load_manifest(args.source_manifest)
        fg_manifest = load_manifest(args.fg_manifest)
        data = ManifestDataSource(
            {
                source_manifest.name: (args.source_manifest, args.source_images),
                fg_manifest.name: (args.fg_manifest, args.fg_images),
            },
            extractor=cfg.extractor,
        )
        store = ResultsStore(args.results)
        backbones = [b.strip() for b in args.backbones.split(",") if b.strip()]
        specs = make_cross_protocol(
            source_manifest.name, fg_manifest.name, backbones, args.seed, cfg.bench
        )
        for spec in specs:
            result = run_experiment(spec, data, store)
            print(
                f"{spec.train_manifest} -> {spec.test_manifest} [{spec.backbone_id}] "
                f"top1 {result.top1_accuracy:.1f} (n={result.n_test})"
            )
        return 0
    # report
    if args.reference:
        rows = reference_rows()
    else:
        if not args.results:
            print("bench report needs --results or --reference", file=sys.stderr)
            return 2
        rows = ResultsStore(args.results).rows()
        if not rows:
            print(f"no results found under {args.results}", file=sys.stderr)
            return 1
    artifacts = write_report(rows, args.out_dir)
    print((artifacts["table_txt"]).read_text())
    print((artifacts["claims_txt"]).read_text())
    print(f"report artifacts -> {args.out_dir}")
    return 0


def _cmd_analyze(args, cfg: RunConfig) -> int:
    if args.analyze_command == "tsne":
        manifest = load_manifest(args.manifest)
        feats, labels = _manifest_features(manifest, args.images, args.subset, cfg.extractor)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.compare_manifest:
            other = load_manifest(args.compare_manifest)
            other_feats, other_labels = _manifest_features(
                other, args.compare_images or args.images, args.subset, cfg.extractor
            )
            source_rep, fg_rep, artifacts = compare_distributions(
                feats, labels, other_feats, other_labels, cfg.tsne, out_dir=args.out_dir
            )
            (out / "cluster_reports.json").write_text(
                json.dumps({"source": source_rep.__dict__, "compare": fg_rep.__dict__}, indent=1)
            )
            print(f"source silhouette: {source_rep.silhouette:.4f}")
            print(f"compare silhouette: {fg_rep.silhouette:.4f}")
        else:
            result = tsne_embed(feats, cfg.tsne)
            report = cluster_metrics(result.embedding, labels)
            with open(out / "tsne_points.csv", "w") as fh:
                fh.write("x,y,label\n")
                for (x, y), lab in zip(result.embedding, labels):
                    fh.write(f"{x:.6f},{y:.6f},{lab}\n")
            (out / "cluster_reports.json").write_text(
                json.dumps({"projection": report.__dict__}, indent=1)
            )
            print(f"KL {result.kl_initial:.3f} -> {result.kl_final:.3f}")
            print(f"2-D silhouette: {report.silhouette:.4f}")
        print(f"artifacts -> {args.out_dir}")
        return 0
    # cam
    image = load_image(args.image)
    gray = image.pixels.astype(np.float64).mean(axis=2) / 255.0
    model = TinyConvNet(seed=args.model_seed)
    comp = grad_cam(model, gray, args.target, args.layer)
    heat = (comp.heatmap * 255).astype(np.uint8)
    rgb = np.stack([heat, np.zeros_like(heat), 255 - heat], axis=2)
    blended = (0.6 * image.pixels + 0.4 * rgb).astype(np.uint8)
    save_image(blended, args.out)
    status = "degenerate (all-zero)" if comp.degenerate else "ok"
    print(f"cam {status}; heatmap overlay -> {args.out}")
    return 0


COMMANDS = {
    "ingest": _cmd_ingest,
    "process": _cmd_process,
    "review-serve": _cmd_review_serve,
    "export": _cmd_export,
    "expand": _cmd_expand,
    "bench": _cmd_bench,
    "analyze": _cmd_analyze,
}


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_run_config(args.config, args.overrides)
        print(f"config digest: {cfg.digest()}")
        return COMMANDS[args.command](args, cfg)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # single reporting point for runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
