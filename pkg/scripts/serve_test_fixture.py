#!/usr/bin/env python3
"""Build a seeded synthetic corpus, process it with stub backends, and serve
the review API on the given port. Used by the UI round-trip tests and handy
for demoing the review loop without real data."""

import argparse
import tempfile
from pathlib import Path

import uvicorn

from fgdata.models import DetectorConfig
from fgdata.pipeline import PipelineConfig, process_dataset
from fgdata.service import ReviewStore, create_review_app
from fgdata.synthetic import make_corpus


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--port", type=int, default=8151)
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--root", help="workspace dir (default: a fresh temp dir)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-clean", type=int, default=24)
    ap.add_argument("--ui", help="serve built UI assets from this directory")
    args = ap.parse_args()

    root = Path(args.root) if args.root else Path(tempfile.mkdtemp(prefix="fgdata-ui-"))
    info = make_corpus(root / "src", n_clean=args.n_clean, n_classes=3, seed=args.seed)
    config = PipelineConfig(
        detector=DetectorConfig(vocabulary=["object"]),
        source_root=info.root,
        out_root=root / "fg",
    )
    fg, stats = process_dataset(info.manifest, config, parallelism=2)
    store = ReviewStore(fg, config, log_path=root / "decisions.jsonl")
    app = create_review_app(store, ui_dir=Path(args.ui) if args.ui else None)
    print(
        f"fixture server: {stats.processed} records, "
        f"{store.stats()['queue_depth']} pending on http://{args.host}:{args.port}",
        flush=True,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
