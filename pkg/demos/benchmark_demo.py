"""Cross-validation harness, two ways.

First the desk-scale run: the toy-linear probe over stub embeddings on a
synthetic source/foreground pair. Then the shipped reference table with the
three aggregate claims computed from it, including the note where the
published average is not reproduced by the defined cell-mean.
"""

from pathlib import Path

from fgdata.bench import (
    ManifestDataSource,
    ResultsStore,
    make_cross_protocol,
    reference_rows,
    render_claims,
    render_table,
    run_experiment,
    summarize_claims,
    write_report,
)
from fgdata.manifest import save_manifest
from fgdata.models import DetectorConfig
from fgdata.pipeline import PipelineConfig, process_dataset
from fgdata.synthetic import make_corpus

out_dir = Path(__file__).parent / "out" / "bench"
out_dir.mkdir(parents=True, exist_ok=True)

# -- desk-scale protocol on a synthetic pair --------------------------------
# cluttered backgrounds give the foreground variant something to win on
info = make_corpus(
    out_dir / "source", n_clean=48, n_classes=3, seed=5, with_failures=False, clutter=8
)
config = PipelineConfig(
    detector=DetectorConfig(vocabulary=["object"]),
    source_root=info.root,
    out_root=out_dir / "fg",
)
fg_manifest, _ = process_dataset(info.manifest, config, parallelism=4)
save_manifest(info.manifest, out_dir / "corpus.manifest")
save_manifest(fg_manifest, out_dir / "corpus_fg.manifest")

data = ManifestDataSource(
    {
        "corpus": (out_dir / "corpus.manifest", info.root),
        "corpus_fg": (out_dir / "corpus_fg.manifest", out_dir / "fg"),
    }
)
store = ResultsStore(out_dir / "results")
for spec in make_cross_protocol("corpus", "corpus_fg", ["toy-linear"]):
    res = run_experiment(spec, data, store)
    print(
        f"{spec.train_manifest:>10} -> {spec.test_manifest:<10} "
        f"top1 {res.top1_accuracy:5.1f} (n={res.n_test})"
    )

# -- the reference table and its claims --------------------------------------
rows = reference_rows()
print()
print(render_table(rows))
print()
print(render_claims(summarize_claims(rows)))

artifacts = write_report(rows, out_dir / "report")
print(f"\nreport artifacts -> {out_dir / 'report'}")
