"""Walk the human review loop: queue, decisions, log replay.

The same flow runs in the browser against `fgdata review-serve`; here the
decisions are applied directly so the state machine is easy to watch.
"""

from pathlib import Path

from fgdata.manifest import BoundingBox, save_manifest
from fgdata.models import DetectorConfig
from fgdata.pipeline import PipelineConfig, process_dataset
from fgdata.qa import enqueue_flagged
from fgdata.review import DecisionLog, ReviewDecision, apply_decision, replay_decisions
from fgdata.synthetic import make_corpus

out_dir = Path(__file__).parent / "out" / "review"
out_dir.mkdir(parents=True, exist_ok=True)

info = make_corpus(out_dir / "source", n_clean=12, n_classes=3, seed=3)
config = PipelineConfig(
    detector=DetectorConfig(vocabulary=["object"]),
    source_root=info.root,
    out_root=out_dir / "fg",
)
manifest, _ = process_dataset(info.manifest, config)
pristine = manifest.copy()

queue = enqueue_flagged(manifest)
print(f"review queue ({len(queue)} pending):")
for rec in queue:
    print(f"  {rec.record_id}: {[f.kind.value for f in rec.flags]}")

log = DecisionLog(out_dir / "decisions.jsonl")

# the blank image really has no subject: reject it
d = ReviewDecision("train/ruby/fail_blank.png", "reject", reviewer="demo")
apply_decision(d, manifest, config)
log.append(d)

# the over-segmented one just needs a tighter prompt: draw a corrective box
d = ReviewDecision(
    "train/gold/fail_full_mask.png",
    "reprompt",
    manual_box=BoundingBox(12, 12, 36, 32),
    reviewer="demo",
)
rec = apply_decision(d, manifest, config)
log.append(d)
print(f"reprompt -> review={rec.review.value}, mask area {rec.mask.area}")

# the mislabeled detection still segmented the right pixels: accept as-is
d = ReviewDecision("train/teal/fail_wrong_label.png", "accept", reviewer="demo")
apply_decision(d, manifest, config)
log.append(d)

print(f"queue now: {len(enqueue_flagged(manifest))} pending")

# the manifest state is a pure fold over the decision log
replayed = replay_decisions(pristine, log.read_all(), config)
save_manifest(manifest, out_dir / "after.manifest")
save_manifest(replayed, out_dir / "replayed.manifest")
same = (out_dir / "after.manifest").read_bytes() == (out_dir / "replayed.manifest").read_bytes()
print(f"log replay reproduces state byte-for-byte: {same}")
