import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgdata.manifest import (
    BoundingBox,
    DatasetManifest,
    Detection,
    FlagKind,
    ImageRecord,
    ManifestError,
    QAFlag,
    ReviewState,
    SegmentationMask,
    load_manifest,
    save_manifest,
)


def make_fixture_manifest():
    mask = SegmentationMask.from_array(np.pad(np.ones((2, 2), np.uint8), 1))
    records = [
        ImageRecord("a/1.png", 0, "sparrow", "train", "a/1.png"),
        ImageRecord(
            "a/2.png",
            0,
            "sparrow",
            "test",
            "a/2.png",
            fg_path="a/2.png",
            detection=Detection(BoundingBox(1, 1, 2, 2), 0.9, "bird"),
            mask=mask,
            review=ReviewState.ACCEPTED,
        ),
        ImageRecord(
            "b/1.png",
            1,
            "wren",
            "train",
            "b/1.png",
            flags=(QAFlag(FlagKind.AMBIGUOUS, "two candidates", 0.05),),
        ),
        ImageRecord("b/2.png", 1, "wren", "test", "b/2.png"),
    ]
    return DatasetManifest(
        name="fixture",
        kind="generic",
        classes=["sparrow", "wren"],
        records=records,
        provenance={"source": "original", "config_digest": "deadbeef"},
    )


def test_roundtrip_identity(tmp_path):
    m = make_fixture_manifest()
    path = tmp_path / "fixture.manifest"
    save_manifest(m, path)
    assert load_manifest(path) == m


def test_corrected_record_box_survives_roundtrip(tmp_path):
    m = make_fixture_manifest()
    manual = Detection(BoundingBox(2, 3, 4, 5), 1.0, "bird")
    m.records[2].detection = manual
    m.records[2].review = ReviewState.CORRECTED
    path = tmp_path / "corrected.manifest"
    save_manifest(m, path)
    loaded = load_manifest(path)
    assert loaded.records[2].detection == manual
    assert loaded.records[2].review == ReviewState.CORRECTED


def test_truncated_file_reports_line(tmp_path):
    m = make_fixture_manifest()
    path = tmp_path / "t.manifest"
    save_manifest(m, path)
    text = path.read_text()
    path.write_text(text[: len(text) - 20])
    with pytest.raises(ManifestError, match=r":5:"):
        load_manifest(path)


def test_missing_file_errors(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "nope.manifest")


def test_duplicate_record_ids_rejected():
    recs = [
        ImageRecord("x", 0, "a", "train", "x.png"),
        ImageRecord("x", 0, "a", "test", "y.png"),
    ]
    with pytest.raises(ManifestError, match="duplicate"):
        DatasetManifest("d", "generic", ["a"], recs)


def test_class_id_bound_checked():
    recs = [ImageRecord("x", 5, "a", "train", "x.png")]
    with pytest.raises(ManifestError, match="class_id"):
        DatasetManifest("d", "generic", ["a"], recs)


def test_bad_box_rejected():
    with pytest.raises(ManifestError):
        BoundingBox(0, 0, 0, 5)
    with pytest.raises(ManifestError):
        BoundingBox(-1, 0, 2, 2)
    with pytest.raises(ManifestError):
        BoundingBox(4, 4, 4, 4).validate_in(8, 7)


def test_detection_score_range():
    with pytest.raises(ManifestError):
        Detection(BoundingBox(0, 0, 1, 1), 1.5, "bird")


def test_flags_deduped_and_ordered():
    f1 = QAFlag(FlagKind.NO_SUBJECT)
    f2 = QAFlag(FlagKind.AMBIGUOUS)
    rec = ImageRecord("x", 0, "a", "train", "x.png", flags=(f1, f2, f1))
    assert rec.flags == (f2, f1)  # sorted by kind name, deduped


@st.composite
def random_manifests(draw):
    n_classes = draw(st.integers(1, 3))
    classes = [f"class_{i}" for i in range(n_classes)]
    n = draw(st.integers(0, 6))
    records = []
    for i in range(n):
        cid = draw(st.integers(0, n_classes - 1))
        split = draw(st.sampled_from(["train", "test"]))
        has_mask = draw(st.booleans())
        mask = None
        if has_mask:
            seed = draw(st.integers(0, 10_000))
            arr = (np.random.default_rng(seed).random((5, 4)) < 0.5).astype(np.uint8)
            mask = SegmentationMask.from_array(arr)
        det = None
        if draw(st.booleans()):
            det = Detection(
                BoundingBox(draw(st.integers(0, 2)), draw(st.integers(0, 2)), 1, 2),
                draw(st.floats(0, 1, allow_nan=False)),
                "bird",
            )
        flags = ()
        if draw(st.booleans()):
            flags = (QAFlag(draw(st.sampled_from(list(FlagKind))), "injected", None),)
        records.append(
            ImageRecord(
                record_id=f"r{i}.png",
                class_id=cid,
                class_name=classes[cid],
                split=split,
                source_path=f"r{i}.png",
                fg_path=f"r{i}.png" if draw(st.booleans()) else None,
                detection=det,
                mask=mask,
                flags=flags,
                review=draw(st.sampled_from(list(ReviewState))),
            )
        )
    return DatasetManifest("rand", "generic", classes, records)


@given(random_manifests())
@settings(max_examples=60, deadline=None)
def test_persistence_roundtrip_property(tmp_path_factory, m):
    path = tmp_path_factory.mktemp("mf") / "m.manifest"
    save_manifest(m, path)
    assert load_manifest(path) == m
