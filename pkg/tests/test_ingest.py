import os

import numpy as np
import pytest
from PIL import Image

from fgdata.ingest import IngestionError, load_source_dataset


def write_png(path, size=(8, 6)):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.full((size[1], size[0], 3), 255, np.uint8)).save(path)


def make_cub_tree(root):
    names = ["001.Black_footed_Albatross", "002.Laysan_Albatross"]
    images = {
        "1": (f"{names[0]}/a.jpg", 1, 1),
        "2": (f"{names[0]}/b.jpg", 1, 0),
        "3": (f"{names[1]}/c.jpg", 2, 1),
        "4": (f"{names[1]}/d.jpg", 2, 0),
    }
    (root / "classes.txt").write_text("".join(f"{i+1} {n}\n" for i, n in enumerate(names)))
    (root / "images.txt").write_text("".join(f"{k} {v[0]}\n" for k, v in images.items()))
    (root / "image_class_labels.txt").write_text(
        "".join(f"{k} {v[1]}\n" for k, v in images.items())
    )
    (root / "train_test_split.txt").write_text(
        "".join(f"{k} {v[2]}\n" for k, v in images.items())
    )
    for rel, _, _ in images.values():
        write_png(root / "images" / rel)
    return names


def make_cars_tree(root):
    from scipy.io import savemat

    names = np.array(["AM General Hummer SUV 2000", "Acura RL Sedan 2012"], dtype=object)
    fields = ["relative_im_path", "bbox_x1", "bbox_y1", "bbox_x2", "bbox_y2", "class", "test"]
    rows = [
        ("car_ims/000001.jpg", 1, 1, 7, 5, 1, 0),
        ("car_ims/000002.jpg", 1, 1, 7, 5, 1, 1),
        ("car_ims/000003.jpg", 1, 1, 7, 5, 2, 0),
    ]
    annos = np.zeros((1, len(rows)), dtype=[(f, "O") for f in fields])
    for i, row in enumerate(rows):
        annos[0, i] = row
        write_png(root / row[0])
    savemat(str(root / "cars_annos.mat"), {"annotations": annos, "class_names": names})


def make_aircraft_tree(root):
    data = root / "data"
    data.mkdir(parents=True)
    (data / "variants.txt").write_text("707-320\nA300B4\n")
    (data / "images_variant_trainval.txt").write_text("0034309 707-320\n0034958 A300B4\n")
    (data / "images_variant_test.txt").write_text("1025794 707-320\n")
    for img_id in ("0034309", "0034958", "1025794"):
        write_png(data / "images" / f"{img_id}.jpg")


def make_generic_tree(root):
    for cls in ("crow", "dove"):
        for i in range(2):
            write_png(root / cls / f"{i}.png")


def test_generic_fixture_two_by_two(tmp_path):
    make_generic_tree(tmp_path)
    m = load_source_dataset(tmp_path, "generic")
    assert len(m.classes) == 2
    assert len(m.records) == 4
    assert all(r.split == "train" for r in m.records)
    assert m.classes == ["crow", "dove"]


def test_generic_with_split_dirs(tmp_path):
    for split in ("train", "test"):
        write_png(tmp_path / split / "crow" / "x.png")
    m = load_source_dataset(tmp_path, "generic")
    assert {r.split for r in m.records} == {"train", "test"}


def test_cub_fixture_layout(tmp_path):
    names = make_cub_tree(tmp_path)
    m = load_source_dataset(tmp_path, "cub")
    assert m.classes == names
    assert len(m.records) == 4
    assert sum(r.split == "train" for r in m.records) == 2
    assert m.records[0].record_id.startswith("images/")
    assert m.records[0].class_name == names[0]


def test_cub_missing_annotation_file_named(tmp_path):
    make_cub_tree(tmp_path)
    (tmp_path / "train_test_split.txt").unlink()
    with pytest.raises(IngestionError, match="train_test_split.txt"):
        load_source_dataset(tmp_path, "cub")


def test_cub_unreadable_image_collected_not_fatal(tmp_path):
    make_cub_tree(tmp_path)
    (tmp_path / "images/001.Black_footed_Albatross/a.jpg").unlink()
    errors = []
    m = load_source_dataset(tmp_path, "cub", errors=errors)
    assert len(m.records) == 3
    assert len(errors) == 1 and "a.jpg" in errors[0]


def test_cars_mat_layout(tmp_path):
    make_cars_tree(tmp_path)
    m = load_source_dataset(tmp_path, "cars")
    assert len(m.classes) == 2
    assert len(m.records) == 3
    assert m.records[1].split == "test"
    assert m.records[2].class_id == 1


def test_aircraft_layout_trainval_policy(tmp_path):
    make_aircraft_tree(tmp_path)
    m = load_source_dataset(tmp_path, "aircraft")
    assert m.classes == ["707-320", "A300B4"]
    assert len(m.records) == 3
    assert sum(r.split == "train" for r in m.records) == 2
    assert m.provenance["split_policy"] == "trainval->train,test->test"


def test_empty_directory_errors(tmp_path):
    with pytest.raises(IngestionError):
        load_source_dataset(tmp_path, "generic")


def test_unknown_kind_errors(tmp_path):
    make_generic_tree(tmp_path)
    with pytest.raises(IngestionError):
        load_source_dataset(tmp_path, "imagenet")


# Reference statistics: classes/images per dataset. Checked against pristine
# roots only when the environment provides them.
TABLE1 = {"cub": (200, 11788), "cars": (196, 16185), "aircraft": (100, 10000)}


@pytest.mark.parametrize("kind", sorted(TABLE1))
def test_pristine_dataset_statistics(kind):
    root = os.environ.get(f"FGDATA_{kind.upper()}_ROOT")
    if not root:
        pytest.skip(f"set FGDATA_{kind.upper()}_ROOT to a pristine {kind} root")
    m = load_source_dataset(root, kind)
    n_classes, n_images = TABLE1[kind]
    assert len(m.classes) == n_classes
    assert len(m.records) == n_images
