import numpy as np
import pytest

from ccfloc.errors import MissingResult, UnknownImageId
from ccfloc.evaluation import corloc, iou
from ccfloc.tensor_store import Box, DatasetManifest, ImageEntry


def _manifest(gt_by_id):
    entries = tuple(
        ImageEntry(
            id=i,
            image_path="",
            width=1000,
            height=1000,
            features_path="",
            boundary_path="",
            gt_boxes=tuple(boxes),
        )
        for i, boxes in gt_by_id.items()
    )
    return DatasetManifest(class_name="t", images=entries)


def test_iou_identical():
    b = Box(3, 4, 9, 11)
    assert iou(b, b) == 1.0


def test_iou_disjoint():
    assert iou(Box(0, 0, 2, 2), Box(5, 5, 7, 7)) == 0.0
    assert iou(Box(0, 0, 2, 2), Box(2, 0, 4, 2)) == 0.0  # touching, half-open


def test_iou_hand_value():
    assert iou(Box(0, 0, 10, 10), Box(5, 0, 15, 10)) == pytest.approx(1.0 / 3.0)


def _random_box(rng):
    x0, x1 = sorted(int(v) for v in rng.integers(0, 40, 2))
    y0, y1 = sorted(int(v) for v in rng.integers(0, 40, 2))
    return Box(x0, y0, x1 + 1, y1 + 2)


def test_iou_symmetric_translation_invariant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = _random_box(rng)
        b = _random_box(rng)
        assert iou(a, b) == pytest.approx(iou(b, a))

        def shift(box):
            return Box(box.xmin + 7, box.ymin + 11, box.xmax + 7, box.ymax + 11)

        assert iou(shift(a), shift(b)) == pytest.approx(iou(a, b))


def test_corloc_strictness_fixture():
    # IoUs {0.6, 0.5, 0.2}: only 0.6 counts, 0.5 is excluded by the strict >
    gt = Box(0, 0, 10, 10)
    man = _manifest({"a": [gt], "b": [gt], "c": [gt]})
    preds = {
        "a": Box(0, 0, 10, 6),  # 60/100
        "b": Box(0, 0, 10, 5),  # 50/100
        "c": Box(0, 0, 10, 2),  # 20/100
    }
    assert iou(preds["a"], gt) == pytest.approx(0.6)
    assert iou(preds["b"], gt) == pytest.approx(0.5)
    assert iou(preds["c"], gt) == pytest.approx(0.2)
    report = corloc(preds, man)
    assert report.n_correct == 1
    assert report.corloc == pytest.approx(100.0 / 3.0)
    by_id = {s.id: s for s in report.per_image}
    assert by_id["a"].correct and not by_id["b"].correct and not by_id["c"].correct


def test_corloc_all_perfect():
    gt = Box(2, 3, 9, 8)
    man = _manifest({"a": [gt], "b": [gt]})
    report = corloc({"a": gt, "b": gt}, man)
    assert report.corloc == 100.0


def test_corloc_no_predictions():
    gt = Box(2, 3, 9, 8)
    man = _manifest({"a": [gt], "b": [gt]})
    report = corloc({"a": None, "b": None}, man)
    assert report.corloc == 0.0
    assert all(s.best_iou == 0.0 for s in report.per_image)


def test_corloc_best_over_multiple_gt():
    man = _manifest({"a": [Box(0, 0, 4, 4), Box(10, 10, 20, 20)]})
    report = corloc({"a": Box(10, 10, 20, 20)}, man)
    assert report.per_image[0].best_iou == 1.0
    assert report.corloc == 100.0


def test_corloc_monotone_in_best_iou():
    gt = Box(0, 0, 10, 10)
    man = _manifest({"a": [gt], "b": [gt]})
    low = corloc({"a": Box(0, 0, 10, 5), "b": Box(0, 0, 10, 2)}, man)
    high = corloc({"a": Box(0, 0, 10, 6), "b": Box(0, 0, 10, 2)}, man)
    assert high.corloc >= low.corloc


def test_corloc_errors():
    gt = Box(0, 0, 10, 10)
    man = _manifest({"a": [gt]})
    with pytest.raises(UnknownImageId):
        corloc({"a": gt, "zz": gt}, man)
    with pytest.raises(MissingResult):
        corloc({}, man)


def test_report_serialization():
    gt = Box(0, 0, 10, 10)
    man = _manifest({"a": [gt]})
    report = corloc({"a": gt}, man)
    doc = report.to_dict()
    assert doc["class_name"] == "t"
    assert doc["per_image"][0]["correct"] is True
    assert report.csv_row() == "t,1,100.00"
