"""CorLoc evaluation: an image counts as correctly localized when the
predicted box has IoU strictly greater than the threshold (default 0.5)
with at least one ground-truth box."""

from dataclasses import dataclass

from .errors import MissingResult, UnknownImageId


def iou(a, b):
    """Intersection over union of two half-open pixel boxes."""
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class PerImageScore:
    id: str
    best_iou: float
    correct: bool


@dataclass
class CorLocReport:
    class_name: str
    n_images: int
    n_correct: int
    corloc: float
    per_image: list

    def to_dict(self):
        return {
            "class_name": self.class_name,
            "n_images": self.n_images,
            "n_correct": self.n_correct,
            "corloc": self.corloc,
            "per_image": [
                {"id": s.id, "best_iou": s.best_iou, "correct": s.correct}
                for s in self.per_image
            ],
        }

    def csv_row(self):
        return f"{self.class_name},{self.n_images},{self.corloc:.2f}"


def corloc(predictions, manifest, iou_threshold=0.5):
    """Score predicted boxes against a manifest's ground truth.

    ``predictions`` maps image id -> Box or None (no prediction). Every
    manifest image needs an entry (else MissingResult); ids not in the
    manifest raise UnknownImageId. Missing/None predictions count as
    incorrect with best_iou 0. The threshold comparison is strict: a
    best_iou exactly at the threshold is incorrect.
    """
    known = {entry.id for entry in manifest.images}
    for image_id in predictions:
        if image_id not in known:
            raise UnknownImageId(f"prediction for unknown image {image_id!r}")

    per_image = []
    n_correct = 0
    for entry in manifest.images:
        if entry.id not in predictions:
            raise MissingResult(f"no prediction for image {entry.id!r}")
        pred = predictions[entry.id]
        best = 0.0
        if pred is not None:
            for gt in entry.gt_boxes:
                best = max(best, iou(pred, gt))
        correct = best > iou_threshold
        n_correct += int(correct)
        per_image.append(PerImageScore(id=entry.id, best_iou=best, correct=correct))
    n_images = len(manifest.images)
    return CorLocReport(
        class_name=manifest.class_name,
        n_images=n_images,
        n_correct=n_correct,
        corloc=100.0 * n_correct / n_images,
        per_image=per_image,
    )
