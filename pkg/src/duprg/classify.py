"""Zero-shot nearest-representation classification and evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ClassMismatchError, ValidationError
from .formats import ImageSet, UnifiedReps, atomic_write_bytes
from .numerics import row_norms


def _cosine_scores(reps: UnifiedReps, rows: np.ndarray) -> np.ndarray:
    """(N, C) cosine similarity between image rows and every class rep."""
    if reps.dim != rows.shape[1]:
        raise ValidationError(
            f"representation dim {reps.dim} does not match image dim {rows.shape[1]}"
        )
    rn = row_norms(reps.data)
    zero = np.flatnonzero(rn == 0.0)
    if zero.size:
        raise ValidationError(
            f"class representation {int(zero[0])} has zero norm; cosine is undefined"
        )
    xn = row_norms(rows)
    zero = np.flatnonzero(xn == 0.0)
    if zero.size:
        raise ValidationError(f"image row {int(zero[0])} has zero norm; cosine is undefined")
    return (rows @ reps.data.T) / np.outer(xn, rn)


def predict(reps: UnifiedReps, image) -> int | np.ndarray:
    """Class with the highest cosine to the image; ties go to the lowest index.

    A single d-vector returns an int; an (N, d) array or ImageSet returns an
    (N,) index array.
    """
    if isinstance(image, ImageSet):
        return np.argmax(_cosine_scores(reps, image.data), axis=1)
    a = np.asarray(image, dtype=np.float64)
    if a.ndim == 1:
        return int(np.argmax(_cosine_scores(reps, a[None, :]), axis=1)[0])
    if a.ndim == 2:
        return np.argmax(_cosine_scores(reps, a), axis=1)
    raise ValidationError(f"image must be a vector or a row matrix, got shape {a.shape}")


def scale_check(reps: UnifiedReps, image, s: float) -> bool:
    """True iff positively rescaling the image leaves the prediction unchanged."""
    if not s > 0:
        raise ValidationError(f"scale must be positive, got {s}")
    a = np.asarray(image, dtype=np.float64)
    base = predict(reps, a)
    scaled = predict(reps, s * a)
    if isinstance(base, int):
        return base == scaled
    return bool(np.array_equal(base, scaled))


@dataclass(frozen=True)
class EvalResult:
    """Accuracy summary of one evaluation run."""

    total: int
    correct: int
    accuracy: float
    per_class_accuracy: tuple[float, ...]
    confusion: np.ndarray  # (C, C); [true, predicted] counts
    class_names: tuple[str, ...]
    domain_tag: str | None = None

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "per_class_accuracy": list(self.per_class_accuracy),
            "confusion": self.confusion.tolist(),
            "class_names": list(self.class_names),
            "domain_tag": self.domain_tag,
        }

    def save_json(self, path) -> None:
        text = json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"
        atomic_write_bytes(path, text.encode("utf-8"))


def evaluate(reps: UnifiedReps, images: ImageSet) -> EvalResult:
    """Score ``images`` against ``reps``; class name lists must match exactly."""
    reps.validate()
    images.validate()
    if reps.class_names != images.class_names:
        raise ClassMismatchError(
            "class names differ between representations and images: "
            f"{list(reps.class_names)} vs {list(images.class_names)}"
        )
    preds = predict(reps, images)
    c = reps.n_classes
    labels = images.labels
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (labels, preds), 1)
    counts = confusion.sum(axis=1)
    diag = np.diagonal(confusion)
    # empty classes score 0.0 so a count-weighted recomposition of the
    # per-class accuracies reproduces the overall accuracy exactly
    per_class = tuple(
        float(diag[i]) / float(counts[i]) if counts[i] else 0.0 for i in range(c)
    )
    total = int(labels.shape[0])
    correct = int(diag.sum())
    confusion.setflags(write=False)
    return EvalResult(
        total=total,
        correct=correct,
        accuracy=float(correct) / float(total),
        per_class_accuracy=per_class,
        confusion=confusion,
        class_names=reps.class_names,
        domain_tag=images.domain_tag,
    )
