"""Synthetic multi-domain benchmark with a known class/domain structure.

Classes are anchored at blends between a shared direction and orthonormal
axes; domains are fixed-norm offsets added to every class anchor.  Training
prompts use one set of domain offsets, evaluation images use a fresh
held-out set plus per-coordinate Gaussian noise, so generalization across
unseen domains is what gets measured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .formats import ImageSet, PromptTensor, UnifiedReps
from .numerics import normalize_rows

SYNTH_TEMPLATE = "synthetic prompt for {class} in {domain}"


@dataclass(frozen=True)
class SynthSpec:
    """Shape and difficulty knobs for the generator."""

    n_classes: int = 5
    n_domains: int = 8
    dim: int = 64
    n_per_class: int = 20
    class_sep: float = 1.0
    domain_shift: float = 0.6
    noise: float = 0.3
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ValidationError(f"n_classes must be >= 2, got {self.n_classes}")
        if self.n_domains < 1:
            raise ValidationError(f"n_domains must be >= 1, got {self.n_domains}")
        if self.dim < 2:
            raise ValidationError(f"dim must be >= 2, got {self.dim}")
        if self.n_classes > self.dim:
            raise ValidationError(
                f"n_classes ({self.n_classes}) cannot exceed dim ({self.dim})"
            )
        if self.n_per_class < 1:
            raise ValidationError(f"n_per_class must be >= 1, got {self.n_per_class}")
        if not 0.0 < self.class_sep <= 1.0:
            raise ValidationError(f"class_sep must lie in (0, 1], got {self.class_sep}")
        if self.domain_shift < 0:
            raise ValidationError(f"domain_shift must be >= 0, got {self.domain_shift}")
        if self.noise < 0:
            raise ValidationError(f"noise must be >= 0, got {self.noise}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _offsets(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    """n random directions scaled to exactly ``radius`` (zeros when radius=0)."""
    if radius == 0.0:
        return np.zeros((n, dim))
    return radius * normalize_rows(rng.normal(size=(n, dim)), snap_tol=0.0)


def generate(spec: SynthSpec | None = None) -> tuple[PromptTensor, ImageSet, UnifiedReps]:
    """Build (training prompts, held-out images, oracle class reps) for ``spec``.

    The oracle reps are the noiseless class anchors; with zero shift and
    noise, prompts and images collapse onto them exactly.
    """
    spec = spec if spec is not None else SynthSpec()
    spec.validate()
    c, m, d = spec.n_classes, spec.n_domains, spec.dim
    rng = np.random.default_rng(spec.seed)

    # orthonormal class axes blended toward a shared direction by class_sep
    q, _ = np.linalg.qr(rng.normal(size=(d, c)))
    shared = _unit(rng.normal(size=d))
    anchors = normalize_rows(
        (1.0 - spec.class_sep) * shared[None, :] + spec.class_sep * q.T
    )

    train_off = _offsets(rng, m, d, spec.domain_shift)
    prompts = normalize_rows(
        (anchors[None, :, :] + train_off[:, None, :]).reshape(-1, d)
    ).reshape(m, c, d)

    heldout_off = _offsets(rng, m, d, spec.domain_shift)
    raw = (
        anchors[None, None, :, :]
        + heldout_off[:, None, None, :]
        + spec.noise * rng.normal(size=(m, spec.n_per_class, c, d))
    ).reshape(-1, d)
    images = normalize_rows(raw)
    labels = np.tile(np.arange(c, dtype=np.uint32), m * spec.n_per_class)

    class_names = tuple(f"class {i}" for i in range(c))
    tensor = PromptTensor(
        domain_names=tuple(f"domain {j}" for j in range(m)),
        class_names=class_names,
        template=SYNTH_TEMPLATE,
        data=prompts,
    )
    image_set = ImageSet(
        class_names=class_names,
        labels=labels,
        data=images,
        domain_tag="held-out",
    )
    oracle = UnifiedReps(class_names=class_names, data=anchors)
    tensor.validate()
    image_set.validate()
    oracle.validate()
    return tensor, image_set, oracle


def intra_class_tightness(t: PromptTensor | np.ndarray) -> float:
    """Mean over classes of the mean pairwise cosine among a class's domain rows.

    Higher is tighter: 1.0 means every domain maps a class to the same
    direction.  Needs at least two domains.
    """
    rows3 = t.data if isinstance(t, PromptTensor) else np.asarray(t, dtype=np.float64)
    if rows3.ndim != 3:
        raise ValidationError(
            f"expected shape (domains, classes, dim), got {rows3.shape}"
        )
    m, c, _d = rows3.shape
    if m < 2:
        raise ValidationError("tightness needs at least 2 domains")
    per_class = rows3.transpose(1, 0, 2)  # (C, M, d)
    dots = np.matmul(per_class, np.swapaxes(per_class, 1, 2))  # (C, M, M)
    q = np.diagonal(dots, axis1=1, axis2=2)
    if np.any(q == 0.0):
        raise ValidationError("zero-norm row; cosine is undefined")
    cosm = dots / np.sqrt(q[:, :, None] * q[:, None, :])
    idx = np.arange(m)
    cosm[:, idx, idx] = 0.0
    return float(cosm.sum()) / (c * m * (m - 1))
