"""Collapse per-domain prompt rows into one representation per class."""

from __future__ import annotations

import numpy as np

from .cae import CaeModel, forward
from .errors import ValidationError
from .formats import PromptTensor, UnifiedReps


def _pool_rows(rows3: np.ndarray, class_names: tuple[str, ...]) -> UnifiedReps:
    # Sort the M values per (class, coordinate) before summing: summation in
    # canonical order makes the result bit-identical under any permutation
    # of the domain axis.
    m = rows3.shape[0]
    ordered = np.sort(rows3, axis=0)
    reps = ordered.sum(axis=0) / m
    return UnifiedReps(class_names=class_names, data=reps)


def _require_tensor(t) -> None:
    if not isinstance(t, PromptTensor):
        raise ValidationError(f"expected a PromptTensor, got {type(t).__name__}")


def mean_pool(t: PromptTensor) -> UnifiedReps:
    """Average each class's rows across domains (no re-normalization)."""
    _require_tensor(t)
    t.validate()
    return _pool_rows(t.data, t.class_names)


def cae_unify(t: PromptTensor, model: CaeModel) -> UnifiedReps:
    """Mean-pool the model's reconstructions of ``t``.

    Exactly the composition of :func:`duprg.cae.forward` and the pooling
    used by :func:`mean_pool`, so the two routes agree bitwise.
    """
    _require_tensor(t)
    t.validate()
    if t.dim != model.dim:
        raise ValidationError(
            f"tensor dim {t.dim} does not match model dim {model.dim}"
        )
    return _pool_rows(forward(model, t), t.class_names)
