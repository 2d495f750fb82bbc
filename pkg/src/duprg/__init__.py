"""Domain-unified prompt representation toolkit.

Turn per-(domain, class) prompt embeddings into one robust representation
per class — either by mean pooling or by a small cosine autoencoder trained
to align classes across domains — and evaluate them as a zero-shot
classifier over image embeddings.
"""

from .aggregate import cae_unify, mean_pool
from .bank import DomainBank, expand, load_bank, preset, save_bank
from .cae import (
    AdamW,
    CaeConfig,
    CaeModel,
    TrainReport,
    evaluate_losses,
    forward,
    init_model,
    load_model,
    loss_all,
    loss_and_gradients,
    loss_inter,
    loss_intra,
    loss_rec,
    save_model,
    train,
)
from .classify import EvalResult, evaluate, predict, scale_check
from .errors import (
    BadMagicError,
    ClassMismatchError,
    DuprgError,
    FormatError,
    NumericAbortError,
    TruncatedFileError,
    UnsupportedVersionError,
    ValidationError,
    ZeroNormRowError,
)
from .formats import (
    ImageSet,
    PromptTensor,
    UnifiedReps,
    read_images,
    read_prompts,
    read_reps,
    write_images,
    write_prompts,
    write_reps,
)
from .synth import SynthSpec, generate, intra_class_tightness

__version__ = "0.1.0"

__all__ = [
    "AdamW",
    "BadMagicError",
    "CaeConfig",
    "CaeModel",
    "ClassMismatchError",
    "DomainBank",
    "DuprgError",
    "EvalResult",
    "FormatError",
    "ImageSet",
    "NumericAbortError",
    "PromptTensor",
    "SynthSpec",
    "TrainReport",
    "TruncatedFileError",
    "UnifiedReps",
    "UnsupportedVersionError",
    "ValidationError",
    "ZeroNormRowError",
    "cae_unify",
    "evaluate",
    "evaluate_losses",
    "expand",
    "forward",
    "generate",
    "init_model",
    "intra_class_tightness",
    "load_bank",
    "load_model",
    "loss_all",
    "loss_and_gradients",
    "loss_inter",
    "loss_intra",
    "loss_rec",
    "mean_pool",
    "predict",
    "preset",
    "read_images",
    "read_prompts",
    "read_reps",
    "save_bank",
    "scale_check",
    "save_model",
    "train",
    "write_images",
    "write_prompts",
    "write_reps",
]
