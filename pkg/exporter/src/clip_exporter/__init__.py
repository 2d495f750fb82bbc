"""Export CLIP text and image embeddings to DUPR container files."""

from .backends import BACKBONES, backbone_names, load_encoder
from .errors import BackendLoadError, ExporterError, ValidationError
from .export import export_images, export_text, load_sidecar
from .format import write_image_set, write_prompt_tensor

__all__ = [
    "BACKBONES",
    "BackendLoadError",
    "ExporterError",
    "ValidationError",
    "backbone_names",
    "export_images",
    "export_text",
    "load_encoder",
    "load_sidecar",
    "write_image_set",
    "write_prompt_tensor",
]

__version__ = "0.1.0"
