"""Encoder backends.

Each backend turns strings or image files into raw (unnormalized) embedding
rows; normalization is owned by the consumer's loader so there is exactly
one normalization site in the pipeline.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BackendLoadError, ExporterError, ValidationError


@dataclass(frozen=True)
class BackboneSpec:
    name: str
    dim: int
    loader: str  # "hf", "open_clip", or "dummy"
    model_id: str


BACKBONES = {
    "vit-b16": BackboneSpec("vit-b16", 512, "hf", "openai/clip-vit-base-patch16"),
    "vit-b32": BackboneSpec("vit-b32", 512, "hf", "openai/clip-vit-base-patch32"),
    "rn50": BackboneSpec("rn50", 1024, "open_clip", "RN50/openai"),
    "dummy": BackboneSpec("dummy", 512, "dummy", "deterministic-hash"),
}


def backbone_names() -> list[str]:
    return sorted(BACKBONES)


class DummyEncoder:
    """Deterministic stand-in encoder: hash the input, seed an RNG, draw a row.

    Identical inputs give identical rows on every platform, which is what
    the format and pipeline tests need; there is no semantic content.
    """

    preprocess_id = "sha256-of-bytes"
    weights_revision = "none"

    def __init__(self, spec: BackboneSpec):
        self.name = spec.name
        self.dim = spec.dim

    def _row(self, payload: bytes) -> np.ndarray:
        digest = hashlib.sha256(payload).digest()
        seed = int.from_bytes(digest[:8], "little")
        return np.random.default_rng(seed).standard_normal(self.dim)

    def encode_texts(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._row(t.encode("utf-8")) for t in texts]) \
            if texts else np.zeros((0, self.dim))

    def encode_images(self, paths: list[Path]) -> np.ndarray:
        rows = []
        for p in paths:
            try:
                payload = Path(p).read_bytes()
            except OSError as exc:
                raise ValidationError(f"unreadable image {p}: {exc}") from exc
            rows.append(self._row(payload))
        return np.stack(rows) if rows else np.zeros((0, self.dim))


class HfClipEncoder:
    """CLIP text/image towers via the transformers checkpoint hub."""

    def __init__(self, spec: BackboneSpec, batch_size: int = 64):
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise BackendLoadError(
                f"backbone {spec.name!r} needs torch and transformers: {exc}"
            ) from exc
        try:
            self._model = CLIPModel.from_pretrained(spec.model_id)
            self._processor = CLIPProcessor.from_pretrained(spec.model_id)
        except Exception as exc:  # hub/network/cache failures surface here
            raise BackendLoadError(
                f"could not load weights for {spec.name!r} ({spec.model_id}): {exc}"
            ) from exc
        self._torch = torch
        self._model.eval()
        self.name = spec.name
        self.dim = spec.dim
        self.batch_size = batch_size
        self.preprocess_id = f"hf:{spec.model_id}"
        revision = getattr(self._model.config, "_commit_hash", None)
        self.weights_revision = revision or "unknown"

    def encode_texts(self, texts: list[str]) -> np.ndarray:
        out = []
        with self._torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                chunk = texts[start:start + self.batch_size]
                inputs = self._processor(
                    text=chunk, return_tensors="pt", padding=True, truncation=True
                )
                feats = self._model.get_text_features(**inputs)
                out.append(feats.cpu().numpy().astype(np.float64))
        return np.concatenate(out) if out else np.zeros((0, self.dim))

    def encode_images(self, paths: list[Path]) -> np.ndarray:
        try:
            from PIL import Image
        except ImportError as exc:
            raise BackendLoadError(f"image export needs Pillow: {exc}") from exc
        out = []
        with self._torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                chunk = paths[start:start + self.batch_size]
                images = []
                for p in chunk:
                    try:
                        with Image.open(p) as im:
                            images.append(im.convert("RGB"))
                    except OSError as exc:
                        raise ValidationError(f"unreadable image {p}: {exc}") from exc
                inputs = self._processor(images=images, return_tensors="pt")
                feats = self._model.get_image_features(**inputs)
                out.append(feats.cpu().numpy().astype(np.float64))
        return np.concatenate(out) if out else np.zeros((0, self.dim))


class OpenClipEncoder:
    """ResNet CLIP variants that the transformers hub does not carry."""

    def __init__(self, spec: BackboneSpec, batch_size: int = 64):
        try:
            import open_clip
            import torch
        except ImportError as exc:
            raise BackendLoadError(
                f"backbone {spec.name!r} needs open-clip-torch: {exc}"
            ) from exc
        arch, pretrained = spec.model_id.split("/")
        try:
            model, _, preprocess = open_clip.create_model_and_transforms(
                arch, pretrained=pretrained
            )
            tokenizer = open_clip.get_tokenizer(arch)
        except Exception as exc:
            raise BackendLoadError(
                f"could not load weights for {spec.name!r} ({spec.model_id}): {exc}"
            ) from exc
        self._torch = torch
        self._model = model.eval()
        self._preprocess = preprocess
        self._tokenizer = tokenizer
        self.name = spec.name
        self.dim = spec.dim
        self.batch_size = batch_size
        self.preprocess_id = f"open_clip:{spec.model_id}"
        self.weights_revision = pretrained

    def encode_texts(self, texts: list[str]) -> np.ndarray:
        out = []
        with self._torch.no_grad():
            for start in range(0, len(texts), self.batch_size):
                tokens = self._tokenizer(texts[start:start + self.batch_size])
                feats = self._model.encode_text(tokens)
                out.append(feats.cpu().numpy().astype(np.float64))
        return np.concatenate(out) if out else np.zeros((0, self.dim))

    def encode_images(self, paths: list[Path]) -> np.ndarray:
        try:
            from PIL import Image
        except ImportError as exc:
            raise BackendLoadError(f"image export needs Pillow: {exc}") from exc
        out = []
        with self._torch.no_grad():
            for start in range(0, len(paths), self.batch_size):
                tensors = []
                for p in paths[start:start + self.batch_size]:
                    try:
                        with Image.open(p) as im:
                            tensors.append(self._preprocess(im.convert("RGB")))
                    except OSError as exc:
                        raise ValidationError(f"unreadable image {p}: {exc}") from exc
                batch = self._torch.stack(tensors)
                feats = self._model.encode_image(batch)
                out.append(feats.cpu().numpy().astype(np.float64))
        return np.concatenate(out) if out else np.zeros((0, self.dim))


def load_encoder(name: str, batch_size: int = 64):
    """Construct the encoder for a backbone name; raises BackendLoadError
    when its dependencies or weights are unavailable."""
    spec = BACKBONES.get(name)
    if spec is None:
        raise ExporterError(
            f"unknown backbone {name!r}; choose from {backbone_names()}"
        )
    if spec.loader == "dummy":
        return DummyEncoder(spec)
    if spec.loader == "hf":
        return HfClipEncoder(spec, batch_size)
    return OpenClipEncoder(spec, batch_size)
