"""DUPR binary files: prompt tensors, image sets, and unified reps.

Layout (version 1, little-endian):

    bytes 0-3    magic "DUPR"
    bytes 4-7    u32 version = 1
    byte  8      u8 kind: 0 = prompt tensor, 1 = image set, 2 = unified reps
    bytes 9-12   u32 d
    bytes 13-16  u32 rows_a   (M for kind 0, N for kind 1, C for kind 2)
    bytes 17-20  u32 rows_b   (C for kind 0, 0 otherwise)
    bytes 21-24  u32 metadata length L
    bytes 25..   UTF-8 JSON metadata object, L bytes
    kind 1 only: rows_a u32 labels
    then         float32 payload, row-major; kind 0 is domain-major
                 (row index = domain * C + class)

Payloads are float32 on disk and float64 in memory. Prompt and image
rows are L2-normalized at load time (unified reps are stored means and
load raw). Rows already unit-norm within 1e-7 are copied verbatim, so
reloading a file the loader wrote is bit-exact.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    FormatError,
    TruncatedFileError,
    UnsupportedVersionError,
    ValidationError,
)
from .numerics import normalize_rows, row_norms

MAGIC = b"DUPR"
VERSION = 1
HEADER_SIZE = 25
KIND_PROMPTS = 0
KIND_IMAGES = 1
KIND_REPS = 2

_HEADER_STRUCT = struct.Struct("<4sIBIIII")
UNIT_NORM_TOL = 1e-5


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    """Write `payload` to `path` via a temp file + rename (no partial files)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_finite_rows(data: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(data)):
        raise ValidationError(f"{what} contains non-finite entries")
    norms = row_norms(data.reshape(-1, data.shape[-1]))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValidationError(f"{what} row {zero[0]} has zero norm")


def _as_float64(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return arr


@dataclass(frozen=True, eq=False)
class PromptTensor:
    """M x C x d grid of per-(domain, class) prompt embeddings."""

    domain_names: tuple[str, ...]
    class_names: tuple[str, ...]
    template: str
    data: np.ndarray  # (M, C, d) float64

    def __post_init__(self):
        object.__setattr__(self, "domain_names", tuple(self.domain_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "data", _as_float64(self.data))

    @property
    def n_domains(self) -> int:
        return self.data.shape[0]

    @property
    def n_classes(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    def rows(self) -> np.ndarray:
        """The (M*C, d) row view, domain-major."""
        return self.data.reshape(-1, self.dim)

    def validate(self) -> None:
        if self.data.ndim != 3:
            raise ValidationError(f"prompt data must be 3-D, got shape {self.data.shape}")
        m, c, d = self.data.shape
        if m < 1 or c < 2 or d < 2:
            raise ValidationError(f"prompt tensor needs M >= 1, C >= 2, d >= 2, got {m}x{c}x{d}")
        if len(self.domain_names) != m:
            raise ValidationError(f"{len(self.domain_names)} domain names for M={m}")
        if len(self.class_names) != c:
            raise ValidationError(f"{len(self.class_names)} class names for C={c}")
        _check_finite_rows(self.data, "prompt tensor")


@dataclass(frozen=True, eq=False)
class ImageSet:
    """N x d image embeddings with integer class labels."""

    class_names: tuple[str, ...]
    labels: np.ndarray  # (N,) int64
    data: np.ndarray  # (N, d) float64
    domain_tag: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(self, "data", _as_float64(self.data))

    @property
    def n_images(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def validate(self) -> None:
        if self.data.ndim != 2:
            raise ValidationError(f"image data must be 2-D, got shape {self.data.shape}")
        n, d = self.data.shape
        if n < 1 or d < 1:
            raise ValidationError(f"image set needs N >= 1 and d >= 1, got {n}x{d}")
        if not self.class_names:
            raise ValidationError("image set has no class names")
        if self.labels.shape != (n,):
            raise ValidationError(f"{self.labels.shape} labels for N={n}")
        c = len(self.class_names)
        bad = np.flatnonzero((self.labels < 0) | (self.labels >= c))
        if bad.size:
            raise ValidationError(
                f"label {int(self.labels[bad[0]])} at row {bad[0]} outside [0, {c})"
            )
        _check_finite_rows(self.data, "image set")


@dataclass(frozen=True, eq=False)
class UnifiedReps:
    """One aggregated representation per class (C x d, not unit-norm)."""

    class_names: tuple[str, ...]
    data: np.ndarray  # (C, d) float64

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "data", _as_float64(self.data))

    @property
    def n_classes(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def validate(self) -> None:
        if self.data.ndim != 2:
            raise ValidationError(f"reps data must be 2-D, got shape {self.data.shape}")
        c, d = self.data.shape
        if c < 1 or d < 1:
            raise ValidationError(f"reps need C >= 1 and d >= 1, got {c}x{d}")
        if len(self.class_names) != c:
            raise ValidationError(f"{len(self.class_names)} class names for C={c}")
        if not np.all(np.isfinite(self.data)):
            raise ValidationError("reps contain non-finite entries")


def _encode(kind: int, d: int, rows_a: int, rows_b: int, meta: dict,
            labels: np.ndarray | None, data: np.ndarray) -> bytes:
    meta_bytes = json.dumps(meta, ensure_ascii=False, sort_keys=True,
                            separators=(",", ":")).encode("utf-8")
    parts = [_HEADER_STRUCT.pack(MAGIC, VERSION, kind, d, rows_a, rows_b, len(meta_bytes)),
             meta_bytes]
    if labels is not None:
        parts.append(np.ascontiguousarray(labels, dtype="<u4").tobytes())
    parts.append(np.ascontiguousarray(data, dtype="<f4").tobytes())
    return b"".join(parts)


def write_prompts(t: PromptTensor, path: str | os.PathLike) -> None:
    t.validate()
    meta = {"domains": list(t.domain_names), "classes": list(t.class_names),
            "template": t.template}
    raw = _encode(KIND_PROMPTS, t.dim, t.n_domains, t.n_classes, meta, None,
                  t.data.reshape(-1, t.dim))
    atomic_write_bytes(path, raw)


def write_images(s: ImageSet, path: str | os.PathLike) -> None:
    s.validate()
    meta = {"classes": list(s.class_names)}
    if s.domain_tag is not None:
        meta["domain_tag"] = s.domain_tag
    raw = _encode(KIND_IMAGES, s.dim, s.n_images, 0, meta, s.labels, s.data)
    atomic_write_bytes(path, raw)


def write_reps(r: UnifiedReps, path: str | os.PathLike) -> None:
    r.validate()
    meta = {"classes": list(r.class_names)}
    raw = _encode(KIND_REPS, r.dim, r.n_classes, 0, meta, None, r.data)
    atomic_write_bytes(path, raw)


def _parse_header(raw: bytes, path) -> tuple[int, int, int, int, dict, int]:
    if len(raw) < len(MAGIC):
        raise TruncatedFileError(f"{path}: file shorter than the magic field")
    if raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if len(raw) < HEADER_SIZE:
        raise TruncatedFileError(f"{path}: header truncated at {len(raw)} bytes")
    _, version, kind, d, rows_a, rows_b, meta_len = _HEADER_STRUCT.unpack_from(raw)
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: version {version}, expected {VERSION}")
    if kind not in (KIND_PROMPTS, KIND_IMAGES, KIND_REPS):
        raise FormatError(f"{path}: unknown kind {kind}")
    if len(raw) < HEADER_SIZE + meta_len:
        raise TruncatedFileError(f"{path}: metadata truncated")
    try:
        meta = json.loads(raw[HEADER_SIZE:HEADER_SIZE + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: metadata is not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(meta, dict):
        raise FormatError(f"{path}: metadata must be a JSON object")
    return kind, d, rows_a, rows_b, meta, HEADER_SIZE + meta_len


def _meta_strings(meta: dict, key: str, path) -> list[str]:
    value = meta.get(key)
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise FormatError(f"{path}: metadata field {key!r} missing or not a string list")
    return value


def _read_payload(raw: bytes, offset: int, rows: int, d: int, path) -> np.ndarray:
    need = rows * d * 4
    if len(raw) - offset < need:
        raise TruncatedFileError(
            f"{path}: payload needs {need} bytes, found {len(raw) - offset}"
        )
    if len(raw) - offset > need:
        raise FormatError(f"{path}: {len(raw) - offset - need} trailing bytes after payload")
    flat = np.frombuffer(raw, dtype="<f4", count=rows * d, offset=offset)
    return flat.astype(np.float64).reshape(rows, d)


def _expect_kind(kind: int, expected: int, path) -> None:
    if kind != expected:
        raise FormatError(f"{path}: kind {kind}, expected kind {expected}")


def read_prompts(path: str | os.PathLike) -> PromptTensor:
    raw = Path(path).read_bytes()
    kind, d, m, c, meta, offset = _parse_header(raw, path)
    _expect_kind(kind, KIND_PROMPTS, path)
    domains = _meta_strings(meta, "domains", path)
    classes = _meta_strings(meta, "classes", path)
    template = meta.get("template")
    if not isinstance(template, str):
        raise FormatError(f"{path}: metadata field 'template' missing or not a string")
    data = _read_payload(raw, offset, m * c, d, path)
    data = normalize_rows(data).reshape(m, c, d)
    data.setflags(write=False)
    t = PromptTensor(domain_names=domains, class_names=classes, template=template, data=data)
    t.validate()
    return t


def read_images(path: str | os.PathLike) -> ImageSet:
    raw = Path(path).read_bytes()
    kind, d, n, _, meta, offset = _parse_header(raw, path)
    _expect_kind(kind, KIND_IMAGES, path)
    classes = _meta_strings(meta, "classes", path)
    tag = meta.get("domain_tag")
    if tag is not None and not isinstance(tag, str):
        raise FormatError(f"{path}: metadata field 'domain_tag' must be a string")
    if len(raw) - offset < n * 4:
        raise TruncatedFileError(f"{path}: label block truncated")
    labels = np.frombuffer(raw, dtype="<u4", count=n, offset=offset).astype(np.int64)
    data = _read_payload(raw, offset + n * 4, n, d, path)
    data = normalize_rows(data)
    data.setflags(write=False)
    labels.setflags(write=False)
    s = ImageSet(class_names=classes, labels=labels, data=data, domain_tag=tag)
    s.validate()
    return s


def read_reps(path: str | os.PathLike) -> UnifiedReps:
    raw = Path(path).read_bytes()
    kind, d, c, _, meta, offset = _parse_header(raw, path)
    _expect_kind(kind, KIND_REPS, path)
    classes = _meta_strings(meta, "classes", path)
    data = _read_payload(raw, offset, c, d, path)
    data.setflags(write=False)
    r = UnifiedReps(class_names=classes, data=data)
    r.validate()
    return r
