"""Writer for the DUPR interchange format.

Implemented from the format contract rather than shared code, so the bytes
produced here independently cross-check the consumer's implementation:
25-byte little-endian header (magic, version, kind, dim, two row counts,
metadata length), sorted-key compact UTF-8 JSON metadata, optional uint32
label block (kind 1), float32 row-major payload.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ValidationError

MAGIC = b"DUPR"
VERSION = 1
KIND_PROMPTS = 0
KIND_IMAGES = 1

_HEADER = struct.Struct("<4sIBIIII")


def atomic_write_bytes(path: str | os.PathLike, payload: bytes) -> None:
    """Write via a same-directory temp file and rename into place."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _meta_bytes(meta: dict) -> bytes:
    return json.dumps(
        meta, ensure_ascii=False, sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def _as_f32_rows(data: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError(f"{what} must be a 2-D row matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{what} contains non-finite values")
    return np.ascontiguousarray(a, dtype="<f4")


def write_prompt_tensor(
    data: np.ndarray,
    domains: list[str],
    classes: list[str],
    template: str,
    meta_extra: dict,
    path: str | os.PathLike,
) -> None:
    """Write an (M, C, d) tensor as a kind-0 file, rows domain-major."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 3:
        raise ValidationError(f"prompt tensor must be 3-D, got shape {a.shape}")
    m, c, d = a.shape
    if m != len(domains) or c != len(classes):
        raise ValidationError(
            f"tensor shape {m}x{c} does not match {len(domains)} domains "
            f"x {len(classes)} classes"
        )
    meta = dict(meta_extra)
    meta.update({"domains": list(domains), "classes": list(classes),
                 "template": template})
    rows = _as_f32_rows(a.reshape(-1, d), "prompt rows")
    mb = _meta_bytes(meta)
    header = _HEADER.pack(MAGIC, VERSION, KIND_PROMPTS, d, m, c, len(mb))
    atomic_write_bytes(path, header + mb + rows.tobytes())


def write_image_set(
    data: np.ndarray,
    labels: np.ndarray,
    classes: list[str],
    domain_tag: str | None,
    meta_extra: dict,
    path: str | os.PathLike,
) -> None:
    """Write (N, d) rows plus uint32 labels as a kind-1 file."""
    rows = _as_f32_rows(data, "image rows")
    n, d = rows.shape
    lab = np.asarray(labels)
    if lab.shape != (n,):
        raise ValidationError(f"{lab.shape} labels for {n} rows")
    if lab.size and (lab.min() < 0 or lab.max() >= len(classes)):
        raise ValidationError(
            f"labels must lie in [0, {len(classes)}), got range "
            f"[{lab.min()}, {lab.max()}]"
        )
    meta = dict(meta_extra)
    meta["classes"] = list(classes)
    if domain_tag is not None:
        meta["domain_tag"] = domain_tag
    mb = _meta_bytes(meta)
    header = _HEADER.pack(MAGIC, VERSION, KIND_IMAGES, d, n, 0, len(mb))
    payload = np.ascontiguousarray(lab, dtype="<u4").tobytes() + rows.tobytes()
    atomic_write_bytes(path, header + mb + payload)
