"""Export operations: prompt files and image folders to DUPR containers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .format import write_image_set, write_prompt_tensor

IMAGE_EXTENSIONS = {".bmp", ".gif", ".jpeg", ".jpg", ".png", ".webp"}

_SIDECAR_KEYS = ("classes", "domains", "entries", "template")


def _encoder_meta(encoder) -> dict:
    return {
        "backbone": encoder.name,
        "preprocess": encoder.preprocess_id,
        "weights_revision": encoder.weights_revision,
    }


def load_sidecar(path: str | Path) -> dict:
    """Read the prompt-file sidecar and check it describes a full grid."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read sidecar {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"sidecar {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"sidecar {path} must be a JSON object")
    missing = [k for k in _SIDECAR_KEYS if k not in doc]
    if missing:
        raise ValidationError(f"sidecar {path} missing keys {missing}")
    domains, classes = doc["domains"], doc["classes"]
    for name, values in (("domains", domains), ("classes", classes)):
        if (
            not isinstance(values, list)
            or not values
            or not all(isinstance(v, str) and v for v in values)
        ):
            raise ValidationError(f"sidecar {name} must be a non-empty list of names")
    entries = doc["entries"]
    m, c = len(domains), len(classes)
    seen = set()
    for entry in entries if isinstance(entries, list) else ():
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(v, int) for v in entry)
        ):
            raise ValidationError(f"sidecar entry {entry!r} is not an index pair")
        j, i = entry
        if not (0 <= j < m and 0 <= i < c):
            raise ValidationError(f"sidecar entry {entry!r} outside the {m}x{c} grid")
        if (j, i) in seen:
            raise ValidationError(f"sidecar entry {entry!r} appears twice")
        seen.add((j, i))
    if len(seen) != m * c:
        raise ValidationError(
            f"sidecar entries cover {len(seen)} cells, expected the full {m}x{c} grid"
        )
    return doc


def read_prompt_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read prompts {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValidationError(f"prompt file {path} has no prompts")
    return lines


def export_text(
    prompts_path: str | Path,
    sidecar_path: str | Path,
    encoder,
    out_path: str | Path,
) -> dict:
    """Encode a prompt file into a domain-major prompt tensor.

    The sidecar pins which (domain, class) cell each prompt line fills, so
    the output layout never depends on the line order of the text file.
    """
    lines = read_prompt_lines(prompts_path)
    sidecar = load_sidecar(sidecar_path)
    entries = sidecar["entries"]
    if len(lines) != len(entries):
        raise ValidationError(
            f"prompt file has {len(lines)} lines but sidecar lists {len(entries)} entries"
        )
    rows = encoder.encode_texts(lines)
    domains, classes = sidecar["domains"], sidecar["classes"]
    data = np.empty((len(domains), len(classes), encoder.dim))
    for row, (j, i) in zip(rows, entries):
        data[j, i] = row
    write_prompt_tensor(
        data,
        domains=domains,
        classes=classes,
        template=sidecar["template"],
        meta_extra=_encoder_meta(encoder),
        path=out_path,
    )
    return {"prompts": len(lines), "domains": len(domains), "classes": len(classes)}


def _class_folders(image_root: Path, classes: list[str]) -> list[tuple[int, Path]]:
    index = {name: i for i, name in enumerate(classes)}
    folders = sorted(p for p in image_root.iterdir() if p.is_dir())
    if not folders:
        raise ValidationError(f"{image_root} contains no class folders")
    out = []
    for folder in folders:
        label = index.get(folder.name.replace("_", " "))
        if label is None:
            raise ValidationError(
                f"folder {folder.name!r} does not match any class in {classes}"
            )
        out.append((label, folder))
    return out


def export_images(
    image_root: str | Path,
    classes: list[str],
    encoder,
    out_path: str | Path,
) -> dict:
    """Encode a folder-per-class image tree into a labeled image set.

    The root folder's own name is recorded as the domain tag, matching the
    layout datasets ship in (root = domain, one subfolder per class).
    """
    root = Path(image_root)
    if not root.is_dir():
        raise ValidationError(f"image root {root} is not a directory")
    if not classes:
        raise ValidationError("class list is empty")
    if len(set(classes)) != len(classes):
        raise ValidationError("class list contains duplicates")
    paths: list[Path] = []
    labels: list[int] = []
    for label, folder in _class_folders(root, classes):
        files = sorted(
            p for p in folder.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
        )
        if not files:
            raise ValidationError(f"class folder {folder} contains no images")
        paths.extend(files)
        labels.extend([label] * len(files))
    data = encoder.encode_images(paths)
    write_image_set(
        data,
        labels=np.asarray(labels, dtype=np.uint32),
        classes=classes,
        domain_tag=root.name,
        meta_extra=_encoder_meta(encoder),
        path=out_path,
    )
    return {"images": len(paths), "classes": len(classes), "domain_tag": root.name}
