"""Domain banks and their expansion into per-(domain, class) prompt text.

A bank is an ordered list of style descriptors plus two templates: one
used when a domain descriptor is substituted in, and a standard one used
when the bank is empty. Expansion is domain-major, matching the row
ordering of prompt tensor files (row = domain * C + class).
"""

from __future__ import annotations

import json
import os
import re
import string
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .formats import atomic_write_bytes

DEFAULT_DOMAIN_TEMPLATE = "a {domain} photo of a {class}"
DEFAULT_STANDARD_TEMPLATE = "a photo of a {class}"

# Style-bearing domain names of the standard benchmark suites. Two of the
# five suites (vlcs, terra_incognita) have domains that are data sources
# rather than visual styles, so their task banks are empty.
DATASET_DOMAINS: dict[str, tuple[str, ...]] = {
    "pacs": ("photo", "art painting", "cartoon", "sketch"),
    "vlcs": (),
    "officehome": ("art", "clipart", "product", "real world"),
    "terraincognita": (),
    "domainnet": ("clipart", "infograph", "painting", "quickdraw", "real", "sketch"),
}

COMBINED_DOMAINS: tuple[str, ...] = (
    "photo", "art painting", "cartoon", "sketch", "clipart",
    "infograph", "painting", "quickdraw", "real", "product",
)

EXPANDED_EXTRAS: tuple[str, ...] = (
    "watercolor", "pixelate", "geometric", "mosaic", "abstract", "science fiction",
)


def _placeholders(template: str) -> set[str]:
    try:
        fields = {name for _, name, _, _ in string.Formatter().parse(template)
                  if name is not None}
    except ValueError as exc:
        raise ValidationError(f"unparseable template {template!r}: {exc}") from exc
    return fields


@dataclass(frozen=True)
class DomainBank:
    """Named, ordered collection of domain descriptors plus templates."""

    name: str
    domains: tuple[str, ...]
    template_domain: str = DEFAULT_DOMAIN_TEMPLATE
    template_standard: str = DEFAULT_STANDARD_TEMPLATE

    def __post_init__(self):
        object.__setattr__(self, "domains",
                           tuple(d.strip().lower() for d in self.domains))
        self.validate()

    @property
    def size(self) -> int:
        return len(self.domains)

    def validate(self) -> None:
        seen = set()
        for d in self.domains:
            if not d:
                raise ValidationError(f"bank {self.name!r} has an empty domain descriptor")
            if d in seen:
                raise ValidationError(f"bank {self.name!r} has duplicate descriptor {d!r}")
            seen.add(d)
        if _placeholders(self.template_domain) != {"domain", "class"}:
            raise ValidationError(
                "template_domain must use exactly the placeholders {domain} and {class}"
            )
        if _placeholders(self.template_standard) != {"class"}:
            raise ValidationError(
                "template_standard must use exactly the placeholder {class}"
            )


def expand(bank: DomainBank, classes: list[str] | tuple[str, ...]) -> list[tuple[int, int, str]]:
    """Expand (bank x classes) into (domain_index, class_index, prompt) triples.

    Domain-major ordering; an empty bank degenerates to one standard
    prompt per class. Class names have underscores replaced by spaces
    before substitution.
    """
    if not classes:
        raise ValidationError("expand needs at least one class")
    if len(set(classes)) != len(classes):
        dupe = next(c for i, c in enumerate(classes) if c in classes[:i])
        raise ValidationError(f"duplicate class name {dupe!r}")
    texts = [c.replace("_", " ") for c in classes]
    out = []
    try:
        if bank.size == 0:
            for i, text in enumerate(texts):
                out.append((0, i, bank.template_standard.format(**{"class": text})))
        else:
            for j, domain in enumerate(bank.domains):
                for i, text in enumerate(texts):
                    out.append((j, i, bank.template_domain.format(
                        **{"domain": domain, "class": text})))
    except (KeyError, IndexError, ValueError) as exc:
        raise ValidationError(f"placeholder substitution failed: {exc}") from exc
    return out


def _canon_dataset(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


def preset(name: str) -> DomainBank:
    """Return one of the built-in banks.

    Known names: "empty", "task:<dataset>", "combined", "expanded".
    """
    key = name.strip().lower()
    if key == "empty":
        return DomainBank(name="empty", domains=())
    if key == "combined":
        return DomainBank(name="combined", domains=COMBINED_DOMAINS)
    if key == "expanded":
        return DomainBank(name="expanded", domains=COMBINED_DOMAINS + EXPANDED_EXTRAS)
    if key.startswith("task:"):
        dataset = _canon_dataset(key[len("task:"):])
        if dataset not in DATASET_DOMAINS:
            raise ValidationError(
                f"unknown dataset {key[len('task:'):]!r}; known: {sorted(DATASET_DOMAINS)}"
            )
        return DomainBank(name=f"task:{dataset}", domains=DATASET_DOMAINS[dataset])
    raise ValidationError(
        f"unknown preset {name!r}; expected empty, task:<dataset>, combined, or expanded"
    )


def save_bank(bank: DomainBank, path: str | os.PathLike) -> None:
    doc = {
        "name": bank.name,
        "domains": list(bank.domains),
        "template_domain": bank.template_domain,
        "template_standard": bank.template_standard,
    }
    atomic_write_bytes(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def load_bank(path: str | os.PathLike) -> DomainBank:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: bank file must hold a JSON object")
    for key, typ in (("name", str), ("domains", list),
                     ("template_domain", str), ("template_standard", str)):
        if key not in doc:
            raise ValidationError(f"{path}: missing field {key!r}")
        if not isinstance(doc[key], typ):
            raise ValidationError(f"{path}: field {key!r} must be {typ.__name__}")
    if not all(isinstance(d, str) for d in doc["domains"]):
        raise ValidationError(f"{path}: 'domains' must be a list of strings")
    return DomainBank(
        name=doc["name"],
        domains=tuple(doc["domains"]),
        template_domain=doc["template_domain"],
        template_standard=doc["template_standard"],
    )
