from pathlib import Path

import pytest
from PIL import Image

from clip_exporter.backends import load_encoder


@pytest.fixture(scope="session")
def dummy():
    return load_encoder("dummy")


def write_png(path: Path, color: tuple[int, int, int]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", (4, 4), color).save(path)
    return path


def make_image_tree(root: Path, folders: dict[str, int]) -> Path:
    """Build root/<folder>/img_<k>.png with per-file distinct pixel content."""
    root.mkdir(parents=True, exist_ok=True)
    for f, (folder, count) in enumerate(sorted(folders.items())):
        for k in range(count):
            write_png(root / folder / f"img_{k}.png", (40 * f + 10, 25 * k + 5, 200))
    return root
