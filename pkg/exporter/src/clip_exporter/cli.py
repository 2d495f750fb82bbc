"""Command line front end.

Exit codes: 0 success, 2 usage error, 3 data/backend error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import backbone_names, load_encoder
from .errors import ExporterError
from .export import export_images, export_text

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _read_class_list(path: str) -> list[str]:
    # same file convention as the consumer: one name per line, "#" comments
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    names = [ln.strip() for ln in lines]
    names = [n for n in names if n and not n.startswith("#")]
    if not names:
        raise ExporterError(f"{path}: no class names found")
    return names


def cmd_export_text(args: argparse.Namespace) -> int:
    encoder = load_encoder(args.backbone, batch_size=args.batch_size)
    stats = export_text(args.prompts, args.sidecar, encoder, args.out)
    print(
        f"wrote {stats['prompts']} prompt rows "
        f"({stats['domains']} domains x {stats['classes']} classes, "
        f"{args.backbone}) to {args.out}"
    )
    return EXIT_OK


def cmd_export_images(args: argparse.Namespace) -> int:
    classes = _read_class_list(args.classes)
    encoder = load_encoder(args.backbone, batch_size=args.batch_size)
    stats = export_images(args.root, classes, encoder, args.out)
    print(
        f"wrote {stats['images']} image rows "
        f"(domain {stats['domain_tag']!r}, {args.backbone}) to {args.out}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clip-exporter",
        description="Export CLIP embeddings of prompts and images to DUPR files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pt = sub.add_parser("export-text", help="encode a prompt file into a prompt tensor")
    pt.add_argument("--prompts", required=True, help="text file, one prompt per line")
    pt.add_argument("--sidecar", required=True,
                    help="sidecar JSON mapping lines to (domain, class) cells")
    pt.add_argument("--out", required=True, help="output .dupr path")
    pt.set_defaults(func=cmd_export_text)

    pi = sub.add_parser("export-images", help="encode a folder-per-class image tree")
    pi.add_argument("--root", required=True,
                    help="domain folder containing one subfolder per class")
    pi.add_argument("--classes", required=True, help="class list file")
    pi.add_argument("--out", required=True, help="output .dupr path")
    pi.set_defaults(func=cmd_export_images)

    for p in (pt, pi):
        p.add_argument("--backbone", default="vit-b16", choices=backbone_names(),
                       help="embedding model (default: vit-b16)")
        p.add_argument("--batch-size", type=int, default=64,
                       help="encoder batch size (default: 64)")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage problems
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return args.func(args)
    except ExporterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == "__main__":
    entry()
