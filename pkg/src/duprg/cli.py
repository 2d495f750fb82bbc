"""Command-line pipeline: expand banks, train, unify, evaluate, sweep, synthesize.

Exit codes: 0 success, 2 usage, 3 validation/file problems, 4 numeric abort.
Human-readable results go to stdout, diagnostics to stderr, and every output
file is written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, replace
from itertools import product
from pathlib import Path

from . import bank as bank_mod
from .aggregate import cae_unify, mean_pool
from .cae import CaeConfig, load_model, save_model, train
from .classify import EvalResult, evaluate
from .errors import DuprgError, NumericAbortError, ValidationError
from .formats import (
    atomic_write_bytes,
    read_images,
    read_prompts,
    read_reps,
    write_images,
    write_prompts,
    write_reps,
)
from .synth import SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4

# config fields that may be set from the command line (flag name = field name)
_CFG_FLAG_FIELDS = (
    "lambda1", "lambda2", "lr", "epochs", "seed",
    "recon_loss", "hidden", "latent", "weight_decay",
)


def _read_class_list(path: str) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    names = [ln.strip() for ln in lines]
    names = [n for n in names if n and not n.startswith("#")]
    if not names:
        raise ValidationError(f"{path}: no class names found")
    return names


def _comma_floats(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}: {exc}") from exc
    if not values:
        raise argparse.ArgumentTypeError(f"empty value list {text!r}")
    return values


def _add_config_flags(p: argparse.ArgumentParser, *, lambdas: bool = True) -> None:
    p.add_argument("--config", metavar="JSON",
                   help="JSON file of config fields; flags override it")
    if lambdas:
        p.add_argument("--lambda1", type=float, default=None,
                       help="weight of the class-alignment loss")
        p.add_argument("--lambda2", type=float, default=None,
                       help="weight of the class-separation loss")
    p.add_argument("--lr", type=float, default=None, help="AdamW learning rate")
    p.add_argument("--epochs", type=int, default=None, help="training epochs")
    p.add_argument("--seed", type=int, default=None, help="initialization seed")
    p.add_argument("--recon-loss", dest="recon_loss", choices=("cosine", "l2"),
                   default=None, help="reconstruction loss kind")
    p.add_argument("--hidden", type=int, default=None, help="hidden layer width")
    p.add_argument("--latent", type=int, default=None, help="bottleneck width")
    p.add_argument("--weight-decay", dest="weight_decay", type=float, default=None)


def _build_config(args: argparse.Namespace, exclude: tuple[str, ...] = ()) -> CaeConfig:
    """Merge defaults < --config JSON < explicit flags into a validated config.

    ``exclude`` names flags whose meaning differs for the calling command
    (sweep owns the lambda grid, so those never reach the base config).
    """
    merged = asdict(CaeConfig())
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{config_path}: not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValidationError(f"{config_path}: config must be a JSON object")
        unknown = sorted(set(doc) - set(merged))
        if unknown:
            raise ValidationError(f"{config_path}: unknown config keys {unknown}")
        merged.update(doc)
    for name in _CFG_FLAG_FIELDS:
        if name in exclude:
            continue
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    try:
        cfg = CaeConfig(**merged)
    except TypeError as exc:
        raise ValidationError(f"bad config: {exc}") from exc
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def cmd_bank(args: argparse.Namespace) -> int:
    b = bank_mod.load_bank(args.bank_file) if args.bank_file else bank_mod.preset(args.preset)
    classes = _read_class_list(args.classes)
    triples = bank_mod.expand(b, classes)
    text = "\n".join(t for _, _, t in triples) + "\n"
    atomic_write_bytes(args.out, text.encode("utf-8"))
    # an empty bank degenerates to one standard prompt per class, which
    # downstream tooling treats as a single pseudo-domain
    effective_domains = list(b.domains) if b.size else ["standard"]
    template = b.template_domain if b.size else b.template_standard
    sidecar = {
        "bank": b.name,
        "classes": classes,
        "domains": effective_domains,
        "template": template,
        "entries": [[j, i] for j, i, _ in triples],
    }
    sidecar_path = args.sidecar or f"{args.out}.sidecar.json"
    atomic_write_bytes(
        sidecar_path, (json.dumps(sidecar, indent=2, sort_keys=True) + "\n").encode("utf-8")
    )
    print(f"wrote {len(triples)} prompts to {args.out} (sidecar: {sidecar_path})")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    t = read_prompts(args.prompts)
    model, report = train(t, cfg)
    save_model(model, cfg, args.out)
    if args.report:
        report.save_csv(args.report)
        print(f"wrote per-epoch losses to {args.report}")
    print(
        f"trained {report.epochs} epochs: "
        f"rec={report.rec[-1]:.6f} intra={report.intra[-1]:.6f} "
        f"inter={report.inter[-1]:.6f} total={report.total[-1]:.6f}"
    )
    print(f"wrote checkpoint to {args.out}")
    return EXIT_OK


def cmd_unify(args: argparse.Namespace) -> int:
    if args.mode == "cae" and not args.model:
        print("usage error: --mode cae requires --model", file=sys.stderr)
        return EXIT_USAGE
    t = read_prompts(args.prompts)
    if args.mode == "mp":
        if args.model:
            print("note: --model is ignored in mp mode", file=sys.stderr)
        reps = mean_pool(t)
    else:
        model, _cfg = load_model(args.model)
        reps = cae_unify(t, model)
    write_reps(reps, args.out)
    print(f"wrote {reps.n_classes} class representations to {args.out}")
    return EXIT_OK


def _print_accuracy_table(tags: list[str], accs: list[float], mean: float) -> None:
    headers = tags + ["mean"]
    values = [f"{100.0 * a:.1f}" for a in accs] + [f"{100.0 * mean:.1f}"]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    print("  ".join(v.ljust(w) for v, w in zip(values, widths)))


def _result_dict(path: str, tag: str, res: EvalResult) -> dict:
    doc = res.as_dict()
    doc["path"] = str(path)
    doc["tag"] = tag
    return doc


def cmd_eval(args: argparse.Namespace) -> int:
    reps = read_reps(args.reps)
    entries: list[tuple[str, str, EvalResult]] = []
    for path in args.images:
        s = read_images(path)
        tag = s.domain_tag if s.domain_tag is not None else Path(path).stem
        entries.append((path, tag, evaluate(reps, s)))
    accs = [res.accuracy for _, _, res in entries]
    mean = sum(accs) / len(accs)
    _print_accuracy_table([tag for _, tag, _ in entries], accs, mean)
    if args.out:
        doc = {
            "files": [_result_dict(p, tag, res) for p, tag, res in entries],
            "mean_accuracy": mean,
        }
        atomic_write_bytes(
            args.out, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
        )
        print(f"wrote results to {args.out}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _build_config(args, exclude=("lambda1", "lambda2"))
    t = read_prompts(args.prompts)
    sets = []
    for path in args.images:
        s = read_images(path)
        tag = s.domain_tag if s.domain_tag is not None else Path(path).stem
        sets.append((tag, s))
    rows: list[list] = []
    for l1, l2 in product(args.lambda1, args.lambda2):
        cfg = replace(base, lambda1=l1, lambda2=l2)
        cfg.validate()
        model, _report = train(t, cfg)
        reps = cae_unify(t, model)
        accs = [100.0 * evaluate(reps, s).accuracy for _, s in sets]
        mean = sum(accs) / len(accs)
        note = "  (reconstruction-only)" if l1 == 0.0 and l2 == 0.0 else ""
        print(f"lambda1={l1:g} lambda2={l2:g} mean={mean:.2f}{note}")
        rows.append([l1, l2, *accs, mean])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda1", "lambda2"] + [f"accuracy_{tag}" for tag, _ in sets] + ["mean"])
    writer.writerows(rows)
    atomic_write_bytes(args.out, buf.getvalue().encode("utf-8"))
    print(f"wrote {len(rows)} grid rows to {args.out}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        n_classes=args.classes,
        n_domains=args.domains,
        dim=args.dim,
        n_per_class=args.n_per_class,
        class_sep=args.class_sep,
        domain_shift=args.domain_shift,
        noise=args.noise,
        seed=args.seed,
    )
    t, images, oracle = generate(spec)
    write_prompts(t, args.out_prompts)
    write_images(images, args.out_images)
    write_reps(oracle, args.out_reps)
    print(
        f"wrote {t.n_domains}x{t.n_classes}x{t.dim} prompts to {args.out_prompts}, "
        f"{images.n_images} images to {args.out_images}, "
        f"oracle reps to {args.out_reps}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duprg",
        description="Domain-unified prompt representation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bank", help="expand a domain bank into prompt text")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in bank: empty, task:<dataset>, combined, expanded")
    src.add_argument("--bank-file", help="bank JSON file")
    p.add_argument("--classes", required=True, help="text file, one class name per line")
    p.add_argument("--out", required=True, help="output prompt text file")
    p.add_argument("--sidecar", help="sidecar JSON path (default: <out>.sidecar.json)")
    p.set_defaults(func=cmd_bank)

    p = sub.add_parser("train", help="train the autoencoder on a prompt tensor")
    p.add_argument("--prompts", required=True, help="prompt tensor file")
    p.add_argument("--out", required=True, help="output checkpoint file")
    p.add_argument("--report", help="optional per-epoch loss CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("unify", help="collapse a prompt tensor to per-class reps")
    p.add_argument("--mode", required=True, choices=("mp", "cae"))
    p.add_argument("--model", help="checkpoint file (required for --mode cae)")
    p.add_argument("--prompts", required=True)
    p.add_argument("--out", required=True, help="output reps file")
    p.set_defaults(func=cmd_unify)

    p = sub.add_parser("eval", help="score image sets against class reps")
    p.add_argument("--reps", required=True)
    p.add_argument("--images", required=True, nargs="+")
    p.add_argument("--out", help="optional JSON results file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="grid-sweep loss weights, one training run each")
    p.add_argument("--prompts", required=True)
    p.add_argument("--images", required=True, nargs="+")
    p.add_argument("--out", required=True, help="output CSV grid")
    p.add_argument("--lambda1", type=_comma_floats, default=[0.0, 0.5, 1.0],
                   metavar="L[,L...]", help="comma-separated grid values")
    p.add_argument("--lambda2", type=_comma_floats, default=[0.0, 0.5, 1.0],
                   metavar="L[,L...]", help="comma-separated grid values")
    _add_config_flags(p, lambdas=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic benchmark")
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--domains", type=int, default=8)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--n-per-class", dest="n_per_class", type=int, default=20)
    p.add_argument("--class-sep", dest="class_sep", type=float, default=1.0)
    p.add_argument("--domain-shift", dest="domain_shift", type=float, default=0.6)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prompts", default="synth_prompts.dupr")
    p.add_argument("--out-images", default="synth_images.dupr")
    p.add_argument("--out-reps", default="synth_reps.dupr")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage problems
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return int(args.func(args))
    except NumericAbortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DuprgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entry() -> None:
    raise SystemExit(main(sys.argv[1:]))
