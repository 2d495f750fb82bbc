"""Cosine autoencoder over prompt-representation tensors.

A small four-layer MLP (d -> hidden -> latent -> hidden -> d, ReLU between
the inner layers, identity output) is trained full-batch with AdamW to
reconstruct every prompt row while pulling the reconstructions of a class
together across domains and pushing different classes apart within each
domain.  Everything — forward pass, the three losses, their gradients, and
the optimizer — is written directly against numpy so the analytic gradients
can be audited against finite differences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    BadMagicError,
    NumericAbortError,
    TruncatedFileError,
    UnsupportedVersionError,
    ValidationError,
)
from .formats import PromptTensor, atomic_write_bytes

CKPT_MAGIC = b"DUPC"
CKPT_VERSION = 1
_CKPT_HEADER = struct.Struct("<4sIIII")  # magic, version, d, hidden, latent

RECON_KINDS = ("cosine", "l2")
ACTIVATION = "relu"

# Parameter blocks are always serialized / updated in this order.
PARAM_ORDER = ("w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class CaeConfig:
    """Training hyperparameters.

    ``hidden`` / ``latent`` default to ``None`` which resolves to ``d`` and
    ``max(1, d // 2)`` for the tensor being trained on, so 512-dim inputs
    get the stock (512, 256, 512) bottleneck.
    """

    lambda1: float = 1.0
    lambda2: float = 1.0
    lr: float = 0.04
    epochs: int = 1000
    seed: int = 0
    recon_loss: str = "cosine"
    hidden: int | None = None
    latent: int | None = None
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("loss weights lambda1/lambda2 must be >= 0")
        if not self.lr > 0:
            raise ValidationError(f"learning rate must be positive, got {self.lr}")
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.seed < 0:
            raise ValidationError(f"seed must be >= 0, got {self.seed}")
        if self.recon_loss not in RECON_KINDS:
            raise ValidationError(
                f"recon_loss must be one of {RECON_KINDS}, got {self.recon_loss!r}"
            )
        for name in ("hidden", "latent"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"{name} must be >= 1 when given, got {v}")
        if self.weight_decay < 0:
            raise ValidationError("weight_decay must be >= 0")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0.0 <= b < 1.0:
                raise ValidationError(f"{name} must lie in [0, 1), got {b}")
        if not self.eps > 0:
            raise ValidationError("eps must be positive")

    def resolved_hidden(self, d: int) -> int:
        return self.hidden if self.hidden is not None else d

    def resolved_latent(self, d: int) -> int:
        return self.latent if self.latent is not None else max(1, d // 2)


# ---------------------------------------------------------------------------
# model


@dataclass(eq=False)
class CaeModel:
    """Weights of the four-layer autoencoder.

    ``w<k>`` has shape (fan_out, fan_in); rows of the input batch are mapped
    as ``x @ w.T + b``.  The activation between layers 1-3 is fixed.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    w4: np.ndarray
    b4: np.ndarray
    activation: str = ACTIVATION

    @property
    def dim(self) -> int:
        return int(self.w1.shape[1])

    @property
    def hidden(self) -> int:
        return int(self.w1.shape[0])

    @property
    def latent(self) -> int:
        return int(self.w2.shape[0])

    def params(self) -> dict[str, np.ndarray]:
        """Live references to the parameter arrays, in update order."""
        return {name: getattr(self, name) for name in PARAM_ORDER}

    def validate(self) -> None:
        if self.activation != ACTIVATION:
            raise ValidationError(f"unsupported activation {self.activation!r}")
        d, h, z = self.dim, self.hidden, self.latent
        expect = {
            "w1": (h, d), "b1": (h,),
            "w2": (z, h), "b2": (z,),
            "w3": (h, z), "b3": (h,),
            "w4": (d, h), "b4": (d,),
        }
        for name, shape in expect.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValidationError(
                    f"parameter {name} has shape {got}, expected {shape}"
                )


def init_model(d: int, hidden: int, latent: int, seed: int = 0) -> CaeModel:
    """Fresh weights: uniform +-1/sqrt(fan_in) per layer, zero biases."""
    if min(d, hidden, latent) < 1:
        raise ValidationError("all layer widths must be >= 1")
    rng = np.random.default_rng(seed)

    def layer(fan_out: int, fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    return CaeModel(
        w1=layer(hidden, d), b1=np.zeros(hidden),
        w2=layer(latent, hidden), b2=np.zeros(latent),
        w3=layer(hidden, latent), b3=np.zeros(hidden),
        w4=layer(d, hidden), b4=np.zeros(d),
    )


def _as_rows3(t: PromptTensor | np.ndarray, what: str = "tensor") -> np.ndarray:
    """Coerce a prompt tensor or array to a float64 (M, C, d) array."""
    if isinstance(t, PromptTensor):
        return t.data
    a = np.asarray(t, dtype=np.float64)
    if a.ndim != 3:
        raise ValidationError(f"{what} must have shape (domains, classes, dim), got {a.shape}")
    return a


def _forward_rows(model: CaeModel, x: np.ndarray):
    """Forward pass on (rows, d); returns all pre/post-activation caches."""
    a1 = x @ model.w1.T + model.b1
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ model.w2.T + model.b2
    z = np.maximum(a2, 0.0)
    a3 = z @ model.w3.T + model.b3
    h2 = np.maximum(a3, 0.0)
    y = h2 @ model.w4.T + model.b4
    return a1, h1, a2, z, a3, h2, y


def forward(model: CaeModel, t: PromptTensor | np.ndarray) -> np.ndarray:
    """Reconstruct every row of ``t``; output shape mirrors the input.

    Outputs are raw network activations — they are deliberately not
    re-normalized, so downstream cosines see the true reconstruction.
    """
    if isinstance(t, PromptTensor):
        a = t.data
    else:
        a = np.asarray(t, dtype=np.float64)
        if a.ndim not in (2, 3):
            raise ValidationError(f"expected a 2-D or 3-D array of rows, got shape {a.shape}")
    if a.shape[-1] != model.dim:
        raise ValidationError(
            f"input dim {a.shape[-1]} does not match model dim {model.dim}"
        )
    rows = a.reshape(-1, model.dim)
    y = _forward_rows(model, rows)[-1]
    return y.reshape(a.shape)


def _backprop(model: CaeModel, x: np.ndarray, cache, d_y: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss given its gradient d_y at the output rows."""
    a1, h1, a2, z, a3, h2, _y = cache
    g_w4 = d_y.T @ h2
    g_b4 = d_y.sum(axis=0)
    d_a3 = (d_y @ model.w4) * (a3 > 0.0)
    g_w3 = d_a3.T @ z
    g_b3 = d_a3.sum(axis=0)
    d_a2 = (d_a3 @ model.w3) * (a2 > 0.0)
    g_w2 = d_a2.T @ h1
    g_b2 = d_a2.sum(axis=0)
    d_a1 = (d_a2 @ model.w2) * (a1 > 0.0)
    g_w1 = d_a1.T @ x
    g_b1 = d_a1.sum(axis=0)
    return {
        "w1": g_w1, "b1": g_b1,
        "w2": g_w2, "b2": g_b2,
        "w3": g_w3, "b3": g_b3,
        "w4": g_w4, "b4": g_b4,
    }


# ---------------------------------------------------------------------------
# losses (values + analytic gradients w.r.t. the reconstruction rows)


def _require_nonzero(q: np.ndarray, what: str) -> None:
    if np.any(q == 0.0):
        idx = np.unravel_index(int(np.argmin(q != 0.0)), q.shape)
        pos = idx[0] if len(idx) == 1 else tuple(int(i) for i in idx)
        raise ValidationError(f"{what} {pos} has zero norm; cosine is undefined")


def _rec_value_grad(x: np.ndarray, y: np.ndarray, kind: str):
    """Reconstruction loss over matched rows and its gradient w.r.t. y."""
    r = x.shape[0]
    if kind == "l2":
        diff = y - x
        loss = float(np.einsum("ij,ij->", diff, diff)) / r
        return loss, (2.0 / r) * diff
    qx = np.einsum("ij,ij->i", x, x)
    qy = np.einsum("ij,ij->i", y, y)
    _require_nonzero(qx, "input row")
    _require_nonzero(qy, "reconstruction row")
    dots = np.einsum("ij,ij->i", x, y)
    # dot/sqrt(qx*qy) is exactly 1.0 for bitwise-identical rows, which pins
    # the perfect-reconstruction loss at exactly -1.
    cos = dots / np.sqrt(qx * qy)
    loss = -float(np.mean(cos))
    nx = np.sqrt(qx)[:, None]
    ny = np.sqrt(qy)[:, None]
    grad = -((x / nx) - cos[:, None] * (y / ny)) / (r * ny)
    return loss, grad


def _intra_value_grad(y3: np.ndarray):
    """Pull term: mean cosine between each reconstruction and its class mean.

    Gradients flow both through the row itself and through its contribution
    to the class mean.
    """
    m, c, _d = y3.shape
    means = y3.mean(axis=0)  # (C, d)
    qm = np.einsum("cd,cd->c", means, means)
    if np.any(qm == 0.0):
        bad = int(np.argmin(qm != 0.0))
        raise ValidationError(
            f"class {bad} has a zero-norm mean reconstruction; cosine is undefined"
        )
    qy = np.einsum("mcd,mcd->mc", y3, y3)
    _require_nonzero(qy, "reconstruction row")
    dots = np.einsum("mcd,cd->mc", y3, means)
    cos = dots / np.sqrt(qy * qm[None, :])
    loss = -float(cos.sum()) / (m * c)

    ny = np.sqrt(qy)[:, :, None]          # (M, C, 1)
    nm = np.sqrt(qm)[:, None]             # (C, 1)
    yhat = y3 / ny
    mhat = means / nm
    direct = (mhat[None] - cos[:, :, None] * yhat) / ny
    # shared through-the-mean term: every row of class i receives the same
    # (1/M) sum over rows of that class
    through = (yhat - cos[:, :, None] * mhat[None]).sum(axis=0) / (m * nm)
    grad = -(direct + through[None]) / (m * c)
    return loss, grad


def _inter_value_grad(y3: np.ndarray):
    """Push term: mean cosine over ordered pairs of distinct classes, per domain."""
    m, c, _d = y3.shape
    if c < 2:
        raise ValidationError("separation loss needs at least 2 classes")
    dots = np.matmul(y3, np.swapaxes(y3, 1, 2))  # (M, C, C)
    q = np.diagonal(dots, axis1=1, axis2=2)      # (M, C); same compute path as dots
    _require_nonzero(q, "reconstruction row")
    cosm = dots / np.sqrt(q[:, :, None] * q[:, None, :])
    idx = np.arange(c)
    cosm[:, idx, idx] = 0.0
    scale = m * c * (c - 1)
    loss = float(cosm.sum()) / scale

    ny = np.sqrt(q)[:, :, None]
    u = y3 / ny
    ssum = u.sum(axis=1)                 # (M, d)
    g = cosm.sum(axis=2)                 # (M, C) off-diagonal cosine row sums
    grad = 2.0 * ((ssum[:, None, :] - u) - g[:, :, None] * u) / (scale * ny)
    return loss, grad


def loss_rec(t: PromptTensor | np.ndarray, t_hat: np.ndarray, kind: str = "cosine") -> float:
    """Reconstruction loss: -mean cosine (or mean squared L2 distance)."""
    if kind not in RECON_KINDS:
        raise ValidationError(f"recon_loss must be one of {RECON_KINDS}, got {kind!r}")
    x = t.data if isinstance(t, PromptTensor) else np.asarray(t, dtype=np.float64)
    y = np.asarray(t_hat, dtype=np.float64)
    if x.shape != y.shape:
        raise ValidationError(f"shape mismatch: inputs {x.shape} vs reconstructions {y.shape}")
    d = x.shape[-1]
    return _rec_value_grad(x.reshape(-1, d), y.reshape(-1, d), kind)[0]


def loss_intra(t_hat: np.ndarray, class_means: np.ndarray | None = None) -> float:
    """Alignment loss: -mean cosine between reconstructions and class means.

    When ``class_means`` is omitted the per-class mean over domains of
    ``t_hat`` itself is used (the value optimized during training).
    """
    y3 = _as_rows3(t_hat, "reconstructions")
    if class_means is None:
        return _intra_value_grad(y3)[0]
    means = np.asarray(class_means, dtype=np.float64)
    if means.shape != y3.shape[1:]:
        raise ValidationError(
            f"class means shape {means.shape} does not match classes x dim {y3.shape[1:]}"
        )
    m, c, _d = y3.shape
    qm = np.einsum("cd,cd->c", means, means)
    if np.any(qm == 0.0):
        bad = int(np.argmin(qm != 0.0))
        raise ValidationError(
            f"class {bad} has a zero-norm mean reconstruction; cosine is undefined"
        )
    qy = np.einsum("mcd,mcd->mc", y3, y3)
    _require_nonzero(qy, "reconstruction row")
    dots = np.einsum("mcd,cd->mc", y3, means)
    cos = dots / np.sqrt(qy * qm[None, :])
    return -float(cos.sum()) / (m * c)


def loss_inter(t_hat: np.ndarray) -> float:
    """Separation loss: +mean cosine over ordered distinct-class pairs per domain."""
    return _inter_value_grad(_as_rows3(t_hat, "reconstructions"))[0]


def loss_all(
    t: PromptTensor | np.ndarray,
    t_hat: np.ndarray,
    cfg: CaeConfig | None = None,
) -> tuple[float, float, float, float]:
    """Weighted total and its three components: (all, rec, intra, inter)."""
    cfg = cfg if cfg is not None else CaeConfig()
    x3 = _as_rows3(t, "tensor")
    y3 = _as_rows3(t_hat, "reconstructions")
    if x3.shape != y3.shape:
        raise ValidationError(f"shape mismatch: inputs {x3.shape} vs reconstructions {y3.shape}")
    l_rec = loss_rec(x3, y3, cfg.recon_loss)
    l_intra = loss_intra(y3)
    l_inter = loss_inter(y3)
    l_total = l_rec + cfg.lambda1 * l_intra + cfg.lambda2 * l_inter
    return l_total, l_rec, l_intra, l_inter


def evaluate_losses(
    model: CaeModel, t: PromptTensor | np.ndarray, cfg: CaeConfig | None = None
) -> tuple[float, float, float, float]:
    """Run the model on ``t`` and return (all, rec, intra, inter)."""
    cfg = cfg if cfg is not None else CaeConfig()
    x3 = _as_rows3(t, "tensor")
    return loss_all(x3, forward(model, x3), cfg)


def loss_and_gradients(
    model: CaeModel, t: PromptTensor | np.ndarray, cfg: CaeConfig | None = None
):
    """One full-batch forward/backward pass.

    Returns ``((l_all, l_rec, l_intra, l_inter), grads)`` where ``grads``
    maps parameter names to arrays shaped like the parameters.  This is the
    exact quantity consumed by one optimizer step, exposed so the analytic
    gradients can be checked against finite differences of the loss value.
    """
    cfg = cfg if cfg is not None else CaeConfig()
    x3 = _as_rows3(t, "tensor")
    m, c, d = x3.shape
    if d != model.dim:
        raise ValidationError(f"input dim {d} does not match model dim {model.dim}")
    x = x3.reshape(-1, d)
    cache = _forward_rows(model, x)
    y3 = cache[-1].reshape(m, c, d)

    l_rec, d_rec = _rec_value_grad(x, cache[-1], cfg.recon_loss)
    l_intra, d_intra = _intra_value_grad(y3)
    l_inter, d_inter = _inter_value_grad(y3)
    l_total = l_rec + cfg.lambda1 * l_intra + cfg.lambda2 * l_inter

    d_y = d_rec
    if cfg.lambda1 != 0.0:
        d_y = d_y + cfg.lambda1 * d_intra.reshape(-1, d)
    if cfg.lambda2 != 0.0:
        d_y = d_y + cfg.lambda2 * d_inter.reshape(-1, d)
    grads = _backprop(model, x, cache, d_y)
    return (l_total, l_rec, l_intra, l_inter), grads


# ---------------------------------------------------------------------------
# optimizer


class AdamW:
    """Adam with decoupled weight decay on a dict of numpy parameters.

    Weight decay is applied directly to the parameters, not mixed into the
    gradient, so a zero-gradient step with zero decay leaves parameters
    bit-identical.
    """

    def __init__(
        self,
        params: dict[str, np.ndarray],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        if not lr > 0:
            raise ValidationError("learning rate must be positive")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay != 0.0:
                update = update + self.weight_decay * p
            p -= self.lr * update


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainReport:
    """Per-epoch loss trajectories from one training run."""

    rec: list[float] = field(default_factory=list)
    intra: list[float] = field(default_factory=list)
    inter: list[float] = field(default_factory=list)
    total: list[float] = field(default_factory=list)
    seed: int = 0

    @property
    def epochs(self) -> int:
        return len(self.total)

    def as_csv(self) -> str:
        lines = ["epoch,loss_rec,loss_intra,loss_inter,loss_all"]
        for e in range(self.epochs):
            lines.append(
                f"{e},{self.rec[e]!r},{self.intra[e]!r},{self.inter[e]!r},{self.total[e]!r}"
            )
        return "\n".join(lines) + "\n"

    def save_csv(self, path: str | Path) -> None:
        atomic_write_bytes(path, self.as_csv().encode("utf-8"))


def train(t: PromptTensor | np.ndarray, cfg: CaeConfig | None = None) -> tuple[CaeModel, TrainReport]:
    """Full-batch training of a fresh model on one prompt tensor.

    Deterministic for a fixed (tensor, config): initialization is seeded and
    every epoch uses the whole batch.  Raises NumericAbortError (carrying the
    epoch index) if a loss or parameter goes non-finite.
    """
    cfg = cfg if cfg is not None else CaeConfig()
    cfg.validate()
    if isinstance(t, PromptTensor):
        t.validate()
    x3 = _as_rows3(t, "tensor")
    m, c, d = x3.shape
    if m < 1 or c < 2:
        raise ValidationError(
            f"training needs at least 1 domain and 2 classes, got ({m}, {c})"
        )
    model = init_model(d, cfg.resolved_hidden(d), cfg.resolved_latent(d), cfg.seed)
    opt = AdamW(
        model.params(),
        lr=cfg.lr,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        weight_decay=cfg.weight_decay,
    )
    report = TrainReport(seed=cfg.seed)
    params = model.params()
    for epoch in range(cfg.epochs):
        (l_total, l_rec, l_intra, l_inter), grads = loss_and_gradients(model, x3, cfg)
        if not np.isfinite(l_total):
            raise NumericAbortError(
                f"non-finite loss at epoch {epoch}: "
                f"rec={l_rec} intra={l_intra} inter={l_inter}",
                epoch=epoch,
            )
        opt.step(params, grads)
        for name, p in params.items():
            if not np.all(np.isfinite(p)):
                raise NumericAbortError(
                    f"parameter {name} went non-finite after the update at epoch {epoch}",
                    epoch=epoch,
                )
        report.rec.append(l_rec)
        report.intra.append(l_intra)
        report.inter.append(l_inter)
        report.total.append(l_total)
    for p in params.values():
        p.setflags(write=False)
    return model, report


# ---------------------------------------------------------------------------
# checkpoints


def save_model(model: CaeModel, cfg: CaeConfig, path: str | Path) -> None:
    """Serialize weights (float64) plus the training config to ``path``."""
    model.validate()
    header = _CKPT_HEADER.pack(CKPT_MAGIC, CKPT_VERSION, model.dim, model.hidden, model.latent)
    blocks = b"".join(
        np.ascontiguousarray(getattr(model, name), dtype="<f8").tobytes()
        for name in PARAM_ORDER
    )
    doc = {"activation": model.activation, "cfg": asdict(cfg)}
    tail = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    atomic_write_bytes(path, header + blocks + struct.pack("<I", len(tail)) + tail)


def _block_shapes(d: int, hidden: int, latent: int) -> list[tuple[str, tuple[int, ...]]]:
    return [
        ("w1", (hidden, d)), ("b1", (hidden,)),
        ("w2", (latent, hidden)), ("b2", (latent,)),
        ("w3", (hidden, latent)), ("b3", (hidden,)),
        ("w4", (d, hidden)), ("b4", (d,)),
    ]


def load_model(path: str | Path) -> tuple[CaeModel, CaeConfig]:
    """Load a checkpoint written by :func:`save_model`."""
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: file too short for a magic number")
    if raw[:4] != CKPT_MAGIC:
        raise BadMagicError(f"{path}: bad magic {raw[:4]!r}, expected {CKPT_MAGIC!r}")
    if len(raw) < _CKPT_HEADER.size:
        raise TruncatedFileError(f"{path}: truncated header")
    _magic, version, d, hidden, latent = _CKPT_HEADER.unpack_from(raw, 0)
    if version != CKPT_VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported checkpoint version {version}")
    if min(d, hidden, latent) < 1:
        raise ValidationError(f"{path}: invalid layer widths ({d}, {hidden}, {latent})")
    offset = _CKPT_HEADER.size
    arrays: dict[str, np.ndarray] = {}
    for name, shape in _block_shapes(d, hidden, latent):
        n = int(np.prod(shape))
        end = offset + 8 * n
        if end > len(raw):
            raise TruncatedFileError(f"{path}: truncated parameter block {name}")
        a = np.frombuffer(raw[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
        a.setflags(write=False)
        arrays[name] = a
        offset = end
    if len(raw) < offset + 4:
        raise TruncatedFileError(f"{path}: missing config length")
    (tail_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if len(raw) < offset + tail_len:
        raise TruncatedFileError(f"{path}: truncated config block")
    if len(raw) > offset + tail_len:
        raise ValidationError(f"{path}: {len(raw) - offset - tail_len} trailing bytes")
    try:
        doc = json.loads(raw[offset : offset + tail_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path}: config block is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("cfg"), dict):
        raise ValidationError(f"{path}: config block must be an object with a 'cfg' object")
    activation = doc.get("activation", ACTIVATION)
    known = {f.name for f in CaeConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]
    cfg_fields = {k: v for k, v in doc["cfg"].items() if k in known}
    try:
        cfg = CaeConfig(**cfg_fields)
        cfg.validate()
    except TypeError as exc:
        raise ValidationError(f"{path}: bad config block: {exc}") from exc
    model = CaeModel(activation=str(activation), **arrays)
    model.validate()
    return model, cfg
