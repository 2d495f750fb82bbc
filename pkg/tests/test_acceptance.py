"""Acceptance gate: one test per shipped guarantee.

Each test prints a single verdict line (visible with ``pytest -s`` and in
failure reports); the ``-v`` test status doubles as the pass/fail record.
"""

import math
import time

import numpy as np

from duprg import (
    CaeConfig,
    SynthSpec,
    evaluate,
    cae_unify,
    evaluate_losses,
    forward,
    generate,
    init_model,
    intra_class_tightness,
    load_model,
    loss_and_gradients,
    loss_inter,
    loss_intra,
    loss_rec,
    mean_pool,
    predict,
    read_images,
    read_prompts,
    read_reps,
    save_model,
    train,
    write_images,
    write_prompts,
    write_reps,
)
from duprg.cae import _forward_rows
from duprg.formats import PromptTensor


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _unit_rows3(rng, m, c, d):
    x = rng.normal(size=(m, c, d))
    return x / np.linalg.norm(x, axis=2, keepdims=True)


def _tensor_of(data):
    m, c, _ = data.shape
    return PromptTensor(
        domain_names=tuple(f"d{j}" for j in range(m)),
        class_names=tuple(f"c{i}" for i in range(c)),
        template="t {domain} {class}",
        data=data,
    )


# ---------------------------------------------------------------------------
# 1. analytic gradients vs central finite differences


def _kink_safe_instance(rng, d=8, hidden=6, latent=4, m=3, c=4):
    # stay away from ReLU kinks and near-zero rows so the quadratic FD
    # error model applies at h=1e-5
    for _ in range(200):
        model = init_model(d, hidden, latent, seed=int(rng.integers(2**31)))
        for p in model.params().values():
            p += rng.uniform(-0.5, 0.5, size=p.shape)
        x3 = _unit_rows3(rng, m, c, d)
        a1, _, a2, _, a3, _, y = _forward_rows(model, x3.reshape(-1, d))
        pre = np.concatenate([a1.ravel(), a2.ravel(), a3.ravel()])
        if np.abs(pre).min() < 1e-3:
            continue
        if np.linalg.norm(y, axis=1).min() < 1e-2:
            continue
        if np.linalg.norm(y.reshape(m, c, d).mean(axis=0), axis=1).min() < 1e-2:
            continue
        return model, x3
    raise AssertionError("no kink-safe instance found")


def _fd_worst_rel_error(model, x3, cfg, h=1e-5):
    _, grads = loss_and_gradients(model, x3, cfg)
    worst = 0.0
    for name, p in model.params().items():
        g = grads[name]
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = p[ix]
            p[ix] = orig + h
            lp = evaluate_losses(model, x3, cfg)[0]
            p[ix] = orig - h
            lm = evaluate_losses(model, x3, cfg)[0]
            p[ix] = orig
            fd = (lp - lm) / (2.0 * h)
            denom = max(abs(fd), abs(g[ix]), 1e-8)
            worst = max(worst, abs(fd - g[ix]) / denom)
    return worst


def test_gradient_correctness():
    rng = np.random.default_rng(2024)
    grid = [(l1, l2) for l1 in (0.0, 0.5, 1.0) for l2 in (0.0, 0.5, 1.0)]
    t0 = time.monotonic()
    worst = 0.0
    instances = 0
    for l1, l2 in grid:
        cfg = CaeConfig(lambda1=l1, lambda2=l2)
        for _ in range(3):
            model, x3 = _kink_safe_instance(rng)
            worst = max(worst, _fd_worst_rel_error(model, x3, cfg))
            instances += 1
    elapsed = time.monotonic() - t0
    ok = instances >= 20 and worst < 1e-4 and elapsed < 10.0
    _verdict(
        "gradient correctness",
        ok,
        f"{instances} instances over a 3x3 weight grid, worst relative "
        f"error {worst:.3e} (< 1e-4), {elapsed:.1f}s (< 10s)",
    )


# ---------------------------------------------------------------------------
# 2. loss anchors


def _ref_cos(a, b):
    dot = math.fsum(x * y for x, y in zip(a, b))
    na = math.sqrt(math.fsum(x * x for x in a))
    nb = math.sqrt(math.fsum(y * y for y in b))
    return dot / (na * nb)


def test_loss_anchors():
    rng = np.random.default_rng(7)
    x = _unit_rows3(rng, 3, 4, 16)
    y = rng.normal(size=(3, 4, 16))
    checks = []

    checks.append(("rec(t,t) == -1 exactly", loss_rec(x, x.copy()) == -1.0))

    row = rng.normal(size=8)
    coincident = np.tile(row, (3, 4, 1))
    checks.append(("inter == +1 when classes coincide", loss_inter(coincident) == 1.0))

    drift = 0.0
    base = loss_rec(x, y)
    for s in (2.0, 1e-6, 1e6, 3.7):
        ys = y.copy()
        ys[1, 2] *= s
        xs = x.copy()
        xs[0, 3] *= s
        drift = max(drift, abs(loss_rec(x, ys) - base), abs(loss_rec(xs, y) - base))
    checks.append((f"rec scale drift {drift:.2e} < 1e-10", drift < 1e-10))

    m, c, d = y.shape
    means = [[math.fsum(y[j, i, k] for j in range(m)) / m for k in range(d)]
             for i in range(c)]
    ref_rec = -math.fsum(
        _ref_cos(x[j, i], y[j, i]) for j in range(m) for i in range(c)
    ) / (m * c)
    ref_intra = -math.fsum(
        _ref_cos(y[j, i], means[i]) for j in range(m) for i in range(c)
    ) / (m * c)
    ref_inter = math.fsum(
        _ref_cos(y[j, a], y[j, b])
        for j in range(m) for a in range(c) for b in range(c) if a != b
    ) / (m * c * (c - 1))
    scalar_gap = max(
        abs(loss_rec(x, y) - ref_rec),
        abs(loss_intra(y) - ref_intra),
        abs(loss_inter(y) - ref_inter),
    )
    checks.append((f"scalar-loop gap {scalar_gap:.2e} <= 1e-12", scalar_gap <= 1e-12))

    failed = [name for name, ok in checks if not ok]
    _verdict(
        "loss anchors",
        not failed,
        "; ".join(name for name, _ in checks) if not failed else f"failed: {failed}",
    )


# ---------------------------------------------------------------------------
# 3. aggregation anchors


def test_aggregation_anchors():
    rng = np.random.default_rng(8)
    checks = []

    t1 = _tensor_of(_unit_rows3(rng, 1, 5, 12))
    checks.append(
        ("M=1 mean_pool is identity", np.array_equal(mean_pool(t1).data, t1.data[0]))
    )

    t = _tensor_of(_unit_rows3(rng, 6, 4, 12))
    model = init_model(12, 8, 5, seed=1)
    for p in model.params().values():
        p += rng.uniform(-0.5, 0.5, size=p.shape)
    composed = mean_pool(_tensor_of(forward(model, t))).data
    checks.append(
        ("cae_unify == pool(forward) bitwise",
         np.array_equal(cae_unify(t, model).data, composed))
    )

    perm = rng.permutation(6)
    shuffled = _tensor_of(t.data[perm])
    checks.append(
        ("mean_pool permutation-invariant bitwise",
         np.array_equal(mean_pool(shuffled).data, mean_pool(t).data))
    )
    checks.append(
        ("cae_unify permutation-invariant bitwise",
         np.array_equal(cae_unify(shuffled, model).data, cae_unify(t, model).data))
    )

    failed = [name for name, ok in checks if not ok]
    _verdict(
        "aggregation anchors",
        not failed,
        "; ".join(name for name, _ in checks) if not failed else f"failed: {failed}",
    )


# ---------------------------------------------------------------------------
# 4. inference anchors


def _brute_force(rep_rows, image_row):
    best_i, best = 0, -2.0
    for i, r in enumerate(rep_rows):
        dot = math.fsum(a * b for a, b in zip(r, image_row))
        nr = math.sqrt(math.fsum(a * a for a in r))
        nx = math.sqrt(math.fsum(b * b for b in image_row))
        cos = dot / (nr * nx)
        if cos > best:
            best_i, best = i, cos
    return best_i


def test_inference_anchors():
    from duprg import UnifiedReps

    rng = np.random.default_rng(9)
    mismatches = 0
    for _ in range(100):
        c = int(rng.integers(2, 8))
        d = int(rng.integers(2, 12))
        rows = rng.normal(size=(c, d))
        reps = UnifiedReps(class_names=tuple(f"c{i}" for i in range(c)), data=rows)
        image = rng.normal(size=d)
        if predict(reps, image) != _brute_force(rows, image):
            mismatches += 1

    violations = 0
    for _ in range(1000):
        c = int(rng.integers(2, 8))
        d = int(rng.integers(2, 12))
        rows = rng.normal(size=(c, d))
        reps = UnifiedReps(class_names=tuple(f"c{i}" for i in range(c)), data=rows)
        image = rng.normal(size=d)
        before = predict(reps, image)
        s = float(np.exp(rng.uniform(-9.0, 9.0)))
        if rng.integers(2) == 0:
            after = predict(reps, s * image)
        else:
            scaled = rows.copy()
            scaled[int(rng.integers(c))] *= s
            after = predict(
                UnifiedReps(class_names=reps.class_names, data=scaled), image
            )
        if after != before:
            violations += 1

    ok = mismatches == 0 and violations == 0
    _verdict(
        "inference anchors",
        ok,
        f"brute-force agreement 100/100 (mismatches={mismatches}), "
        f"rescale trials 1000/1000 (violations={violations})",
    )


# ---------------------------------------------------------------------------
# 5. unification property on the default synthetic benchmark


def test_unification_property():
    t0 = time.monotonic()
    t, images, _oracle = generate(SynthSpec())
    cfg = CaeConfig(lambda1=1.0, lambda2=1.0, epochs=1000)
    model, _report = train(t, cfg)
    tight_in = intra_class_tightness(t)
    tight_out = intra_class_tightness(forward(model, t))
    cae_acc = evaluate(cae_unify(t, model), images).accuracy
    mp_acc = evaluate(mean_pool(t), images).accuracy
    elapsed = time.monotonic() - t0
    ok = tight_out > tight_in and cae_acc >= mp_acc - 0.01 and elapsed < 60.0
    _verdict(
        "unification property",
        ok,
        f"tightness {tight_in:.4f} -> {tight_out:.4f} (must increase), "
        f"accuracy cae={100 * cae_acc:.2f}% vs mp={100 * mp_acc:.2f}% "
        f"(cae >= mp - 1pt), {elapsed:.1f}s (< 60s)",
    )


# ---------------------------------------------------------------------------
# 6. reconstruction quality, cosine arm vs l2 arm


def _mean_row_cosine(x3, y3):
    num = np.einsum("mcd,mcd->mc", x3, y3)
    den = np.sqrt(
        np.einsum("mcd,mcd->mc", x3, x3) * np.einsum("mcd,mcd->mc", y3, y3)
    )
    return float((num / den).mean())


def test_reconstruction_quality():
    t, _images, _oracle = generate(SynthSpec())
    # reconstruction-only training isolates the term under comparison;
    # both arms run the same weights so the contrast is the loss kind alone
    cos_cfg = CaeConfig(lambda1=0.0, lambda2=0.0, recon_loss="cosine", epochs=1000)
    l2_cfg = CaeConfig(lambda1=0.0, lambda2=0.0, recon_loss="l2", epochs=1000)
    cos_model, cos_report = train(t, cos_cfg)
    l2_model, _ = train(t, l2_cfg)
    final_rec = cos_report.rec[-1]
    cos_arm = _mean_row_cosine(t.data, forward(cos_model, t))
    l2_arm = _mean_row_cosine(t.data, forward(l2_model, t))
    ok = final_rec <= -0.99 and l2_arm < cos_arm
    _verdict(
        "reconstruction quality",
        ok,
        f"cosine-loss final rec {final_rec:.6f} (<= -0.99); mean row cosine "
        f"cosine-arm {cos_arm:.6f} > l2-arm {l2_arm:.6f}",
    )


# ---------------------------------------------------------------------------
# 7. determinism and byte-exact round-trips


def test_determinism(tmp_path):
    t, images, oracle = generate(SynthSpec())
    cfg = CaeConfig(epochs=120)
    checks = []

    ckpt_a, ckpt_b = tmp_path / "a.dupc", tmp_path / "b.dupc"
    model_a, _ = train(t, cfg)
    model_b, _ = train(t, cfg)
    save_model(model_a, cfg, ckpt_a)
    save_model(model_b, cfg, ckpt_b)
    checks.append(
        ("repeated training checkpoints byte-identical",
         ckpt_a.read_bytes() == ckpt_b.read_bytes())
    )

    p1, p2 = tmp_path / "p1.dupr", tmp_path / "p2.dupr"
    write_prompts(t, p1)
    write_prompts(read_prompts(p1), p2)
    checks.append(("prompt file round-trip byte-exact", p1.read_bytes() == p2.read_bytes()))

    i1, i2 = tmp_path / "i1.dupr", tmp_path / "i2.dupr"
    write_images(images, i1)
    write_images(read_images(i1), i2)
    checks.append(("image file round-trip byte-exact", i1.read_bytes() == i2.read_bytes()))

    r1, r2 = tmp_path / "r1.dupr", tmp_path / "r2.dupr"
    write_reps(oracle, r1)
    write_reps(read_reps(r1), r2)
    checks.append(("reps file round-trip byte-exact", r1.read_bytes() == r2.read_bytes()))

    c2 = tmp_path / "c2.dupc"
    loaded_model, loaded_cfg = load_model(ckpt_a)
    save_model(loaded_model, loaded_cfg, c2)
    checks.append(
        ("checkpoint round-trip byte-exact", ckpt_a.read_bytes() == c2.read_bytes())
    )

    failed = [name for name, ok in checks if not ok]
    _verdict(
        "determinism",
        not failed,
        "; ".join(name for name, _ in checks) if not failed else f"failed: {failed}",
    )
