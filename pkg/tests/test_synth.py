"""Synthetic benchmark generator tests."""

import math

import numpy as np
import pytest

from duprg import (
    SynthSpec,
    ValidationError,
    evaluate,
    generate,
    intra_class_tightness,
    mean_pool,
)

# measured once for the default spec on this reference setup; the fixed
# seed makes the value reproducible, the band absorbs BLAS reassociation
DEFAULT_MEAN_POOL_ACCURACY = 0.96625


def test_generate_default_shapes_and_names():
    t, images, oracle = generate()
    assert t.data.shape == (8, 5, 64)
    assert images.data.shape == (800, 64)
    assert oracle.data.shape == (5, 64)
    assert t.class_names == images.class_names == oracle.class_names
    assert t.class_names == tuple(f"class {i}" for i in range(5))
    assert t.domain_names == tuple(f"domain {j}" for j in range(8))
    assert "{class}" in t.template and "{domain}" in t.template
    assert images.domain_tag == "held-out"


def test_generate_label_histogram_balanced():
    _, images, _ = generate()
    assert np.array_equal(np.bincount(images.labels, minlength=5), [160] * 5)


def test_generate_rows_unit_norm():
    t, images, _ = generate()
    for rows in (t.rows(), images.data):
        norms = np.linalg.norm(rows, axis=1)
        assert np.allclose(norms, 1.0, rtol=0, atol=1e-12)


def test_generate_deterministic_per_seed():
    a = generate(SynthSpec(seed=3))
    b = generate(SynthSpec(seed=3))
    assert np.array_equal(a[0].data, b[0].data)
    assert np.array_equal(a[1].data, b[1].data)
    assert np.array_equal(a[1].labels, b[1].labels)
    assert np.array_equal(a[2].data, b[2].data)


def test_generate_seed_changes_output():
    a = generate(SynthSpec(seed=0))
    b = generate(SynthSpec(seed=1))
    assert not np.array_equal(a[0].data, b[0].data)
    assert not np.array_equal(a[1].data, b[1].data)


def test_generate_custom_shape():
    spec = SynthSpec(n_classes=3, n_domains=2, dim=16, n_per_class=4)
    t, images, oracle = generate(spec)
    assert t.data.shape == (2, 3, 16)
    assert images.data.shape == (2 * 4 * 3, 16)
    assert oracle.data.shape == (3, 16)


def test_degenerate_spec_collapses_onto_anchors():
    spec = SynthSpec(domain_shift=0.0, noise=0.0)
    t, images, oracle = generate(spec)
    # every domain's rows coincide with the anchors, bit for bit
    for j in range(spec.n_domains):
        assert np.array_equal(t.data[j], oracle.data)
    assert np.array_equal(images.data, oracle.data[images.labels])
    reps = mean_pool(t)
    assert np.max(np.abs(reps.data - oracle.data)) <= 1e-12
    assert evaluate(reps, images).accuracy == 1.0
    assert evaluate(oracle, images).accuracy == 1.0


def test_small_shift_no_noise_stays_separable():
    spec = SynthSpec(domain_shift=0.1, noise=0.0)
    _, images, oracle = generate(spec)
    assert evaluate(oracle, images).accuracy == 1.0


def test_oracle_rows_orthonormal_at_full_separation():
    _, _, oracle = generate(SynthSpec(class_sep=1.0))
    gram = oracle.data @ oracle.data.T
    assert np.allclose(gram, np.eye(5), rtol=0, atol=1e-10)


def test_default_mean_pool_accuracy_frozen():
    t, images, _ = generate()
    result = evaluate(mean_pool(t), images)
    assert result.accuracy == pytest.approx(DEFAULT_MEAN_POOL_ACCURACY, abs=0.005)


def test_default_mean_pool_within_two_points_of_oracle():
    t, images, oracle = generate()
    mp = evaluate(mean_pool(t), images).accuracy
    oa = evaluate(oracle, images).accuracy
    assert abs(mp - oa) <= 0.02


def test_invalid_specs_rejected():
    with pytest.raises(ValidationError):
        generate(SynthSpec(n_classes=1))
    with pytest.raises(ValidationError):
        generate(SynthSpec(n_classes=65, dim=64))
    with pytest.raises(ValidationError):
        generate(SynthSpec(n_domains=0))
    with pytest.raises(ValidationError):
        generate(SynthSpec(dim=1, n_classes=2))
    with pytest.raises(ValidationError):
        generate(SynthSpec(n_per_class=0))
    with pytest.raises(ValidationError):
        generate(SynthSpec(class_sep=0.0))
    with pytest.raises(ValidationError):
        generate(SynthSpec(class_sep=1.5))
    with pytest.raises(ValidationError):
        generate(SynthSpec(domain_shift=-0.1))
    with pytest.raises(ValidationError):
        generate(SynthSpec(noise=-0.1))
    with pytest.raises(ValidationError):
        generate(SynthSpec(seed=-1))


# ---------------------------------------------------------------------------
# tightness


def test_tightness_identical_rows_is_exactly_one():
    rng = np.random.default_rng(0)
    row = rng.normal(size=(1, 3, 6))
    rows3 = np.repeat(row, 4, axis=0)
    assert intra_class_tightness(rows3) == 1.0


def test_tightness_orthogonal_pair_is_zero():
    rows3 = np.zeros((2, 2, 4))
    rows3[0, 0, 0] = 1.0
    rows3[1, 0, 1] = 1.0
    rows3[0, 1, 2] = 1.0
    rows3[1, 1, 3] = 1.0
    assert intra_class_tightness(rows3) == 0.0


def test_tightness_matches_scalar_loops():
    rng = np.random.default_rng(1)
    rows3 = rng.normal(size=(4, 3, 7))

    def cos(a, b):
        dot = math.fsum(x * y for x, y in zip(a, b))
        na = math.sqrt(math.fsum(x * x for x in a))
        nb = math.sqrt(math.fsum(y * y for y in b))
        return dot / (na * nb)

    m, c = 4, 3
    total = math.fsum(
        cos(rows3[j, i], rows3[k, i])
        for i in range(c) for j in range(m) for k in range(m) if j != k
    )
    want = total / (c * m * (m - 1))
    assert abs(intra_class_tightness(rows3) - want) <= 1e-12


def test_tightness_needs_two_domains():
    with pytest.raises(ValidationError):
        intra_class_tightness(np.ones((1, 3, 4)))


def test_tightness_accepts_prompt_tensor():
    t, _, _ = generate(SynthSpec(n_classes=3, n_domains=2, dim=8, n_per_class=1))
    value = intra_class_tightness(t)
    assert -1.0 <= value <= 1.0


def test_tightness_increases_as_shift_shrinks():
    loose = intra_class_tightness(generate(SynthSpec(domain_shift=1.0))[0])
    tight = intra_class_tightness(generate(SynthSpec(domain_shift=0.1))[0])
    assert tight > loose
