from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netext.errors import ContractError, InvalidInputError
from netext.extensions import natural_extension, nearest_point_extension, zero_extension
from netext.mazur import mazur
from netext.modulus import (
    EuclideanDomain,
    default_scales,
    estimate_component_gamma,
    estimate_gamma,
    estimate_holder_constant,
    estimate_modulus,
)
from netext.nets import ProductNet, build_greedy_net
from netext.spaces import ProductShape, x_norm

SCALES = np.array([0.01, 0.1, 0.5, 1.0, 2.0])


def test_identity_and_linear_maps():
    t = estimate_modulus(lambda X: X, 3, SCALES, 200, 0)
    np.testing.assert_allclose(t.estimates, SCALES, rtol=1e-12)
    t = estimate_modulus(lambda X: 2 * X, EuclideanDomain(4), SCALES, 200, 0)
    np.testing.assert_allclose(t.estimates, 2 * SCALES, rtol=1e-12)


@pytest.mark.parametrize("p", [2, 3, 6, 12])
def test_mazur_component_modulus_between_bounds(p):
    t = estimate_modulus(lambda X: mazur(X, p), EuclideanDomain(3, float(p)), SCALES, 500, 1)
    lower = SCALES ** (2.0 / p)
    upper = 2 ** (1 - 2.0 / p) * SCALES ** (2.0 / p)
    assert np.all(t.estimates >= lower * (1 - 1e-12))
    assert np.all(t.estimates <= upper * (1 + 1e-12))
    # the antipodal witness attains the upper bound
    np.testing.assert_allclose(t.raw, upper, rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 5))
def test_table_invariants(seed, dim):
    F = lambda X: np.sin(3 * X) * np.cos(X[:, :1])
    t = estimate_modulus(F, dim, default_scales(10), 50, seed)
    assert np.all(np.diff(t.scales) > 0)
    assert np.all(np.diff(t.estimates) >= 0)
    assert np.all(t.estimates >= t.raw)
    assert np.all(t.estimates >= 0)


def test_table_lookup_and_errors():
    t = estimate_modulus(lambda X: X, 2, SCALES, 10, 0)
    assert t.at(0.1) == pytest.approx(0.1)
    assert t.at(0.3) == pytest.approx(0.1)  # step from below
    assert t.at(2.0) == pytest.approx(2.0)
    with pytest.raises(InvalidInputError):
        t.at(5.0)
    with pytest.raises(InvalidInputError):
        t.at(0.001)
    with pytest.raises(InvalidInputError):
        estimate_modulus(lambda X: X, 2, [0.5, 0.1], 10, 0)
    with pytest.raises(InvalidInputError):
        estimate_modulus(lambda X: X, 2, [0.0, 0.1], 10, 0)


def test_table_csv_is_deterministic():
    F = lambda X: np.tanh(X)
    a = estimate_modulus(F, 3, SCALES, 100, 4).to_csv()
    b = estimate_modulus(F, 3, SCALES, 100, 4).to_csv()
    c = estimate_modulus(F, 3, SCALES, 100, 5).to_csv()
    assert a == b and a != c
    assert a.splitlines()[0] == "scale,omega_hat,samples,witness"


def test_witness_pair_is_recorded():
    t = estimate_modulus(lambda X: X, 2, SCALES, 5, 0)
    w = t.witness_at(0.5)
    assert np.linalg.norm(np.subtract(w["x"], w["y"])) == pytest.approx(0.5, rel=1e-12)


def test_failing_map_reports_input():
    def bad(X):
        raise RuntimeError("boom")

    with pytest.raises(ContractError) as exc:
        estimate_modulus(bad, 2, SCALES, 5, 0)
    assert exc.value.offending_input is not None
    with pytest.raises(ContractError):
        estimate_modulus(lambda X: np.full_like(X, np.inf), 2, SCALES, 5, 0)


def test_natural_product_modulus_floor():
    shape = ProductShape(2, 24, 2)
    t = estimate_modulus(natural_extension(shape), shape, np.array([0.05, 0.1]), 20, 0)
    assert t.at(0.1) >= 0.1 ** (2 / 24) - 1e-12
    shape2 = ProductShape(2, 2, 2)
    t2 = estimate_modulus(natural_extension(shape2), shape2, np.array([0.05, 0.1]), 20, 0)
    np.testing.assert_allclose(t2.estimates, [0.05, 0.1], rtol=1e-12)


@pytest.fixture(scope="module")
def pnet():
    return ProductNet(build_greedy_net(3, 3.0), ProductShape(2, 6, 3))


def test_gamma_examples(pnet):
    shape = pnet.shape
    assert estimate_gamma(natural_extension(shape), pnet, 500, 0).value == 0.0
    assert estimate_gamma(nearest_point_extension(pnet), pnet, 500, 0).value == 0.0
    g = estimate_gamma(zero_extension(shape), pnet, 500, 0)
    # brute force: the l_2 component dominates for radius >= 1
    rng_pts = pnet.sample(np.random.default_rng(99), 4000)
    brute = float(np.max(np.linalg.norm(rng_pts[:, 0, :], axis=1)))
    assert g.value <= 3.0 + 1e-12
    assert g.value >= 0.9 * brute
    assert not g.infinite
    assert g.argmax_point is not None


def test_gamma_flags_non_finite(pnet):
    g = estimate_gamma(lambda X: np.full_like(X, np.nan), pnet, 10, 0)
    assert g.infinite


def test_gamma_matches_definition(pnet):
    F = lambda X: np.tanh(X)
    g = estimate_gamma(F, pnet, 300, 7)
    pt = g.argmax_point.components
    d = float(max(np.sum(np.abs(np.tanh(pt[i]) - mazur(pt[i], p)) ** p) ** (1 / p)
                  for i, p in enumerate(pnet.shape.ps)))
    assert g.value == pytest.approx(d, rel=1e-12)


def test_component_gamma():
    net = build_greedy_net(3, 3.0)
    assert estimate_component_gamma(lambda X: mazur(X, 4), net, 4, 500, 0) == 0.0
    g = estimate_component_gamma(lambda X: np.zeros_like(X), net, 4, 500, 0)
    assert 1.5 <= g <= 3.0 ** 0.5 + 1e-12


def test_holder_constants(pnet):
    X = np.random.default_rng(0).standard_normal((300, 3))
    Y = np.random.default_rng(1).standard_normal((300, 3))
    assert estimate_holder_constant(lambda Z: Z, 1.0, X, Y) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InvalidInputError):
        estimate_holder_constant(lambda Z: Z, 1.5, X, Y)
    xs, ys = pnet.sample_pairs(np.random.default_rng(2), 1000)
    assert np.all(x_norm(xs - ys) >= 1)
    assert estimate_holder_constant(pnet.f, 1.0, xs, ys, space=pnet.shape) <= 2.0
    shape4 = ProductShape(4, 8, 3)
    pnet4 = ProductNet(pnet.component, shape4)
    xs, ys = pnet4.sample_pairs(np.random.default_rng(3), 1000)
    assert estimate_holder_constant(pnet4.f, 0.5, xs, ys, space=shape4) <= 2.0
