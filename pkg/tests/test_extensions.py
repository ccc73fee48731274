from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import plugin_command
from netext.errors import InvalidInputError, PluginContractError
from netext.extensions import (
    EXTENDS_F,
    UNIFORMLY_CONTINUOUS,
    ExtensionCandidate,
    builtin_candidate,
    cross_check_claims,
    load_plugin_extension,
    natural_extension,
    nearest_point_extension,
    zero_extension,
)
from netext.mazur import mazur
from netext.modulus import EuclideanDomain, estimate_gamma, estimate_modulus
from netext.nets import ProductNet, build_greedy_net
from netext.spaces import ProductShape, lq_norm

SHAPE = ProductShape(2, 4, 2)


@pytest.fixture(scope="module")
def pnet():
    return ProductNet(build_greedy_net(2, 3.0), SHAPE)


def test_natural_is_mazur_everywhere():
    F = natural_extension(SHAPE)
    X = np.random.default_rng(0).standard_normal((7,) + SHAPE.array_shape)
    out = F(X)
    for i, p in enumerate(SHAPE.ps):
        np.testing.assert_array_equal(out[:, i], mazur(X[:, i], p))
    np.testing.assert_array_equal(F(X[0]), out[0])
    assert F.claims == {EXTENDS_F}


def test_zero_extension():
    F = zero_extension(SHAPE)
    X = np.random.default_rng(1).standard_normal((5,) + SHAPE.array_shape)
    np.testing.assert_array_equal(F(X), 0 * X)
    t = estimate_modulus(F, SHAPE, np.array([0.01, 0.1, 1.0]), 50, 0)
    assert np.all(t.estimates == 0)
    assert F.claims == {UNIFORMLY_CONTINUOUS}


def test_nearest_agrees_with_f_on_net(pnet):
    F = nearest_point_extension(pnet)
    pts = pnet.sample(np.random.default_rng(2), 200)
    np.testing.assert_array_equal(F(pts), pnet.f(pts))
    assert estimate_gamma(F, pnet, 300, 1).value == 0.0


def test_nearest_is_constant_inside_cells(pnet):
    F = nearest_point_extension(pnet).component(3)
    comp = pnet.component
    rng = np.random.default_rng(3)
    y = comp.points[rng.integers(0, len(comp.points), 50)]
    jitter = rng.standard_normal((50, 2)) * 0.05
    np.testing.assert_array_equal(F(y + jitter), F(y - jitter))


def test_nearest_voronoi_jump_found_by_bisection(pnet):
    """A pair straddling a cell boundary sees the full jump between two net images."""
    p = 4
    F = nearest_point_extension(pnet).component(p)
    comp = pnet.component
    y1, y2 = comp.points[0], comp.points[1]
    lo, hi = y1.copy(), y2.copy()
    for _ in range(60):
        mid = (lo + hi) / 2
        if comp.nearest_index(mid)[0] == 0:
            lo = mid
        else:
            hi = mid
    jump = float(lq_norm(mazur(y1, p) - mazur(y2, p), p))
    # the pair at distance 0.01 across the boundary
    u = (y2 - y1) / np.linalg.norm(y2 - y1)
    a = (lo + hi) / 2 - 0.005 * u
    b = (lo + hi) / 2 + 0.005 * u
    assert np.linalg.norm(a - b) == pytest.approx(0.01)
    assert lq_norm(F(a[None])[0] - F(b[None])[0], p) == pytest.approx(jump, rel=1e-12)
    # the sampled estimator sees some jump of at least this size at scale 0.01
    t = estimate_modulus(F, EuclideanDomain(2, float(p)), np.array([0.01]), 20_000, 0, radius=3.0)
    min_jump = min(
        float(lq_norm(mazur(comp.points[i], p) - mazur(comp.points[j], p), p))
        for i in range(len(comp.points)) for j in range(i)
        if np.linalg.norm(comp.points[i] - comp.points[j]) < 2.0
    )
    assert t.at(0.01) >= min_jump


def test_component_of_product_map():
    F = ExtensionCandidate("echo", SHAPE, product_map=lambda X: 2 * X)
    v = np.array([[1.0, -1.0]])
    np.testing.assert_array_equal(F.component(3)(v), 2 * v)
    with pytest.raises(InvalidInputError):
        ExtensionCandidate("neither", SHAPE)
    with pytest.raises(InvalidInputError):
        F.component(9)


def test_builtin_lookup(pnet):
    assert builtin_candidate("natural", SHAPE).name == "natural"
    assert builtin_candidate("nearest", SHAPE, pnet).name == "nearest"
    with pytest.raises(InvalidInputError):
        builtin_candidate("nearest", SHAPE)
    with pytest.raises(InvalidInputError):
        builtin_candidate("smooth", SHAPE)


def test_plugin_zero_matches_builtin(pnet):
    F = load_plugin_extension(plugin_command("zero"), SHAPE)
    try:
        X = np.random.default_rng(4).standard_normal((6,) + SHAPE.array_shape)
        np.testing.assert_array_equal(F(X), zero_extension(SHAPE)(X))
    finally:
        F.plugin.close()


def test_plugin_identity_modulus():
    F = load_plugin_extension(plugin_command("identity"), SHAPE)
    try:
        scales = np.array([0.1, 0.5])
        t = estimate_modulus(F.component(2), EuclideanDomain(2), scales, 30, 0)
        np.testing.assert_allclose(t.estimates, scales, rtol=1e-12)
    finally:
        F.plugin.close()


def test_plugin_natural_gamma_zero(pnet):
    F = load_plugin_extension(plugin_command("natural"), SHAPE, claims={EXTENDS_F})
    try:
        assert estimate_gamma(F, pnet, 50, 0).value == pytest.approx(0.0, abs=1e-15)
        X = np.random.default_rng(5).standard_normal((4,) + SHAPE.array_shape)
        np.testing.assert_allclose(F(X), natural_extension(SHAPE)(X), rtol=1e-15)
    finally:
        F.plugin.close()


@pytest.mark.parametrize("kind,needle", [("nan", "non-finite"), ("garbage", "malformed"),
                                         ("short", "expected")])
def test_plugin_protocol_violations(kind, needle):
    F = load_plugin_extension(plugin_command(kind), SHAPE)
    try:
        with pytest.raises(PluginContractError, match=needle) as exc:
            F(np.ones((1,) + SHAPE.array_shape))
        assert exc.value.exchange["request"]
    finally:
        F.plugin.close()


def test_plugin_timeout():
    F = load_plugin_extension(plugin_command("silent"), SHAPE, timeout=0.5)
    try:
        with pytest.raises(PluginContractError, match="no response"):
            F(np.ones((1,) + SHAPE.array_shape))
    finally:
        F.plugin._proc.kill()
        F.plugin.close()


def test_plugin_missing_program():
    with pytest.raises(PluginContractError):
        load_plugin_extension(["/nonexistent/plugin-binary"], SHAPE)


def test_cross_check_claims():
    nat = natural_extension(SHAPE)
    assert cross_check_claims(nat, gamma=0.0, omega_smallest=0.9) == []
    assert cross_check_claims(nat, gamma=0.5, omega_smallest=0.9)
    zero = zero_extension(SHAPE)
    assert cross_check_claims(zero, gamma=3.0, omega_smallest=0.0) == []
    flags = cross_check_claims(zero, gamma=3.0, omega_smallest=0.5)
    assert flags and "uniformly_continuous" in flags[0]
    assert 1 / (2 * math.e) < 0.5
