from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netext.errors import InvalidInputError
from netext.extensions import natural_extension, nearest_point_extension, zero_extension
from netext.mazur import mazur
from netext.modulus import ModulusTable
from netext.nets import ProductNet, build_greedy_net
from netext.symmetrize import SymmetrizeConfig
from netext.verifier import (
    CONTRADICTION_T_MAX,
    ComponentMeasurement,
    InequalityReport,
    VerifierConfig,
    analytic_floor,
    check_indicator_chain,
    check_omega_constraint,
    check_shift_bound,
    check_symmetrized_transfer,
    check_transfer_bound,
    choice_k,
    choice_p,
    contradiction_pipeline,
    measure_component,
    reports_to_csv,
    to_json,
)

FAST = dict(samples_per_scale=200, product_samples_per_scale=40, gamma_samples=300,
            transfer_samples=300, symmetrized_points=2)


def table(fn, scales=(0.01, 0.1, 1.0, 1.5, 2.0, 8.0)) -> ModulusTable:
    s = np.asarray(scales, dtype=float)
    est = np.array([fn(x) for x in s])
    return ModulusTable(s, est, est, 0, 0)


def meas(p, omega_fn, gamma):
    return ComponentMeasurement(p, table(omega_fn), gamma)


@pytest.fixture(scope="module")
def net4():
    return build_greedy_net(4, 3.0)


def test_report_holds_and_serialization():
    r = InequalityReport("x", 1.0, 1.0)
    assert r.holds
    assert not InequalityReport("x", 1.0 + 1e-9, 1.0).holds
    d = InequalityReport("x", 0.0, math.inf).to_dict()
    assert d["rhs"] == "inf" and d["holds"] is True
    text = to_json({"a": np.float64(1.5), "b": np.arange(2), "c": math.inf})
    assert json.loads(text) == {"a": 1.5, "b": [0, 1], "c": "inf"}
    csv = reports_to_csv([InequalityReport("x", 0.5, 1.0, inputs={"n": 3, "p": 2, "k": 1, "t": 0.1})])
    assert csv == "check,n,p,k,t,lhs,rhs,holds,mode\r\nx,3,2,1,0.1,0.5,1.0,true,exact\r\n"


def test_transfer_bound_examples(net4):
    cfg = VerifierConfig(n=4, **FAST)
    r = check_transfer_bound(lambda X: mazur(X, 3), net4, 3, 300, 0, cfg=cfg)
    assert r.lhs == 0.0 and r.holds
    c = np.array([0.7, 0, 0, 0])
    r = check_transfer_bound(lambda X: mazur(X, 3) + c, net4, 3, 300, 0, cfg=cfg)
    assert r.lhs == pytest.approx(0.7, rel=1e-12)
    assert r.inputs["gamma"] == pytest.approx(0.7, rel=1e-12)
    assert r.holds
    F = nearest_point_extension(ProductNet(net4, cfg.shape)).component(3)
    r = check_transfer_bound(F, net4, 3, 300, 0, cfg=cfg)
    assert r.holds and r.witness["x"]
    assert r.rhs == pytest.approx(cfg.slack * r.inputs["omega_1"] + 2.0)


def test_symmetrized_transfer_examples():
    cfg = SymmetrizeConfig(n=4, p=3)
    m = meas(3, lambda s: 2 * s, 0.0)
    r = check_symmetrized_transfer(lambda X: mazur(X, 3), cfg, measurement=m)
    assert r.lhs <= 1e-15 and r.holds
    c = np.array([0.3, -1.0, 2.0, 0.5])
    r = check_symmetrized_transfer(lambda X: mazur(X, 3) + c, cfg, measurement=meas(3, lambda s: 2 * s, 2.3))
    assert r.lhs <= 1e-14 and r.rhs > 0 and r.holds


def test_indicator_chain_examples():
    p, n, k, t = 3, 8, 4, 1.0
    # n = 8 is over the exact budget; M_p is equivariant so any sample is exact
    cfg = SymmetrizeConfig(n=n, p=p, mode="sampled", sample_count=500)
    r = check_indicator_chain(lambda X: mazur(X, p), n, p, k, t, cfg, measurement=meas(p, lambda s: 2 * s, 0.0))
    assert r.lhs == pytest.approx(2.0, rel=1e-14)
    assert r.inputs["closed_form"] == pytest.approx(2.0, rel=1e-14)
    assert r.inputs["G_distance"] == pytest.approx(2.0, rel=1e-14)
    assert r.inputs["mid_A"] <= 1e-15 and r.inputs["mid_B"] <= 1e-15
    assert r.holds
    r = check_indicator_chain(lambda X: np.zeros_like(X), 6, 4, 2, 0.5, SymmetrizeConfig(n=6, p=4),
                              measurement=meas(4, lambda s: 0.0, 1.0))
    assert r.lhs == pytest.approx(0.5 ** 0.5 * 4 ** 0.25, rel=1e-14)
    assert r.inputs["G_distance"] == 0.0 and r.holds
    with pytest.raises(InvalidInputError):
        check_indicator_chain(lambda X: X, 4, 2, 3, 1.0, SymmetrizeConfig(n=4), measurement=meas(2, lambda s: s, 0))


def test_indicator_chain_overlap_case():
    # 2k = n + 1: the two index sets share one coordinate
    r = check_indicator_chain(lambda X: mazur(X, 3), 5, 3, 3, 1.0, SymmetrizeConfig(n=5, p=3),
                              measurement=meas(3, lambda s: 2 * s, 0.0))
    assert r.lhs == pytest.approx(4 ** (1 / 3), rel=1e-14)
    assert r.inputs["closed_form"] == pytest.approx(6 ** (1 / 3), rel=1e-14)
    assert r.notes and r.holds


def test_shift_bound_identity_equality():
    cfg = SymmetrizeConfig(n=4, p=2)
    m = meas(2, lambda s: s, 0.0)
    r = check_shift_bound(lambda X: mazur(X, 2), 4, 2, 2, 1.0, cfg, measurement=m, slack=1.0)
    assert r.inputs["input_distance"] == pytest.approx(math.sqrt(2), rel=1e-15)
    assert r.lhs == pytest.approx(2.0, rel=1e-14)
    assert r.rhs == pytest.approx(2.0, rel=1e-14)
    assert r.holds
    assert r.inputs["identity_gap"] <= 1e-15
    assert r.inputs["equality_gap"] <= 1e-14


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 5.5), st.integers(2, 9))
def test_shift_input_distance_and_exponent_identity(k, t, p):
    n = k + 1
    r = check_shift_bound(lambda X: mazur(X, p), n, p, k, t, SymmetrizeConfig(n=n, p=p),
                          measurement=meas(p, lambda s: 2 * s, 0.0)) if n <= 6 else None
    if r is None:
        return
    assert r.inputs["input_distance"] == pytest.approx(t * math.sqrt(2), rel=1e-14)
    assert r.inputs["identity_gap"] <= 1e-13 * (1 + abs(r.inputs["alpha"]))
    assert r.holds


def test_omega_constraint_examples():
    r = check_omega_constraint(lambda s: 1e6, 0.0, 5, 3, 0.5)
    assert r.holds
    r = check_omega_constraint(lambda s: 2 * s ** (2 / 3), 0.0, 3, 4, 1.0, slack=1.0)
    assert r.lhs == pytest.approx(2.0, rel=1e-14)
    assert r.rhs == pytest.approx(12.0, rel=1e-14)
    assert r.holds
    r = check_omega_constraint(lambda s: 0.0, 0.0, 2, 10_000, 1.0, claims={"uniformly_continuous"})
    assert not r.holds  # lhs = sqrt(20000) > 4
    assert "theorem-consistent rejection evidence" in r.notes
    with pytest.raises(InvalidInputError):
        check_omega_constraint(table(lambda s: s), 0.0, 2, 1, 6.0)  # sqrt2 * 6 out of table range


def test_choice_p_and_floor():
    assert choice_p(0.05) == 6
    t = math.sqrt(math.exp(-5) / 2)
    assert choice_p(t) == 5
    assert abs(analytic_floor(t) - 1 / (2 * math.e)) <= 1e-15
    assert CONTRADICTION_T_MAX == pytest.approx(1 / (math.sqrt(2) * math.e ** 2), rel=1e-15)


@given(st.floats(1e-4, CONTRADICTION_T_MAX, exclude_max=True))
def test_floor_never_below_half_inverse_e(t):
    assert choice_p(t) >= 2
    assert analytic_floor(t) >= 1 / (2 * math.e) - 1e-12


@settings(max_examples=40)
@given(st.floats(0.0, 5.0), st.floats(0.05, 3.0), st.floats(0.0, 5.0),
       st.floats(0.005, CONTRADICTION_T_MAX, exclude_max=True))
def test_choice_k_satisfies_its_purpose(w1, ws, gamma, t):
    info = choice_k(w1, ws, gamma, t)
    p = choice_p(t)
    num = 2 * w1 + 2 * gamma + 4
    if info["overflow"]:
        assert info["log10_k"] / p * math.log(10) + math.log(ws) >= math.log(num) - 1e-9
    else:
        k = int(info["k"])
        assert k ** (1 / p) * ws >= num * (1 - 1e-12)
        # and then the constraint forces the floor
        assert k ** (1 / p) * ws + num <= 2 * k ** (1 / p) * ws * (1 + 1e-12)


def test_choice_k_infinite_when_modulus_vanishes():
    info = choice_k(0.0, 0.0, 3.0, 0.05)
    assert info["infinite"] and info["k"] is None


@pytest.fixture(scope="module")
def pipeline_setup():
    cfg = VerifierConfig(n=5, P=12, **FAST)
    net = ProductNet(build_greedy_net(5, 3.0), cfg.shape)
    return cfg, net


def test_pipeline_natural(pipeline_setup):
    cfg, net = pipeline_setup
    out = contradiction_pipeline(natural_extension(cfg.shape), 0.05, cfg, net)
    a = out["analytic"]
    assert a["p"] == 6
    assert a["gamma"] == 0.0
    assert a["omega_sqrt2t"] >= (math.sqrt(2) * 0.05) ** (2 / 12)
    assert a["omega_vs_floor"] == "above_floor"
    assert a["floor_ok"] and a["choice_ok"]
    assert len(out["feasible"]["reports"]) == 5
    assert out["consistent"]
    assert json.loads(to_json(out)) == json.loads(to_json(out))


def test_pipeline_zero_flags_gamma(pipeline_setup):
    cfg, net = pipeline_setup
    out = contradiction_pipeline(zero_extension(cfg.shape), 0.05, cfg, net)
    a = out["analytic"]
    assert a["omega_sqrt2t"] == 0.0 and a["k"]["infinite"]
    assert 2.0 <= a["gamma"] <= 3.0 + 1e-12
    assert any("gamma" in f for f in out["flags"])
    assert out["consistent"]


def test_pipeline_rejects_large_t(pipeline_setup):
    cfg, net = pipeline_setup
    with pytest.raises(InvalidInputError):
        contradiction_pipeline(natural_extension(cfg.shape), 0.1, cfg, net)


def test_pipeline_p_outside_truncation():
    cfg = VerifierConfig(n=3, P=4, **FAST)
    net = ProductNet(build_greedy_net(3, 2.0), cfg.shape)
    out = contradiction_pipeline(natural_extension(cfg.shape), 0.05, cfg, net)
    assert out["feasible"]["skipped"] == "p outside truncation"
    assert any("outside the truncation" in f for f in out["flags"])


def test_measure_component_natural(net4):
    cfg = VerifierConfig(n=4, **FAST)
    m = measure_component(lambda X: mazur(X, 4), 4, net4, cfg)
    assert m.gamma == 0.0
    assert m.omega.at(1.0) == pytest.approx(2 ** 0.5, rel=1e-12)
