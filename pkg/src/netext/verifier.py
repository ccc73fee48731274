"""Numerical checks of each inequality in the non-extension argument.

Every check returns an :class:`InequalityReport`.  Measured moduli are
lower bounds, so wherever a modulus appears on the right-hand side it is
multiplied by ``slack`` (default 1.1); ``holds`` then only asks
``lhs <= rhs * (1 + 1e-12)``.  A failing report for a built-in candidate
points at the harness, not at the mathematics.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .extensions import EXTENDS_F, ExtensionCandidate, cross_check_claims
from .mazur import mazur
from .modulus import (
    EuclideanDomain,
    ModulusTable,
    default_scales,
    estimate_component_gamma,
    estimate_gamma,
    estimate_modulus,
)
from .nets import ProductNet, sample_ball
from .rng import derive_rng
from .spaces import ProductShape, lq_norm
from .symmetrize import SymmetrizeConfig, indicator, orbit_pair_max, symmetrize

__all__ = [
    "CONTRADICTION_T_MAX",
    "HALF_INV_E",
    "InequalityReport",
    "VerifierConfig",
    "ComponentMeasurement",
    "measure_component",
    "choice_p",
    "choice_k",
    "analytic_floor",
    "check_transfer_bound",
    "check_symmetrized_transfer",
    "check_indicator_chain",
    "check_shift_bound",
    "check_omega_constraint",
    "contradiction_pipeline",
    "reports_to_csv",
    "to_json",
]

CONTRADICTION_T_MAX = 1.0 / (math.sqrt(2.0) * math.e ** 2)
HALF_INV_E = 1.0 / (2.0 * math.e)
FP_TOL = 1e-12

VectorMap = Callable[[np.ndarray], np.ndarray]


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "inf" if f > 0 else ("-inf" if f < 0 else "nan")
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    inputs: dict = field(default_factory=dict)
    witness: dict | None = None
    mode: str = "exact"
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return bool(self.lhs <= self.rhs * (1 + FP_TOL))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        return _clean(d)


@dataclass(frozen=True)
class VerifierConfig:
    """Knobs for the checks and the contradiction pipeline."""

    n: int = 6
    p0: int = 2
    P: int = 24
    slack: float = 1.1
    mode: str = "exact"
    sample_count: int = 100_000
    seed: int = 0
    net_radius: float = 3.0
    sample_radius: float = 3.0
    samples_per_scale: int = 2000
    product_samples_per_scale: int = 300
    gamma_samples: int = 2000
    transfer_samples: int = 2000
    symmetrized_points: int = 4
    scales: tuple = tuple(default_scales())
    contradiction_t_max: float = CONTRADICTION_T_MAX

    def __post_init__(self):
        if self.slack < 1:
            raise InvalidInputError("slack must be >= 1")
        if self.mode not in ("exact", "sampled"):
            raise InvalidInputError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        ProductShape(self.p0, self.P, self.n)

    @property
    def shape(self) -> ProductShape:
        return ProductShape(self.p0, self.P, self.n)

    def symmetrize_config(self, p: int) -> SymmetrizeConfig:
        return SymmetrizeConfig(n=self.n, p=p, mode=self.mode,
                                sample_count=self.sample_count, seed=self.seed)

    def scale_grid(self, *extra) -> np.ndarray:
        return np.unique(np.concatenate([np.asarray(self.scales, dtype=np.float64),
                                         np.asarray(extra, dtype=np.float64)]))


@dataclass(frozen=True, eq=False)
class ComponentMeasurement:
    """Measured modulus (l_2 -> l_p) and net sup-distance of one component map."""

    p: int
    omega: ModulusTable
    gamma: float


def measure_component(F_p: VectorMap, p: int, component_net, cfg: VerifierConfig,
                      *extra_scales: float) -> ComponentMeasurement:
    omega = estimate_modulus(F_p, EuclideanDomain(cfg.n, float(p)),
                             cfg.scale_grid(1.0, *extra_scales), cfg.samples_per_scale,
                             derive_rng_seed(cfg.seed, "component-modulus", p),
                             radius=cfg.sample_radius)
    gamma = estimate_component_gamma(F_p, component_net, p, cfg.gamma_samples, cfg.seed,
                                     radius=cfg.net_radius)
    return ComponentMeasurement(p, omega, gamma)


def derive_rng_seed(seed: int, *labels) -> int:
    from .rng import derive_seed

    return derive_seed(seed, *labels)


def _omega(omega, s: float) -> float:
    return float(omega(s)) if callable(omega) and not isinstance(omega, ModulusTable) else omega.at(s)


def choice_p(t: float) -> int:
    """``ceil(ln(1 / (2 t^2)))``."""
    return math.ceil(math.log(1.0 / (2.0 * t * t)))


def analytic_floor(t: float) -> float:
    """``(2 t^2)^(1/p) / 2`` with p from :func:`choice_p`."""
    return (2.0 * t * t) ** (1.0 / choice_p(t)) / 2.0


def choice_k(omega_1: float, omega_s: float, gamma: float, t: float, *,
             max_digits: int = 10_000) -> dict:
    """``ceil(((2 w(1) + 2 gamma + 4) / w(sqrt2 t))^(2 ln(1/(2t^2))))``.

    Returned as ``log10_k`` plus the exact integer (decimal string) when it
    has at most *max_digits* digits; ``overflow`` is set otherwise and
    ``infinite`` when ``w(sqrt2 t) = 0``.
    """
    import mpmath

    num = 2.0 * omega_1 + 2.0 * gamma + 4.0
    expo = 2.0 * math.log(1.0 / (2.0 * t * t))
    if omega_s <= 0 or not math.isfinite(num):
        return {"infinite": True, "overflow": True, "log10_k": math.inf, "k": None,
                "base": math.inf, "exponent": expo}
    base = num / omega_s
    log10k = expo * math.log10(base)
    if log10k > max_digits:
        return {"infinite": False, "overflow": True, "log10_k": log10k, "k": None,
                "base": base, "exponent": expo}
    with mpmath.workdps(int(max(log10k, 0)) + 40):
        val = mpmath.power(mpmath.mpf(base), mpmath.mpf(expo))
        k = max(1, int(mpmath.ceil(val)))
    return {"infinite": False, "overflow": False, "log10_k": log10k, "k": str(k),
            "base": base, "exponent": expo}


def check_transfer_bound(F_p: VectorMap, net, p: int, samples: int, seed: int, *,
                         cfg: VerifierConfig | None = None,
                         measurement: ComponentMeasurement | None = None) -> InequalityReport:
    """``sup_x ||F_p(x) - M_p(x)||_p <= w(1) + gamma + 2`` over the net's ball."""
    cfg = cfg or VerifierConfig(n=net.dim)
    measurement = measurement or measure_component(F_p, p, net, cfg)
    rng = derive_rng(seed, "transfer", p)
    xs = sample_ball(rng, samples, net.dim, cfg.net_radius)
    d = lq_norm(np.asarray(F_p(xs)) - mazur(xs, p), p)
    j = int(np.argmax(d))
    w1 = measurement.omega.at(1.0)
    return InequalityReport(
        "transfer_bound", float(d[j]), cfg.slack * w1 + measurement.gamma + 2.0,
        inputs={"n": net.dim, "p": p, "omega_1": w1, "gamma": measurement.gamma,
                "slack": cfg.slack, "samples": samples},
        witness={"x": xs[j].tolist()}, mode="sampled-points")


def check_symmetrized_transfer(F_p: VectorMap, cfg: SymmetrizeConfig, *, measurement: ComponentMeasurement,
                               points: int = 4, radius: float = 1.0, slack: float = 1.1,
                               seed: int = 0) -> InequalityReport:
    """``sup_x ||G(x) - M_p(x)||_p <= w(1) + gamma + 2`` at sampled x."""
    rng = derive_rng(seed, "symmetrized-transfer", cfg.n, cfg.p)
    xs = sample_ball(rng, points, cfg.n, radius)
    G = symmetrize(F_p, xs, cfg)
    d = lq_norm(G - mazur(xs, cfg.p), cfg.p)
    j = int(np.argmax(d))
    w1 = measurement.omega.at(1.0)
    return InequalityReport(
        "symmetrized_transfer", float(d[j]), slack * w1 + measurement.gamma + 2.0,
        inputs={"n": cfg.n, "p": cfg.p, "omega_1": w1, "gamma": measurement.gamma,
                "slack": slack, "points": points},
        witness={"x": xs[j].tolist(), "G": G[j].tolist()}, mode=cfg.mode)


def _indicator_sets(n: int, k: int):
    return tuple(range(1, k + 1)), tuple(range(n - k + 1, n + 1))


def check_indicator_chain(F_p: VectorMap, n: int, p: int, k: int, t: float, cfg: SymmetrizeConfig, *,
                          measurement: ComponentMeasurement, slack: float = 1.1) -> InequalityReport:
    """``||t^(2/p)(1_B - 1_A)||_p <= ||G(t 1_B) - G(t 1_A)||_p + 2 w(1) + 2 gamma + 4``.

    ``A = {1..k}``, ``B = {n-k+1..n}``.  The left side is computed as the
    norm itself; for disjoint A, B it equals ``t^(2/p) (2k)^(1/p)``, which
    is reported as ``closed_form``.  The two intermediate distances
    ``||G(t 1_S) - t^(2/p) 1_S||_p`` are reported as well.
    """
    if k < 1 or 2 * k > n + 1:
        raise InvalidInputError(f"need 1 <= k and 2k <= n+1, got n={n}, k={k}")
    if t <= 0:
        raise InvalidInputError("t must be positive")
    cfg = _with(cfg, n, p)
    A, B = _indicator_sets(n, k)
    GA, GB = symmetrize(F_p, np.stack([indicator(n, A, t), indicator(n, B, t)]), cfg)
    c = t ** (2.0 / p)
    mid_A = float(lq_norm(GA - c * indicator(n, A), p))
    mid_B = float(lq_norm(GB - c * indicator(n, B), p))
    dist = float(lq_norm(GB - GA, p))
    lhs = float(lq_norm(c * (indicator(n, B) - indicator(n, A)), p))
    closed = c * (2 * k) ** (1.0 / p)
    w1 = measurement.omega.at(1.0)
    rhs = dist + 2.0 * slack * w1 + 2.0 * measurement.gamma + 4.0
    notes = []
    if 2 * k == n + 1:
        notes.append("A and B share index k; the closed form (2k)^(1/p) t^(2/p) overstates the left side")
    mid_bound = slack * w1 + measurement.gamma + 2.0
    if max(mid_A, mid_B) > mid_bound * (1 + FP_TOL):
        notes.append("an intermediate distance exceeds w(1) + gamma + 2")
    return InequalityReport(
        "indicator_chain", lhs, rhs,
        inputs={"n": n, "p": p, "k": k, "t": t, "omega_1": w1, "gamma": measurement.gamma,
                "slack": slack, "closed_form": closed, "mid_A": mid_A, "mid_B": mid_B,
                "mid_bound": mid_bound, "G_distance": dist},
        witness={"G_A": GA.tolist(), "G_B": GB.tolist()}, mode=cfg.mode, notes=notes)


def check_shift_bound(F_p: VectorMap, n: int, p: int, k: int, t: float, cfg: SymmetrizeConfig, *,
                      measurement: ComponentMeasurement, slack: float = 1.1) -> InequalityReport:
    """``k^(1/p) ||G(t 1_{1..k}) - G(t 1_{2..k+1})||_p <= k^(1/p) w(sqrt2 t)``.

    The modulus at ``sqrt2 t`` is the larger of the table value and the
    largest orbit-pair distance ``max_g ||F(g x) - F(g y)||_p`` for the two
    indicator arguments, which bounds the symmetrized difference by
    construction.  Also reported: the exponent identity
    ``(2k)^(1/p) = k^(1/p) 2^(1/p)`` applied to ``|alpha_k(t)|``, the input
    distance ``t sqrt2``, and (for ``2k <= n``) the gap between
    ``||G(t 1_B) - G(t 1_A)||_p`` and the shifted form.
    """
    if k < 1 or k + 1 > n:
        raise InvalidInputError(f"need 1 <= k <= n-1, got n={n}, k={k}")
    cfg = _with(cfg, n, p)
    A = tuple(range(1, k + 1))
    A2 = tuple(range(2, k + 2))
    _, B = _indicator_sets(n, k)
    xA, xA2 = indicator(n, A, t), indicator(n, A2, t)
    GA, GA2, GB = symmetrize(F_p, np.stack([xA, xA2, indicator(n, B, t)]), cfg)
    alpha = math.fsum(GA[: k]) / k
    identity_gap = abs((2 * k) ** (1.0 / p) * abs(alpha) - k ** (1.0 / p) * 2 ** (1.0 / p) * abs(alpha))
    in_dist = float(np.linalg.norm(xA - xA2))
    kp = k ** (1.0 / p)
    lhs = kp * float(lq_norm(GA - GA2, p))
    w_table = measurement.omega.at(math.sqrt(2.0) * t)
    w_orbit, _ = orbit_pair_max(F_p, xA, xA2, cfg)
    w = max(w_table, w_orbit)
    inputs = {"n": n, "p": p, "k": k, "t": t, "alpha": alpha, "identity_gap": identity_gap,
              "input_distance": in_dist, "input_distance_expected": t * math.sqrt(2.0),
              "omega_table": w_table, "omega_orbit": w_orbit, "slack": slack}
    if 2 * k <= n:
        inputs["equality_gap"] = abs(float(lq_norm(GB - GA, p)) - lhs)
    return InequalityReport("shift_bound", lhs, kp * slack * w, inputs=inputs, mode=cfg.mode,
                            witness={"x": xA.tolist(), "y": xA2.tolist()})


def check_omega_constraint(omega, gamma: float, p: int, k: int, t: float, *,
                           slack: float = 1.1, claims=frozenset()) -> InequalityReport:
    """``t^(2/p) (2k)^(1/p) <= k^(1/p) w(sqrt2 t) + 2 w(1) + 2 gamma + 4``.

    *omega* is a :class:`ModulusTable` or a callable ``s -> w(s)``.
    """
    if p < 2 or k < 1 or t <= 0:
        raise InvalidInputError(f"need p >= 2, k >= 1, t > 0; got p={p}, k={k}, t={t}")
    ws = _omega(omega, math.sqrt(2.0) * t)
    w1 = _omega(omega, 1.0)
    lhs = t ** (2.0 / p) * (2 * k) ** (1.0 / p)
    rhs = k ** (1.0 / p) * slack * ws + 2.0 * slack * w1 + 2.0 * gamma + 4.0
    rep = InequalityReport("omega_constraint", lhs, rhs, mode="arithmetic",
                           inputs={"p": p, "k": k, "t": t, "omega_sqrt2t": ws, "omega_1": w1,
                                   "gamma": gamma, "slack": slack})
    if not rep.holds and "uniformly_continuous" in claims and math.isfinite(gamma):
        rep.notes.append("theorem-consistent rejection evidence")
    return rep


def _with(cfg: SymmetrizeConfig, n: int, p: int) -> SymmetrizeConfig:
    if cfg.n == n and cfg.p == p:
        return cfg
    return SymmetrizeConfig(n=n, p=p, mode=cfg.mode, sample_count=cfg.sample_count,
                            seed=cfg.seed, budget=cfg.budget, embed_dim=cfg.embed_dim)


def contradiction_pipeline(candidate: ExtensionCandidate, t: float, cfg: VerifierConfig,
                           net: ProductNet) -> dict:
    """Run the choice-of-parameters argument at one t, analytically and feasibly.

    Analytic mode: p and the (possibly astronomical) k from the measured
    moduli and gamma of the whole candidate, and the implied floor
    ``(2t^2)^(1/p) / 2`` that ``w(sqrt2 t)`` would have to exceed.
    Feasible mode: k clamped to ``(n+1)//2`` (and ``n-1``), then every
    inequality of the chain for component p with real symmetrization.
    """
    if not 0 < t < cfg.contradiction_t_max:
        raise InvalidInputError(f"t must lie in (0, {cfg.contradiction_t_max}), got {t}")
    shape = candidate.shape
    p = choice_p(t)
    s = math.sqrt(2.0) * t
    floor = analytic_floor(t)

    omega = estimate_modulus(candidate, shape, cfg.scale_grid(1.0, s),
                             cfg.product_samples_per_scale,
                             derive_rng_seed(cfg.seed, "product-modulus"),
                             radius=cfg.sample_radius)
    gamma = estimate_gamma(candidate, net, cfg.gamma_samples, cfg.seed, radius=cfg.net_radius)
    w_s, w_1 = omega.at(s), omega.at(1.0)
    kinfo = choice_k(w_1, w_s, gamma.value, t)

    if kinfo["infinite"]:
        choice_ok = None
    elif kinfo["overflow"]:
        choice_ok = bool(kinfo["log10_k"] / p * math.log(10) + math.log(w_s)
                         >= math.log(2 * w_1 + 2 * gamma.value + 4) - 1e-12)
    else:
        choice_ok = bool(int(kinfo["k"]) ** (1.0 / p) * w_s
                         >= (2 * w_1 + 2 * gamma.value + 4) * (1 - 1e-12))
    floor_ok = floor >= HALF_INV_E - 1e-12
    analytic = {
        "p": p,
        "k": kinfo,
        "floor": floor,
        "half_inv_e": HALF_INV_E,
        "floor_ok": floor_ok,
        "choice_ok": choice_ok,
        "omega_sqrt2t": w_s,
        "omega_1": w_1,
        "gamma": gamma.value,
        "gamma_argmax": None if gamma.argmax_point is None else gamma.argmax_point.components.tolist(),
        "omega_witness": omega.witness_at(s),
        "p_in_truncation": shape.p0 <= p <= shape.P,
        "omega_vs_floor": "above_floor" if w_s >= floor else "below_floor",
    }

    flags = cross_check_claims(candidate, gamma=gamma.value, omega_smallest=float(omega.estimates[0]))
    if w_s == 0:
        if gamma.value == 0 and EXTENDS_F in candidate.claims:
            flags.append("inconsistent measurement: omega_hat(sqrt2 t) = 0 and gamma = 0 for a "
                         "candidate claiming to extend f (possible only through truncation effects)")
        else:
            flags.append(f"omega_hat vanishes at sqrt2 t: the bound must be carried by gamma "
                         f"= {gamma.value!r}, which grows with the net radius {cfg.net_radius!r}")
    elif w_s < floor:
        flags.append("omega_hat(sqrt2 t) is below the implied floor: a map like this can only "
                      "keep gamma finite on a bounded piece of the net")
    if not analytic["p_in_truncation"]:
        flags.append(f"p = {p} lies outside the truncation {shape.p0}..{shape.P}")

    feasible = {"reports": [], "skipped": None}
    if analytic["p_in_truncation"] and cfg.n >= 2:
        k_cap = max(1, min((cfg.n + 1) // 2, cfg.n - 1))
        k = k_cap if (kinfo["infinite"] or kinfo["overflow"]) else max(1, min(int(kinfo["k"]), k_cap))
        F_p = candidate.component(p)
        comp_net = net.component
        meas = measure_component(F_p, p, comp_net, cfg, s)
        scfg = cfg.symmetrize_config(p)
        reports = [
            check_transfer_bound(F_p, comp_net, p, cfg.transfer_samples, cfg.seed,
                                 cfg=cfg, measurement=meas),
            check_symmetrized_transfer(F_p, scfg, measurement=meas, points=cfg.symmetrized_points,
                                       slack=cfg.slack, seed=cfg.seed),
            check_indicator_chain(F_p, cfg.n, p, k, t, scfg, measurement=meas, slack=cfg.slack),
            check_shift_bound(F_p, cfg.n, p, k, t, scfg, measurement=meas, slack=cfg.slack),
            check_omega_constraint(meas.omega, meas.gamma, p, k, t, slack=cfg.slack,
                                   claims=candidate.claims),
        ]
        for r in reports:
            r.inputs.setdefault("t", t)
            r.inputs.setdefault("k", k)
            r.inputs.setdefault("n", cfg.n)
        feasible = {"k": k, "k_cap": k_cap, "reports": [r.to_dict() for r in reports],
                    "skipped": None}
    else:
        feasible["skipped"] = "p outside truncation" if not analytic["p_in_truncation"] else "n < 2"

    all_hold = all(r["holds"] for r in feasible["reports"])
    return _clean({
        "candidate": candidate.name,
        "claims": sorted(candidate.claims),
        "t": t,
        "config": {"n": cfg.n, "p0": shape.p0, "P": shape.P, "mode": cfg.mode, "seed": cfg.seed,
                   "slack": cfg.slack, "net_radius": cfg.net_radius},
        "analytic": analytic,
        "feasible": feasible,
        "flags": flags,
        "consistent": bool(all_hold and floor_ok and choice_ok is not False),
    })


CSV_COLUMNS = ["check", "n", "p", "k", "t", "lhs", "rhs", "holds", "mode"]


def reports_to_csv(reports) -> str:
    """Flat summary, one row per report (dicts or :class:`InequalityReport`)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        d = r.to_dict() if isinstance(r, InequalityReport) else r
        inp = d.get("inputs", {})
        w.writerow([d["name"], inp.get("n", ""), inp.get("p", ""), inp.get("k", ""),
                    _fmt(inp.get("t", "")), _fmt(d["lhs"]), _fmt(d["rhs"]),
                    "true" if d["holds"] else "false", d.get("mode", "")])
    return buf.getvalue()


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v
