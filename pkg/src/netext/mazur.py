"""The Mazur map l_2 -> l_p, its inverse, and the Hoelder bounds it satisfies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .spaces import ProductShape, lq_norm

__all__ = [
    "BoundCheck",
    "mazur",
    "mazur_inverse",
    "mazur_product",
    "signed_power",
    "scalar_bound_sides",
    "verify_scalar_bound",
    "holder_bound_sides",
    "verify_holder_bound",
    "FP_SLACK",
    "SuiteResult",
    "scalar_bound_suite",
    "holder_bound_suite",
]

FP_SLACK = 1e-12


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def _check_p(p) -> np.ndarray:
    p_arr = np.asarray(p)
    if not np.all(np.isfinite(p_arr)) or np.any(p_arr < 2) or np.any(p_arr != np.round(p_arr)):
        raise InvalidInputError(f"p must be an integer >= 2, got {p}")
    return p_arr.astype(np.float64)


def signed_power(x, exponent) -> np.ndarray:
    """|x|^exponent * sign(x), elementwise (exponent > 0)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.power(np.abs(x), exponent)


def mazur(v, p) -> np.ndarray:
    """Coordinatewise ``|v_j|^(2/p) sign(v_j)``.

    Works on any array; *p* broadcasts against ``v.shape[:-1]`` when it is an
    array (one exponent per row).
    """
    p = _check_p(p)
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("mazur: non-finite input")
    e = 2.0 / p
    if e.ndim:
        e = e[..., None]
    return signed_power(v, e)


def mazur_inverse(w, p) -> np.ndarray:
    """Coordinatewise ``|w_j|^(p/2) sign(w_j)``."""
    p = _check_p(p)
    w = np.asarray(w, dtype=np.float64)
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("mazur_inverse: non-finite input")
    e = p / 2.0
    if e.ndim:
        e = e[..., None]
    return signed_power(w, e)


def mazur_product(arr, shape: ProductShape) -> np.ndarray:
    """Apply M_p to row p of product points of the given shape."""
    arr = shape.check(arr)
    return mazur(arr, np.broadcast_to(shape.ps, arr.shape[:-1]))


def scalar_bound_sides(u, v, p):
    """Both sides of ``|M_p(u) - M_p(v)|^p <= 2^(p-2) |u - v|^2`` (vectorized)."""
    p = _check_p(p)
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InvalidInputError("scalar bound: non-finite input")
    e = 2.0 / p
    lhs = np.abs(signed_power(u, e) - signed_power(v, e)) ** p
    rhs = 2.0 ** (p - 2) * (u - v) ** 2
    return lhs, rhs


def verify_scalar_bound(u: float, v: float, p: int) -> BoundCheck:
    lhs, rhs = scalar_bound_sides(u, v, p)
    return BoundCheck(float(lhs), float(rhs), bool(lhs <= rhs * (1 + FP_SLACK)))


def holder_bound_sides(x, y, p):
    """``||M_p x - M_p y||_p`` and ``2^(1-2/p) ||x - y||_2^(2/p)`` over the last axis.

    *p* may carry one exponent per leading index.  Zero padding does not
    change either side, so callers may batch vectors of mixed dimension.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise InvalidInputError(f"dimension mismatch: {x.shape} vs {y.shape}")
    p_arr = _check_p(p)
    lhs = lq_norm(mazur(x, p_arr) - mazur(y, p_arr), p_arr)
    rhs = 2.0 ** (1 - 2.0 / p_arr) * lq_norm(x - y, 2.0) ** (2.0 / p_arr)
    return lhs, rhs


def verify_holder_bound(x, y, p: int) -> BoundCheck:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise InvalidInputError("verify_holder_bound takes single vectors")
    lhs, rhs = holder_bound_sides(x, y, p)
    return BoundCheck(float(lhs), float(rhs), bool(lhs <= rhs * (1 + FP_SLACK)))


@dataclass(frozen=True)
class SuiteResult:
    """Outcome of a randomized bound suite."""

    name: str
    trials: int
    violations: int
    max_ratio: float
    worst: dict | None = None


def scalar_bound_suite(trials: int, p_max: int = 64, seed: int = 0, *,
                       bound: float = 100.0) -> SuiteResult:
    """Random (u, v, p) with u, v uniform in [-bound, bound] and p in 2..p_max."""
    from .rng import derive_rng

    if p_max < 2:
        raise InvalidInputError(f"p_max must be >= 2, got {p_max}")
    if trials <= 0:
        return SuiteResult("scalar_bound", 0, 0, 0.0)
    rng = derive_rng(seed, "scalar-suite")
    violations, worst_ratio, worst = 0, 0.0, None
    for start in range(0, trials, 1 << 18):
        m = min(1 << 18, trials - start)
        u = rng.uniform(-bound, bound, m)
        v = rng.uniform(-bound, bound, m)
        p = rng.integers(2, p_max + 1, m)
        lhs, rhs = scalar_bound_sides(u, v, p)
        violations += int(np.count_nonzero(lhs > rhs * (1 + FP_SLACK)))
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
        j = int(np.argmax(ratio))
        if ratio[j] > worst_ratio:
            worst_ratio = float(ratio[j])
            worst = {"u": float(u[j]), "v": float(v[j]), "p": int(p[j])}
    return SuiteResult("scalar_bound", trials, violations, worst_ratio, worst)


def _pair_batch(rng, m: int, dim_max: int):
    dims = rng.integers(1, dim_max + 1, m)
    mask = np.arange(dim_max)[None, :] < dims[:, None]
    scale = 10.0 ** rng.uniform(-3, 2, (m, 1))
    x = rng.standard_normal((m, dim_max)) * scale
    kind = rng.integers(0, 3, m)[:, None]
    noise = rng.standard_normal((m, dim_max)) * scale * 10.0 ** rng.uniform(-4, 0, (m, 1))
    y = np.where(kind == 0, rng.standard_normal((m, dim_max)) * scale,
                 np.where(kind == 1, x + noise, -x + noise))
    return np.where(mask, x, 0.0), np.where(mask, y, 0.0)


def holder_bound_suite(trials: int, p_max: int = 64, dim_max: int = 64, seed: int = 0) -> tuple[SuiteResult, SuiteResult]:
    """Random vector pairs of dimension 1..dim_max (zero padded) and p in 2..p_max.

    Pairs are a mix of independent draws, near pairs and near-antipodal
    pairs over scales 1e-3..1e2.  Returns the Hoelder-bound suite and the
    norm-identity suite (relative error of ``||M_p x||_p = ||x||_2^(2/p)``
    against 1e-12).
    """
    from .rng import derive_rng

    if p_max < 2:
        raise InvalidInputError(f"p_max must be >= 2, got {p_max}")
    if dim_max < 1:
        raise InvalidInputError(f"dim_max must be >= 1, got {dim_max}")
    if trials <= 0:
        return SuiteResult("holder_bound", 0, 0, 0.0), SuiteResult("norm_identity", 0, 0, 0.0)
    rng = derive_rng(seed, "holder-suite")
    viol = id_viol = 0
    worst_ratio = worst_rel = 0.0
    worst = worst_id = None
    for start in range(0, trials, 8192):
        m = min(8192, trials - start)
        x, y = _pair_batch(rng, m, dim_max)
        p = rng.integers(2, p_max + 1, m)
        lhs, rhs = holder_bound_sides(x, y, p)
        viol += int(np.count_nonzero(lhs > rhs * (1 + FP_SLACK)))
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
        j = int(np.argmax(ratio))
        if ratio[j] > worst_ratio:
            worst_ratio = float(ratio[j])
            worst = {"x": x[j].tolist(), "y": y[j].tolist(), "p": int(p[j])}
        got = lq_norm(mazur(x, p), p)
        want = lq_norm(x, 2.0) ** (2.0 / p)
        rel = np.abs(got - want) / np.where(want > 0, want, 1.0)
        id_viol += int(np.count_nonzero(rel > FP_SLACK))
        j = int(np.argmax(rel))
        if rel[j] > worst_rel:
            worst_rel = float(rel[j])
            worst_id = {"x": x[j].tolist(), "p": int(p[j])}
    return (SuiteResult("holder_bound", trials, viol, worst_ratio, worst),
            SuiteResult("norm_identity", trials, id_viol, worst_rel, worst_id))
