"""Empirical moduli of continuity, Hoelder constants and net sup-distances.

Every estimate here is a maximum over sampled witnesses, so it is a lower
bound on the quantity it estimates.  Callers that put an estimate on the
large side of an inequality multiply it by a slack factor.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError, InvalidInputError
from .mazur import mazur
from .nets import ProductNet, sample_ball
from .rng import derive_rng
from .spaces import ProductPoint, ProductShape, lq_norm, x_norm, y_norm

__all__ = [
    "EuclideanDomain",
    "ModulusTable",
    "GammaEstimate",
    "default_scales",
    "estimate_modulus",
    "estimate_gamma",
    "estimate_component_gamma",
    "estimate_holder_constant",
]


@dataclass(frozen=True)
class EuclideanDomain:
    """Maps R^n -> R^n, input measured in l_2 and output in l_{out_q}."""

    dim: int
    out_q: float = 2.0


def default_scales(count: int = 24, lo: float = 1e-3, hi: float = 2.0) -> np.ndarray:
    return np.geomspace(lo, hi, count)


@dataclass(frozen=True, eq=False)
class ModulusTable:
    """Monotone envelope of sampled increments, one row per scale.

    ``raw[i]`` is the largest output distance seen among pairs at input
    distance exactly ``scales[i]``; ``estimates`` is its running maximum.
    ``witnesses[i]`` holds the pair that produced ``raw[i]`` as nested
    lists.
    """

    scales: np.ndarray
    estimates: np.ndarray
    raw: np.ndarray
    samples_per_scale: int
    seed: int
    witnesses: list = field(default_factory=list)

    def at(self, s: float) -> float:
        """Right-continuous step interpolation of the envelope.

        For ``scales[i] <= s < scales[i+1]`` returns ``estimates[i]``; this
        stays a lower bound for a nondecreasing modulus.
        """
        s = float(s)
        lo, hi = float(self.scales[0]), float(self.scales[-1])
        tol = 1e-12 * max(1.0, abs(s))
        if s < lo - tol or s > hi + tol:
            raise InvalidInputError(f"scale {s} outside table range [{lo}, {hi}]")
        i = int(np.searchsorted(self.scales, s + tol, side="right")) - 1
        return float(self.estimates[max(i, 0)])

    def witness_at(self, s: float):
        i = int(np.searchsorted(self.scales, float(s) * (1 + 1e-12), side="right")) - 1
        i = max(i, 0)
        j = int(np.argmax(self.raw[: i + 1] == self.estimates[i]))
        return self.witnesses[j] if self.witnesses else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["scale", "omega_hat", "samples", "witness"])
        for i, (s, e) in enumerate(zip(self.scales, self.estimates)):
            wit = self.witnesses[i] if self.witnesses else None
            w.writerow([repr(float(s)), repr(float(e)), self.samples_per_scale,
                        json.dumps(wit, sort_keys=True)])
        return buf.getvalue()


def _call(F: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(F(pts), dtype=np.float64)
    except ContractError:
        raise
    except Exception as exc:
        raise ContractError(f"map failed: {exc}", pts[:1]) from exc
    if out.shape != pts.shape:
        raise ContractError(f"map returned shape {out.shape} for input {pts.shape}", pts[:1])
    bad = ~np.isfinite(out).reshape(len(out), -1).all(axis=1)
    if np.any(bad):
        raise ContractError("map returned non-finite values", pts[np.argmax(bad)])
    return out


def _witness_pairs(s: float, space) -> tuple[np.ndarray, np.ndarray]:
    """Origin pair (0, s e_1) and antipodal pair (-s/2 e_1, s/2 e_1)."""
    if isinstance(space, ProductShape):
        e = np.zeros(space.array_shape)
        e[:, 0] = 1.0
    else:
        e = np.zeros(space.dim)
        e[0] = 1.0
    xs = np.stack([0.0 * e, -0.5 * s * e])
    ys = np.stack([s * e, 0.5 * s * e])
    return xs, ys


def _unit_directions(rng, shape_rows: tuple, dim: int) -> np.ndarray:
    g = rng.standard_normal(shape_rows + (dim,))
    nrm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / np.where(nrm > 0, nrm, 1.0)


def estimate_modulus(F: Callable, space, scales, samples_per_scale: int, seed: int, *,
                     radius: float = 3.0, witnesses: bool = True) -> ModulusTable:
    """Sampled modulus of continuity at each scale, then a running max.

    *space* is a :class:`EuclideanDomain` (F maps ``(m, n)`` arrays) or a
    :class:`ProductShape` (F maps ``(m, M, n)`` product points, distances are
    the sup-product metrics).  Base points are uniform in the ball of
    *radius* (componentwise for products); each partner sits at distance
    exactly s along a uniform direction, in every component for products.
    With *witnesses* the origin and antipodal pairs along e_1 are added.
    """
    scales = np.asarray(scales, dtype=np.float64)
    if scales.ndim != 1 or scales.size == 0 or np.any(scales <= 0) or np.any(np.diff(scales) <= 0):
        raise InvalidInputError("scales must be positive and strictly increasing")
    if isinstance(space, int):
        space = EuclideanDomain(space)
    product = isinstance(space, ProductShape)

    raw = np.zeros(len(scales))
    wits = []
    for i, s in enumerate(scales):
        rng = derive_rng(seed, "modulus", i)
        m = int(samples_per_scale)
        if product:
            xs = sample_ball(rng, m * space.m, space.dim, radius).reshape((m,) + space.array_shape)
            ys = xs + s * _unit_directions(rng, (m, space.m), space.dim)
        else:
            xs = sample_ball(rng, m, space.dim, radius)
            ys = xs + s * _unit_directions(rng, (m,), space.dim)
        if witnesses:
            wx, wy = _witness_pairs(float(s), space)
            xs = np.concatenate([wx, xs])
            ys = np.concatenate([wy, ys])
        if len(xs) == 0:
            wits.append(None)
            continue
        out = _call(F, np.concatenate([xs, ys]))
        diff = out[: len(xs)] - out[len(xs):]
        d = y_norm(diff, space) if product else lq_norm(diff, space.out_q)
        j = int(np.argmax(d))
        raw[i] = float(d[j])
        wits.append({"x": xs[j].tolist(), "y": ys[j].tolist()})
    est = np.maximum.accumulate(raw)
    return ModulusTable(scales.copy(), est, raw, int(samples_per_scale), int(seed), wits)


@dataclass(frozen=True, eq=False)
class GammaEstimate:
    """Largest sampled ``||F(x) - f(x)||_Y`` over product net points."""

    value: float
    argmax_point: ProductPoint | None
    samples: int

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def estimate_gamma(F: Callable, net: ProductNet, samples: int, seed: int, *,
                   radius: float | None = None) -> GammaEstimate:
    """Max over sampled product net points of the target-side distance to f.

    A map that returns non-finite values at a net point gives an infinite
    estimate rather than an error.
    """
    if samples <= 0:
        return GammaEstimate(0.0, None, 0)
    rng = derive_rng(seed, "gamma")
    xs = net.sample(rng, samples, radius)
    try:
        out = np.asarray(F(xs), dtype=np.float64)
    except ContractError:
        raise
    except Exception as exc:
        raise ContractError(f"map failed: {exc}", xs[:1]) from exc
    if out.shape != xs.shape:
        raise ContractError(f"map returned shape {out.shape} for input {xs.shape}", xs[:1])
    finite = np.isfinite(out).reshape(len(out), -1).all(axis=1)
    if not finite.all():
        j = int(np.argmin(finite))
        return GammaEstimate(math.inf, ProductPoint(net.shape, xs[j]), samples)
    d = y_norm(out - net.f(xs), net.shape)
    j = int(np.argmax(d))
    return GammaEstimate(float(d[j]), ProductPoint(net.shape, xs[j]), samples)


def estimate_component_gamma(F_p: Callable, component_net, p: int, samples: int, seed: int, *,
                             radius: float | None = None) -> float:
    """Max over sampled net points y of ``||F_p(y) - M_p(y)||_p``."""
    if samples <= 0:
        return 0.0
    rng = derive_rng(seed, "component-gamma", p)
    ys = component_net.sample(rng, samples, radius)
    out = _call(F_p, ys)
    return float(np.max(lq_norm(out - mazur(ys, p), p)))


def estimate_holder_constant(F: Callable, alpha: float, xs, ys, *, space=None) -> float:
    """Max over the given pairs of ``d_out(F x, F y) / d_in(x, y)^alpha``.

    Coincident pairs are skipped.  *space* picks the metrics as in
    :func:`estimate_modulus`; default is l_2 on both sides.
    """
    if not 0 < alpha <= 1:
        raise InvalidInputError(f"alpha must lie in (0, 1], got {alpha}")
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise InvalidInputError("pair arrays differ in shape")
    if space is None:
        space = EuclideanDomain(xs.shape[-1])
    product = isinstance(space, ProductShape)
    din = x_norm(xs - ys) if product else lq_norm(xs - ys, 2.0)
    keep = din > 0
    if not np.any(keep):
        return 0.0
    xs, ys, din = xs[keep], ys[keep], din[keep]
    out = _call(F, np.concatenate([xs, ys]))
    diff = out[: len(xs)] - out[len(xs):]
    dout = y_norm(diff, space) if product else lq_norm(diff, space.out_q)
    return float(np.max(dout / din ** alpha))
