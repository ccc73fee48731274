"""1-nets of Euclidean balls, product nets, and nearest-net-point queries.

Two component nets are provided:

* :class:`NetHandle` -- a finite, materialized net built greedily from the
  half-integer lattice ``(1/2) Z^n`` inside a closed ball.  Candidates are
  scanned in increasing norm (lexicographic inside a norm shell) starting at
  the origin and accepted when they are at distance >= 1 from every point
  already accepted.  Candidate coordinates are kept as integers (in units of
  1/2), so separation tests are exact.
* :class:`LatticeNet` -- the whole checkerboard lattice ``D_n / sqrt(2)``,
  handled implicitly.  Its minimum distance is exactly 1 and its covering
  radius is ``max(1/sqrt(2), sqrt(n/8))``, which is <= 1 for n <= 8, so it
  is a 1-net of all of R^n.  Used where the greedy construction would need
  too many candidates (the candidate count grows like ``(4R)^n``).

Product nets are never materialized: a product net point is one component
net point per index p.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidInputError, ResourceError
from .mazur import mazur_product
from .spaces import ProductPoint, ProductShape, as_vector, x_norm

__all__ = [
    "CANDIDATE_STREAM_VERSION",
    "DEFAULT_CANDIDATE_BUDGET",
    "NetHandle",
    "LatticeNet",
    "ProductNet",
    "ProductNetPoint",
    "half_lattice_candidates",
    "build_greedy_net",
    "build_lattice_net",
    "nearest_net_point",
    "net_f",
    "verify_net_covering",
    "lattice_slack",
    "sample_ball",
    "save_net",
    "load_net",
]

CANDIDATE_STREAM_VERSION = "half-lattice-shells-v1"
DEFAULT_CANDIDATE_BUDGET = 3_000_000
_CHUNK = 16384
# integer (doubled) units: distance < 2 <=> squared distance <= 3
_CONFLICT_RADIUS = 1.9


def lattice_slack(dim: int) -> float:
    """Covering radius of the half-integer lattice, sqrt(n)/4."""
    return math.sqrt(dim) / 4.0


def sample_ball(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    """Uniform samples from the closed l_2 ball (Gaussian direction, radial U^(1/n))."""
    g = rng.standard_normal((count, dim))
    nrm = np.linalg.norm(g, axis=1)
    nrm[nrm == 0] = 1.0
    r = radius * rng.random(count) ** (1.0 / dim)
    return g / nrm[:, None] * r[:, None]


def half_lattice_candidates(dim: int, radius: float, *, seed: int = 0,
                            budget: int = DEFAULT_CANDIDATE_BUDGET) -> np.ndarray:
    """Integer coordinates (units of 1/2) of ``(1/2)Z^n`` inside the ball, in stream order.

    Order: increasing squared norm; inside a shell lexicographic when
    ``seed == 0``, otherwise a seeded shuffle of the shell.  The origin is
    always first.
    """
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    if radius < 0 or not math.isfinite(radius):
        raise InvalidInputError(f"radius must be finite and >= 0, got {radius}")
    r2 = math.floor(4.0 * radius * radius + 1e-9)
    kmax = math.isqrt(r2)
    vals = np.arange(-kmax, kmax + 1, dtype=np.int64)
    pts = np.zeros((1, 0), dtype=np.int64)
    sq = np.zeros(1, dtype=np.int64)
    for _ in range(dim):
        new_sq = sq[:, None] + vals[None, :] ** 2
        keep = new_sq <= r2
        n_keep = int(keep.sum())
        if n_keep > budget:
            raise ResourceError(
                f"candidate stream for dim={dim}, radius={radius} exceeds budget {budget}"
            )
        rows, cols = np.nonzero(keep)
        pts = np.concatenate([pts[rows], vals[cols][:, None]], axis=1)
        sq = new_sq[rows, cols]
    if seed == 0:
        keys = [pts[:, j] for j in range(dim - 1, -1, -1)] + [sq]
        order = np.lexsort(keys)
    else:
        from .rng import derive_rng

        tiebreak = derive_rng(seed, "candidate-stream", dim, radius).random(len(sq))
        order = np.lexsort([tiebreak, sq])
    return pts[order]


def _greedy_select(cand: np.ndarray) -> np.ndarray:
    """Indices of candidates accepted by the sequential greedy rule."""
    accepted: list[int] = []
    acc_coords = np.empty((0, cand.shape[1]), dtype=np.float64)
    c = cand.astype(np.float64)
    for start in range(0, len(c), _CHUNK):
        block = c[start:start + _CHUNK]
        if len(acc_coords):
            d, _ = cKDTree(acc_coords).query(block, k=1, distance_upper_bound=_CONFLICT_RADIUS)
            alive = np.nonzero(~(d < _CONFLICT_RADIUS))[0]
        else:
            alive = np.arange(len(block))
        if len(alive) == 0:
            continue
        surv = block[alive]
        neighbours: dict[int, list[int]] = {}
        for i, j in cKDTree(surv).query_pairs(_CONFLICT_RADIUS):
            a, b = (i, j) if i < j else (j, i)
            neighbours.setdefault(b, []).append(a)
        taken = np.zeros(len(surv), dtype=bool)
        for i in range(len(surv)):
            if not any(taken[j] for j in neighbours.get(i, ())):
                taken[i] = True
        new = alive[taken] + start
        accepted.extend(new.tolist())
        acc_coords = np.concatenate([acc_coords, c[new]])
    return np.asarray(accepted, dtype=np.int64)


def _min_pair_sq(coords: np.ndarray) -> int | None:
    """Exact minimum squared distance among integer points (None for < 2 points)."""
    if len(coords) < 2:
        return None
    fc = coords.astype(np.float64)
    _, idx = cKDTree(fc).query(fc, k=2)
    diff = coords - coords[idx[:, 1]]
    return int(np.min(np.sum(diff * diff, axis=1)))


@dataclass(frozen=True, eq=False)
class NetHandle:
    """A finite maximal 1-separated subset of a closed ball, origin first."""

    points: np.ndarray
    radius: float
    dim: int
    separation: float
    seed: int = 0
    stream_version: str = CANDIDATE_STREAM_VERSION
    _tree: cKDTree = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_tree", cKDTree(pts))

    def __len__(self):
        return len(self.points)

    @property
    def seed_point(self) -> np.ndarray:
        return self.points[0]

    @property
    def covering_bound(self) -> float:
        """Certified covering radius of the ball up to lattice quantization."""
        return 1.0 + lattice_slack(self.dim)

    def nearest_index(self, query) -> tuple[int, float]:
        """Brute-force nearest point, ties to the lowest index."""
        q = as_vector(query, name="query")
        if q.shape[0] != self.dim:
            raise InvalidInputError(f"query has dimension {q.shape[0]}, net has {self.dim}")
        d2 = np.sum((self.points - q) ** 2, axis=-1)
        i = int(np.argmin(d2))
        return i, float(math.sqrt(d2[i]))

    def nearest_indices(self, queries) -> np.ndarray:
        """Batched nearest indices with the same tie rule as :meth:`nearest_index`.

        A KD-tree proposes the nearest point; rows where a second point lies
        within a relative 1e-9 of that distance are settled by exact
        comparison among all such points.
        """
        q = np.asarray(queries, dtype=np.float64)
        if q.ndim != 2 or q.shape[1] != self.dim:
            raise InvalidInputError(f"queries must have shape (m, {self.dim})")
        if not np.all(np.isfinite(q)):
            raise InvalidInputError("queries have non-finite coordinates")
        if len(q) == 0:
            return np.empty(0, dtype=np.int64)
        if len(self.points) == 1:
            return np.zeros(len(q), dtype=np.int64)
        d, nn = self._tree.query(q, k=2)
        idx = np.asarray(nn[:, 0], dtype=np.int64)
        rows = np.nonzero(d[:, 1] <= d[:, 0] * (1 + 1e-9) + 1e-12)[0]
        if rows.size == 0:
            return idx
        r = d[rows, 0] * (1 + 1e-9) + 1e-12
        counts = np.asarray(self._tree.query_ball_point(q[rows], r, return_length=True))
        # settle each group of rows with the same number of rivals in one batch
        for c in np.unique(counts):
            if c < 2:
                continue
            sel = rows[counts == c]
            _, cand = self._tree.query(q[sel], k=int(c))
            d2 = np.sum((self.points[cand] - q[sel, None, :]) ** 2, axis=-1)
            best = d2 == d2.min(axis=1, keepdims=True)
            idx[sel] = np.where(best, cand, len(self.points)).min(axis=1)
        return idx

    def nearest(self, queries) -> np.ndarray:
        return self.points[self.nearest_indices(queries)]

    def sample(self, rng: np.random.Generator, count: int, radius: float | None = None) -> np.ndarray:
        pool = self.points
        if radius is not None:
            pool = pool[np.linalg.norm(pool, axis=1) <= radius]
        return pool[rng.integers(0, len(pool), size=count)]

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        i = self.nearest_indices(pts)
        return np.all(self.points[i] == pts, axis=-1)

    def metadata(self) -> dict:
        return {
            "kind": "greedy",
            "dim": self.dim,
            "radius": self.radius,
            "separation": None if math.isinf(self.separation) else self.separation,
            "size": len(self.points),
            "seed": self.seed,
            "candidate_stream": self.stream_version,
        }


def build_greedy_net(dim: int, radius: float, seed: int = 0, *,
                     budget: int = DEFAULT_CANDIDATE_BUDGET) -> NetHandle:
    """Greedy maximal 1-separated subset of the half-lattice points of the ball.

    :arg seed: 0 gives the documented lexicographic shell order; any other
        value shuffles each norm shell deterministically.
    :raises ResourceError: if the candidate stream exceeds *budget* points.
    """
    cand = half_lattice_candidates(dim, radius, seed=seed, budget=budget)
    chosen = cand[_greedy_select(cand)]
    min_sq = _min_pair_sq(chosen)
    if min_sq is not None and min_sq < 4:
        raise AssertionError("greedy net violates 1-separation")  # pragma: no cover
    sep = math.inf if min_sq is None else math.sqrt(min_sq) / 2.0
    return NetHandle(chosen / 2.0, float(radius), int(dim), sep, seed=seed)


@dataclass(frozen=True)
class LatticeNet:
    """The scaled checkerboard lattice ``D_n / sqrt(2)`` as an infinite 1-net of R^n.

    Nearest points come from the standard D_n decoder: round every
    coordinate (half to even) and, if the coordinate sum is odd, re-round
    the coordinate with the largest rounding error the other way (lowest
    index among equal errors).  *radius* only bounds sampling.
    """

    dim: int
    radius: float

    def __post_init__(self):
        if not 1 <= self.dim <= 8:
            raise InvalidInputError("D_n/sqrt(2) covers R^n within 1 only for 1 <= n <= 8")
        if self.radius < 0:
            raise InvalidInputError("radius must be >= 0")

    @property
    def separation(self) -> float:
        return math.sqrt(2.0) if self.dim == 1 else 1.0

    @property
    def covering_bound(self) -> float:
        if self.dim == 1:
            return 1.0 / math.sqrt(2.0)
        return max(1.0 / math.sqrt(2.0), math.sqrt(self.dim / 8.0))

    @property
    def seed_point(self) -> np.ndarray:
        return np.zeros(self.dim)

    def decode(self, queries) -> np.ndarray:
        """Integer D_n coordinates of the nearest lattice points."""
        y = np.atleast_2d(np.asarray(queries, dtype=np.float64)) * math.sqrt(2.0)
        if y.shape[-1] != self.dim:
            raise InvalidInputError(f"queries must have {self.dim} coordinates")
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("queries have non-finite coordinates")
        v = np.round(y)
        odd = (np.sum(v, axis=-1) % 2) != 0
        if np.any(odd):
            err = y[odd] - v[odd]
            j = np.argmax(np.abs(err), axis=-1)
            rows = np.arange(len(j))
            step = np.where(err[rows, j] >= 0, 1.0, -1.0)
            fix = v[odd]
            fix[rows, j] += step
            v[odd] = fix
        return v

    def nearest(self, queries) -> np.ndarray:
        return self.decode(queries) / math.sqrt(2.0)

    def nearest_indices(self, queries):
        raise TypeError("LatticeNet points are not indexed; use nearest()")

    def sample(self, rng: np.random.Generator, count: int, radius: float | None = None) -> np.ndarray:
        """Lattice points inside the ball, obtained by decoding uniform ball samples."""
        radius = self.radius if radius is None else radius
        out = np.empty((0, self.dim))
        while len(out) < count:
            pts = self.nearest(sample_ball(rng, 2 * (count - len(out)) + 8, self.dim, radius))
            pts = pts[np.linalg.norm(pts, axis=1) <= radius]
            out = np.concatenate([out, pts])
        return out[:count]

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return np.all(self.nearest(pts) == pts, axis=-1)

    def metadata(self) -> dict:
        return {"kind": "lattice-D_n/sqrt2", "dim": self.dim, "radius": self.radius,
                "separation": self.separation, "covering_bound": self.covering_bound}


def build_lattice_net(dim: int, radius: float) -> LatticeNet:
    return LatticeNet(int(dim), float(radius))


def nearest_net_point(net, query) -> tuple[np.ndarray, float]:
    """Nearest net point to *query* and its l_2 distance."""
    if isinstance(net, NetHandle):
        i, d = net.nearest_index(query)
        return net.points[i].copy(), d
    q = as_vector(query, name="query")
    if q.shape[0] != net.dim:
        raise InvalidInputError(f"query has dimension {q.shape[0]}, net has {net.dim}")
    y = net.nearest(q)[0]
    return y, float(np.linalg.norm(y - q))


def verify_net_covering(net, num_queries: int, seed: int) -> float:
    """Largest nearest-net distance over uniform queries in the net's ball."""
    from .rng import derive_rng

    if num_queries <= 0:
        return 0.0
    rng = derive_rng(seed, "covering", net.dim, net.radius)
    worst = 0.0
    for start in range(0, num_queries, 20000):
        q = sample_ball(rng, min(20000, num_queries - start), net.dim, net.radius)
        d = np.linalg.norm(net.nearest(q) - q, axis=1)
        worst = max(worst, float(d.max()))
    return worst


@dataclass(frozen=True)
class ProductNetPoint:
    """One component-net index per p in p0..P."""

    indices: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ProductNet:
    """Virtual product of one component net over every index p."""

    component: NetHandle | LatticeNet
    shape: ProductShape

    def __post_init__(self):
        if self.component.dim != self.shape.dim:
            raise InvalidInputError("component net dimension differs from the product shape")

    def point(self, npt: ProductNetPoint) -> ProductPoint:
        if not isinstance(self.component, NetHandle):
            raise InvalidInputError("index-based product points need a materialized net")
        idx = np.asarray(npt.indices)
        if idx.shape != (self.shape.m,) or np.any(idx < 0) or np.any(idx >= len(self.component)):
            raise InvalidInputError(f"invalid product net indices {npt.indices}")
        return ProductPoint(self.shape, self.component.points[idx])

    def sample(self, rng: np.random.Generator, count: int, radius: float | None = None) -> np.ndarray:
        """``(count, m, n)`` product net points, components drawn independently."""
        flat = self.component.sample(rng, count * self.shape.m, radius)
        return flat.reshape(count, self.shape.m, self.shape.dim)

    def sample_pairs(self, rng: np.random.Generator, count: int, *, near_fraction: float = 0.5,
                     radius: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Pairs of distinct product net points.

        A *near_fraction* share of the pairs moves a random subset of
        components to a nearby net point (snap of a displacement of length
        1..2), the rest are independent draws.
        """
        xs = self.sample(rng, count, radius)
        ys = self.sample(rng, count, radius)
        near = rng.random(count) < near_fraction
        if np.any(near):
            base = xs[near]
            moved = base.copy()
            k = int(near.sum())
            which = rng.random((k, self.shape.m)) < 0.5
            which[np.arange(k), rng.integers(0, self.shape.m, size=k)] = True
            step = sample_ball(rng, k * self.shape.m, self.shape.dim, 1.0)
            step *= (1.0 + rng.random((k * self.shape.m, 1))) / np.maximum(
                np.linalg.norm(step, axis=1, keepdims=True), 1e-12)
            snapped = self.component.nearest(base.reshape(-1, self.shape.dim) + step)
            snapped = snapped.reshape(base.shape)
            moved[which] = snapped[which]
            ys[near] = moved
        keep = x_norm(xs - ys) > 0
        return xs[keep], ys[keep]

    def f(self, pts) -> np.ndarray:
        """The net map: M_p applied to component p."""
        return mazur_product(pts, self.shape)


def net_f(npt, net: ProductNet) -> ProductPoint:
    """Image of a product net point under the component-wise Mazur map."""
    if isinstance(npt, ProductNetPoint):
        pt = net.point(npt)
    elif isinstance(npt, ProductPoint):
        if npt.shape != net.shape:
            raise InvalidInputError("product point shape differs from the product net")
        if not np.all(net.component.contains(npt.components)):
            raise InvalidInputError("not a product net point")
        pt = npt
    else:
        raise InvalidInputError(f"expected ProductNetPoint or ProductPoint, got {type(npt)!r}")
    return ProductPoint(net.shape, net.f(pt.components))


def save_net(net: NetHandle, csv_path, json_path=None) -> tuple[Path, Path]:
    """Write one point per CSV row plus a JSON sidecar with the construction data."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    for row in net.points:
        w.writerow([repr(float(c)) for c in row])
    csv_path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    json_path.write_text(json.dumps(net.metadata(), sort_keys=True, indent=2) + "\n",
                         encoding="utf-8")
    return csv_path, json_path


def load_net(csv_path, json_path=None) -> NetHandle:
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    meta = json.loads(json_path.read_text(encoding="utf-8"))
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = [[float(c) for c in row] for row in csv.reader(fh) if row]
    pts = np.asarray(rows, dtype=np.float64).reshape(-1, meta["dim"])
    sep = meta["separation"]
    return NetHandle(pts, float(meta["radius"]), int(meta["dim"]),
                     math.inf if sep is None else float(sep), seed=int(meta["seed"]),
                     stream_version=meta["candidate_stream"])
