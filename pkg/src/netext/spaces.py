"""Finite-dimensional vectors, l_q norms and sup-product points.

A ``RealVector`` is a one-dimensional float64 numpy array.  Batches are
arrays whose last axis holds coordinates, and every norm here reduces over
that axis only.

A point of the truncated product spaces is stored as an ``(m, n)`` array,
one row per index ``p = p0, ..., P`` (``m = P - p0 + 1``).  On the domain
side the metric is the sup over rows of the row-wise l_2 distance; on the
target side row ``p`` is measured in l_p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ProductShape",
    "ProductPoint",
    "as_vector",
    "lq_norm",
    "x_norm",
    "y_norm",
    "sup_product_distance",
    "canonical_embed",
    "canonical_project",
    "vector_to_json",
    "vector_from_json",
]


def as_vector(v, *, name: str = "v") -> np.ndarray:
    """Coerce *v* to a finite 1-d float64 array (dimension 0 allowed)."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite coordinates")
    return arr


def _check_exponent(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if np.any(~np.isfinite(q)) or np.any(q < 1):
        raise InvalidInputError(f"norm exponent must be a finite real >= 1, got {q}")
    return q


def lq_norm(v, q) -> np.ndarray | float:
    """(sum_j |v_j|^q)^(1/q) over the last axis.

    *q* may be a scalar or an array broadcastable against ``v.shape[:-1]``
    (one exponent per row).  The sum is rescaled by the largest entry so that
    exponents up to a few hundred neither overflow nor underflow.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite coordinates")
    q = _check_exponent(q)
    if v.shape[-1] == 0:
        out = np.zeros(v.shape[:-1])
        return float(out) if out.ndim == 0 else out
    a = np.abs(v)
    scale = a.max(axis=-1)
    safe = np.where(scale > 0, scale, 1.0)
    qq = q[..., None] if q.ndim else q
    s = np.sum((a / safe[..., None]) ** qq, axis=-1)
    out = np.where(scale > 0, safe * s ** (1.0 / q), 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ProductShape:
    """Index range ``p0..P`` and the common component dimension."""

    p0: int
    P: int
    dim: int

    def __post_init__(self):
        if int(self.p0) != self.p0 or self.p0 < 2:
            raise InvalidInputError(f"p0 must be an integer >= 2, got {self.p0}")
        if int(self.P) != self.P or self.P < self.p0:
            raise InvalidInputError(f"P must be an integer >= p0, got P={self.P}, p0={self.p0}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidInputError(f"component dimension must be >= 1, got {self.dim}")

    @property
    def ps(self) -> np.ndarray:
        return np.arange(self.p0, self.P + 1)

    @property
    def m(self) -> int:
        return self.P - self.p0 + 1

    @property
    def array_shape(self) -> tuple[int, int]:
        return (self.m, self.dim)

    def row(self, p: int) -> int:
        if not self.p0 <= p <= self.P:
            raise InvalidInputError(f"p={p} outside {self.p0}..{self.P}")
        return p - self.p0

    def zeros(self, *batch) -> np.ndarray:
        return np.zeros(tuple(batch) + self.array_shape)

    def check(self, arr, *, name: str = "point") -> np.ndarray:
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape[-2:] != self.array_shape:
            raise InvalidInputError(
                f"{name} has trailing shape {arr.shape[-2:]}, expected {self.array_shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError(f"{name} has non-finite coordinates")
        return arr


@dataclass(frozen=True, eq=False)
class ProductPoint:
    """One element of the truncated sup-product, components indexed by p."""

    shape: ProductShape
    components: np.ndarray

    def __post_init__(self):
        arr = self.shape.check(self.components, name="components")
        if arr.ndim != 2:
            raise InvalidInputError("ProductPoint holds a single point; use arrays for batches")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "components", arr)

    @classmethod
    def zeros(cls, shape: ProductShape) -> ProductPoint:
        return cls(shape, shape.zeros())

    def __getitem__(self, p: int) -> np.ndarray:
        return self.components[self.shape.row(p)]

    def __eq__(self, other):
        if not isinstance(other, ProductPoint):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.components, other.components)

    def to_json(self) -> str:
        """Flat JSON array: p ascending, coordinates in index order."""
        return json.dumps([float(c) for c in self.components.ravel()])

    @classmethod
    def from_json(cls, text: str, shape: ProductShape) -> ProductPoint:
        flat = np.asarray(json.loads(text), dtype=np.float64)
        if flat.size != shape.m * shape.dim:
            raise InvalidInputError(
                f"expected {shape.m * shape.dim} coordinates, got {flat.size}"
            )
        return cls(shape, flat.reshape(shape.array_shape))


def x_norm(arr) -> np.ndarray | float:
    """Domain-side norm of product points: max over rows of the l_2 norm."""
    return np.max(lq_norm(arr, 2.0), axis=-1)


def y_norm(arr, shape: ProductShape) -> np.ndarray | float:
    """Target-side norm: max over rows p of the l_p norm of row p."""
    arr = shape.check(arr)
    q = np.broadcast_to(shape.ps.astype(np.float64), arr.shape[:-1])
    return np.max(lq_norm(arr, q), axis=-1)


def sup_product_distance(a, b, *, side: str = "x", shape: ProductShape | None = None):
    """Sup-product distance between two product points.

    ``side="x"`` uses l_2 on every component, ``side="y"`` uses l_p on
    component p.  Accepts :class:`ProductPoint` or raw ``(..., m, n)`` arrays
    (raw arrays need *shape* for the y side).
    """
    if isinstance(a, ProductPoint) or isinstance(b, ProductPoint):
        if not (isinstance(a, ProductPoint) and isinstance(b, ProductPoint)):
            raise InvalidInputError("cannot mix ProductPoint and raw arrays")
        if a.shape != b.shape:
            raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
        shape = a.shape
        a, b = a.components, b.components
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-2:] != b.shape[-2:]:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if side == "x":
        return x_norm(a - b)
    if side == "y":
        if shape is None:
            raise InvalidInputError("y-side distance needs the product shape")
        return y_norm(a - b, shape)
    raise InvalidInputError(f"side must be 'x' or 'y', got {side!r}")


def canonical_embed(v, target_dim: int) -> np.ndarray:
    """Pad *v* with zeros up to *target_dim* coordinates (the map J)."""
    v = as_vector(v)
    if target_dim < v.shape[0]:
        raise InvalidInputError(f"cannot embed dimension {v.shape[0]} into {target_dim}")
    out = np.zeros(target_dim)
    out[: v.shape[0]] = v
    return out


def canonical_project(v, target_dim: int) -> np.ndarray:
    """Keep the first *target_dim* coordinates (the map Q)."""
    v = as_vector(v)
    if target_dim < 0 or target_dim > v.shape[0]:
        raise InvalidInputError(f"cannot project dimension {v.shape[0]} onto {target_dim}")
    return v[:target_dim].copy()


def vector_to_json(v) -> str:
    return json.dumps([float(c) for c in as_vector(v)])


def vector_from_json(text: str) -> np.ndarray:
    return as_vector(json.loads(text))
