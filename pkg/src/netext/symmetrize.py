"""Averaging over the hyperoctahedral group of signed permutations.

A signed permutation ``g = (eps, pi)`` acts on R^n by
``(g x)_i = eps_i * x_{pi^{-1}(i)}``: first permute (the coordinate at
position j moves to position ``pi(j)``), then flip signs.  Permutations are
stored 0-based in one-line notation, ``perm[j] = pi(j)``.

The symmetrization of a map F is

    G(x) = 1/(2^n n!) * sum_g g^{-1} F(g x).

Exact mode enumerates all ``2^n n!`` elements: permutations in
lexicographic order of their one-line notation, sign patterns as a binary
counter (most significant bit = coordinate 0, bit set = -1) iterated
innermost.  Each output coordinate is summed with :func:`math.fsum`, which
is correctly rounded, so results are bit-reproducible and independent of
chunking.

Maps are vectorized: ``F(X)`` receives an ``(m, n)`` array and must return
an ``(m, n)`` array.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ContractError, InvalidInputError, ResourceError
from .rng import derive_rng
from .spaces import as_vector, lq_norm

__all__ = [
    "DEFAULT_BUDGET",
    "SignedPermutation",
    "SymmetrizeConfig",
    "AlphaExtraction",
    "EquivarianceResult",
    "apply_signed_perm",
    "group_order",
    "group_arrays",
    "random_signed_perm",
    "truncated_map",
    "symmetrize",
    "orbit_pair_max",
    "verify_equivariance",
    "extract_alpha",
    "indicator",
]

DEFAULT_BUDGET = 10_000_000
_CHUNK_ROWS = 1 << 16

VectorMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SignedPermutation:
    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))):
            raise InvalidInputError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        if len(signs) != len(perm) or any(s not in (-1, 1) for s in signs):
            raise InvalidInputError(f"signs must be {len(perm)} values in {{-1, +1}}")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @classmethod
    def identity(cls, n: int) -> SignedPermutation:
        return cls(tuple(range(n)), (1,) * n)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def inverse_perm(self) -> np.ndarray:
        return np.argsort(self.perm)

    def inverse(self) -> SignedPermutation:
        # (eps pi)^{-1} = pi^{-1} eps = eps' pi^{-1} with eps'_i = eps_{pi(i)}
        perm = np.asarray(self.perm)
        signs = np.asarray(self.signs)
        return SignedPermutation(tuple(self.inverse_perm), tuple(signs[perm]))

    def compose(self, other: SignedPermutation) -> SignedPermutation:
        """The element acting as ``self(other(x))``."""
        if other.n != self.n:
            raise InvalidInputError("cannot compose signed permutations of different sizes")
        pg, ph = np.asarray(self.perm), np.asarray(other.perm)
        signs = np.asarray(self.signs) * np.asarray(other.signs)[self.inverse_perm]
        return SignedPermutation(tuple(pg[ph]), tuple(signs))

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        perm = np.asarray(self.perm)
        m[perm, np.arange(self.n)] = np.asarray(self.signs, dtype=np.float64)[perm]
        return m

    def __call__(self, v):
        return apply_signed_perm(self, v)


def apply_signed_perm(g: SignedPermutation, v) -> np.ndarray:
    """``(g v)_i = eps_i v_{pi^{-1}(i)}`` over the last axis."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != g.n:
        raise InvalidInputError(f"vector of dimension {v.shape[-1]} vs permutation of {g.n}")
    return v[..., g.inverse_perm] * np.asarray(g.signs, dtype=np.float64)


def group_order(n: int) -> int:
    return (2 ** n) * math.factorial(n)


@lru_cache(maxsize=16)
def group_arrays(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(perms, inverse_perms, signs)`` in the documented enumeration order."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    inv = np.argsort(perms, axis=1)
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    signs = np.where(bits == 1, -1.0, 1.0)
    for a in (perms, inv, signs):
        a.setflags(write=False)
    return perms, inv, signs


def random_signed_perm(rng: np.random.Generator, n: int) -> SignedPermutation:
    return SignedPermutation(tuple(rng.permutation(n)), tuple(rng.choice([-1, 1], size=n)))


@dataclass(frozen=True)
class SymmetrizeConfig:
    """How to evaluate the group average.

    ``embed_dim`` (N >= n) lets F live on R^N; it is then conjugated by the
    zero-padding embedding and the coordinate projection.
    """

    n: int
    p: int = 2
    mode: str = "exact"
    sample_count: int = 100_000
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    embed_dim: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError(f"n must be >= 1, got {self.n}")
        if self.p < 2 or int(self.p) != self.p:
            raise InvalidInputError(f"p must be an integer >= 2, got {self.p}")
        if self.mode not in ("exact", "sampled"):
            raise InvalidInputError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.sample_count < 1:
            raise InvalidInputError("sample_count must be positive")
        if self.embed_dim is not None and self.embed_dim < self.n:
            raise InvalidInputError("embed_dim must be >= n")

    def check_budget(self):
        if self.mode == "exact" and group_order(self.n) > self.budget:
            raise ResourceError(
                f"exact symmetrization at n={self.n} needs {group_order(self.n)} "
                f"group elements, budget is {self.budget}"
            )


def truncated_map(F: VectorMap, n: int, N: int) -> VectorMap:
    """``Q_n o F o J_n`` for a map F on R^N."""
    if N < n:
        raise InvalidInputError("N must be >= n")
    if N == n:
        return F

    def G(X):
        X = np.asarray(X, dtype=np.float64)
        padded = np.zeros(X.shape[:-1] + (N,))
        padded[..., :n] = X
        return np.asarray(F(padded))[..., :n]

    return G


def _evaluate(F: VectorMap, pts: np.ndarray) -> np.ndarray:
    out = []
    for start in range(0, len(pts), _CHUNK_ROWS):
        chunk = pts[start:start + _CHUNK_ROWS]
        y = np.asarray(F(chunk), dtype=np.float64)
        if y.shape != chunk.shape:
            raise ContractError(
                f"map returned shape {y.shape} for input of shape {chunk.shape}", chunk[:1]
            )
        bad = ~np.all(np.isfinite(y), axis=-1)
        if np.any(bad):
            raise ContractError("map returned non-finite values", chunk[np.argmax(bad)])
        out.append(y)
    return np.concatenate(out) if out else np.empty_like(pts)


def _column_fsum_mean(terms: np.ndarray) -> np.ndarray:
    count = terms.shape[0]
    return np.array([math.fsum(terms[:, j]) / count for j in range(terms.shape[1])])


def _orbit_terms(F: VectorMap, x: np.ndarray, perms, inv, signs) -> np.ndarray:
    """Rows ``g^{-1} F(g x)`` for the listed group elements (perms/signs paired).

    When x has a zero or a repeated absolute value its orbit repeats
    points, and F is evaluated once per distinct point.
    """
    gx = x[inv] * signs + 0.0  # + 0.0 turns -0.0 into 0.0
    a = np.abs(x)
    if np.any(a == 0) or np.unique(a).size < a.size:
        uniq, back = np.unique(gx, axis=0, return_inverse=True)
        y = _evaluate(F, uniq)[back.reshape(-1)] * signs
    else:
        y = _evaluate(F, gx) * signs
    return np.take_along_axis(y, perms, axis=1)


def _exact_terms(F: VectorMap, x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    perms, inv, signs = group_arrays(n)
    n_s = signs.shape[0]
    # permutations outer, signs inner
    P = np.repeat(perms, n_s, axis=0)
    I = np.repeat(inv, n_s, axis=0)
    S = np.tile(signs, (perms.shape[0], 1))
    return _orbit_terms(F, x, P, I, S)


def _sampled_elements(cfg: SymmetrizeConfig):
    rng = derive_rng(cfg.seed, "symmetrize-sampled", cfg.n)
    base = np.broadcast_to(np.arange(cfg.n), (cfg.sample_count, cfg.n))
    perms = rng.permuted(base, axis=1)
    signs = np.where(rng.random((cfg.sample_count, cfg.n)) < 0.5, -1.0, 1.0)
    return perms, np.argsort(perms, axis=1), signs


def symmetrize(F: VectorMap, x, cfg: SymmetrizeConfig, *, return_stderr: bool = False):
    """Group average of F evaluated at *x* (a vector or an ``(m, n)`` batch).

    Sampled mode draws ``cfg.sample_count`` uniform group elements from one
    stream seeded by ``cfg.seed`` and reuses them for every point of the
    batch.  With ``return_stderr=True`` a second array of per-coordinate
    standard errors is returned (zeros in exact mode).
    """
    cfg.check_budget()
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[-1] != cfg.n:
        raise InvalidInputError(f"x has dimension {X.shape[-1]}, config says n={cfg.n}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("x has non-finite coordinates")
    Fn = truncated_map(F, cfg.n, cfg.embed_dim or cfg.n)

    means = np.empty_like(X)
    errs = np.zeros_like(X)
    if cfg.mode == "exact":
        for r, xr in enumerate(X):
            means[r] = _column_fsum_mean(_exact_terms(Fn, xr))
    else:
        perms, inv, signs = _sampled_elements(cfg)
        for r, xr in enumerate(X):
            terms = _orbit_terms(Fn, xr, perms, inv, signs)
            means[r] = _column_fsum_mean(terms)
            if len(terms) > 1:
                errs[r] = terms.std(axis=0, ddof=1) / math.sqrt(len(terms))
    if single:
        means, errs = means[0], errs[0]
    return (means, errs) if return_stderr else means


def orbit_pair_max(F: VectorMap, x, y, cfg: SymmetrizeConfig) -> tuple[float, float]:
    """``max_g ||F(g x) - F(g y)||_p`` over the group (or the sampled elements).

    Returns the max and the l_2 distance ``||x - y||_2`` shared by every
    orbit pair.  The symmetrized map can never separate x and y by more.
    """
    cfg.check_budget()
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    Fn = truncated_map(F, cfg.n, cfg.embed_dim or cfg.n)
    if cfg.mode == "exact":
        perms, inv, signs = group_arrays(cfg.n)
        I = np.repeat(inv, signs.shape[0], axis=0)
        S = np.tile(signs, (perms.shape[0], 1))
    else:
        _, I, S = _sampled_elements(cfg)
    fx = _evaluate(Fn, x[I] * S)
    fy = _evaluate(Fn, y[I] * S)
    return float(np.max(lq_norm(fx - fy, cfg.p))), float(np.linalg.norm(x - y))


@dataclass(frozen=True)
class EquivarianceResult:
    max_deviation: float
    max_relative: float
    trials: int


def verify_equivariance(F: VectorMap, cfg: SymmetrizeConfig, trials: int, *,
                        radius: float = 1.0) -> EquivarianceResult:
    """Max over random (x, g) of ``||G(g x) - g G(x)||_p``.

    ``max_relative`` divides each deviation by ``1 + ||G(x)||_p``.
    """
    from .nets import sample_ball

    rng = derive_rng(cfg.seed, "equivariance", cfg.n)
    worst = worst_rel = 0.0
    for _ in range(trials):
        x = sample_ball(rng, 1, cfg.n, radius)[0]
        g = random_signed_perm(rng, cfg.n)
        Gx = symmetrize(F, x, cfg)
        Ggx = symmetrize(F, apply_signed_perm(g, x), cfg)
        dev = float(lq_norm(Ggx - apply_signed_perm(g, Gx), cfg.p))
        worst = max(worst, dev)
        worst_rel = max(worst_rel, dev / (1.0 + float(lq_norm(Gx, cfg.p))))
    return EquivarianceResult(worst, worst_rel, trials)


def indicator(n: int, support, t: float = 1.0) -> np.ndarray:
    """``t * 1_A`` for a 1-based index set A."""
    v = np.zeros(n)
    idx = np.asarray(sorted(support), dtype=np.int64) - 1
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InvalidInputError(f"index set {sorted(support)} not inside 1..{n}")
    v[idx] = t
    return v


@dataclass(frozen=True)
class AlphaExtraction:
    alpha: float
    off_support_residual: float
    support_variation: float
    alpha_other: float
    set_disagreement: float
    other_support: tuple[int, ...]


def extract_alpha(F: VectorMap, n: int, p: int, k: int, t: float,
                  cfg: SymmetrizeConfig) -> AlphaExtraction:
    """Read off the scalar ``alpha_k(t)`` with ``G(t 1_A) = alpha 1_A``.

    Evaluates G at ``t 1_{1..k}``; the second set of the same size is
    ``{n-k+1..n}`` (``{2..k+1}`` when those coincide, and A itself when
    ``k = n``).
    """
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in 1..{n}, got {k}")
    if cfg.n != n or cfg.p != p:
        cfg = SymmetrizeConfig(n=n, p=p, mode=cfg.mode, sample_count=cfg.sample_count,
                               seed=cfg.seed, budget=cfg.budget, embed_dim=cfg.embed_dim)
    A = tuple(range(1, k + 1))
    B = tuple(range(n - k + 1, n + 1))
    if B == A and k < n:
        B = tuple(range(2, k + 2))
    GA, GB = symmetrize(F, np.stack([indicator(n, A, t), indicator(n, B, t)]), cfg)

    def split(g, S):
        mask = np.zeros(n, dtype=bool)
        mask[np.asarray(S) - 1] = True
        on = g[mask]
        alpha = math.fsum(on) / len(on)
        off = float(lq_norm(g[~mask], p)) if (~mask).any() else 0.0
        return alpha, off, float(np.max(np.abs(on - alpha)))

    a, off, var = split(GA, A)
    b, off_b, var_b = split(GB, B)
    return AlphaExtraction(a, max(off, off_b), max(var, var_b), b, abs(a - b), B)
