"""Candidate maps F: X -> Y that try to extend the net map f.

A candidate acts on batches of product points (arrays of shape
``(B, M, n)``).  Built-in candidates are block diagonal: component p of the
output only depends on component p of the input.  ``component(p)`` returns
the map ``R^n -> R^n`` obtained by placing the argument in slot p (zeros
elsewhere) and reading slot p of the output; for block-diagonal candidates
this is exactly F_p.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, PluginContractError
from .mazur import mazur
from .nets import ProductNet
from .spaces import ProductShape

__all__ = [
    "EXTENDS_F",
    "UNIFORMLY_CONTINUOUS",
    "ExtensionCandidate",
    "natural_extension",
    "nearest_point_extension",
    "zero_extension",
    "load_plugin_extension",
    "PluginProcess",
    "cross_check_claims",
    "builtin_candidate",
]

EXTENDS_F = "extends_f"
UNIFORMLY_CONTINUOUS = "uniformly_continuous"

VectorMap = Callable[[np.ndarray], np.ndarray]


@dataclass(eq=False)
class ExtensionCandidate:
    """A named map on product points with the properties it claims.

    Either *component_maps* (``p -> F_p``) or *product_map* must be given.
    """

    name: str
    shape: ProductShape
    claims: frozenset = frozenset()
    component_maps: Callable[[int], VectorMap] | None = None
    product_map: Callable[[np.ndarray], np.ndarray] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if (self.component_maps is None) == (self.product_map is None):
            raise InvalidInputError("give exactly one of component_maps, product_map")
        self.claims = frozenset(self.claims)

    def component(self, p: int) -> VectorMap:
        row = self.shape.row(p)
        if p in self._cache:
            return self._cache[p]
        if self.component_maps is not None:
            fp = self.component_maps(p)
        else:
            def fp(X, _row=row):
                X = np.asarray(X, dtype=np.float64)
                full = np.zeros((len(X),) + self.shape.array_shape)
                full[:, _row, :] = X
                return self.product_map(full)[:, _row, :]
        self._cache[p] = fp
        return fp

    def __call__(self, pts) -> np.ndarray:
        pts = self.shape.check(pts)
        single = pts.ndim == 2
        batch = pts[None] if single else pts
        if self.product_map is not None:
            out = np.asarray(self.product_map(batch), dtype=np.float64)
        else:
            out = np.empty_like(batch)
            for row, p in enumerate(self.shape.ps):
                out[:, row, :] = self.component(int(p))(batch[:, row, :])
        return out[0] if single else out


def natural_extension(shape: ProductShape) -> ExtensionCandidate:
    """F_p = M_p on all of R^n."""
    return ExtensionCandidate("natural", shape, {EXTENDS_F},
                              component_maps=lambda p: (lambda X: mazur(X, p)))


def nearest_point_extension(net: ProductNet) -> ExtensionCandidate:
    """F_p(x) = M_p(nearest net point to x); piecewise constant on Voronoi cells."""
    comp = net.component

    def maps(p):
        return lambda X: mazur(comp.nearest(np.asarray(X, dtype=np.float64)), p)

    return ExtensionCandidate("nearest", net.shape, {EXTENDS_F}, component_maps=maps)


def zero_extension(shape: ProductShape) -> ExtensionCandidate:
    return ExtensionCandidate("zero", shape, {UNIFORMLY_CONTINUOUS},
                              component_maps=lambda p: (lambda X: np.zeros_like(np.asarray(X, dtype=np.float64))))


def builtin_candidate(name: str, shape: ProductShape, net: ProductNet | None = None) -> ExtensionCandidate:
    if name == "natural":
        return natural_extension(shape)
    if name == "zero":
        return zero_extension(shape)
    if name == "nearest":
        if net is None:
            raise InvalidInputError("the nearest-point extension needs a product net")
        return nearest_point_extension(net)
    raise InvalidInputError(f"unknown built-in extension {name!r}")


class PluginProcess:
    """Synchronous JSON-lines exchange with an external program.

    Request: ``{"p_list": [...], "component_dim": n, "point": [...]}`` with
    the point flattened (p ascending, coordinates in index order).
    Response: ``{"result": [...]}`` flattened the same way.  Calls are
    serialized per instance.
    """

    def __init__(self, command, shape: ProductShape, timeout: float = 10.0):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.shape = shape
        self.timeout = timeout
        self.last_exchange: dict | None = None
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True, bufsize=1,
            )
        except OSError as exc:
            raise PluginContractError(f"cannot start plugin {self.argv!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _fail(self, msg, point, request, response=None):
        self.last_exchange = {"request": request, "response": response}
        raise PluginContractError(f"plugin {self.argv[0]!r}: {msg}", point, self.last_exchange)

    def evaluate_one(self, point: np.ndarray) -> np.ndarray:
        request = json.dumps({
            "p_list": [int(p) for p in self.shape.ps],
            "component_dim": self.shape.dim,
            "point": [float(c) for c in point.ravel()],
        })
        with self._lock:
            try:
                self._proc.stdin.write(request + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                self._fail("closed its input", point, request)
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                self._fail(f"no response within {self.timeout} s", point, request)
        if line is None:
            self._fail("exited before responding", point, request)
        try:
            msg = json.loads(line)
            result = np.asarray(msg["result"], dtype=np.float64)
        except (ValueError, KeyError, TypeError):
            self._fail("malformed response", point, request, line.rstrip("\n"))
        if result.shape != (point.size,):
            self._fail(f"result has {result.size} values, expected {point.size}",
                       point, request, line.rstrip("\n"))
        if not np.all(np.isfinite(result)):
            self._fail("non-finite values in result", point, request, line.rstrip("\n"))
        self.last_exchange = {"request": request, "response": line.rstrip("\n")}
        return result.reshape(point.shape)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return np.stack([self.evaluate_one(pt) for pt in pts]) if len(pts) else pts.copy()

    def close(self):
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def load_plugin_extension(command, shape: ProductShape, *, timeout: float = 10.0,
                          claims=(), name: str | None = None) -> ExtensionCandidate:
    """Wrap an external program speaking the JSON-lines protocol."""
    proc = PluginProcess(command, shape, timeout)
    cand = ExtensionCandidate(name or f"plugin:{proc.argv[0]}", shape, frozenset(claims),
                              product_map=proc)
    cand.plugin = proc
    return cand


def cross_check_claims(candidate: ExtensionCandidate, *, gamma: float, omega_smallest: float,
                       floor: float = 1.0 / (2.0 * math.e)) -> list[str]:
    """Flags for claims that measurements contradict."""
    flags = []
    if EXTENDS_F in candidate.claims and gamma != 0.0:
        flags.append(f"claims extends_f but measured gamma = {gamma!r} on net points")
    if UNIFORMLY_CONTINUOUS in candidate.claims and omega_smallest > floor:
        flags.append(
            f"claims uniformly_continuous but omega_hat at the smallest scale is "
            f"{omega_smallest!r} > {floor!r}"
        )
    return flags
