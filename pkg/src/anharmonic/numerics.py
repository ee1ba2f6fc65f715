"""Grids, quadrature and norm primitives shared by the rest of the package."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

#: Exponent sentinel for the sup norm.
INF = math.inf

DEFAULT_ROW_POINTS = 4096
GL_NODES = 16


class NumericsError(ValueError):
    """Raised when an input violates a numerical precondition."""


def check_exponent(p: float) -> float:
    if p == INF:
        return INF
    p = float(p)
    if not math.isfinite(p) or p < 1.0:
        raise NumericsError("invalid exponent")
    return p


def conjugate_exponent(p: float) -> float:
    p = check_exponent(p)
    if p == INF:
        return 1.0
    if p == 1.0:
        return INF
    return p / (p - 1.0)


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n_points: int = DEFAULT_ROW_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise NumericsError("grid requires lo < hi")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise NumericsError("grid requires n_points >= 2")
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.n_points - 1)

    def nodes(self) -> np.ndarray:
        return _grid_nodes(self.lo, self.hi, self.n_points)

    def weights(self) -> np.ndarray:
        """Composite Simpson weights (3/8 rule on the last panel when needed)."""
        return _simpson_weights(self.n_points) * self.step

    @classmethod
    def parse(cls, spec: str) -> "Grid":
        """Parse ``LO:HI:N``."""
        try:
            lo, hi, n = spec.split(":")
            return cls(float(lo), float(hi), int(n))
        except ValueError as exc:
            raise NumericsError(f"bad grid spec {spec!r}; expected LO:HI:N") from exc


@lru_cache(maxsize=64)
def _grid_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    x = np.linspace(lo, hi, n)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=64)
def _simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights for unit spacing; 3/8 rule closes an odd interval count."""
    w = np.zeros(n)
    if n == 2:
        w[:] = 0.5
    elif n % 2 == 1:
        w[0:n:2] = 2.0 / 3.0
        w[1:n:2] = 4.0 / 3.0
        w[0] = w[-1] = 1.0 / 3.0
    else:
        m = n - 3
        if m > 1:
            w[:m:2] = 2.0 / 3.0
            w[1:m:2] = 4.0 / 3.0
            w[0] = w[m - 1] = 1.0 / 3.0
        w[m - 1 : m + 3] += np.array([3.0, 9.0, 9.0, 3.0]) / 8.0
    w.flags.writeable = False
    return w


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        if v.shape != (self.grid.n_points,):
            raise NumericsError("values length must equal grid.n_points")
        if not np.all(np.isfinite(v)):
            raise NumericsError("non-finite sample")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return cls(grid, f(grid.nodes()))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes()

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_grid(self, other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return GridFunction(self.grid, self.values * c)

    __rmul__ = __mul__

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("x,re,im\n")
        v = self.values.astype(complex)
        for x, z in zip(self.x, v):
            buf.write(f"{x:.17g},{z.real:.17g},{z.imag:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "re", "im"]:
            raise NumericsError("GridFunction CSV must start with header 'x,re,im'")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        x = data[:, 0]
        grid = Grid(x[0], x[-1], len(x))
        if not np.allclose(x, grid.nodes(), rtol=0, atol=1e-12 * max(1.0, abs(grid.hi), abs(grid.lo))):
            raise NumericsError("CSV nodes are not equispaced")
        vals = data[:, 1] + 1j * data[:, 2]
        if not np.any(data[:, 2]):
            vals = data[:, 1]
        return cls(grid, vals)


def _same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid != g.grid:
        raise NumericsError("incompatible grids")


@dataclass(frozen=True)
class QuadratureRule:
    kind: str = "composite-gauss-legendre"
    panel_count: int = 1
    nodes_per_panel: int = GL_NODES

    def __post_init__(self):
        if self.kind not in ("composite-gauss-legendre", "trapezoid"):
            raise NumericsError(f"unknown quadrature kind {self.kind!r}")
        if self.panel_count < 1:
            raise NumericsError("panel_count must be >= 1")
        if self.kind == "composite-gauss-legendre" and self.nodes_per_panel < 2:
            raise NumericsError("gauss-legendre needs >= 2 nodes per panel")

    def nodes_weights(self, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
        edges = np.linspace(lo, hi, self.panel_count + 1)
        if self.kind == "trapezoid":
            n = self.panel_count * max(self.nodes_per_panel - 1, 1) + 1
            x = np.linspace(lo, hi, n)
            w = np.full(n, (hi - lo) / (n - 1))
            w[0] *= 0.5
            w[-1] *= 0.5
            return x, w
        return panel_nodes_weights(edges, self.nodes_per_panel)


@lru_cache(maxsize=16)
def _leggauss(k: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(k)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def panel_nodes_weights(edges: np.ndarray, k: int = GL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on consecutive panels ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    t, w = _leggauss(k)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


def oscillatory_edges(lo: float, hi: float, frequency: Callable[[float], float],
                      min_panels: int = 1, max_width: float | None = None) -> np.ndarray:
    """Panel edges on [lo, hi] with width at most a quarter of the local wavelength.

    ``frequency(t)`` is the local angular frequency of the integrand; it is
    assumed monotone on each panel so evaluating it at the panel's left edge
    and right edge bounds it.
    """
    if not lo < hi:
        raise NumericsError("integration requires lo < hi")
    edges = [lo]
    t = lo
    base = (hi - lo) / min_panels
    if max_width is not None:
        base = min(base, max_width)
    while t < hi:
        w = base
        for _ in range(3):
            f = max(frequency(t), frequency(min(t + w, hi)), 1e-300)
            w = min(base, 0.25 * 2.0 * math.pi / f)
        t = min(t + w, hi)
        if hi - t < 1e-12 * max(1.0, abs(hi)):
            t = hi
        edges.append(t)
    return np.asarray(edges)


def integrate(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              rule: QuadratureRule | None = None) -> complex:
    """Integrate a vectorized callable over [lo, hi]."""
    if not lo < hi:
        raise NumericsError("integration requires lo < hi")
    rule = rule or QuadratureRule()
    x, w = rule.nodes_weights(lo, hi)
    return _weighted_sum(f, x, w)


def integrate_panels(f: Callable[[np.ndarray], np.ndarray], edges: Iterable[float],
                     k: int = GL_NODES) -> complex:
    x, w = panel_nodes_weights(np.asarray(edges, dtype=float), k)
    return _weighted_sum(f, x, w)


def _weighted_sum(f, x, w):
    y = np.asarray(f(x))
    if not np.all(np.isfinite(y)):
        raise NumericsError("non-finite integrand")
    s = np.dot(w, y)
    return complex(s) if np.iscomplexobj(s) else float(s)


def lp_norm(g: GridFunction, p: float) -> float:
    p = check_exponent(p)
    a = np.abs(g.values)
    if p == INF:
        return float(a.max())
    return float(np.dot(g.grid.weights(), a**p) ** (1.0 / p))


def inner_product(f: GridFunction, g: GridFunction) -> complex:
    _same_grid(f, g)
    s = np.dot(f.grid.weights(), f.values * np.conj(g.values))
    return complex(s) if np.iscomplexobj(s) else float(s)


def envelope_cut(log_envelope: Callable[[float], float], start: float, drop: float = 1e-16,
                 step: float = 0.5, limit: float = 1e6) -> float:
    """First point right of ``start`` where a decreasing log-envelope drops ``drop`` below its start value.

    The envelope is a closed-form expression; this only solves for its level crossing.
    """
    target = log_envelope(start) + math.log(drop)
    a, b = start, start + step
    while log_envelope(b) > target:
        a, b = b, b + 2.0 * (b - a)
        if b - start > limit:
            raise NumericsError("envelope does not decay")
    for _ in range(80):
        m = 0.5 * (a + b)
        if log_envelope(m) > target:
            a = m
        else:
            b = m
    return b
