"""Eigenpairs of L = -d^2/dx^2 + |x| built from the negative zeros of Ai and Ai'.

Mode n (from 1) has eigenvalue lambda_n, and

    phi_n(u) = A_n Ai(|u| - lambda_n) * (1 if u >= 0 else (-1)**(n+1)).

Odd n are even functions (lambda_n = -a'_k, Neumann at 0); even n are odd
functions (lambda_n = -a_k, Dirichlet at 0). The normalization uses the
primitive  int_x^inf Ai^2 = Ai'(x)^2 - x Ai(x)^2.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .airy_core import AiryError, ai_prime_zeros, ai_zeros, airy
from .numerics import (
    INF,
    GL_NODES,
    Grid,
    GridFunction,
    NumericsError,
    check_exponent,
    envelope_cut,
    lp_norm,
    panel_nodes_weights,
)


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class EigenMode:
    n: int
    lam: float
    parity: str
    norm_const: float

    def __post_init__(self):
        if self.n < 1 or not self.lam > 1.0 or not self.norm_const > 0:
            raise SpectrumError(f"invalid eigenmode {self!r}")
        if self.parity not in ("even", "odd") or (self.parity == "even") != (self.n % 2 == 1):
            raise SpectrumError("parity must be even exactly for odd n")

    @property
    def sign_left(self) -> float:
        return 1.0 if self.n % 2 == 1 else -1.0

    def as_dict(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "parity": self.parity, "norm_const": self.norm_const}


def norm_const_closed_form(lam) -> np.ndarray:
    """A_n = (2 int_{-lam}^inf Ai^2)^{-1/2} via the Ai'^2 - x Ai^2 primitive."""
    lam = np.asarray(lam, dtype=float)
    a, b = airy(-lam)
    return 1.0 / np.sqrt(2.0 * (b * b + lam * a * a))


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    lambdas: np.ndarray = field(repr=False)
    norm_consts: np.ndarray = field(repr=False)
    cutoff: float

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        a = np.array(self.norm_consts, dtype=float)
        if lam.ndim != 1 or lam.size == 0 or lam.shape != a.shape:
            raise SpectrumError("basis arrays must be 1-D, non-empty and aligned")
        if np.any(np.diff(lam) <= 0):
            raise SpectrumError("eigenvalues must be strictly increasing")
        lam.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "norm_consts", a)
        object.__setattr__(self, "cutoff", float(self.cutoff))

    def __len__(self):
        return self.lambdas.size

    @cached_property
    def signs_left(self) -> np.ndarray:
        s = np.where(np.arange(1, len(self) + 1) % 2 == 1, 1.0, -1.0)
        s.flags.writeable = False
        return s

    @property
    def modes(self) -> tuple[EigenMode, ...]:
        return tuple(self.mode(n) for n in range(1, len(self) + 1))

    def mode(self, n: int) -> EigenMode:
        if not 1 <= n <= len(self):
            raise SpectrumError("mode index outside basis")
        return EigenMode(n, float(self.lambdas[n - 1]), "even" if n % 2 else "odd",
                         float(self.norm_consts[n - 1]))

    def truncate(self, count: int) -> "SpectralBasis":
        return SpectralBasis(self.lambdas[:count], self.norm_consts[:count], self.lambdas[count - 1])

    def to_json(self) -> str:
        return json.dumps([m.as_dict() for m in self.modes], indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("n,lambda,parity,norm_const\n")
        for m in self.modes:
            buf.write(f"{m.n},{m.lam:.17g},{m.parity},{m.norm_const:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str, cutoff: float | None = None) -> "SpectralBasis":
        rows = json.loads(text)
        lam = [r["lambda"] for r in rows]
        return cls(lam, [r["norm_const"] for r in rows], lam[-1] if cutoff is None else cutoff)

    @classmethod
    def from_csv(cls, text: str, cutoff: float | None = None) -> "SpectralBasis":
        rows = list(csv.DictReader(io.StringIO(text)))
        lam = [float(r["lambda"]) for r in rows]
        return cls(lam, [float(r["norm_const"]) for r in rows], lam[-1] if cutoff is None else cutoff)


def _merged_eigenvalues(count: int) -> np.ndarray:
    n_even = (count + 1) // 2
    n_odd = count // 2
    lam = np.empty(count)
    lam[0::2] = -ai_prime_zeros(n_even).zeros
    if n_odd:
        lam[1::2] = -ai_zeros(n_odd).zeros
    if np.any(np.diff(lam) <= 0):
        raise SpectrumError("zeros of Ai and Ai' failed to interlace")
    return lam


def build_basis(count: int) -> SpectralBasis:
    if int(count) != count or count < 1:
        raise SpectrumError("count must be a positive integer")
    lam = _merged_eigenvalues(int(count))
    return SpectralBasis(lam, norm_const_closed_form(lam), lam[-1])


def basis_to_cutoff(cutoff: float) -> SpectralBasis:
    """Every eigenvalue <= cutoff."""
    if not cutoff > 1.0:
        raise SpectrumError("cutoff must exceed the bottom of the spectrum")
    count = int(4.0 / (3.0 * math.pi) * cutoff**1.5) + 8
    lam = _merged_eigenvalues(count)
    while lam[-1] <= cutoff:
        count *= 2
        lam = _merged_eigenvalues(count)
    lam = lam[lam <= cutoff]
    return SpectralBasis(lam, norm_const_closed_form(lam), cutoff)


# --- evaluation ----------------------------------------------------------------

def eigenfunction_eval(mode: EigenMode, u):
    """phi_n(u); scalar in, float out, array in, array out."""
    u_arr = np.asarray(u, dtype=float)
    a, _ = airy(np.abs(u_arr) - mode.lam)
    v = mode.norm_const * a * np.where(u_arr < 0, mode.sign_left, 1.0)
    return float(v) if v.ndim == 0 else v


def eigenfunction_derivative(mode: EigenMode, u):
    u_arr = np.asarray(u, dtype=float)
    _, b = airy(np.abs(u_arr) - mode.lam)
    # d/du of A Ai(|u| - lam) * s(u): the reflection flips the derivative sign
    v = mode.norm_const * b * np.where(u_arr < 0, -mode.sign_left, 1.0)
    return float(v) if v.ndim == 0 else v


def mode_matrix(basis: SpectralBasis, x, modes: slice | np.ndarray | None = None) -> np.ndarray:
    """phi_n(x_j) with shape (n_modes, len(x))."""
    x = np.asarray(x, dtype=float)
    idx = np.arange(len(basis)) if modes is None else np.arange(len(basis))[modes]
    lam = basis.lambdas[idx]
    a, _ = airy(np.abs(x)[None, :] - lam[:, None])
    sign = np.where(x[None, :] < 0, basis.signs_left[idx][:, None], 1.0)
    return basis.norm_consts[idx][:, None] * a * sign


def boundary_energy(mode: EigenMode) -> tuple[float, float]:
    """lambda phi(0)^2 + phi'(0+)^2 from the closed-form A_n and from quadrature A_n."""
    a, b = airy(np.array([-mode.lam]))
    raw = mode.lam * a[0] ** 2 + b[0] ** 2
    a_quad = norm_const_quadrature(mode.lam)
    return mode.norm_const**2 * raw, a_quad**2 * raw


# --- integrals over the Airy profile ---------------------------------------------

def _tail_cut(p: float) -> float:
    """Right end beyond which |Ai|^p is below 1e-16 of its size at u = 0."""
    return envelope_cut(lambda u: -p * (2.0 / 3.0) * max(u, 1e-300) ** 1.5 - 0.25 * p * math.log(max(u, 1e-300)),
                        1.0, drop=1e-17)


def _airy_panel_edges(lam_max: float, p: float, basis: SpectralBasis | None = None) -> np.ndarray:
    """Edges from -lam_max to the tail cut: every Ai and Ai' zero is an edge.

    |Ai|^p is smooth between consecutive zeros, and consecutive zeros are a
    quarter of the local wavelength apart.
    """
    if basis is not None and basis.lambdas[-1] >= lam_max:
        z = -basis.lambdas[basis.lambdas <= lam_max + 1e-12][::-1]
    else:
        z = -_merged_eigenvalues(int(4.0 / (3.0 * math.pi) * lam_max**1.5) + 8)[::-1]
        z = z[z >= -lam_max * (1 + 1e-15)]
    right = np.linspace(z[-1], 0.0, 3)[1:]
    cut = _tail_cut(p)
    tail = np.linspace(0.0, cut, max(4, int(math.ceil(cut / 0.5))) + 1)[1:]
    return np.concatenate([z, right, tail])


def airy_power_tails(lams: np.ndarray, p: float, basis: SpectralBasis | None = None) -> np.ndarray:
    """int_{-lam}^inf |Ai(u)|^p du for each lam in ``lams`` (each a merged zero magnitude)."""
    lams = np.asarray(lams, dtype=float)
    edges = _airy_panel_edges(float(lams.max()), p, basis)
    x, w = panel_nodes_weights(edges, GL_NODES)
    a, _ = airy(x)
    per_panel = (w * np.abs(a) ** p).reshape(-1, GL_NODES).sum(axis=1)
    tails = np.cumsum(per_panel[::-1])[::-1]  # tails[i] = integral from edges[i]
    pos = np.searchsorted(edges, -lams)
    if not np.allclose(edges[np.minimum(pos, edges.size - 1)], -lams, rtol=1e-14, atol=0):
        raise SpectrumError("eigenvalues do not match the zero panels")
    return tails[pos]


def norm_const_quadrature(lam: float) -> float:
    return float(1.0 / np.sqrt(2.0 * airy_power_tails(np.array([lam]), 2.0)[0]))


_AI_MAX = None


def _ai_abs_max() -> float:
    # global max of |Ai| is at the first zero of Ai'
    global _AI_MAX
    if _AI_MAX is None:
        _AI_MAX = float(abs(airy(ai_prime_zeros(1).zeros)[0][0]))
    return _AI_MAX


def mode_lp_norm(mode: EigenMode, p: float, grid_hint: Grid | None = None) -> float:
    """||phi_n||_p; panels split at Airy zeros unless ``grid_hint`` asks for grid sampling."""
    p = check_exponent(p)
    if grid_hint is not None:
        return lp_norm(GridFunction(grid_hint, eigenfunction_eval(mode, grid_hint.nodes())), p)
    return float(lp_norms(np.array([mode.lam]), np.array([mode.norm_const]), p)[0])


def lp_norms(lams: np.ndarray, norm_consts: np.ndarray, p: float,
             basis: SpectralBasis | None = None) -> np.ndarray:
    p = check_exponent(p)
    if p == INF:
        return np.asarray(norm_consts) * _ai_abs_max()
    t = airy_power_tails(lams, p, basis)
    return (2.0 * t) ** (1.0 / p) * np.asarray(norm_consts)


def basis_lp_norms(basis: SpectralBasis, p: float) -> np.ndarray:
    return lp_norms(basis.lambdas, basis.norm_consts, p, basis)


def counting_function(basis: SpectralBasis, lam: float) -> int:
    if lam > basis.cutoff:
        raise SpectrumError("basis too small")
    return int(np.searchsorted(basis.lambdas, lam, side="right"))


# --- diagnostics ------------------------------------------------------------------

def gap_slacks(basis: SpectralBasis) -> tuple[np.ndarray, np.ndarray]:
    """(gap - pi/2 lam_{n+1}^{-1/2}, pi/2 lam_n^{-1/2} - gap); both should be >= 0."""
    lam = basis.lambdas
    gap = np.diff(lam)
    return gap - 0.5 * math.pi / np.sqrt(lam[1:]), 0.5 * math.pi / np.sqrt(lam[:-1]) - gap


def weyl_deviation(basis: SpectralBasis) -> np.ndarray:
    n = np.arange(1, len(basis) + 1)
    return basis.lambdas * (0.75 * math.pi * n) ** (-2.0 / 3.0) - 1.0


def gram_matrix(basis: SpectralBasis, count: int) -> np.ndarray:
    """Gram matrix of the first ``count`` modes by Gauss-Legendre panels on each half-line."""
    sub = basis.truncate(count)
    lam_max = sub.lambdas[-1]
    cut = lam_max + _tail_cut(2.0)
    freq = math.sqrt(lam_max)
    width = 0.25 * 2.0 * math.pi / (2.0 * freq)
    n_pan = int(math.ceil(cut / width))
    x, w = panel_nodes_weights(np.linspace(0.0, cut, n_pan + 1), GL_NODES)
    right = mode_matrix(sub, x)
    g_right = (right * w) @ right.T
    # phi_m(-u) phi_n(-u) = s_m s_n phi_m(u) phi_n(u)
    s = sub.signs_left
    return g_right * (1.0 + np.outer(s, s))


def ode_residual(mode: EigenMode, u: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """-phi'' + |u| phi - lambda phi by central differences."""
    u = np.asarray(u, dtype=float)
    f0 = eigenfunction_eval(mode, u)
    d2 = (eigenfunction_eval(mode, u + h) - 2.0 * f0 + eigenfunction_eval(mode, u - h)) / h**2
    return -d2 + np.abs(u) * f0 - mode.lam * f0


__all__ = [
    "EigenMode", "SpectralBasis", "SpectrumError", "AiryError", "NumericsError",
    "build_basis", "basis_to_cutoff", "eigenfunction_eval", "eigenfunction_derivative",
    "mode_matrix", "mode_lp_norm", "lp_norms", "basis_lp_norms", "counting_function",
    "norm_const_closed_form", "norm_const_quadrature", "boundary_energy", "gap_slacks",
    "weyl_deviation", "gram_matrix", "ode_residual", "airy_power_tails",
]
