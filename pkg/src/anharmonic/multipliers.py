"""Spectral multipliers F(L), Bochner-Riesz means, kernel rows and the G/H split.

F(L) f = sum_n F(lambda_n) <f, phi_n> phi_n over a finite SpectralBasis.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import (
    GL_NODES,
    Grid,
    GridFunction,
    NumericsError,
    _leggauss,
    panel_nodes_weights,
)
from .spectrum import SpectralBasis, mode_matrix

SMOOTHNESS = ("closed-form", "tabulated", "band-limited")
SUP_SAMPLES_PER_CELL = 64
LIFT_POINTS = 2**14
LIFT_HALF_WIDTH = 2.0

# rows of a mode matrix built at once, bounded to keep memory near 64 MB
_CHUNK_ENTRIES = 1 << 23


class MultiplierError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MultiplierProfile:
    """A function of the spectral parameter with declared support.

    ``func`` is vectorized; evaluation forces zero outside ``support``
    (``None`` means unbounded). ``breakpoints`` lists points where the
    profile is not smooth, used by quadrature and sup sampling.
    """

    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    support: tuple[float, float] | None
    smoothness: str = "closed-form"
    name: str = "profile"
    breakpoints: tuple[float, ...] = ()
    table: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.smoothness not in SMOOTHNESS:
            raise MultiplierError(f"unknown smoothness {self.smoothness!r}")
        if self.support is not None:
            lo, hi = (float(v) for v in self.support)
            if not lo <= hi:
                raise MultiplierError("support must satisfy lo <= hi")
            object.__setattr__(self, "support", (lo, hi))

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        v = np.asarray(self.func(t), dtype=float)
        v = np.broadcast_to(v, t.shape).copy()
        if self.support is not None:
            v[(t < self.support[0]) | (t > self.support[1])] = 0.0
        return float(v) if v.ndim == 0 else v

    eval = __call__

    def scaled(self, lam: float) -> "MultiplierProfile":
        """theta -> F(theta / lam), the profile of F(L/lam) in the variable of L."""
        lam = float(lam)
        if not lam > 0:
            raise MultiplierError("scale must be positive")
        sup = None if self.support is None else (self.support[0] * lam, self.support[1] * lam)
        f = self.func
        return MultiplierProfile(lambda t: f(np.asarray(t) / lam), sup, self.smoothness,
                                 f"{self.name}(./{lam:g})", tuple(b * lam for b in self.breakpoints))

    def check_support(self, samples: int = 4001, span: float = 2.0) -> bool:
        """Raw ``func`` vanishes outside the declared support at sampled points."""
        if self.support is None:
            return True
        lo, hi = self.support
        w = max(hi - lo, 1.0) * span
        t = np.concatenate([np.linspace(lo - w, lo, samples)[:-1], np.linspace(hi, hi + w, samples)[1:]])
        return bool(np.all(np.asarray(self.func(t)) == 0.0))

    def to_csv(self, theta: np.ndarray | None = None) -> str:
        if theta is None:
            if self.table is None:
                raise MultiplierError("profile has no table; pass sample points")
            theta, values = self.table
        else:
            values = self(np.asarray(theta, dtype=float))
        buf = io.StringIO()
        buf.write("theta,value\n")
        for t, v in zip(theta, values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        return buf.getvalue()


# --- constructors ---------------------------------------------------------------

@dataclass(frozen=True)
class RieszParams:
    alpha: float
    R: float

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise MultiplierError("alpha must be >= 0")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise MultiplierError("R must be > 0")


def riesz_profile(params: RieszParams) -> MultiplierProfile:
    a, R = float(params.alpha), float(params.R)

    def f(t):
        u = np.clip(1.0 - t / R, 0.0, None)
        return np.where((t >= 0) & (t <= R), u**a if a > 0 else 1.0, 0.0)

    return MultiplierProfile(f, (0.0, R), "closed-form", f"riesz(alpha={a:g},R={R:g})", (0.0, R))


def indicator(lo: float, hi: float) -> MultiplierProfile:
    return MultiplierProfile(lambda t: np.where((t >= lo) & (t <= hi), 1.0, 0.0), (lo, hi),
                             "closed-form", f"indicator[{lo:g},{hi:g}]", (lo, hi))


def zero_profile() -> MultiplierProfile:
    return MultiplierProfile(lambda t: np.zeros_like(t), (0.0, 0.0), "closed-form", "zero")


def polynomial(coeffs, lo: float, hi: float) -> MultiplierProfile:
    """sum_k coeffs[k] theta^k on [lo, hi]."""
    c = np.asarray(coeffs, dtype=float)
    return MultiplierProfile(lambda t: np.polynomial.polynomial.polyval(t, c), (lo, hi),
                             "closed-form", "polynomial", (lo, hi))


def standard_bump(s) -> np.ndarray:
    """exp(-1/(1 - s^2)) on |s| < 1, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    m = np.abs(s) < 1.0
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def smooth_bump(lo: float, hi: float, peak: float = 1.0) -> MultiplierProfile:
    """C-infinity bump supported in [lo, hi] with maximum ``peak`` at the midpoint."""
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    scale = peak * math.e

    def f(t):
        return scale * standard_bump((t - mid) / rad)

    return MultiplierProfile(f, (lo, hi), "closed-form", f"bump[{lo:g},{hi:g}]")


def power_bump(lo: float, hi: float, power: float) -> MultiplierProfile:
    """((t - lo)(hi - t))_+^power normalized to peak 1; H^s for s < power + 1/2."""
    mid = 0.25 * (hi - lo) ** 2

    def f(t):
        return (np.clip((t - lo) * (hi - t), 0.0, None) / mid) ** power

    return MultiplierProfile(f, (lo, hi), "closed-form", f"power_bump[{lo:g},{hi:g}]^{power:g}", (lo, hi))


def tabulated(theta, values, name: str = "tabulated") -> MultiplierProfile:
    """Piecewise-linear interpolation of samples; zero outside the sampled range."""
    theta = np.array(theta, dtype=float)
    values = np.array(values, dtype=float)
    if theta.ndim != 1 or theta.shape != values.shape or theta.size < 2 or np.any(np.diff(theta) <= 0):
        raise MultiplierError("tabulated profile needs increasing theta and matching values")
    if not np.all(np.isfinite(values)):
        raise MultiplierError("non-finite table value")
    theta.flags.writeable = False
    values.flags.writeable = False
    return MultiplierProfile(lambda t: np.interp(t, theta, values, left=0.0, right=0.0),
                             (float(theta[0]), float(theta[-1])), "tabulated", name,
                             table=(theta, values))


def tabulated_from_csv(text: str) -> MultiplierProfile:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"theta", "value"}:
        raise MultiplierError("profile CSV must have header 'theta,value'")
    return tabulated([float(r["theta"]) for r in rows], [float(r["value"]) for r in rows])


# --- F(L) on a basis ---------------------------------------------------------------

def _check_cutoff(basis: SpectralBasis, F: MultiplierProfile) -> None:
    if F.support is None or F.support[1] > basis.cutoff:
        raise MultiplierError("basis cutoff too small")


def _active_modes(basis: SpectralBasis, F: MultiplierProfile) -> tuple[np.ndarray, np.ndarray]:
    vals = np.asarray(F(basis.lambdas), dtype=float)
    idx = np.flatnonzero(vals)
    return idx, vals[idx]


def _mode_chunks(idx: np.ndarray, width: int):
    step = max(1, _CHUNK_ENTRIES // max(width, 1))
    for k in range(0, idx.size, step):
        yield idx[k : k + step]


def spectral_coefficients(basis: SpectralBasis, f: GridFunction, idx: np.ndarray | None = None) -> np.ndarray:
    """<f, phi_n> by the grid's quadrature, for modes ``idx`` (0-based)."""
    idx = np.arange(len(basis)) if idx is None else np.asarray(idx)
    wf = f.grid.weights() * f.values
    out = np.empty(idx.size, dtype=wf.dtype)
    k = 0
    for chunk in _mode_chunks(idx, f.grid.n_points):
        out[k : k + chunk.size] = mode_matrix(basis, f.x, chunk) @ wf
        k += chunk.size
    return out


def synthesize(basis: SpectralBasis, coef: np.ndarray, idx: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sum_k coef[k] phi_{idx[k]}(x), accumulated chunk by chunk in index order."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.size, dtype=np.result_type(coef, float))
    k = 0
    for chunk in _mode_chunks(np.asarray(idx), x.size):
        out += coef[k : k + chunk.size] @ mode_matrix(basis, x, chunk)
        k += chunk.size
    return out


def apply_multiplier(basis: SpectralBasis, F: MultiplierProfile, f: GridFunction) -> GridFunction:
    _check_cutoff(basis, F)
    idx, vals = _active_modes(basis, F)
    if idx.size == 0:
        return GridFunction(f.grid, np.zeros_like(f.values))
    c = spectral_coefficients(basis, f, idx)
    return GridFunction(f.grid, synthesize(basis, vals * c, idx, f.x))


def multiplier_kernel_row(basis: SpectralBasis, F: MultiplierProfile, y: float, grid: Grid) -> GridFunction:
    """K(x, y) = sum_n F(lambda_n) phi_n(x) phi_n(y) sampled on ``grid``."""
    _check_cutoff(basis, F)
    idx, vals = _active_modes(basis, F)
    if idx.size == 0:
        return GridFunction(grid, np.zeros(grid.n_points))
    phy = mode_matrix(basis, np.array([float(y)]), idx)[:, 0]
    return GridFunction(grid, synthesize(basis, vals * phy, idx, grid.nodes()))


def kernel_row_parseval(basis: SpectralBasis, F: MultiplierProfile, y) -> np.ndarray | float:
    """int |K(x, y)|^2 dx = sum_n F(lambda_n)^2 phi_n(y)^2 for each y."""
    _check_cutoff(basis, F)
    idx, vals = _active_modes(basis, F)
    y_arr = np.atleast_1d(np.asarray(y, dtype=float))
    if idx.size == 0:
        out = np.zeros(y_arr.size)
    else:
        out = np.zeros(y_arr.size)
        for chunk in _mode_chunks(np.arange(idx.size), y_arr.size):
            phi = mode_matrix(basis, y_arr, idx[chunk])
            out += (vals[chunk, None] ** 2 * phi**2).sum(axis=0)
    return float(out[0]) if np.ndim(y) == 0 else out


# --- sup-sum norm ---------------------------------------------------------------------

def sup_sum_norm(F: MultiplierProfile, M: float, q: float, samples_per_cell: int = SUP_SAMPLES_PER_CELL) -> float:
    """((1/M) sum_l sup_{[(l-1)/M, l/M)} |F|^q)^{1/q}.

    Each half-open cell is sampled at ``samples_per_cell`` equispaced points
    from its left edge, at the largest double below its right edge, and at
    every profile breakpoint it contains.
    """
    if F.support is None:
        raise MultiplierError("requires compact support")
    if not M > 0:
        raise MultiplierError("M must be positive")
    if not q >= 1:
        raise NumericsError("invalid exponent")
    lo, hi = F.support
    l_lo = math.floor(lo * M) + 1  # cell containing lo
    l_hi = math.floor(hi * M) + 1
    ls = np.arange(l_lo, l_hi + 1, dtype=float)
    left = (ls - 1.0) / M
    right = ls / M
    frac = np.arange(samples_per_cell) / samples_per_cell
    pts = left[:, None] + (right - left)[:, None] * frac[None, :]
    last = np.nextafter(right, left)[:, None]
    vals = np.abs(np.asarray(F(np.concatenate([pts, last], axis=1))))
    sup = vals.max(axis=1)
    for b in (lo, hi) + tuple(F.breakpoints):
        cell = math.floor(b * M) + 1 - l_lo
        if 0 <= cell < ls.size:
            sup[cell] = max(sup[cell], abs(float(F(b))))
    return float((np.sum(sup**q) / M) ** (1.0 / q))


# --- band-limited G/H split --------------------------------------------------------------

_CDF_T, _CDF_W = _leggauss(64)
_BUMP_MASS = float(np.dot(_CDF_W, standard_bump(_CDF_T)))


def _bump_cdf(s) -> np.ndarray:
    """int_{-1}^{s} bump / int bump, clipped to [0, 1]."""
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    half = 0.5 * (s + 1.0)
    x = -1.0 + half[..., None] * (_CDF_T + 1.0)
    return (half[..., None] * _CDF_W * standard_bump(x)).sum(axis=-1) / _BUMP_MASS


def mollifier_hat(xi) -> np.ndarray:
    """Indicator of [-3/4, 3/4] convolved with the unit-mass bump of radius 1/4.

    Smooth, even, equal to 1 on [-1/2, 1/2] and supported in [-1, 1].
    """
    a = np.abs(np.asarray(xi, dtype=float))
    return _bump_cdf(4.0 * (a + 0.75)) - _bump_cdf(4.0 * (a - 0.75))


def mollifier_samples(h: float, n: int = LIFT_POINTS, half_width: float = LIFT_HALF_WIDTH):
    """psi_h(s) = h psi(h s) on the lift grid, by inverse DFT of psi_hat(xi / h)."""
    ds = 2.0 * half_width / n
    s = -half_width + ds * np.arange(n)
    omega = 2.0 * np.pi * np.fft.fftfreq(n, d=ds)
    spec = mollifier_hat(omega / h) * np.exp(-1j * omega * s[0])
    return s, np.real(np.fft.ifft(spec)) / ds


@dataclass(frozen=True, eq=False)
class BandLimitedCosines:
    """G(theta) = sum_j c_j cos(xi_j sqrt(theta)), with cosh for theta < 0.

    Every frequency xi_j lies in [0, bandwidth], so the even lift
    s -> G(s^2) has Fourier transform supported in [-bandwidth, bandwidth].
    """

    xi: np.ndarray = field(repr=False)
    coef: np.ndarray = field(repr=False)
    bandwidth: float

    def __call__(self, theta) -> np.ndarray:
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        r = np.sqrt(np.abs(t))
        out = np.empty(t.size)
        step = max(1, _CHUNK_ENTRIES // max(self.xi.size, 1))
        for k in range(0, t.size, step):
            rr = r[k : k + step]
            arg = np.outer(rr, self.xi)
            pos = t[k : k + step] >= 0
            m = np.where(pos[:, None], np.cos(arg), np.cosh(np.minimum(arg, 700.0)))
            out[k : k + step] = m @ self.coef
        return out.reshape(np.shape(theta)) if np.ndim(theta) else out[0]

    def lift(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return self(s * s)


@dataclass(frozen=True, eq=False)
class GHSplit:
    lambda_scale: float
    g_part: MultiplierProfile
    h_part: MultiplierProfile
    mollifier_bandwidth: float
    cosines: BandLimitedCosines = field(repr=False)
    profile: MultiplierProfile = field(repr=False)

    def band_leakage(self, n: int = LIFT_POINTS, half_width: float = LIFT_HALF_WIDTH) -> float:
        """Relative DFT energy of the lifted g_part outside [-h, h] on the lift grid."""
        ds = 2.0 * half_width / n
        s = -half_width + ds * np.arange(n)
        g = self.cosines.lift(s)
        spec = np.abs(np.fft.fft(g)) ** 2
        omega = np.abs(2.0 * np.pi * np.fft.fftfreq(n, d=ds))
        total = spec.sum()
        if total == 0.0:
            return 0.0
        return float(spec[omega > self.mollifier_bandwidth].sum() / total)

    def h_norm(self, p: float = 2.0, theta_max: float = LIFT_HALF_WIDTH**2, points: int = 20001) -> float:
        """||H||_p over [0, theta_max] on a fine Simpson grid (p = inf for the sup)."""
        grid = Grid(0.0, theta_max, points)
        vals = np.asarray(self.h_part(grid.nodes()))
        if p == math.inf:
            return float(np.abs(vals).max())
        return float(np.dot(grid.weights(), np.abs(vals) ** p) ** (1.0 / p))


def _profile_edges_sqrt(F: MultiplierProfile, panels: int) -> np.ndarray:
    lo, hi = F.support
    a, b = math.sqrt(max(lo, 0.0)), math.sqrt(hi)
    cuts = sorted({a, b} | {math.sqrt(t) for t in F.breakpoints if lo < t < hi})
    edges = [np.linspace(u, v, max(2, int(math.ceil(panels * (v - u) / (b - a)))) + 1)[:-1]
             for u, v in zip(cuts[:-1], cuts[1:])]
    return np.concatenate(edges + [[b]])


def gh_split(F: MultiplierProfile, lambda_scale: float, bandwidth_factor: float = 1.0,
             sqrt_range: float = 4.0, s_panels: int = 256) -> GHSplit:
    """G = F~ * psi_h mapped back through s -> s^2, H = F - G.

    F~(s) = F(s^2) (even). With h = bandwidth_factor * lambda_scale^{3/2} / 6,

        G(theta) = (1/pi) int_0^h F~^(xi) psi^(xi/h) cos(xi sqrt(theta)) dxi,

    where F~^(xi) = 2 int F(s^2) cos(xi s) ds. Both integrals use composite
    Gauss-Legendre; the xi panels resolve cos(xi s) for |s| <= sqrt_range.
    Each term of the resulting cosine sum has frequency <= h, so the
    discretized G is exactly band-limited.
    """
    if F.support is None or F.support[0] < 0.5 or F.support[1] > 1.0:
        raise MultiplierError("profile support")
    if not lambda_scale > 1.0:
        raise MultiplierError("lambda_scale must exceed 1")
    if not bandwidth_factor > 0:
        raise MultiplierError("bandwidth factor must be positive")
    h = bandwidth_factor * lambda_scale**1.5 / 6.0
    lo, hi = F.support
    if hi > lo:
        s, ws = panel_nodes_weights(_profile_edges_sqrt(F, s_panels), GL_NODES)
        fs = ws * np.asarray(F(s * s))
    else:
        s, fs = np.zeros(1), np.zeros(1)
    panels = max(32, int(math.ceil(h * (sqrt_range + 1.0) / (2.0 * math.pi))))
    xi, wx = panel_nodes_weights(np.linspace(0.0, h, panels + 1), GL_NODES)
    fhat = np.empty(xi.size)
    step = max(1, _CHUNK_ENTRIES // s.size)
    for k in range(0, xi.size, step):
        fhat[k : k + step] = 2.0 * (np.cos(np.outer(xi[k : k + step], s)) @ fs)
    coef = wx * fhat * mollifier_hat(xi / h) / math.pi
    keep = coef != 0.0
    cos_sum = BandLimitedCosines(xi[keep], coef[keep], h)
    cos_sum.xi.flags.writeable = False
    cos_sum.coef.flags.writeable = False

    g = MultiplierProfile(cos_sum, None, "band-limited", f"G[{F.name},lambda={lambda_scale:g}]")
    theta_tab = np.linspace(0.0, LIFT_HALF_WIDTH, LIFT_POINTS // 2 + 1) ** 2

    def h_func(t, _F=F, _G=cos_sum):
        return np.asarray(_F(t)) - _G(t)

    h_prof = MultiplierProfile(h_func, None, "tabulated", f"H[{F.name},lambda={lambda_scale:g}]",
                               tuple(F.breakpoints), table=(theta_tab, h_func(theta_tab)))
    return GHSplit(float(lambda_scale), g, h_prof, h, cos_sum, F)


__all__ = [
    "MultiplierProfile", "MultiplierError", "RieszParams", "GHSplit", "BandLimitedCosines",
    "riesz_profile", "indicator", "zero_profile", "polynomial", "smooth_bump", "power_bump",
    "standard_bump", "tabulated", "tabulated_from_csv", "apply_multiplier",
    "multiplier_kernel_row", "kernel_row_parseval", "spectral_coefficients", "synthesize",
    "sup_sum_norm", "gh_split", "mollifier_hat", "mollifier_samples",
    "SUP_SAMPLES_PER_CELL", "LIFT_POINTS", "LIFT_HALF_WIDTH",
]
