"""The Airy operator A = -d^2/dx^2 + x: transform, multiplier kernels, and checks against L.

A has generalized eigenfunctions phi_lam(x) = Ai(x - lam). The transform
T f(lam) = <f, phi_lam> is an isometry of L^2(R) with inverse
T^{-1} g(x) = int g(lam) Ai(x - lam) dlam, and F(A) has kernel

    K(x, y) = int F(lam) Ai(x - lam) Ai(y - lam) dlam.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import _backend
from .airy_core import airy
from .multipliers import (
    MultiplierError,
    MultiplierProfile,
    _bump_cdf,
    gh_split,
    synthesize,
)
from .numerics import (
    GL_NODES,
    Grid,
    GridFunction,
    NumericsError,
    QuadratureRule,
    oscillatory_edges,
    panel_nodes_weights,
)
from .spectrum import basis_to_cutoff, mode_matrix

#: Ai(u) < 1e-17 * |Ai(0)| for u beyond this
AIRY_DECAY_CUT = 16.0
#: relative size at the domain edges above which a function is said to leak
EDGE_TOL = 1e-10

DEFAULT_THETA_MAX = 4.0


class AiryOperatorError(ValueError):
    pass


# --- transform -----------------------------------------------------------------------

@dataclass(frozen=True)
class AiryTransformPlan:
    """Physical grid, spectral grid and the Gauss-Legendre rule for the physical integral.

    Samples are interpolated by cubic splines and integrated against the
    exactly evaluated Airy factor; the spectral integral of the inverse uses
    the same panel width as ``quadrature`` does on ``grid``.
    """

    grid: Grid
    spectral_grid: Grid
    quadrature: QuadratureRule

    def physical_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return self.quadrature.nodes_weights(self.grid.lo, self.grid.hi)

    def spectral_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        width = (self.grid.hi - self.grid.lo) / self.quadrature.panel_count
        sg = self.spectral_grid
        panels = max(1, int(math.ceil((sg.hi - sg.lo) / width)))
        return QuadratureRule(self.quadrature.kind, panels, self.quadrature.nodes_per_panel).nodes_weights(sg.lo, sg.hi)


def make_plan(grid: Grid, spectral_hi: float, spectral_points: int | None = None) -> AiryTransformPlan:
    """Plan for inputs on ``grid`` whose transforms are negligible beyond ``spectral_hi``.

    The spectral window starts where Ai(x - lam) has decayed for every x on
    the grid. Panels are a quarter of the shortest Airy wavelength; the
    spectral grid resolves that wavelength with 40 points.
    """
    lo = grid.lo - AIRY_DECAY_CUT
    if not spectral_hi > grid.hi:
        raise AiryOperatorError("spectral window must extend beyond the physical grid")
    freq = math.sqrt(spectral_hi - grid.lo)
    width = 0.25 * 2.0 * math.pi / freq
    panels = int(math.ceil((grid.hi - grid.lo) / width))
    if spectral_points is None:
        spectral_points = int(math.ceil((spectral_hi - lo) * freq * 40.0 / (2.0 * math.pi))) + 1
    return AiryTransformPlan(grid, Grid(lo, spectral_hi, spectral_points),
                             QuadratureRule("composite-gauss-legendre", panels, GL_NODES))


def _check_edges(values: np.ndarray, what: str) -> None:
    scale = np.abs(values).max()
    if scale > 0 and max(abs(values[0]), abs(values[-1])) > EDGE_TOL * scale:
        raise AiryOperatorError(f"domain too small ({what})")


def _convolve(src_grid: Grid, values: np.ndarray, nodes: np.ndarray, weights: np.ndarray,
              targets: np.ndarray, flip: bool) -> np.ndarray:
    """sum_k w_k s(t_k) Ai(+-(target - t_k)) with s the spline of ``values``."""
    re = CubicSpline(src_grid.nodes(), np.real(values))(nodes)
    coef = weights * re
    if flip:
        # Ai(t_k - target): evaluate at -target with shifts -t_k
        out = _backend.airy_weighted_rows(-targets, -nodes, coef)
    else:
        out = _backend.airy_weighted_rows(targets, nodes, coef)
    if np.iscomplexobj(values):
        im = CubicSpline(src_grid.nodes(), np.imag(values))(nodes) * weights
        out = out + 1j * (_backend.airy_weighted_rows(-targets, -nodes, im) if flip
                          else _backend.airy_weighted_rows(targets, nodes, im))
    return out


def airy_transform(plan: AiryTransformPlan, f: GridFunction) -> GridFunction:
    """T f(lam) = int f(x) Ai(x - lam) dx on ``plan.spectral_grid``."""
    if f.grid != plan.grid:
        raise NumericsError("incompatible grids")
    _check_edges(f.values, "physical")
    x, w = plan.physical_nodes()
    out = _convolve(plan.grid, f.values, x, w, plan.spectral_grid.nodes(), flip=True)
    return GridFunction(plan.spectral_grid, out)


def airy_inverse_transform(plan: AiryTransformPlan, g: GridFunction) -> GridFunction:
    """T^{-1} g(x) = int g(lam) Ai(x - lam) dlam on ``plan.grid``."""
    if g.grid != plan.spectral_grid:
        raise NumericsError("incompatible grids")
    _check_edges(g.values, "spectral")
    lam, w = plan.spectral_nodes()
    out = _convolve(plan.spectral_grid, g.values, lam, w, plan.grid.nodes(), flip=False)
    return GridFunction(plan.grid, out)


# --- multiplier kernels ----------------------------------------------------------------

def _log_airy_envelope(u: np.ndarray) -> np.ndarray:
    """log of a bound for |Ai(u)|: 0 on u <= 1, exponential decay beyond."""
    u = np.asarray(u, dtype=float)
    return np.where(u > 1.0, -(2.0 / 3.0) * np.clip(u, 1.0, None) ** 1.5 + 2.0 / 3.0, 0.0)


def spectral_window(F: MultiplierProfile, x_min: float, y: float,
                    tol: float = 1e-17, limit: float = 1e6) -> tuple[float, float]:
    """Interval carrying int F(lam) Ai(x - lam) Ai(y - lam) dlam for every x >= x_min.

    Left of the window the Airy decay beats any growth of F; right of it F
    must fall below ``tol`` relative to its peak, or the profile is rejected.
    """
    lo_sup, hi_sup = F.support if F.support is not None else (-math.inf, math.inf)
    left_bound = min(x_min, y) - AIRY_DECAY_CUT
    p_lo, p_hi = max(lo_sup, left_bound), min(hi_sup, max(x_min, y) + 64.0)
    peak = float(np.abs(F(np.linspace(p_lo, p_hi, 4001))).max()) if p_hi > p_lo else 0.0
    if peak == 0.0:
        return (lo_sup, hi_sup) if F.support is not None else (0.0, 0.0)
    lo = max(lo_sup, left_bound)
    if not math.isfinite(lo_sup):
        # walk left until Airy decay of both factors outweighs |F|
        step = 1.0
        lo = left_bound
        while True:
            t = lo - step
            val = math.log(max(abs(float(F(t))), 1e-300)) + float(_log_airy_envelope(x_min - t)) \
                + float(_log_airy_envelope(y - t))
            if val < math.log(tol * peak):
                break
            lo = t
            step *= 1.5
            if step > limit:
                raise AiryOperatorError("profile decay")
    if math.isfinite(hi_sup):
        return (lo, hi_sup)
    # |Ai(x - lam) Ai(y - lam)| ~ lam^{-1/2}/pi for large lam: require |F| to die out
    hi = max(x_min, y) + 64.0
    while True:
        t = np.linspace(hi, 2.0 * hi, 257)
        if np.abs(F(t)).max() < tol * peak:
            return (lo, hi)
        hi *= 2.0
        if hi > limit:
            raise AiryOperatorError("profile decay")


def _kernel_nodes(F: MultiplierProfile, x_min: float, y: float, window=None) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = window if window is not None else spectral_window(F, x_min, y)
    if not hi > lo:
        return np.zeros(0), np.zeros(0)
    cuts = sorted({lo, hi} | {b for b in F.breakpoints if lo < b < hi})

    def freq(lam):
        return math.sqrt(max(lam - x_min, 0.0)) + math.sqrt(max(lam - y, 0.0)) + 1.0

    edges = np.concatenate([oscillatory_edges(u, v, freq)[:-1] for u, v in zip(cuts[:-1], cuts[1:])] + [[hi]])
    return panel_nodes_weights(edges, GL_NODES)


def airy_multiplier_kernel_row(F: MultiplierProfile, y: float, grid: Grid, window=None) -> GridFunction:
    """K_{F(A)}(x, y) sampled at the nodes of ``grid``."""
    x = grid.nodes()
    lam, w = _kernel_nodes(F, float(x.min()), float(y), window)
    if lam.size == 0:
        return GridFunction(grid, np.zeros(grid.n_points))
    fv = np.asarray(F(lam), dtype=float)
    ay, _ = airy(y - lam)
    coef = w * fv * ay
    if not np.all(np.isfinite(coef)):
        raise AiryOperatorError("profile decay")
    return GridFunction(grid, _backend.airy_weighted_rows(x, lam, coef))


def airy_kernel_value(F: MultiplierProfile, x: float, y: float) -> float:
    return float(airy_multiplier_kernel_row(F, y, Grid(x, x + 1.0, 2)).values[0])


def plancherel_row(F: MultiplierProfile, x: float, y_grid: Grid | None = None) -> tuple[float, float]:
    """(int |K(x, y)|^2 dy over ``y_grid``, int |F(lam) Ai(x - lam)|^2 dlam).

    The left side samples the kernel row in y (K is symmetric), the right
    side integrates over the spectral window directly. The default y window
    [-200, sup F + 21] leaves a tail below 1e-7 relative for smooth bumps of
    width >= 10.
    """
    if y_grid is None:
        if F.support is None:
            raise MultiplierError("requires compact support")
        y_grid = Grid(-200.0, max(F.support[1], x) + 21.0, 16001)
    row = airy_multiplier_kernel_row(F, x, y_grid)
    lhs = float(np.dot(y_grid.weights(), row.values**2))
    lam, w = _kernel_nodes(F, x, x)
    ax, _ = airy(x - lam)
    rhs = float(np.dot(w, (np.asarray(F(lam)) * ax) ** 2))
    return lhs, rhs


# --- finite propagation ----------------------------------------------------------------

def spectral_rolloff(theta, theta_lo: float, theta_hi: float) -> np.ndarray:
    """C-infinity step: 1 below ``theta_lo``, 0 above ``theta_hi``."""
    t = np.asarray(theta, dtype=float)
    return 1.0 - _bump_cdf(2.0 * (t - theta_lo) / (theta_hi - theta_lo) - 1.0)


@dataclass(frozen=True)
class PropagationResult:
    difference: float
    kernel_sup: float
    bandwidth: float
    propagation_radius: float
    modes: int
    spectral_nodes: int


def propagation_kernels(F: MultiplierProfile, lambda_scale: float, y: float, grid: Grid,
                        bandwidth_factor: float = 1.0, theta_max: float = DEFAULT_THETA_MAX):
    """(K_L, K_A, split) for the rolled-off band-limited part of F.

    Both operators receive the same multiplier G(theta) W(theta), with W a
    smooth roll-off from 1 at theta_max/2 to 0 at theta_max, so the spectral
    sums are finite and the truncation is identical on both sides.
    """
    lam = float(lambda_scale)
    split = gh_split(F, lam, bandwidth_factor, sqrt_range=math.sqrt(theta_max) + 1.0)
    G = split.cosines

    def gw(theta):
        return G(theta) * spectral_rolloff(theta, 0.5 * theta_max, theta_max)

    x = grid.nodes()
    cutoff = lam * theta_max
    basis = basis_to_cutoff(cutoff)
    gn = gw(basis.lambdas / lam)
    idx = np.flatnonzero(gn)
    phy = mode_matrix(basis, np.array([y]), idx)[:, 0]
    k_l = synthesize(basis, gn[idx] * phy, idx, x)

    prof = MultiplierProfile(lambda t: gw(np.asarray(t) / lam), None, "band-limited", "G*W")
    lo, _ = spectral_window(prof, float(x.min()), y)
    mu, w = _kernel_nodes(prof, float(x.min()), y, window=(lo, cutoff))
    ay, _ = airy(y - mu)
    k_a = _backend.airy_weighted_rows(x, mu, w * gw(mu / lam) * ay)
    return k_l, k_a, split, len(basis), mu.size


def verify_finite_propagation(F: MultiplierProfile, lambda_scale: float, y: float, grid: Grid | None = None,
                              bandwidth_factor: float = 1.0, theta_max: float = DEFAULT_THETA_MAX,
                              detail: bool = False):
    """Relative sup difference between K_{G(L/lam)}(., y) and K_{G(A/lam)}(., y).

    G is the band-limited part of F from ``gh_split``. With bandwidth
    h = lam^{3/2}/6 the associated wave travels at most h / sqrt(lam) = lam/6,
    which stays on x > 0 when y >= lam/4, so both kernels should agree.
    """
    lam = float(lambda_scale)
    if not (lam > 0 and y >= lam / 4.0):
        raise AiryOperatorError("propagation precondition")
    if grid is None:
        grid = default_propagation_grid(lam, y)
    k_l, k_a, split, modes, nodes = propagation_kernels(F, lam, y, grid, bandwidth_factor, theta_max)
    sup = float(np.abs(k_l).max())
    diff = float(np.abs(k_l - k_a).max())
    rel = diff / sup if sup > 0 else 0.0
    if not detail:
        return rel
    return PropagationResult(rel, sup, split.mollifier_bandwidth, split.mollifier_bandwidth / math.sqrt(lam),
                             modes, nodes)


def default_propagation_grid(lambda_scale: float, y: float) -> Grid:
    return Grid(-lambda_scale / 4.0, y + lambda_scale / 2.0, 501)


# --- kernel bounds ---------------------------------------------------------------------

@dataclass(frozen=True)
class KernelBoundReport:
    a: float
    y: float
    d: float
    l: int
    fitted_C: float
    max_violation_ratio: float
    regime: str = "A"
    holdout_ratio: float = 0.0

    def to_json(self) -> str:
        keys = ("a", "y", "d", "l", "fitted_C", "max_violation_ratio")
        return json.dumps({k: asdict(self)[k] for k in keys})


def regime_of(a: float, y: float) -> str:
    thr = min(1.0, abs(y) ** -0.5) if y != 0 else 1.0
    return "A" if a >= thr else "B"


def kernel_envelope(regime: str, a: float, y: float, l: int, x: np.ndarray) -> tuple[np.ndarray, float]:
    """Shape of the kernel bound (without its constant) and the scale d.

    Regime A: d^{-1} (1 + |x - y|/d)^{-l} (1 + |y|/(1 + |x|))^{1/4}, d = max(a^{-1/2}, |y|^{1/2}/a).
    Regime B: a (1 + a^2 |x|)^{-l} (1 + |y|)^{-1/4} (1 + |x|)^{-1/4}.
    """
    x = np.asarray(x, dtype=float)
    d = max(a**-0.5, math.sqrt(abs(y)) / a)
    if regime == "A":
        env = (1.0 / d) * (1.0 + np.abs(x - y) / d) ** (-l) * (1.0 + abs(y) / (1.0 + np.abs(x))) ** 0.25
    else:
        env = a * (1.0 + a * a * np.abs(x)) ** (-l) * (1.0 + abs(y)) ** -0.25 * (1.0 + np.abs(x)) ** -0.25
    return env, d


def verify_kernel_bound(w: MultiplierProfile, y: float, l: int, grid: Grid,
                        regime: str | None = None) -> KernelBoundReport:
    """Fit the smallest C with |K_{w(A)}(x, y)| <= C * envelope(x) on grid nodes and midpoints.

    The holdout ratio re-checks the fitted envelope at quarter points.
    """
    if w.support is None:
        raise MultiplierError("requires compact support")
    a = max(abs(w.support[0]), abs(w.support[1]))
    if not a > 0:
        a = 1.0
    actual = regime_of(a, y)
    thr = min(1.0, abs(y) ** -0.5) if y != 0 else 1.0
    if regime is None:
        regime = actual
    elif regime not in ("A", "B") or (regime == "A" and a < thr) or (regime == "B" and a > thr):
        raise AiryOperatorError("regime")
    x = grid.nodes()
    fit_x = np.sort(np.concatenate([x, 0.5 * (x[1:] + x[:-1])]))
    hold_x = np.concatenate([0.75 * x[:-1] + 0.25 * x[1:], 0.25 * x[:-1] + 0.75 * x[1:]])
    all_x = np.concatenate([fit_x, hold_x])
    fine = Grid(float(all_x.min()), float(all_x.max()), 2)
    lam, wts = _kernel_nodes(w, fine.lo, float(y))
    if lam.size:
        ay, _ = airy(y - lam)
        k = _backend.airy_weighted_rows(all_x, lam, wts * np.asarray(w(lam)) * ay)
    else:
        k = np.zeros(all_x.size)
    env, d = kernel_envelope(regime, a, float(y), int(l), all_x)
    ratio = np.abs(k) / env
    n_fit = fit_x.size
    C = float(ratio[:n_fit].max())
    if C == 0.0:
        return KernelBoundReport(a, float(y), d, int(l), 0.0, 0.0, regime, 0.0)
    return KernelBoundReport(a, float(y), d, int(l), C, float(ratio[:n_fit].max() / C), regime,
                             float(ratio[n_fit:].max() / C))


def scaled_bump(a: float, center: float = 0.0) -> MultiplierProfile:
    """w(lam) = bump(lam / a): |w^{(k)}| <= C_k a^{-k} with C_k independent of a."""
    from .multipliers import standard_bump

    return MultiplierProfile(lambda t: math.e * standard_bump((np.asarray(t) - center) / a),
                             (center - a, center + a), "closed-form", f"scaled_bump(a={a:g})")


__all__ = [
    "AiryTransformPlan", "AiryOperatorError", "KernelBoundReport", "PropagationResult",
    "make_plan", "airy_transform", "airy_inverse_transform", "airy_multiplier_kernel_row",
    "airy_kernel_value", "plancherel_row", "spectral_window", "spectral_rolloff",
    "propagation_kernels", "verify_finite_propagation", "default_propagation_grid",
    "verify_kernel_bound", "kernel_envelope", "regime_of", "scaled_bump",
]
