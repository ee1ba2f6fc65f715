"""Operator-norm estimates and the empirical Bochner-Riesz profile of L.

Divergence evidence comes from rank-one operators F_n(L) = <., phi_n> phi_n
with F_n(lam) = eta(sqrt(lam_{n+1}) (lam - lam_n)). Their exact p -> p norm is
||phi_n||_p ||phi_n||_{p'}; scaled by the Riesz factor sigma^alpha at the
next eigenvalue it lower-bounds sup_R ||sigma^alpha_R(L)||_{p->p} up to a
constant independent of n.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .multipliers import (
    MultiplierError,
    MultiplierProfile,
    RieszParams,
    riesz_profile,
    standard_bump,
    sup_sum_norm,
    synthesize,
)
from .numerics import INF, Grid, GridFunction, NumericsError, check_exponent, conjugate_exponent
from .spectrum import EigenMode, SpectralBasis, basis_lp_norms, lp_norms, mode_matrix

KINDS = ("exact-rank-one", "lower", "empirical-upper")
CLASSES = ("convergent", "divergent", "boundary-unknown")
DIVERGENT_SLOPE = 0.02
CONVERGENT_SLOPE = 0.01
DEFAULT_R_LADDER = (8.0, 16.0, 32.0, 64.0, 128.0)


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class NormEstimate:
    op_tag: str
    p: float
    q: float
    kind: str
    value: float
    method: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ProfileError(f"unknown estimate kind {self.kind!r}")
        if not self.value >= 0:
            raise ProfileError("norm estimate must be >= 0")


def classify(slope: float, divergent: float = DIVERGENT_SLOPE, convergent: float = CONVERGENT_SLOPE) -> str:
    if slope >= divergent:
        return "divergent"
    if slope <= convergent:
        return "convergent"
    return "boundary-unknown"


@dataclass(frozen=True)
class ProfilePoint:
    inv_p: float
    alpha: float
    classification: str
    fitted_slope: float
    divergent_threshold: float = DIVERGENT_SLOPE
    convergent_threshold: float = CONVERGENT_SLOPE

    def __post_init__(self):
        if not 0.0 <= self.inv_p <= 1.0 or not self.alpha >= 0:
            raise ProfileError("profile point outside 0 <= 1/p <= 1, alpha >= 0")
        if self.classification != classify(self.fitted_slope, self.divergent_threshold, self.convergent_threshold):
            raise ProfileError("classification inconsistent with slope thresholds")


@dataclass(frozen=True)
class RestrictionProjector:
    """Multiplication by an indicator: inside [-r, r], outside it, or the half-line [r, inf)."""

    radius: float
    side: str = "inside"

    def __post_init__(self):
        if not self.radius > 0:
            raise ProfileError("radius must be > 0")
        if self.side not in ("inside", "outside", "halfline"):
            raise ProfileError(f"unknown projector side {self.side!r}")

    def mask(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.side == "inside":
            return np.abs(x) <= self.radius
        if self.side == "outside":
            return np.abs(x) > self.radius
        return x >= self.radius


def apply_projector(proj: RestrictionProjector, f: GridFunction) -> GridFunction:
    return GridFunction(f.grid, np.where(proj.mask(f.x), f.values, 0))


# --- exponents ------------------------------------------------------------------------

def parse_exponent(text: str) -> float:
    """'4/3', '1.5', 'inf' -> float (INF for the sup norm)."""
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return INF
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError) as exc:
        raise NumericsError(f"bad exponent {text!r}") from exc


def alpha_critical(p: float) -> float:
    """max{0, (2/3)|1/2 - 1/p| - 1/6}."""
    p = check_exponent(p)
    inv = 0.0 if p == INF else 1.0 / p
    return max(0.0, (2.0 / 3.0) * abs(0.5 - inv) - 1.0 / 6.0)


def figure_region(inv_p: float, alpha: float) -> str:
    """A: alpha > |1/2 - 1/p|; B: between that and alpha_cr; C: below alpha_cr."""
    if alpha > abs(0.5 - inv_p):
        return "A"
    crit = max(0.0, (2.0 / 3.0) * abs(0.5 - inv_p) - 1.0 / 6.0)
    if alpha > crit:
        return "B"
    if alpha < crit:
        return "C"
    return "boundary"


# --- rank-one operators ---------------------------------------------------------------

def rank_one_norm(mode: EigenMode, p: float) -> NormEstimate:
    p = check_exponent(p)
    q = conjugate_exponent(p)
    lam, a = np.array([mode.lam]), np.array([mode.norm_const])
    v = float(lp_norms(lam, a, p)[0] * lp_norms(lam, a, q)[0])
    return NormEstimate(f"F_{mode.n}(L)", p, p, "exact-rank-one", v, "||phi_n||_p ||phi_n||_p'")


def rank_one_series(basis: SpectralBasis, p: float) -> np.ndarray:
    """||phi_n||_p ||phi_n||_p' for every mode of ``basis``."""
    p = check_exponent(p)
    q = conjugate_exponent(p)
    a = basis_lp_norms(basis, p)
    return a * a if q == p else a * basis_lp_norms(basis, q)


ETA_RADIUS = math.pi / 2.0


def eta_profile() -> MultiplierProfile:
    """C-infinity bump with eta(0) = 1 supported in [-pi/2, pi/2]."""
    return MultiplierProfile(lambda t: math.e * standard_bump(np.asarray(t) / ETA_RADIUS),
                             (-ETA_RADIUS, ETA_RADIUS), "closed-form", "eta")


def isolating_profile(basis: SpectralBasis, n: int) -> MultiplierProfile:
    """F_n(lam) = eta(sqrt(lam_{n+1}) (lam - lam_n)); needs lam_{n+1} in the basis."""
    if not 1 <= n < len(basis):
        raise ProfileError("range violation")
    lam_n, s = float(basis.lambdas[n - 1]), math.sqrt(float(basis.lambdas[n]))
    eta = eta_profile()
    return MultiplierProfile(lambda t: eta(s * (np.asarray(t) - lam_n)),
                             (lam_n - ETA_RADIUS / s, lam_n + ETA_RADIUS / s), "closed-form", f"F_{n}")


def isolation_values(basis: SpectralBasis, n: int) -> np.ndarray:
    """F_n(lam_m) for all m in the basis (1 at m = n, 0 elsewhere)."""
    return np.asarray(isolating_profile(basis, n)(basis.lambdas))


def _riesz_factor(basis: SpectralBasis, alpha: float) -> np.ndarray:
    """sigma^alpha_{lam_{n+1}}(lam_n) = (1 - lam_n / lam_{n+1})^alpha for n = 1..N-1."""
    lam = basis.lambdas
    return (1.0 - lam[:-1] / lam[1:]) ** alpha


def necessary_condition_series(basis: SpectralBasis, p: float, n_range: tuple[int, int],
                               alpha: float = 0.0) -> list[NormEstimate]:
    """Lower bounds (up to a constant) for sup_R ||sigma^alpha_R||_{p->p}, one per n in n_range.

    Each is the exact rank-one norm of F_n(L) times (1 - lam_n/lam_{n+1})^alpha,
    which scales like lam_n^{-3 alpha/2}; at alpha = 0 it is the rank-one norm itself.
    """
    n0, n1 = n_range
    if not 1 <= n0 <= n1 < len(basis):
        raise ProfileError("range violation")
    p = check_exponent(p)
    sub = basis.truncate(n1 + 1)
    r1 = rank_one_series(sub, p)
    fac = _riesz_factor(sub, alpha)
    out = []
    for n in range(n0, n1 + 1):
        out.append(NormEstimate(f"sigma^{alpha:g}", p, p, "lower", float(r1[n - 1] * fac[n - 1]),
                                "rank-one F_n", {"n": n, "lambda": float(sub.lambdas[n - 1])}))
    return out


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


# --- kernel estimates -------------------------------------------------------------------

def kernel_rows(basis: SpectralBasis, F: MultiplierProfile, y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """K_{F(L)}(x, y_k) for each y_k, shape (len(y), len(x))."""
    if F.support is None or F.support[1] > basis.cutoff:
        raise MultiplierError("basis cutoff too small")
    vals = np.asarray(F(basis.lambdas))
    idx = np.flatnonzero(vals)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.zeros((y.size, np.size(x)))
    if idx.size == 0:
        return out
    phy = mode_matrix(basis, y, idx)
    for k in range(y.size):
        out[k] = synthesize(basis, vals[idx] * phy[:, k], idx, x)
    return out


def kernel_x_grid(basis: SpectralBasis, lam_max: float, points_per_wavelength: int = 12) -> Grid:
    """Grid on [-(lam_max + 16), lam_max + 16] resolving phi_n for lam_n <= lam_max."""
    half = lam_max + 16.0
    step = 2.0 * math.pi / math.sqrt(lam_max + 1.0) / points_per_wavelength
    n = int(math.ceil(2.0 * half / step)) + 1
    return Grid(-half, half, n | 1)


def kernel_row_L2_bound(basis: SpectralBasis, F: MultiplierProfile, lambda_scale: float,
                        y_samples, grid: Grid | None = None) -> NormEstimate:
    """sup_y int |K_{F(L/lam)}(x, y)|^2 dx over ``y_samples``, against lam^{1/2} ||F||_{lam^{3/2},2}^2.

    The value is the ratio; the raw supremum and the normalizer are in ``details``.
    """
    lam = float(lambda_scale)
    if F.support is None or F.support[0] < 3.0 / 8.0 or F.support[1] > 9.0 / 8.0:
        raise ProfileError("support violation")
    y = np.atleast_1d(np.asarray(y_samples, dtype=float))
    if np.any(np.abs(y) > lam / 4.0 + 1e-12):
        raise ProfileError("y samples must satisfy |y| <= lambda_scale/4")
    Fs = F.scaled(lam)
    if Fs.support[1] > basis.cutoff:
        raise MultiplierError("basis cutoff too small")
    if grid is None:
        grid = kernel_x_grid(basis, Fs.support[1])
    rows = kernel_rows(basis, Fs, y, grid.nodes())
    l2 = rows**2 @ grid.weights()
    sup = float(l2.max()) if l2.size else 0.0
    norm = sup_sum_norm(F, lam**1.5, 2.0)
    denom = math.sqrt(lam) * norm**2
    ratio = sup / denom if denom > 0 else 0.0
    return NormEstimate(f"I_lam/4 F(L/{lam:g})", 1.0, 2.0, "empirical-upper", ratio,
                        "sup_y int|K|^2 / (lam^1/2 ||F||^2_{lam^3/2,2})",
                        {"sup_l2": sup, "normalizer": denom, "y_argmax": float(y[int(np.argmax(l2))]) if l2.size else 0.0})


def schur_upper_bound(basis: SpectralBasis, F: MultiplierProfile, y_samples, grid: Grid) -> NormEstimate:
    """sup_y int |K(x, y)| dx on sampled y: the p -> p Schur bound of the symmetric kernel.

    For p = 1 (and p = inf) this is the operator norm itself up to the
    sampling of y; the supremum over unsampled y is not certified.
    """
    rows = kernel_rows(basis, F, np.asarray(y_samples), grid.nodes())
    l1 = np.abs(rows) @ grid.weights()
    return NormEstimate(f"{F.name}(L)", 1.0, 1.0, "empirical-upper", float(l1.max()),
                        "Schur row sums", {"y_argmax": float(np.asarray(y_samples)[int(np.argmax(l1))])})


def rank_one_schur_bound(mode: EigenMode, p: float) -> NormEstimate:
    """Schur test for the kernel phi(x) phi(y): both row-sum suprema are ||phi||_inf ||phi||_1.

    It bounds every p -> p norm and is attained at p = 1 and p = inf.
    """
    p = check_exponent(p)
    lam, a = np.array([mode.lam]), np.array([mode.norm_const])
    v = float(lp_norms(lam, a, INF)[0] * lp_norms(lam, a, 1.0)[0])
    return NormEstimate(f"F_{mode.n}(L)", p, p, "empirical-upper", v, "Schur test")


# --- the profile scan ----------------------------------------------------------------------

def _ladder_bounds(lam: np.ndarray, series: np.ndarray, ladder) -> np.ndarray:
    """B(R) = max{series_n : lam_{n+1} <= R}."""
    out = []
    for R in ladder:
        k = int(np.searchsorted(lam[1:], R, side="right"))
        if k == 0:
            raise ProfileError("R ladder below the second eigenvalue")
        out.append(series[:k].max())
    return np.asarray(out)


def profile_scan(basis: SpectralBasis, inv_p_grid, alpha_grid, R_ladder=DEFAULT_R_LADDER,
                 divergent: float = DIVERGENT_SLOPE, convergent: float = CONVERGENT_SLOPE,
                 threads: int = 1) -> list[ProfilePoint]:
    """Classify each (1/p, alpha) by the log-log slope of the lower-bound ladder B(R).

    B(R) = max over n with lam_{n+1} <= R of ||phi_n||_p ||phi_n||_p' (1 - lam_n/lam_{n+1})^alpha.
    Growth of B (slope >= ``divergent``) forces sup_R ||sigma^alpha_R|| to be infinite;
    a flat ladder is recorded as convergent, never as a proven bound.
    Norm series for distinct exponents are computed on ``threads`` workers;
    results are assembled in grid order, so output does not depend on it.
    """
    ladder = np.asarray(sorted(float(r) for r in R_ladder))
    if ladder.size < 2:
        raise ProfileError("R ladder needs at least two radii")
    if ladder[-1] > basis.cutoff:
        raise MultiplierError("basis cutoff too small")
    n_needed = int(np.searchsorted(basis.lambdas, ladder[-1], side="right"))
    if n_needed < 2:
        raise ProfileError("R ladder below the second eigenvalue")
    sub = basis.truncate(min(n_needed + 1, len(basis)))
    lam = sub.lambdas
    inv_ps = [float(v) for v in inv_p_grid]
    if any(not 0.0 <= v <= 1.0 for v in inv_ps):
        raise NumericsError("invalid exponent")
    # rank-one norms are symmetric under p <-> p'
    keys = sorted({min(v, 1.0 - v) for v in inv_ps})

    def series(key):
        return rank_one_series(sub, INF if key == 0.0 else 1.0 / key)[:-1]

    if threads > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cache = dict(zip(keys, pool.map(series, keys)))
    else:
        cache = {k: series(k) for k in keys}
    points = []
    for inv_p in inv_ps:
        r1 = cache[min(inv_p, 1.0 - inv_p)]
        for alpha in alpha_grid:
            alpha = float(alpha)
            b = _ladder_bounds(lam, r1 * _riesz_factor(sub, alpha), ladder)
            slope = loglog_slope(ladder, b)
            points.append(ProfilePoint(inv_p, alpha, classify(slope, divergent, convergent), slope,
                                       divergent, convergent))
    return points


def riesz_l1_upper_proxy(basis: SpectralBasis, alpha: float, R: float, y_samples, grid: Grid) -> NormEstimate:
    """sup_y int |K_{sigma^alpha_R(L)}(x, y)| dx: the 1 -> 1 norm on sampled y."""
    est = schur_upper_bound(basis, riesz_profile(RieszParams(alpha, R)), y_samples, grid)
    return NormEstimate(f"sigma^{alpha:g}_{R:g}", 1.0, 1.0, "empirical-upper", est.value,
                        "kernel L1 row sums", est.details)


def scan_to_csv(points: list[ProfilePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["inv_p", "alpha", "slope", "classification"])
    for pt in points:
        w.writerow([repr(pt.inv_p), repr(pt.alpha), repr(pt.fitted_slope), pt.classification])
    return buf.getvalue()


def region_csv(points: list[ProfilePoint]) -> str:
    """Plot-ready rows on the (1/p, alpha) axes: the theoretical region next to the scan's call."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["inv_p", "alpha", "alpha_critical", "region", "classification"])
    for pt in points:
        crit = max(0.0, (2.0 / 3.0) * abs(0.5 - pt.inv_p) - 1.0 / 6.0)
        w.writerow([repr(pt.inv_p), repr(pt.alpha), repr(crit),
                    figure_region(pt.inv_p, pt.alpha), pt.classification])
    return buf.getvalue()


__all__ = [
    "NormEstimate", "ProfilePoint", "RestrictionProjector", "ProfileError",
    "apply_projector", "alpha_critical", "figure_region", "parse_exponent", "classify",
    "rank_one_norm", "rank_one_series", "eta_profile", "isolating_profile", "isolation_values",
    "necessary_condition_series", "loglog_slope", "kernel_rows", "kernel_x_grid",
    "kernel_row_L2_bound", "schur_upper_bound", "rank_one_schur_bound", "profile_scan",
    "riesz_l1_upper_proxy", "scan_to_csv", "region_csv", "DEFAULT_R_LADDER",
    "DIVERGENT_SLOPE", "CONVERGENT_SLOPE",
]
