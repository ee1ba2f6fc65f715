import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anharmonic.multipliers import MultiplierError, MultiplierProfile, indicator, kernel_row_parseval, smooth_bump
from anharmonic.numerics import INF, Grid, GridFunction, NumericsError, lp_norm
from anharmonic.profile_lab import (
    NormEstimate,
    ProfileError,
    ProfilePoint,
    RestrictionProjector,
    alpha_critical,
    apply_projector,
    classify,
    eta_profile,
    figure_region,
    isolating_profile,
    isolation_values,
    kernel_row_L2_bound,
    loglog_slope,
    necessary_condition_series,
    parse_exponent,
    profile_scan,
    rank_one_norm,
    rank_one_schur_bound,
    rank_one_series,
    region_csv,
    riesz_l1_upper_proxy,
    scan_to_csv,
)
from anharmonic.spectrum import basis_to_cutoff, build_basis, mode_matrix


# --- critical exponent -------------------------------------------------------------------------

def test_alpha_critical_examples():
    assert alpha_critical(2.0) == 0.0
    assert alpha_critical(INF) == pytest.approx(1.0 / 6.0)
    assert alpha_critical(4.0) == 0.0
    assert alpha_critical(4.0 / 3.0) == 0.0
    assert alpha_critical(1.0) == pytest.approx(1.0 / 6.0)
    with pytest.raises(NumericsError, match="invalid exponent"):
        alpha_critical(0.5)


@given(st.floats(0.0, 1.0))
def test_alpha_critical_symmetry_and_zero_set(inv_p):
    p = INF if inv_p == 0 else 1.0 / inv_p
    q = INF if inv_p == 1 else 1.0 / (1.0 - inv_p)
    a = alpha_critical(p)
    assert a == pytest.approx(alpha_critical(q), abs=1e-12)
    assert (a == 0.0) == (0.25 - 1e-12 <= inv_p <= 0.75 + 1e-12)


def test_alpha_critical_piecewise_linear():
    inv = np.linspace(0.0, 0.25, 101)
    a = np.array([alpha_critical(INF if t == 0 else 1 / t) for t in inv])
    assert np.allclose(np.diff(a), -(2.0 / 3.0) * 0.0025, rtol=1e-9)


def test_figure_regions():
    assert figure_region(0.5, 0.1) == "A"
    assert figure_region(1.0, 0.3) == "B"
    assert figure_region(1.0, 0.1) == "C"
    assert figure_region(0.25, 0.0) == "boundary"


def test_parse_exponent():
    assert parse_exponent("4/3") == pytest.approx(4 / 3)
    assert parse_exponent("inf") == INF
    with pytest.raises(NumericsError):
        parse_exponent("four")


# --- types ------------------------------------------------------------------------------------------

def test_norm_estimate_invariants():
    with pytest.raises(ProfileError):
        NormEstimate("x", 2, 2, "exact-rank-one", -1.0, "m")
    with pytest.raises(ProfileError):
        NormEstimate("x", 2, 2, "guess", 1.0, "m")


def test_profile_point_consistency():
    ProfilePoint(1.0, 0.05, "divergent", 0.1)
    with pytest.raises(ProfileError):
        ProfilePoint(1.0, 0.05, "convergent", 0.1)
    assert classify(0.015) == "boundary-unknown"


# --- projectors ----------------------------------------------------------------------------------------

@pytest.fixture
def sample_fn():
    g = Grid(-20.0, 20.0, 801)
    return GridFunction.from_callable(g, lambda x: np.exp(-((x - 2) ** 2) / 30) * np.cos(x))


def test_projectors_partition(sample_fn):
    inside = apply_projector(RestrictionProjector(5.0, "inside"), sample_fn)
    outside = apply_projector(RestrictionProjector(5.0, "outside"), sample_fn)
    assert np.array_equal((inside + outside).values, sample_fn.values)
    assert lp_norm(inside, 2) ** 2 + lp_norm(outside, 2) ** 2 == pytest.approx(lp_norm(sample_fn, 2) ** 2, rel=1e-12)


@pytest.mark.parametrize("side", ["inside", "outside", "halfline"])
def test_projector_idempotent(sample_fn, side):
    P = RestrictionProjector(3.0, side)
    once = apply_projector(P, sample_fn)
    assert np.array_equal(apply_projector(P, once).values, once.values)


def test_halfline_projector(sample_fn):
    v = apply_projector(RestrictionProjector(3.0, "halfline"), sample_fn)
    assert np.all(v.values[sample_fn.x < 3.0] == 0)
    assert np.array_equal(v.values[sample_fn.x >= 3.0], sample_fn.values[sample_fn.x >= 3.0])
    with pytest.raises(ProfileError):
        RestrictionProjector(0.0)


# --- rank-one bounds ----------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def big_basis():
    return build_basis(2001)


def test_eta():
    eta = eta_profile()
    assert eta(0.0) == pytest.approx(1.0)
    assert eta.support == pytest.approx((-math.pi / 2, math.pi / 2))
    assert eta(1.58) == 0.0


def test_isolation(big_basis):
    for n in (1, 2, 7, 150, 1999):
        v = isolation_values(big_basis, n)
        expect = np.zeros(len(big_basis))
        expect[n - 1] = 1.0
        assert np.allclose(v, expect, rtol=0, atol=1e-15)
    with pytest.raises(ProfileError, match="range violation"):
        isolating_profile(big_basis, len(big_basis))


def test_rank_one_p2(big_basis):
    for n in (1, 50, 700):
        e = rank_one_norm(big_basis.mode(n), 2.0)
        assert e.kind == "exact-rank-one" and e.value == pytest.approx(1.0, abs=1e-8)


def test_rank_one_p1_shape(big_basis):
    n = np.array([50, 100, 200, 400, 800, 1600])
    v = rank_one_series(big_basis, 1.0)[n - 1] / big_basis.lambdas[n - 1] ** 0.25
    assert v.max() / v.min() <= 1.2


def test_rank_one_p43_log_band(big_basis):
    n = np.array([100, 200, 400, 800, 1600, 2000])
    lam = big_basis.lambdas[n - 1]
    v = rank_one_series(big_basis, 4.0 / 3.0)[n - 1] / np.log(lam) ** 0.25
    assert v.max() / v.min() <= 1.2


@pytest.mark.parametrize("p", [1.0, 4.0 / 3.0, 1.5, 3.0])
def test_rank_one_duality(big_basis, p):
    m = big_basis.mode(33)
    q = INF if p == 1.0 else p / (p - 1)
    assert rank_one_norm(m, p).value == pytest.approx(rank_one_norm(m, q).value, rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 4.0 / 3.0, 2.0, 4.0])
def test_lower_never_exceeds_upper(big_basis, p):
    for n in (1, 2, 10, 200):
        lo = rank_one_norm(big_basis.mode(n), p)
        hi = rank_one_schur_bound(big_basis.mode(n), p)
        assert lo.value <= hi.value * (1 + 1e-12)


def test_necessary_series_p2(big_basis):
    s = necessary_condition_series(big_basis, 2.0, (20, 200))
    assert len(s) == 181 and all(e.kind == "lower" for e in s)
    assert np.allclose([e.value for e in s], 1.0, atol=1e-8)


def test_necessary_series_p1_slope(big_basis):
    s = necessary_condition_series(big_basis, 1.0, (20, 200))
    lam = [e.details["lambda"] for e in s]
    assert loglog_slope(lam, [e.value for e in s]) == pytest.approx(0.25, abs=0.05)


def test_necessary_series_alpha_decay(big_basis):
    s = necessary_condition_series(big_basis, 2.0, (20, 800), alpha=0.2)
    lam = [e.details["lambda"] for e in s]
    assert loglog_slope(lam, [e.value for e in s]) == pytest.approx(-0.3, abs=0.02)


def test_necessary_series_range(big_basis):
    with pytest.raises(ProfileError, match="range violation"):
        necessary_condition_series(big_basis, 2.0, (0, 10))
    with pytest.raises(ProfileError, match="range violation"):
        necessary_condition_series(big_basis, 2.0, (10, len(big_basis)))


# --- I4res ratio -------------------------------------------------------------------------------------------------

def test_kernel_row_l2_zero():
    z = MultiplierProfile(lambda t: np.zeros_like(t), (0.375, 1.125))
    e = kernel_row_L2_bound(basis_to_cutoff(40.0), z, 16.0, [0.0, 2.0])
    assert e.value == 0.0 and e.kind == "empirical-upper"


def test_kernel_row_l2_single_eigenvalue():
    lam = 32.0
    basis = basis_to_cutoff(40.0)
    n = int(np.searchsorted(basis.lambdas, 0.7 * lam))
    lo = 0.5 * (basis.lambdas[n - 1] + basis.lambdas[n]) / lam
    hi = 0.5 * (basis.lambdas[n] + basis.lambdas[n + 1]) / lam
    F = smooth_bump(lo, hi)
    y = np.array([0.0, 1.5, -6.0])
    e = kernel_row_L2_bound(basis, F, lam, y)
    phi_y = mode_matrix(basis, y, np.array([n]))[0]
    expect = (F(basis.lambdas[n] / lam) * phi_y) ** 2
    assert e.details["sup_l2"] == pytest.approx(expect.max(), rel=1e-6)


def test_kernel_row_l2_matches_parseval():
    lam = 32.0
    basis = basis_to_cutoff(40.0)
    F = smooth_bump(0.375, 1.125)
    y = np.linspace(-8, 8, 9)
    e = kernel_row_L2_bound(basis, F, lam, y)
    ref = kernel_row_parseval(basis, F.scaled(lam), y).max()
    assert e.details["sup_l2"] == pytest.approx(ref, rel=1e-6)


def test_kernel_row_l2_errors():
    basis = basis_to_cutoff(40.0)
    with pytest.raises(ProfileError, match="support violation"):
        kernel_row_L2_bound(basis, smooth_bump(0.3, 1.0), 16.0, [0.0])
    with pytest.raises(ProfileError):
        kernel_row_L2_bound(basis, smooth_bump(0.4, 1.0), 16.0, [5.0])
    with pytest.raises(MultiplierError, match="basis cutoff too small"):
        kernel_row_L2_bound(basis, smooth_bump(0.4, 1.0), 64.0, [0.0])


def test_kernel_row_l2_ratio_flat():
    F = smooth_bump(0.375, 1.125)
    lams = (16.0, 32.0, 64.0)
    r = [kernel_row_L2_bound(basis_to_cutoff(1.2 * l), F, l, np.linspace(-l / 4, l / 4, 33)).value for l in lams]
    assert loglog_slope(lams, r) <= 0.05


# --- scan ---------------------------------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def scan_points(basis160):
    inv = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0]
    alphas = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4]
    return {(p.inv_p, p.alpha): p for p in profile_scan(basis160, inv, alphas)}


def test_scan_examples(scan_points):
    assert scan_points[(0.5, 0.1)].classification == "convergent"
    assert scan_points[(1.0, 0.05)].classification == "divergent"
    assert scan_points[(1.0, 0.25)].classification == "convergent"


def test_scan_threshold_invariant(scan_points):
    for (inv, a), pt in scan_points.items():
        crit = alpha_critical(INF if inv == 0 else 1 / inv)
        if a > crit + 0.1:
            assert pt.fitted_slope <= 0.01
        if crit > 0.1 and a < crit - 0.1:
            assert pt.fitted_slope >= 0.02


def test_scan_symmetry(scan_points):
    # p and p' give the same rank-one norms
    for inv, dual in ((0.0, 1.0), (0.25, 0.75), (0.1, 0.9)):
        for a in (0.0, 0.1, 0.3):
            assert scan_points[(inv, a)].fitted_slope == pytest.approx(scan_points[(dual, a)].fitted_slope, abs=1e-9)


def test_scan_threads_deterministic(basis160):
    a = scan_to_csv(profile_scan(basis160, [0.0, 0.5, 0.75, 1.0], [0.0, 0.1], threads=1))
    b = scan_to_csv(profile_scan(basis160, [0.0, 0.5, 0.75, 1.0], [0.0, 0.1], threads=4))
    assert a == b


def test_scan_cutoff_error(basis160):
    with pytest.raises(MultiplierError, match="basis cutoff too small"):
        profile_scan(basis160, [1.0], [0.0], [8.0, 16.0, 400.0])


def test_scan_outputs(basis160):
    pts = profile_scan(basis160, [1.0, 0.5], [0.05])
    csv_text = scan_to_csv(pts)
    assert csv_text.splitlines()[0] == "inv_p,alpha,slope,classification"
    reg = region_csv(pts).splitlines()
    assert reg[0] == "inv_p,alpha,alpha_critical,region,classification"
    assert reg[1].endswith(",C,divergent") and reg[2].endswith(",A,convergent")


def test_riesz_l1_upper_proxy():
    basis = basis_to_cutoff(40.0)
    grid = Grid(-60.0, 60.0, 12001)
    ys = np.linspace(-5, 5, 5)
    small = riesz_l1_upper_proxy(basis, 1.0, 10.0, ys, grid)
    assert small.kind == "empirical-upper" and small.value >= 1.0 - 1e-3
