import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anharmonic.numerics import (
    INF,
    Grid,
    GridFunction,
    NumericsError,
    QuadratureRule,
    conjugate_exponent,
    envelope_cut,
    inner_product,
    integrate,
    lp_norm,
    oscillatory_edges,
    panel_nodes_weights,
)


def test_grid_invariants():
    g = Grid(-1.0, 3.0, 5)
    assert g.step == 1.0
    assert np.array_equal(g.nodes(), [-1, 0, 1, 2, 3])
    with pytest.raises(NumericsError):
        Grid(1.0, 1.0, 3)
    with pytest.raises(NumericsError):
        Grid(0.0, 1.0, 1)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8, 101, 1000])
def test_simpson_weights_integrate_cubics(n):
    g = Grid(0.0, 2.0, n)
    x = g.nodes()
    exact = 4.0 if n > 3 else None
    if exact is not None:
        assert np.dot(g.weights(), x**3) == pytest.approx(exact, rel=1e-13)
    assert np.dot(g.weights(), np.ones(n)) == pytest.approx(2.0, rel=1e-14)


def test_grid_parse():
    assert Grid.parse("-2:2:9") == Grid(-2.0, 2.0, 9)
    with pytest.raises(NumericsError):
        Grid.parse("1:2")


def test_integrate_examples():
    rule = QuadratureRule("composite-gauss-legendre", 8, 16)
    assert integrate(lambda x: np.ones_like(x), 0.0, 1.0, rule) == pytest.approx(1.0, abs=1e-15)
    assert integrate(lambda x: x**3, -1.0, 1.0, rule) == pytest.approx(0.0, abs=1e-15)
    rule = QuadratureRule("composite-gauss-legendre", 64, 16)
    assert integrate(lambda x: np.cos(40 * x), 0.0, math.pi, rule) == pytest.approx(math.sin(40 * math.pi) / 40, abs=1e-13)


def test_integrate_non_finite():
    with pytest.raises(NumericsError, match="non-finite integrand"):
        integrate(lambda x: np.where(x > 0.5, np.inf, x), 0.0, 1.0, QuadratureRule("trapezoid", 4, 2))


def test_gauss_legendre_degree_exactness():
    x, w = panel_nodes_weights(np.array([0.0, 0.5, 2.0]), 16)
    for deg in (0, 7, 31):
        assert np.dot(w, x**deg) == pytest.approx(2.0 ** (deg + 1) / (deg + 1), rel=1e-13)


def test_self_convergence_on_doubling():
    f = lambda x: np.exp(-x) * np.sin(5 * x)
    a = integrate(f, 0.0, 3.0, QuadratureRule("composite-gauss-legendre", 4, 16))
    b = integrate(f, 0.0, 3.0, QuadratureRule("composite-gauss-legendre", 8, 16))
    assert abs(a - b) < 1e-13


def test_oscillatory_edges_quarter_wavelength():
    edges = oscillatory_edges(0.0, 100.0, lambda t: math.sqrt(t + 1.0))
    widths = np.diff(edges)
    freq = np.sqrt(edges[1:] + 1.0)
    assert np.all(widths <= 0.25 * 2 * math.pi / freq + 1e-12)
    assert edges[0] == 0.0 and edges[-1] == 100.0


def test_lp_norm_examples():
    g = Grid(0.0, 1.0, 11)
    assert lp_norm(GridFunction(g, np.ones(11)), 2) == pytest.approx(1.0, rel=1e-14)
    ramp = GridFunction(g, g.nodes() * 3)
    assert lp_norm(ramp, INF) == 3.0
    gg = Grid(-8.0, 8.0, 1601)
    gauss = GridFunction.from_callable(gg, lambda x: np.exp(-x * x))
    assert lp_norm(gauss, 2) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-12)
    with pytest.raises(NumericsError, match="invalid exponent"):
        lp_norm(gauss, 0.5)


def test_inner_product_examples():
    g = Grid(-math.pi, math.pi, 2001)
    s = GridFunction.from_callable(g, np.sin)
    c = GridFunction.from_callable(g, np.cos)
    assert abs(inner_product(s, c)) < 1e-14
    u = Grid(0.0, 1.0, 101)
    x = GridFunction.from_callable(u, lambda t: t)
    assert inner_product(x, x) == pytest.approx(1.0 / 3.0, rel=1e-14)
    gg = Grid(-10.0, 10.0, 2001)
    n = GridFunction.from_callable(gg, lambda t: np.pi**-0.25 * np.exp(-t * t / 2))
    assert inner_product(n, n) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(NumericsError, match="incompatible grids"):
        inner_product(x, n)


def test_conjugate_exponent():
    assert conjugate_exponent(1.0) == INF
    assert conjugate_exponent(INF) == 1.0
    assert conjugate_exponent(4.0 / 3.0) == pytest.approx(4.0)


def test_gridfunction_csv_roundtrip():
    g = Grid(-1.0, 1.0, 7)
    f = GridFunction(g, np.exp(1j * g.nodes()) / 3)
    text = f.to_csv()
    assert text.splitlines()[0] == "x,re,im"
    back = GridFunction.from_csv(text)
    assert back.grid == g and np.array_equal(back.values, f.values)
    with pytest.raises(NumericsError):
        GridFunction(g, np.full(7, np.nan))


def test_envelope_cut_gaussian():
    cut = envelope_cut(lambda u: -u * u, 0.0, drop=1e-16)
    assert cut == pytest.approx(math.sqrt(16 * math.log(10)), rel=1e-10)


_coefs = st.lists(st.floats(-3, 3), min_size=4, max_size=4)


@given(_coefs, _coefs, st.floats(-5, 5), st.floats(-5, 5))
def test_integrate_linear(cf, cg, a, b):
    f = lambda x: cf[0] + cf[1] * np.sin(cf[2] * x) + cf[3] * x**2
    g = lambda x: cg[0] * np.exp(-x * x) + cg[1] * np.cos(cg[2] * x) + cg[3] * x
    rule = QuadratureRule("composite-gauss-legendre", 8, 16)
    lhs = integrate(lambda x: a * f(x) + b * g(x), -2.0, 2.0, rule)
    rhs = a * integrate(f, -2.0, 2.0, rule) + b * integrate(g, -2.0, 2.0, rule)
    scale = 1.0 + abs(integrate(lambda x: np.abs(f(x)) + np.abs(g(x)), -2.0, 2.0, rule))
    assert abs(lhs - rhs) <= 1e-12 * (abs(a) + abs(b) + 1.0) * scale


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 2.0, 4.0]))
def test_lp_triangle_inequality(seed, p):
    rng = np.random.default_rng(seed)
    g = Grid(0.0, 1.0, 65)
    f = GridFunction(g, rng.normal(size=65))
    h = GridFunction(g, rng.normal(size=65))
    assert lp_norm(f + h, p) <= lp_norm(f, p) + lp_norm(h, p) + 1e-12


@given(st.integers(0, 2**32 - 1))
def test_inner_product_self_real_nonnegative(seed):
    rng = np.random.default_rng(seed)
    g = Grid(0.0, 1.0, 33)
    f = GridFunction(g, rng.normal(size=33) + 1j * rng.normal(size=33))
    v = inner_product(f, f)
    assert abs(v.imag) <= 1e-14 * abs(v.real) and v.real >= 0
