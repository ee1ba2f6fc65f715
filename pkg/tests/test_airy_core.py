import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from anharmonic import _backend
from anharmonic.airy_core import (
    THETA_BOUND,
    AiryError,
    ZeroList,
    ai,
    ai_prime_zeros,
    ai_zeros,
    airy,
    asymptotic_pieces,
    reconstruct,
)
from oracle import airy_oracle

BACKENDS = [("python", _backend.python_airy_arrays)]
if _backend.BACKEND == "cython":
    BACKENDS.append(("cython", _backend.airy_arrays))


def _oracle_arrays(x):
    vals = [airy_oracle(float(t)) for t in x]
    return np.array([float(a) for a, _ in vals]), np.array([float(b) for _, b in vals])


@pytest.fixture(scope="module")
def oracle_sample():
    rng = np.random.default_rng(20240611)
    x = np.concatenate([rng.uniform(-60.0, 20.0, 300), [-10.0, -9.999, 10.0, 4.5, 0.0, -4.5]])
    return x, *_oracle_arrays(x)


@pytest.mark.parametrize("name,fn", BACKENDS)
def test_oracle_agreement(name, fn, oracle_sample):
    x, a_ref, b_ref = oracle_sample
    a, b = fn(x)
    assert np.max(np.abs(a - a_ref) / np.maximum(np.abs(a_ref), 1e-300)) <= 1e-11
    assert np.max(np.abs(b - b_ref) / np.maximum(np.abs(b_ref), 1e-300)) <= 1e-11


def test_backends_agree_far_out():
    x = np.linspace(-1e4, 200.0, 5001)
    a_py, b_py = _backend.python_airy_arrays(x)
    a, b = airy(x)
    assert np.allclose(a, a_py, rtol=1e-13, atol=0)
    assert np.allclose(b, b_py, rtol=1e-13, atol=0)


def test_pure_python_switch():
    code = "import anharmonic._backend as b; print(b.BACKEND)"
    env = dict(os.environ, ANHARMONIC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_values_at_zero():
    r = ai(0.0)
    assert r.ai == pytest.approx(0.355028053887817, rel=1e-14)
    assert r.ai_prime == pytest.approx(-0.258819403792807, rel=1e-14)
    assert r.est_rel_err <= 1e-11


def test_decay_shape_at_30():
    r = ai(30.0)
    assert 0 < r.ai < math.exp(-2 * 30**1.5 / 3) * 30**-0.25


def test_range_errors():
    with pytest.raises(AiryError, match="argument out of range"):
        ai(1e4 + 1)
    with pytest.raises(AiryError, match="argument out of range"):
        airy(np.array([0.0, -2e4]))


def test_oscillatory_envelope():
    x = -np.geomspace(10.0, 1e4, 20000)
    a, _ = airy(x)
    assert np.all(np.abs(a) <= 0.6 * np.abs(x) ** -0.25)


def test_ode_residual_second_difference():
    rng = np.random.default_rng(7)
    x = rng.uniform(-60.0, 20.0, 100)
    h = 1e-4
    a0, b0 = airy(x)
    d2 = (airy(x + h)[0] - 2 * a0 + airy(x - h)[0]) / h**2
    bound = 1e-6 * (1 + np.abs(x)) * np.maximum(np.abs(a0), np.abs(b0))
    assert np.all(np.abs(d2 - x * a0) <= bound)


def test_regime_overlap_continuity():
    # the switch between anchored Taylor series and the large-argument expansion
    for c in (-10.0, 10.0):
        x = np.array([np.nextafter(c, -np.inf), c, np.nextafter(c, np.inf)])
        ref = _oracle_arrays(x)
        a, b = airy(x)
        assert np.allclose(a, ref[0], rtol=1e-13) and np.allclose(b, ref[1], rtol=1e-13)


def test_asymptotic_pieces():
    p = asymptotic_pieces(-4.0)
    assert p.zeta == pytest.approx(16.0 / 3.0, rel=1e-15)
    assert asymptotic_pieces(-9.0).zeta == pytest.approx(18.0, rel=1e-15)
    p = asymptotic_pieces(-25.0)
    ref = float(airy_oracle(-25.0)[0])
    assert abs(p.theta) <= THETA_BOUND * 26**-0.25
    assert abs(reconstruct(p) - ref) <= 1e-9 * abs(ref)
    with pytest.raises(AiryError, match="decomposition domain"):
        asymptotic_pieces(-1.0)


@given(st.floats(-1e4, -5.0))
def test_asymptotic_reconstruction(x):
    p = asymptotic_pieces(x)
    a = ai(x)
    scale = math.hypot(a.ai, a.ai_prime / math.sqrt(-x))
    assert abs(reconstruct(p) - a.ai) <= 1e-9 * scale
    assert abs(p.theta) <= THETA_BOUND * (1 - x) ** -0.25


def test_zero_examples():
    assert ai_zeros(1).zeros[0] == pytest.approx(-2.33810741045977, rel=1e-14)
    assert ai_zeros(2).zeros[1] == pytest.approx(-4.08794944413097, rel=1e-14)
    assert ai_prime_zeros(1).zeros[0] == pytest.approx(-1.01879297164747, rel=1e-14)
    assert ai_prime_zeros(3).zeros[2] == pytest.approx(-4.82009921117874, rel=1e-14)


def test_zeros_match_oracle_bisection():
    import mpmath

    z = ai_zeros(3).zeros
    for k, zk in enumerate(z):
        ref = mpmath.findroot(lambda t: airy_oracle(t)[0], float(zk))
        assert float(zk) == pytest.approx(float(ref), rel=1e-15)


def test_zero_residuals_and_interlacing():
    za = ai_zeros(2000).zeros
    zp = ai_prime_zeros(2000).zeros
    a, _ = airy(za[:200])
    _, b = airy(zp[:200])
    assert np.all(np.abs(a) <= 1e-12) and np.all(np.abs(b) <= 1e-12)
    assert np.all(np.diff(za) < 0) and np.all(np.diff(zp) < 0)
    merged = np.empty(4000)
    merged[0::2], merged[1::2] = -zp, -za
    assert np.all(np.diff(merged) > 0)


def test_zero_residual_relative_to_derivative():
    # at large count the absolute residual is limited by rounding of the zero
    za = ai_zeros(10000).zeros
    a, b = airy(za)
    assert np.all(np.abs(a) <= 4 * np.spacing(np.abs(za)) * np.abs(b))


def test_zero_list_csv_and_errors():
    z = ai_zeros(3)
    text = z.to_csv()
    assert text.splitlines()[0] == "index,zero"
    assert np.array_equal(ZeroList.from_csv(text, "ai").zeros, z.zeros)
    with pytest.raises(AiryError):
        ai_zeros(0)
