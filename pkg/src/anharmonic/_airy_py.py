"""Pure numpy Airy kernels; the fallback when the compiled extension is absent."""

from __future__ import annotations

import numpy as np

from ._airy_tables import (
    ASYMPTOTIC_CUT,
    ANCHOR_LO,
    ANCHOR_STEP,
    ANCHOR_COUNT,
    TAYLOR,
    U_EVEN,
    U_ODD,
    U_ALL,
    V_EVEN,
    V_ODD,
    V_ALL,
    TWO_THIRDS_HI,
    TWO_THIRDS_LO,
    PI_4_HI,
    PI_4_LO,
    INV_SQRT_PI,
)

_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def zeta_dd(z):
    """2 z^{3/2} / 3 as an unevaluated double-double sum (hi, lo), z > 0."""
    s = np.sqrt(z)
    p, e = _two_prod(s, s)
    s_lo = ((z - p) - e) / (2.0 * s)
    q, e = _two_prod(z, s)
    lo = e + z * s_lo
    r, e = _two_prod(q, TWO_THIRDS_HI)
    lo = e + q * TWO_THIRDS_LO + lo * TWO_THIRDS_HI
    return _two_sum(r, lo)


def _horner(coef, t):
    acc = np.zeros_like(t)
    for c in coef[::-1]:
        acc = acc * t + c
    return acc


def _taylor(x, ai, aip):
    k = np.rint((x - ANCHOR_LO) / ANCHOR_STEP).astype(np.intp)
    np.clip(k, 0, ANCHOR_COUNT - 1, out=k)
    h = x - (ANCHOR_LO + k * ANCHOR_STEP)
    c = TAYLOR[k]  # (n, terms)
    nt = c.shape[1]
    val = np.zeros_like(h)
    der = np.zeros_like(h)
    for j in range(nt - 1, 0, -1):
        val = val * h + c[:, j]
        der = der * h + j * c[:, j]
    ai[:] = val * h + c[:, 0]
    aip[:] = der


def _positive(z, ai, aip):
    hi, lo = zeta_dd(z)
    t = 1.0 / hi
    e = np.exp(-hi) * (1.0 - lo)
    q = np.sqrt(np.sqrt(z))
    su = _horner(U_ALL, -t)
    sv = _horner(V_ALL, -t)
    ai[:] = 0.5 * INV_SQRT_PI * e / q * su
    aip[:] = -0.5 * INV_SQRT_PI * e * q * sv


def _negative(z, ai, aip):
    hi, lo = zeta_dd(z)
    t = 1.0 / hi
    t2 = -t * t
    ph, pl = _two_sum(hi, -PI_4_HI)
    pl = pl + lo - PI_4_LO
    sh, ch = np.sin(ph), np.cos(ph)
    s = sh + pl * ch
    c = ch - pl * sh
    q = np.sqrt(np.sqrt(z))
    pu = _horner(U_EVEN, t2)
    qu = t * _horner(U_ODD, t2)
    pv = _horner(V_EVEN, t2)
    qv = t * _horner(V_ODD, t2)
    ai[:] = INV_SQRT_PI / q * (c * pu + s * qu)
    aip[:] = INV_SQRT_PI * q * (s * pv - c * qv)


def airy_arrays(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    ai = np.empty_like(x)
    aip = np.empty_like(x)
    mid = np.abs(x) < ASYMPTOTIC_CUT
    pos = x >= ASYMPTOTIC_CUT
    neg = x <= -ASYMPTOTIC_CUT
    for mask, fn, arg in ((mid, _taylor, x), (pos, _positive, x), (neg, _negative, -x)):
        if mask.any():
            a = np.empty(mask.sum())
            b = np.empty(mask.sum())
            fn(arg[mask], a, b)
            ai[mask] = a
            aip[mask] = b
    return ai.reshape(shape), aip.reshape(shape)


def airy_weighted_rows(x: np.ndarray, mu: np.ndarray, coef: np.ndarray,
                       chunk: int = 1 << 20) -> np.ndarray:
    """out[i] = sum_j coef[j] * Ai(x[i] - mu[j])."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    coef = np.asarray(coef, dtype=float)
    out = np.empty(x.size)
    rows = max(1, chunk // max(mu.size, 1))
    for i0 in range(0, x.size, rows):
        xs = x[i0 : i0 + rows]
        a, _ = airy_arrays(xs[:, None] - mu[None, :])
        out[i0 : i0 + rows] = a @ coef
    return out
