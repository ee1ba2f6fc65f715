"""Frozen constants shared by both Airy backends."""

from fractions import Fraction
import math

import numpy as np

from ._airy_anchors import ANCHORS, ANCHOR_COUNT, ANCHOR_LO, ANCHOR_STEP

# |x| >= ASYMPTOTIC_CUT uses the large-argument expansions; below, Taylor
# series about the nearest anchor. At |x| = 10 the expansion's terms keep
# shrinking past index 30, with the 30th near 1e-17.
ASYMPTOTIC_CUT = 10.0
ASYMPTOTIC_TERMS = 30
TAYLOR_TERMS = 26

TWO_THIRDS_HI = 2.0 / 3.0
TWO_THIRDS_LO = float(Fraction(2, 3) - Fraction(TWO_THIRDS_HI))
PI_4_HI = math.pi / 4.0
# pi/4 - fl(pi/4) from the 40-digit expansion of pi
PI_4_LO = float(Fraction("0.7853981633974483096156608458198757210492") - Fraction(PI_4_HI))
INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def _asymptotic_coefficients(n):
    u = [Fraction(1)]
    for k in range(1, n):
        u.append(u[-1] * Fraction((6 * k - 5) * (6 * k - 3) * (6 * k - 1), (2 * k - 1) * 216 * k))
    v = [Fraction(1)] + [-Fraction(6 * k + 1, 6 * k - 1) * u[k] for k in range(1, n)]
    return u, v


def _taylor_table():
    # Ai'' = x Ai: a[j+2] = (x0 a[j] + a[j-1]) / ((j+1)(j+2))
    t = np.zeros((ANCHOR_COUNT, TAYLOR_TERMS))
    for k, (a0, a1) in enumerate(ANCHORS):
        x0 = ANCHOR_LO + k * ANCHOR_STEP
        a = [a0, a1, 0.5 * x0 * a0]
        for j in range(1, TAYLOR_TERMS - 2):
            a.append((x0 * a[j] + a[j - 1]) / ((j + 1) * (j + 2)))
        t[k] = a
    t.flags.writeable = False
    return t


_u, _v = _asymptotic_coefficients(ASYMPTOTIC_TERMS)
# alternating signs folded in for the oscillatory side (series in -1/zeta^2)
U_ALL = np.array([float(c) for c in _u])
V_ALL = np.array([float(c) for c in _v])
U_EVEN = U_ALL[0::2].copy()
U_ODD = U_ALL[1::2].copy()
V_EVEN = V_ALL[0::2].copy()
V_ODD = V_ALL[1::2].copy()
TAYLOR = _taylor_table()

for _arr in (U_ALL, V_ALL, U_EVEN, U_ODD, V_EVEN, V_ODD):
    _arr.flags.writeable = False

__all__ = [
    "ANCHOR_COUNT", "ANCHOR_LO", "ANCHOR_STEP", "ASYMPTOTIC_CUT", "ASYMPTOTIC_TERMS",
    "TAYLOR", "TAYLOR_TERMS", "U_ALL", "V_ALL", "U_EVEN", "U_ODD", "V_EVEN", "V_ODD",
    "TWO_THIRDS_HI", "TWO_THIRDS_LO", "PI_4_HI", "PI_4_LO", "INV_SQRT_PI",
]
