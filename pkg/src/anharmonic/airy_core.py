"""Ai and Ai' on the real line, their negative zeros, and the oscillatory split of Ai.

Evaluation uses Taylor series about tabulated anchors for |x| < 10 and the
large-argument expansions beyond, with the oscillatory phase carried in
double-double so accuracy does not degrade with |x|.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._airy_tables import ASYMPTOTIC_CUT

MAX_ABS_ARG = 1.0e4
MAX_NEWTON_ITER = 100

# static per-regime bounds, validated against the extended-precision oracle
_REL_ERR_TAYLOR = 1.0e-13
_REL_ERR_ASYMPTOTIC = 1.0e-13

#: max over x <= -1 of |theta(x)| (1 + |x|)^{1/4}, fitted once (0.3326 near x = -1.6)
THETA_BOUND = 0.34


class AiryError(ValueError):
    pass


@dataclass(frozen=True)
class AiryEval:
    x: float
    ai: float
    ai_prime: float
    est_rel_err: float


@dataclass(frozen=True)
class AsymptoticPieces:
    x: float
    zeta: float
    theta: complex


@dataclass(frozen=True, eq=False)
class ZeroList:
    kind: str
    zeros: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("ai", "ai_prime"):
            raise AiryError(f"unknown zero kind {self.kind!r}")
        z = np.array(self.zeros, dtype=float)
        z.flags.writeable = False
        object.__setattr__(self, "zeros", z)

    def __len__(self):
        return len(self.zeros)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,zero\n")
        for k, z in enumerate(self.zeros, start=1):
            buf.write(f"{k},{z:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str) -> "ZeroList":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(kind, [float(r["zero"]) for r in rows])


def _check_range(x: np.ndarray) -> None:
    if not np.all(np.abs(x) <= MAX_ABS_ARG):
        raise AiryError("argument out of range")


def airy(x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (Ai(x), Ai'(x))."""
    x = np.asarray(x, dtype=float)
    _check_range(x)
    return _backend.airy_arrays(x)


def airy_ai(x) -> np.ndarray:
    return airy(x)[0]


def ai(x: float) -> AiryEval:
    x = float(x)
    if not math.isfinite(x) or abs(x) > MAX_ABS_ARG:
        raise AiryError("argument out of range")
    a, b = _backend.airy_arrays(np.array([x]))
    err = _REL_ERR_TAYLOR if abs(x) < ASYMPTOTIC_CUT else _REL_ERR_ASYMPTOTIC
    return AiryEval(x, float(a[0]), float(b[0]), err)


def asymptotic_pieces(x: float) -> AsymptoticPieces:
    """Split Ai(x) = exp(i zeta) theta + exp(-i zeta) conj(theta) for x < -1.

    theta = exp(-i zeta) (Ai + i Ai'/sqrt|x|) / 2 makes the split exact while
    keeping theta slowly varying: its leading term is
    exp(-i pi/4) |x|^{-1/4} / (2 sqrt(pi)).
    """
    x = float(x)
    if not x < -1.0:
        raise AiryError("decomposition domain")
    r = ai(x)
    z = -x
    zeta = 2.0 * z * math.sqrt(z) / 3.0
    theta = 0.5 * complex(math.cos(zeta), -math.sin(zeta)) * complex(r.ai, r.ai_prime / math.sqrt(z))
    return AsymptoticPieces(x, zeta, theta)


def reconstruct(pieces: AsymptoticPieces) -> float:
    w = complex(math.cos(pieces.zeta), math.sin(pieces.zeta)) * pieces.theta
    return 2.0 * w.real


# --- zeros -------------------------------------------------------------------

def _ai_guess(k: np.ndarray) -> np.ndarray:
    t = 3.0 * math.pi * (4.0 * k - 1.0) / 8.0
    t2 = t**-2
    return -(t ** (2.0 / 3.0)) * (1.0 + t2 * (5.0 / 48.0 - t2 * (5.0 / 36.0)))


def _ai_prime_guess(k: np.ndarray) -> np.ndarray:
    t = 3.0 * math.pi * (4.0 * k - 3.0) / 8.0
    t2 = t**-2
    return -(t ** (2.0 / 3.0)) * (1.0 - t2 * (7.0 / 48.0 - t2 * (35.0 / 288.0)))


def _refine(kind: str, count: int) -> np.ndarray:
    if int(count) != count or count < 1:
        raise AiryError("count must be a positive integer")
    k = np.arange(1, count + 2, dtype=float)
    g = _ai_guess(k) if kind == "ai" else _ai_prime_guess(k)
    g_prev = np.concatenate([[0.0], g[:-1]])
    # bracket each zero between midpoints of consecutive guesses
    lo = 0.5 * (g[:-1] + g[1:])
    hi = 0.5 * (g_prev[:-1] + g[:-1])
    hi[0] = 0.0
    x = g[:-1].copy()
    _check_range(lo)

    def f_and_df(x):
        a, b = _backend.airy_arrays(x)
        return (a, b) if kind == "ai" else (b, x * a)

    f_lo, _ = f_and_df(lo)
    f_hi, _ = f_and_df(hi)
    if np.any(np.sign(f_lo) == np.sign(f_hi)):
        raise AiryError("zero refinement failed")
    active = np.ones(count, dtype=bool)
    for _ in range(MAX_NEWTON_ITER):
        f, df = f_and_df(x)
        same = np.sign(f) == np.sign(f_lo)
        lo = np.where(same, x, lo)
        f_lo = np.where(same, f, f_lo)
        hi = np.where(same, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - f / df
        bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        step = np.abs(xn - x)
        done = (f == 0.0) | (step <= 4.0 * np.spacing(np.abs(x))) | (hi - lo <= 4.0 * np.spacing(np.abs(x)))
        x = np.where(active, xn, x)
        active &= ~done
        if not active.any():
            break
    else:
        raise AiryError("zero refinement failed")
    # take the neighbouring double with the smallest residual
    cands = np.stack([np.nextafter(x, -np.inf), x, np.nextafter(x, np.inf)])
    fc = np.abs(f_and_df(cands.ravel())[0]).reshape(cands.shape)
    return cands[np.argmin(fc, axis=0), np.arange(count)]


def ai_zeros(count: int) -> ZeroList:
    return ZeroList("ai", _refine("ai", count))


def ai_prime_zeros(count: int) -> ZeroList:
    return ZeroList("ai_prime", _refine("ai_prime", count))
