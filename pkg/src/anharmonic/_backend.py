"""Select the compiled Airy kernels when importable, else the numpy fallback.

Set ``ANHARMONIC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _airy_py
from . import _airy_tables as _t

BACKEND = "python"
_c = None

if os.environ.get("ANHARMONIC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _airy_c as _c  # type: ignore[attr-defined]
    except ImportError:
        _c = None

if _c is not None:
    _c.init_tables(
        _t.TAYLOR, _t.U_ALL, _t.V_ALL, _t.U_EVEN, _t.U_ODD, _t.V_EVEN, _t.V_ODD,
        _t.ANCHOR_LO, _t.ANCHOR_STEP, _t.ASYMPTOTIC_CUT,
        _t.TWO_THIRDS_HI, _t.TWO_THIRDS_LO, _t.PI_4_HI, _t.PI_4_LO, _t.INV_SQRT_PI,
    )
    BACKEND = "cython"


def _c_airy_arrays(x):
    x = np.asarray(x, dtype=float)
    flat = np.ascontiguousarray(x.ravel())
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    _c.airy_fill(flat, ai, aip)
    return ai.reshape(x.shape), aip.reshape(x.shape)


def _c_weighted_rows(x, mu, coef):
    x = np.ascontiguousarray(x, dtype=float)
    out = np.empty(x.size)
    _c.weighted_rows(x, np.ascontiguousarray(mu, dtype=float),
                     np.ascontiguousarray(coef, dtype=float), out)
    return out


if BACKEND == "cython":
    airy_arrays = _c_airy_arrays
    airy_weighted_rows = _c_weighted_rows
else:
    airy_arrays = _airy_py.airy_arrays
    airy_weighted_rows = _airy_py.airy_weighted_rows

python_airy_arrays = _airy_py.airy_arrays
python_weighted_rows = _airy_py.airy_weighted_rows
