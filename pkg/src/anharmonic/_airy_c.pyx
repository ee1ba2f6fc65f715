# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Airy kernels; same algorithm as _airy_py, point by point without temporaries."""

from libc.math cimport sqrt, exp, sin, cos, fma, fabs, floor

import numpy as np

cdef const double[:, ::1] _taylor
cdef const double[::1] _u_all, _v_all, _u_even, _u_odd, _v_even, _v_odd
cdef double _lo, _step, _cut, _tt_hi, _tt_lo, _p4_hi, _p4_lo, _isp
cdef Py_ssize_t _count = 0


def init_tables(taylor, u_all, v_all, u_even, u_odd, v_even, v_odd,
                double anchor_lo, double anchor_step, double cut,
                double tt_hi, double tt_lo, double p4_hi, double p4_lo, double inv_sqrt_pi):
    global _taylor, _u_all, _v_all, _u_even, _u_odd, _v_even, _v_odd
    global _lo, _step, _cut, _tt_hi, _tt_lo, _p4_hi, _p4_lo, _isp, _count
    _taylor = np.ascontiguousarray(taylor, dtype=np.float64)
    _u_all = np.ascontiguousarray(u_all, dtype=np.float64)
    _v_all = np.ascontiguousarray(v_all, dtype=np.float64)
    _u_even = np.ascontiguousarray(u_even, dtype=np.float64)
    _u_odd = np.ascontiguousarray(u_odd, dtype=np.float64)
    _v_even = np.ascontiguousarray(v_even, dtype=np.float64)
    _v_odd = np.ascontiguousarray(v_odd, dtype=np.float64)
    _lo = anchor_lo
    _step = anchor_step
    _cut = cut
    _tt_hi = tt_hi
    _tt_lo = tt_lo
    _p4_hi = p4_hi
    _p4_lo = p4_lo
    _isp = inv_sqrt_pi
    _count = _taylor.shape[0]


cdef inline double _horner(const double[::1] c, double t) noexcept nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(c.shape[0] - 1, -1, -1):
        acc = acc * t + c[j]
    return acc


cdef inline void _zeta(double z, double* hi, double* lo) noexcept nogil:
    cdef double s = sqrt(z)
    cdef double p = s * s
    cdef double e = fma(s, s, -p)
    cdef double s_lo = ((z - p) - e) / (2.0 * s)
    cdef double q = z * s
    cdef double l = fma(z, s, -q) + z * s_lo
    cdef double r = q * _tt_hi
    l = fma(q, _tt_hi, -r) + q * _tt_lo + l * _tt_hi
    hi[0] = r + l
    lo[0] = l - (hi[0] - r)


cdef inline void _eval(double x, double* ai, double* aip) noexcept nogil:
    cdef Py_ssize_t k, j, nt
    cdef double h, val, der, z, hi, lo, t, t2, q, e, ph, pl, bb, sh, ch, s, c
    if fabs(x) < _cut:
        k = <Py_ssize_t>floor((x - _lo) / _step + 0.5)
        if k < 0:
            k = 0
        elif k >= _count:
            k = _count - 1
        h = x - (_lo + k * _step)
        nt = _taylor.shape[1]
        val = 0.0
        der = 0.0
        for j in range(nt - 1, 0, -1):
            val = val * h + _taylor[k, j]
            der = der * h + j * _taylor[k, j]
        ai[0] = val * h + _taylor[k, 0]
        aip[0] = der
    elif x > 0:
        _zeta(x, &hi, &lo)
        t = 1.0 / hi
        e = exp(-hi) * (1.0 - lo)
        q = sqrt(sqrt(x))
        ai[0] = 0.5 * _isp * e / q * _horner(_u_all, -t)
        aip[0] = -0.5 * _isp * e * q * _horner(_v_all, -t)
    else:
        z = -x
        _zeta(z, &hi, &lo)
        t = 1.0 / hi
        t2 = -t * t
        ph = hi - _p4_hi
        bb = ph - hi
        pl = (hi - (ph - bb)) + (-_p4_hi - bb) + lo - _p4_lo
        sh = sin(ph)
        ch = cos(ph)
        s = sh + pl * ch
        c = ch - pl * sh
        q = sqrt(sqrt(z))
        ai[0] = _isp / q * (c * _horner(_u_even, t2) + s * t * _horner(_u_odd, t2))
        aip[0] = _isp * q * (s * _horner(_v_even, t2) - c * t * _horner(_v_odd, t2))


def airy_fill(const double[::1] x, double[::1] ai, double[::1] aip):
    cdef Py_ssize_t i, n = x.shape[0]
    with nogil:
        for i in range(n):
            _eval(x[i], &ai[i], &aip[i])


def weighted_rows(const double[::1] x, const double[::1] mu, const double[::1] coef,
                  double[::1] out):
    """out[i] = sum_j coef[j] * Ai(x[i] - mu[j]), summed in index order."""
    cdef Py_ssize_t i, j, n = x.shape[0], m = mu.shape[0]
    cdef double acc, a, b
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(m):
                if coef[j] != 0.0:
                    _eval(x[i] - mu[j], &a, &b)
                    acc = acc + coef[j] * a
            out[i] = acc
