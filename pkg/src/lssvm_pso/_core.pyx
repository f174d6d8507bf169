# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Gram assembly and windowed indicators.

Same signatures and conventions as ``_fallback``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, tanh, pow

cnp.import_array()

cdef enum:
    LINEAR = 0
    POLYNOMIAL = 1
    RBF = 2
    MLP = 3


cdef inline double _pair(const double[:, ::1] A, Py_ssize_t i,
                         const double[:, ::1] B, Py_ssize_t j,
                         Py_ssize_t p, int kind, double p1, double p2) nogil:
    cdef Py_ssize_t k
    cdef double acc = 0.0, d
    if kind == RBF:
        for k in range(p):
            d = A[i, k] - B[j, k]
            acc += d * d
        return exp(-acc / (p1 * p1))
    for k in range(p):
        acc += A[i, k] * B[j, k]
    if kind == LINEAR:
        return acc
    if kind == POLYNOMIAL:
        return pow(1.0 + acc / p2, p1)
    return tanh(p1 * acc + p2)


def gram_sym(X, int kind, double p1=0.0, double p2=0.0):
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown kernel code {kind}")
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], p = Xv.shape[1], i, j
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    cdef double v
    with nogil:
        for i in range(n):
            for j in range(i, n):
                v = _pair(Xv, i, Xv, j, p, kind, p1, p2)
                K[i, j] = v
                K[j, i] = v
    return out


def gram_cross(Q, X, int kind, double p1=0.0, double p2=0.0):
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown kernel code {kind}")
    cdef const double[:, ::1] Qv = np.ascontiguousarray(Q, dtype=np.float64)
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t m = Qv.shape[0], n = Xv.shape[0], p = Xv.shape[1], i, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] K = out
    with nogil:
        for i in range(m):
            for j in range(n):
                K[i, j] = _pair(Qv, i, Xv, j, p, kind, p1, p2)
    return out


def ema(values, double alpha):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], t
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if alpha == 1.0:
        return np.array(v, dtype=np.float64)
    cdef double acc = v[0]
    o[0] = acc
    with nogil:
        for t in range(1, n):
            acc += alpha * (v[t] - acc)
            o[t] = acc
    return out


cdef inline double _ratio_index(double up, double down) nogil:
    if down > 0:
        return 100.0 - 100.0 / (1.0 + up / down)
    if up > 0:
        return 100.0
    return 50.0


def rsi(closes, Py_ssize_t period):
    cdef const double[::1] c = np.ascontiguousarray(closes, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], t, i
    out = np.full(n, np.nan)
    cdef double[::1] o = out
    cdef double up, down, d
    with nogil:
        for t in range(period, n):
            up = 0.0
            down = 0.0
            for i in range(t - period + 1, t + 1):
                d = c[i] - c[i - 1]
                if d > 0:
                    up += d
                elif d < 0:
                    down -= d
            o[t] = _ratio_index(up / period, down / period)
    return out


def mfi(typical, volume, Py_ssize_t period):
    cdef const double[::1] tp = np.ascontiguousarray(typical, dtype=np.float64)
    cdef const double[::1] vol = np.ascontiguousarray(volume, dtype=np.float64)
    cdef Py_ssize_t n = tp.shape[0], t, i
    out = np.full(n, np.nan)
    cdef double[::1] o = out
    cdef double pos, neg, vs
    for t in range(period, n):
        pos = 0.0
        neg = 0.0
        vs = 0.0
        for i in range(t - period + 1, t + 1):
            vs += vol[i]
            if tp[i] > tp[i - 1]:
                pos += tp[i] * vol[i]
            elif tp[i] < tp[i - 1]:
                neg += tp[i] * vol[i]
        if vs == 0:
            return out, t
        o[t] = _ratio_index(pos, neg)
    return out, -1


def stoch_k(high, low, close, Py_ssize_t period):
    cdef const double[::1] h = np.ascontiguousarray(high, dtype=np.float64)
    cdef const double[::1] l = np.ascontiguousarray(low, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(close, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], t, i
    out = np.full(n, np.nan)
    cdef double[::1] o = out
    cdef double hh, ll
    with nogil:
        for t in range(period - 1, n):
            hh = h[t]
            ll = l[t]
            for i in range(t - period + 1, t):
                if h[i] > hh:
                    hh = h[i]
                if l[i] < ll:
                    ll = l[i]
            if hh > ll:
                o[t] = 100.0 * (c[t] - ll) / (hh - ll)
            else:
                o[t] = 50.0
    return out
