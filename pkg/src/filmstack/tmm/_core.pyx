# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled TMM kernel. Mirrors the signatures and math of ``_pure``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex ccos(double complex)
    double complex csin(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

from libc.math cimport exp as c_exp, log as c_log, pi as c_pi

BACKEND_NAME = "compiled"

cdef double RESCALE_AT = 1e150
cdef double DENOM_FLOOR = 1e-300


cdef inline double _clip01(double x) nogil:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


cdef void _coeffs_one(const long long* mats, const double* d, Py_ssize_t n_layers,
                      const double complex* nk, const double complex* nsub,
                      const double* wl, Py_ssize_t n_wl, Py_ssize_t nk_stride,
                      double* rf, double* tf, double* rb, double* tb) nogil:
    cdef Py_ssize_t w, li
    cdef double complex m11, m12, m21, m22, t11, t12, t21, t22
    cdef double complex n, delta, c, s, a12, a21
    cdef double complex af, bf, df, r_f, ab, bb, db, r_b, ns
    cdef double log_scale, mag, m, damp
    for w in range(n_wl):
        m11 = 1.0
        m12 = 0.0
        m21 = 0.0
        m22 = 1.0
        log_scale = 0.0
        for li in range(n_layers):
            # conjugate (n - ik) representation; see _pure._stack_product
            n = conj(nk[mats[li] * nk_stride + w])
            delta = (2.0 * c_pi * d[li] / wl[w]) * n
            c = ccos(delta)
            s = csin(delta)
            a12 = 1j * s / n
            a21 = 1j * n * s
            t11 = m11 * c + m12 * a21
            t12 = m11 * a12 + m12 * c
            t21 = m21 * c + m22 * a21
            t22 = m21 * a12 + m22 * c
            m11 = t11
            m12 = t12
            m21 = t21
            m22 = t22
            mag = cabs(m11)
            m = cabs(m12)
            if m > mag:
                mag = m
            m = cabs(m21)
            if m > mag:
                mag = m
            m = cabs(m22)
            if m > mag:
                mag = m
            if mag > RESCALE_AT:
                m11 = m11 / mag
                m12 = m12 / mag
                m21 = m21 / mag
                m22 = m22 / mag
                log_scale += c_log(mag)
        ns = conj(nsub[w])
        damp = c_exp(-2.0 * log_scale)
        af = m11 + m12 * ns
        bf = m21 + m22 * ns
        df = af + bf
        r_f = (af - bf) / df
        rf[w] = _clip01(cabs(r_f) * cabs(r_f))
        tf[w] = _clip01(creal(ns) * cabs(2.0 / df) * cabs(2.0 / df) * damp)
        ab = m22 + m12
        bb = m21 + m11
        db = ns * ab + bb
        r_b = (ns * ab - bb) / db
        rb[w] = _clip01(cabs(r_b) * cabs(r_b))
        tb[w] = _clip01(cabs(2.0 * ns / db) * cabs(2.0 * ns / db) / creal(ns) * damp)


cdef void _simulate_one(const long long* mats, const double* d, Py_ssize_t n_layers,
                        const double complex* nk, const double complex* nsub,
                        const double* wl, Py_ssize_t n_wl, Py_ssize_t nk_stride,
                        double sub_nm, double* r_out, double* t_out,
                        double* rf, double* tf, double* rb, double* tb) nogil:
    cdef Py_ssize_t w
    cdef double complex ns, r0
    cdef double tau, rb0, tb0, denom
    _coeffs_one(mats, d, n_layers, nk, nsub, wl, n_wl, nk_stride, rf, tf, rb, tb)
    for w in range(n_wl):
        ns = nsub[w]
        tau = c_exp(-4.0 * c_pi * cimag(ns) * sub_nm / wl[w])
        r0 = (ns - 1.0) / (ns + 1.0)
        rb0 = cabs(r0) * cabs(r0)
        tb0 = cabs(2.0 * ns / (ns + 1.0)) * cabs(2.0 * ns / (ns + 1.0)) / creal(ns)
        denom = 1.0 - rb[w] * rb0 * tau * tau
        if denom < DENOM_FLOOR:
            denom = DENOM_FLOOR
        t_out[w] = _clip01(tf[w] * tau * tb0 / denom)
        r_out[w] = _clip01(rf[w] + tf[w] * tb[w] * rb0 * tau * tau / denom)


def stack_coeffs(cnp.ndarray[cnp.int64_t, ndim=1] mats,
                 cnp.ndarray[cnp.float64_t, ndim=1] d,
                 cnp.ndarray[cnp.complex128_t, ndim=2] nk,
                 cnp.ndarray[cnp.complex128_t, ndim=1] nsub,
                 cnp.ndarray[cnp.float64_t, ndim=1] wl):
    cdef Py_ssize_t n_wl = wl.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rf = np.empty(n_wl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tf = np.empty(n_wl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rb = np.empty(n_wl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tb = np.empty(n_wl)
    _coeffs_one(<const long long*> mats.data, <const double*> d.data, mats.shape[0],
                <const double complex*> nk.data, <const double complex*> nsub.data,
                <const double*> wl.data, n_wl, nk.shape[1],
                <double*> rf.data, <double*> tf.data, <double*> rb.data, <double*> tb.data)
    return rf, tf, rb, tb


def simulate_rt(cnp.ndarray[cnp.int64_t, ndim=1] mats,
                cnp.ndarray[cnp.float64_t, ndim=1] d,
                cnp.ndarray[cnp.complex128_t, ndim=2] nk,
                cnp.ndarray[cnp.complex128_t, ndim=1] nsub,
                cnp.ndarray[cnp.float64_t, ndim=1] wl,
                double sub_nm):
    cdef Py_ssize_t n_wl = wl.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = np.empty(n_wl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.empty(n_wl)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(4 * n_wl)
    _simulate_one(<const long long*> mats.data, <const double*> d.data, mats.shape[0],
                  <const double complex*> nk.data, <const double complex*> nsub.data,
                  <const double*> wl.data, n_wl, nk.shape[1], sub_nm,
                  <double*> r.data, <double*> t.data,
                  <double*> scratch.data, (<double*> scratch.data) + n_wl,
                  (<double*> scratch.data) + 2 * n_wl, (<double*> scratch.data) + 3 * n_wl)
    return r, t


def simulate_rt_batch(cnp.ndarray[cnp.int64_t, ndim=1] mats_flat,
                      cnp.ndarray[cnp.float64_t, ndim=1] d_flat,
                      cnp.ndarray[cnp.int64_t, ndim=1] offsets,
                      cnp.ndarray[cnp.complex128_t, ndim=2] nk,
                      cnp.ndarray[cnp.complex128_t, ndim=1] nsub,
                      cnp.ndarray[cnp.float64_t, ndim=1] wl,
                      double sub_nm):
    cdef Py_ssize_t n_designs = offsets.shape[0] - 1
    cdef Py_ssize_t n_wl = wl.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r = np.empty((n_designs, n_wl))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t = np.empty((n_designs, n_wl))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(4 * n_wl)
    cdef Py_ssize_t i, lo, hi
    cdef const long long* mp = <const long long*> mats_flat.data
    cdef const double* dp = <const double*> d_flat.data
    with nogil:
        for i in range(n_designs):
            lo = offsets[i]
            hi = offsets[i + 1]
            _simulate_one(mp + lo, dp + lo, hi - lo,
                          <const double complex*> nk.data, <const double complex*> nsub.data,
                          <const double*> wl.data, n_wl, nk.shape[1], sub_nm,
                          (<double*> r.data) + i * n_wl, (<double*> t.data) + i * n_wl,
                          <double*> scratch.data, (<double*> scratch.data) + n_wl,
                          (<double*> scratch.data) + 2 * n_wl, (<double*> scratch.data) + 3 * n_wl)
    return r, t
