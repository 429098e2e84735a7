"""Pure-numpy TMM kernel (reference backend).

All functions are vectorized across the wavelength axis and mirror the
signatures of the compiled kernel in ``_core``. The running characteristic
matrix is renormalized whenever its entries grow past ``_RESCALE_AT`` so that
strongly absorbing stacks cannot overflow; the accumulated log-scale re-enters
only the transmittance (reflectance is a scale-free ratio).
"""

from __future__ import annotations

import numpy as np

_RESCALE_AT = 1e150
_DENOM_FLOOR = 1e-300

BACKEND_NAME = "pure"


def _stack_product(mats, d, nk, wl):
    """Product of layer characteristic matrices at every wavelength.

    Works in the conjugate (n - ik) representation internally: that is the
    pairing under which the +i*sin(delta) characteristic matrix makes k >= 0
    absorb. Callers pass n + ik tables; R/T are identical either way.

    Returns (m11, m12, m21, m22, log_scale); true matrix = M * exp(log_scale).
    """
    nk = np.conj(nk)
    w = wl.shape[0]
    m11 = np.ones(w, dtype=np.complex128)
    m12 = np.zeros(w, dtype=np.complex128)
    m21 = np.zeros(w, dtype=np.complex128)
    m22 = np.ones(w, dtype=np.complex128)
    log_scale = np.zeros(w, dtype=np.float64)
    for li in range(mats.shape[0]):
        n = nk[mats[li]]
        delta = (2.0 * np.pi * d[li] / wl) * n
        c = np.cos(delta)
        s = np.sin(delta)
        a12 = 1j * s / n
        a21 = 1j * n * s
        t11 = m11 * c + m12 * a21
        t12 = m11 * a12 + m12 * c
        t21 = m21 * c + m22 * a21
        t22 = m21 * a12 + m22 * c
        m11, m12, m21, m22 = t11, t12, t21, t22
        mag = np.maximum(np.maximum(np.abs(m11), np.abs(m12)),
                         np.maximum(np.abs(m21), np.abs(m22)))
        big = mag > _RESCALE_AT
        if np.any(big):
            scale = np.where(big, mag, 1.0)
            m11 = m11 / scale
            m12 = m12 / scale
            m21 = m21 / scale
            m22 = m22 / scale
            log_scale = log_scale + np.where(big, np.log(mag), 0.0)
    return m11, m12, m21, m22, log_scale


def stack_coeffs(mats, d, nk, nsub, wl):
    """Coherent intensity coefficients of the coating alone.

    Front coefficients are for air-side incidence (air -> layers -> substrate),
    back coefficients for substrate-side incidence on the same coating. The
    back direction reuses the forward matrix product through the reversal
    identity M_rev = [[m22, m12], [m21, m11]].

    Returns (R_front, T_front, R_back, T_back), each shaped like ``wl``.
    """
    m11, m12, m21, m22, log_scale = _stack_product(mats, d, nk, wl)
    damp = np.exp(-2.0 * log_scale)
    ns = np.conj(nsub)  # same representation as the stack product

    a_f = m11 + m12 * ns
    b_f = m21 + m22 * ns
    d_f = a_f + b_f  # entrance admittance 1 (air)
    r_f = (a_f - b_f) / d_f
    rf = np.abs(r_f) ** 2
    tf = np.real(ns) * np.abs(2.0 / d_f) ** 2 * damp

    a_b = m22 + m12  # exit admittance 1 (air)
    b_b = m21 + m11
    d_b = ns * a_b + b_b
    r_b = (ns * a_b - b_b) / d_b
    rb = np.abs(r_b) ** 2
    tb = np.abs(2.0 * ns / d_b) ** 2 / np.real(ns) * damp

    clip = lambda x: np.clip(x, 0.0, 1.0)
    return clip(rf), clip(tf), clip(rb), clip(tb)


def _substrate_back_face(nsub):
    """Intensity coefficients of the bare substrate/air exit interface."""
    r = (nsub - 1.0) / (nsub + 1.0)
    rb0 = np.abs(r) ** 2
    tb0 = np.abs(2.0 * nsub / (nsub + 1.0)) ** 2 / np.real(nsub)
    return rb0, tb0


def _combine_incoherent(rf, tf, rb, tb, nsub, wl, sub_nm):
    tau = np.exp(-4.0 * np.pi * np.imag(nsub) * sub_nm / wl)
    rb0, tb0 = _substrate_back_face(nsub)
    denom = np.maximum(1.0 - rb * rb0 * tau * tau, _DENOM_FLOOR)
    t_tot = tf * tau * tb0 / denom
    r_tot = rf + tf * tb * rb0 * tau * tau / denom
    return np.clip(r_tot, 0.0, 1.0), np.clip(t_tot, 0.0, 1.0)


def simulate_rt(mats, d, nk, nsub, wl, sub_nm):
    """Reflectance and transmittance of coating + incoherent substrate slab."""
    rf, tf, rb, tb = stack_coeffs(mats, d, nk, nsub, wl)
    return _combine_incoherent(rf, tf, rb, tb, nsub, wl, sub_nm)


def simulate_rt_batch(mats_flat, d_flat, offsets, nk, nsub, wl, sub_nm):
    """Batched ``simulate_rt`` over designs packed into flat arrays."""
    n_designs = offsets.shape[0] - 1
    w = wl.shape[0]
    r_out = np.empty((n_designs, w), dtype=np.float64)
    t_out = np.empty((n_designs, w), dtype=np.float64)
    for i in range(n_designs):
        lo, hi = offsets[i], offsets[i + 1]
        r, t = simulate_rt(mats_flat[lo:hi], d_flat[lo:hi], nk, nsub, wl, sub_nm)
        r_out[i] = r
        t_out[i] = t
    return r_out, t_out


def thickness_jacobian_rt(mats, d, nk, nsub, wl, sub_nm):
    """Analytic d(R, T)/d(thickness) via forward accumulation.

    Returns (dR, dT) of shape (n_wavelengths, n_layers). The per-layer matrix
    derivatives share the running product's rescaling factor, so the scale
    cancels in every ratio below exactly as in ``simulate_rt``.
    """
    L = mats.shape[0]
    w = wl.shape[0]
    k_sub = np.imag(nsub)
    nk = np.conj(nk)  # conjugate representation, as in _stack_product
    ns = np.conj(nsub)
    m11 = np.ones(w, dtype=np.complex128)
    m12 = np.zeros(w, dtype=np.complex128)
    m21 = np.zeros(w, dtype=np.complex128)
    m22 = np.ones(w, dtype=np.complex128)
    dm11 = np.zeros((L, w), dtype=np.complex128)
    dm12 = np.zeros((L, w), dtype=np.complex128)
    dm21 = np.zeros((L, w), dtype=np.complex128)
    dm22 = np.zeros((L, w), dtype=np.complex128)
    log_scale = np.zeros(w, dtype=np.float64)

    for j in range(L):
        n = nk[mats[j]]
        phase_rate = 2.0 * np.pi * n / wl
        delta = phase_rate * d[j]
        c = np.cos(delta)
        s = np.sin(delta)
        a12 = 1j * s / n
        a21 = 1j * n * s
        # d(layer matrix)/d(thickness)
        dc = -s * phase_rate
        da12 = 1j * c * phase_rate / n
        da21 = 1j * n * c * phase_rate
        # propagate existing derivatives through layer j (materialize all four
        # products before assigning: the slices alias the operands)
        if j:
            u11, u12 = dm11[:j], dm12[:j]
            u21, u22 = dm21[:j], dm22[:j]
            v11 = u11 * c + u12 * a21
            v12 = u11 * a12 + u12 * c
            v21 = u21 * c + u22 * a21
            v22 = u21 * a12 + u22 * c
            dm11[:j], dm12[:j], dm21[:j], dm22[:j] = v11, v12, v21, v22
        # derivative with respect to layer j's own thickness
        dm11[j] = m11 * dc + m12 * da21
        dm12[j] = m11 * da12 + m12 * dc
        dm21[j] = m21 * dc + m22 * da21
        dm22[j] = m21 * da12 + m22 * dc
        # advance the product
        t11 = m11 * c + m12 * a21
        t12 = m11 * a12 + m12 * c
        t21 = m21 * c + m22 * a21
        t22 = m21 * a12 + m22 * c
        m11, m12, m21, m22 = t11, t12, t21, t22
        mag = np.maximum(np.maximum(np.abs(m11), np.abs(m12)),
                         np.maximum(np.abs(m21), np.abs(m22)))
        big = mag > _RESCALE_AT
        if np.any(big):
            scale = np.where(big, mag, 1.0)
            for arr in (m11, m12, m21, m22):
                arr /= scale
            for arr in (dm11, dm12, dm21, dm22):
                arr /= scale
            log_scale = log_scale + np.where(big, np.log(mag), 0.0)

    damp = np.exp(-2.0 * log_scale)

    a_f = m11 + m12 * ns
    b_f = m21 + m22 * ns
    d_f = a_f + b_f
    n_f = a_f - b_f
    r_f = n_f / d_f
    rf = np.abs(r_f) ** 2
    tf = np.real(ns) * np.abs(2.0 / d_f) ** 2 * damp

    a_b = m22 + m12
    b_b = m21 + m11
    d_b = ns * a_b + b_b
    n_b = ns * a_b - b_b
    r_b = n_b / d_b
    rb = np.abs(r_b) ** 2
    tb = np.abs(2.0 * ns / d_b) ** 2 / np.real(ns) * damp

    da_f = dm11 + dm12 * ns
    db_f = dm21 + dm22 * ns
    dd_f = da_f + db_f
    dn_f = da_f - db_f
    dr_f = (dn_f * d_f - n_f * dd_f) / (d_f * d_f)
    drf = 2.0 * np.real(np.conj(r_f) * dr_f)
    dtf = -2.0 * tf * np.real(np.conj(d_f) * dd_f) / np.abs(d_f) ** 2

    da_b = dm22 + dm12
    db_b = dm21 + dm11
    dd_b = ns * da_b + db_b
    dn_b = ns * da_b - db_b
    dr_b = (dn_b * d_b - n_b * dd_b) / (d_b * d_b)
    drb = 2.0 * np.real(np.conj(r_b) * dr_b)
    dtb = -2.0 * tb * np.real(np.conj(d_b) * dd_b) / np.abs(d_b) ** 2

    tau2 = np.exp(-4.0 * np.pi * k_sub * sub_nm / wl) ** 2
    rb0, tb0 = _substrate_back_face(ns)
    denom = np.maximum(1.0 - rb * rb0 * tau2, _DENOM_FLOOR)
    ddenom = -rb0 * tau2 * drb
    tau_tb0 = np.sqrt(tau2) * tb0
    dt_tot = tau_tb0 * (dtf * denom - tf * ddenom) / (denom * denom)
    dr_tot = drf + rb0 * tau2 * ((dtf * tb + tf * dtb) * denom
                                 - tf * tb * ddenom) / (denom * denom)
    return dr_tot.T, dt_tot.T
