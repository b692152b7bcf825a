# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the pure numpy kernels (see ``_pure`` for the contracts).

The integer Philox stream is bit-identical to the fallback; float outputs may
differ from numpy's SIMD libm in the last ulp.  Build uses -ffp-contract=off
so the update arithmetic matches the fallback's elementwise IEEE semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log, sin, sqrt

cnp.import_array()

STREAM_EM = 0
STREAM_INIT = 1
STREAM_TEST = 7

cdef extern from *:
    """
    #include <stdint.h>

    static const uint64_t PHILOX_M0 = 0xD2511F53u;
    static const uint64_t PHILOX_M1 = 0xCD9E8D57u;
    static const uint32_t PHILOX_W0 = 0x9E3779B9u;
    static const uint32_t PHILOX_W1 = 0xBB67AE85u;

    static inline void philox4x32_block(uint32_t c[4], uint32_t k0, uint32_t k1)
    {
        int r;
        for (r = 0; r < 10; r++) {
            uint64_t p0 = PHILOX_M0 * (uint64_t)c[0];
            uint64_t p1 = PHILOX_M1 * (uint64_t)c[2];
            uint32_t hi0 = (uint32_t)(p0 >> 32), lo0 = (uint32_t)p0;
            uint32_t hi1 = (uint32_t)(p1 >> 32), lo1 = (uint32_t)p1;
            uint32_t n0 = hi1 ^ c[1] ^ k0;
            uint32_t n2 = hi0 ^ c[3] ^ k1;
            c[0] = n0; c[1] = lo1; c[2] = n2; c[3] = lo0;
            k0 += PHILOX_W0; k1 += PHILOX_W1;
        }
    }
    """
    void philox4x32_block(cnp.uint32_t c[4], cnp.uint32_t k0, cnp.uint32_t k1) nogil


cdef double TWO_PI = 6.283185307179586476925287
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline void _block_normals(cnp.uint64_t seed, cnp.uint32_t stream,
                                cnp.uint32_t step, cnp.uint32_t walker,
                                cnp.uint32_t block, double *z0,
                                double *z1) nogil:
    cdef cnp.uint32_t c[4]
    cdef cnp.uint64_t a, b
    cdef double u1, u2, r, ang
    c[0] = block
    c[1] = walker
    c[2] = step
    c[3] = stream
    philox4x32_block(c, <cnp.uint32_t>(seed & 0xFFFFFFFFu),
                     <cnp.uint32_t>((seed >> 32) & 0xFFFFFFFFu))
    a = ((<cnp.uint64_t>c[0]) << 32) | c[1]
    b = ((<cnp.uint64_t>c[2]) << 32) | c[3]
    u1 = ((a >> 11) + 0.5) * INV_2_53
    u2 = ((b >> 11) + 0.5) * INV_2_53
    r = sqrt(-2.0 * log(u1))
    ang = TWO_PI * u2
    z0[0] = r * cos(ang)
    z1[0] = r * sin(ang)


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Vectorized 10-round Philox (same surface as the pure backend)."""
    c0a = np.ascontiguousarray(np.broadcast_arrays(
        np.asarray(c0, np.uint64), np.asarray(c1, np.uint64),
        np.asarray(c2, np.uint64), np.asarray(c3, np.uint64))[0])
    arrs = np.broadcast_arrays(
        np.asarray(c0, np.uint64), np.asarray(c1, np.uint64),
        np.asarray(c2, np.uint64), np.asarray(c3, np.uint64))
    shape = arrs[0].shape
    flat = [np.ascontiguousarray(a).ravel() for a in arrs]
    cdef cnp.uint64_t[::1] f0 = flat[0]
    cdef cnp.uint64_t[::1] f1 = flat[1]
    cdef cnp.uint64_t[::1] f2 = flat[2]
    cdef cnp.uint64_t[::1] f3 = flat[3]
    out = [np.empty(f0.shape[0], np.uint64) for _ in range(4)]
    cdef cnp.uint64_t[::1] o0 = out[0]
    cdef cnp.uint64_t[::1] o1 = out[1]
    cdef cnp.uint64_t[::1] o2 = out[2]
    cdef cnp.uint64_t[::1] o3 = out[3]
    cdef cnp.uint32_t key0 = <cnp.uint32_t>(int(k0) & 0xFFFFFFFF)
    cdef cnp.uint32_t key1 = <cnp.uint32_t>(int(k1) & 0xFFFFFFFF)
    cdef Py_ssize_t i, n = f0.shape[0]
    cdef cnp.uint32_t c[4]
    with nogil:
        for i in range(n):
            c[0] = <cnp.uint32_t>f0[i]
            c[1] = <cnp.uint32_t>f1[i]
            c[2] = <cnp.uint32_t>f2[i]
            c[3] = <cnp.uint32_t>f3[i]
            philox4x32_block(c, key0, key1)
            o0[i] = c[0]; o1[i] = c[1]; o2[i] = c[2]; o3[i] = c[3]
    return tuple(o.reshape(shape) for o in out)


def normals(seed, stream, step, walker0, n_walkers, n_sites):
    """Standard normal block, same layout as the pure backend."""
    cdef Py_ssize_t nw = n_walkers, ns = n_sites
    cdef Py_ssize_t nb = (ns + 1) // 2
    z = np.empty((nw, ns))
    cdef double[:, ::1] zv = z
    cdef cnp.uint64_t sd = <cnp.uint64_t>int(seed)
    cdef cnp.uint32_t st = <cnp.uint32_t>int(stream)
    cdef cnp.uint32_t sp = <cnp.uint32_t>int(step)
    cdef cnp.uint64_t w0 = <cnp.uint64_t>int(walker0)
    cdef Py_ssize_t w, blk
    cdef double a, b
    with nogil:
        for w in range(nw):
            for blk in range(nb):
                _block_normals(sd, st, sp, <cnp.uint32_t>(w0 + w),
                               <cnp.uint32_t>blk, &a, &b)
                zv[w, 2 * blk] = a
                if 2 * blk + 1 < ns:
                    zv[w, 2 * blk + 1] = b
    return z


def em_propagate(fields, drift_matrix, dt, noise_scale, seed, step0, n_steps,
                 stream=STREAM_EM):
    """In-place linear-drift Euler-Maruyama propagation (compiled path)."""
    cdef double[:, ::1] f = fields
    cdef double[:, ::1] A = np.ascontiguousarray(drift_matrix, dtype=np.float64)
    cdef Py_ssize_t nw = f.shape[0], ns = f.shape[1]
    cdef Py_ssize_t nb = (ns + 1) // 2
    cdef double dtv = dt, scale = noise_scale
    cdef cnp.uint64_t sd = <cnp.uint64_t>int(seed)
    cdef cnp.uint32_t st = <cnp.uint32_t>int(stream)
    cdef long s0 = step0, nst = n_steps
    buf = np.empty(ns)
    znoise = np.empty(ns)
    cdef double[::1] bv = buf
    cdef double[::1] zn = znoise
    cdef Py_ssize_t k, w, i, j, blk
    cdef double acc, z0, z1
    with nogil:
        for k in range(nst):
            for w in range(nw):
                for blk in range(nb):
                    _block_normals(sd, st, <cnp.uint32_t>(s0 + k),
                                   <cnp.uint32_t>w, <cnp.uint32_t>blk,
                                   &z0, &z1)
                    zn[2 * blk] = z0
                    if 2 * blk + 1 < ns:
                        zn[2 * blk + 1] = z1
                for i in range(ns):
                    acc = 0.0
                    for j in range(ns):
                        acc += A[i, j] * f[w, j]
                    bv[i] = acc
                for i in range(ns):
                    f[w, i] = f[w, i] - dtv * bv[i] + scale * zn[i]
    return fields


cdef inline double _smoothstep(double z) nogil:
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    return z * z * (3.0 - 2.0 * z)


cdef void _fphj_rhs(double[::1] rho, double[::1] S, double[::1] V,
                    double h, double eta, double a_coeff, double qreg,
                    double cnu, double nu0, double lr_on, double lr_full,
                    double[::1] drho, double[::1] dS,
                    double[::1] s, double[::1] Q, double[::1] gS) nogil:
    cdef Py_ssize_t n = rho.shape[0]
    cdef Py_ssize_t i
    cdef double peak = rho[0]
    cdef double vf_l, vf_r, F_l, F_r, lr, nu, w, floor300
    for i in range(1, n):
        if rho[i] > peak:
            peak = rho[i]
    floor300 = 1e-300 * peak
    # continuity with closed walls: F_{i+1/2} = avg(rho) * eta * dS/dphi
    F_l = 0.0
    for i in range(n - 1):
        vf_r = eta * (S[i + 1] - S[i]) / h
        F_r = 0.5 * (rho[i] + rho[i + 1]) * vf_r
        drho[i] = -(F_r - F_l) / h
        F_l = F_r
    drho[n - 1] = F_l / h
    for i in range(n):
        w = rho[i]
        if w < 0.0:
            w = 0.0
        s[i] = sqrt(w + qreg * peak)
    for i in range(1, n - 1):
        Q[i] = (0.5 * eta * eta * a_coeff) * \
            (s[i + 1] - 2.0 * s[i] + s[i - 1]) / (h * h) / s[i]
    Q[0] = 2.0 * Q[1] - Q[2]
    Q[n - 1] = 2.0 * Q[n - 2] - Q[n - 3]
    for i in range(1, n - 1):
        gS[i] = (S[i + 1] - S[i - 1]) / (2.0 * h)
    gS[0] = (S[1] - S[0]) / h
    gS[n - 1] = (S[n - 1] - S[n - 2]) / h
    for i in range(n):
        dS[i] = -((0.5 * eta * eta) * gS[i] * gS[i] - Q[i] + V[i]) / eta
    for i in range(1, n - 1):
        w = rho[i]
        if w < floor300:
            w = floor300
        lr = -log(w / peak)
        nu = cnu * h * eta + nu0 * _smoothstep((lr - lr_on) / (lr_full - lr_on))
        dS[i] += nu * (S[i + 1] - 2.0 * S[i] + S[i - 1]) / (h * h)
    dS[0] = 2.0 * dS[1] - dS[2]
    dS[n - 1] = 2.0 * dS[n - 2] - dS[n - 3]


def fphj_propagate(rho, S, V, h, dt, n_steps, eta=1.0, a_coeff=1.0,
                   qreg=1e-14, cnu=12.0, nu0=0.3,
                   lr_on=23.025850929940457, lr_full=29.933606208922594):
    """In-place RK4 advance of the 1-D (rho, S) pair (compiled path)."""
    cdef double[::1] r = rho
    cdef double[::1] Sv = S
    cdef double[::1] Vv = np.ascontiguousarray(V, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    work = [np.empty(n) for _ in range(13)]
    cdef double[::1] k1r = work[0], k1s = work[1]
    cdef double[::1] k2r = work[2], k2s = work[3]
    cdef double[::1] k3r = work[4], k3s = work[5]
    cdef double[::1] k4r = work[6], k4s = work[7]
    cdef double[::1] tr = work[8], ts = work[9]
    cdef double[::1] sb = work[10], Qb = work[11], gb = work[12]
    cdef double hh = h, dtv = dt, et = eta, ac = a_coeff, qg = qreg
    cdef double cn = cnu, n0 = nu0, lon = lr_on, lful = lr_full
    cdef long nst = n_steps
    cdef Py_ssize_t k, i
    cdef bint ok = True
    with nogil:
        for k in range(nst):
            _fphj_rhs(r, Sv, Vv, hh, et, ac, qg, cn, n0, lon, lful,
                      k1r, k1s, sb, Qb, gb)
            for i in range(n):
                tr[i] = r[i] + (0.5 * dtv) * k1r[i]
                ts[i] = Sv[i] + (0.5 * dtv) * k1s[i]
            _fphj_rhs(tr, ts, Vv, hh, et, ac, qg, cn, n0, lon, lful,
                      k2r, k2s, sb, Qb, gb)
            for i in range(n):
                tr[i] = r[i] + (0.5 * dtv) * k2r[i]
                ts[i] = Sv[i] + (0.5 * dtv) * k2s[i]
            _fphj_rhs(tr, ts, Vv, hh, et, ac, qg, cn, n0, lon, lful,
                      k3r, k3s, sb, Qb, gb)
            for i in range(n):
                tr[i] = r[i] + dtv * k3r[i]
                ts[i] = Sv[i] + dtv * k3s[i]
            _fphj_rhs(tr, ts, Vv, hh, et, ac, qg, cn, n0, lon, lful,
                      k4r, k4s, sb, Qb, gb)
            for i in range(n):
                r[i] = r[i] + (dtv / 6.0) * \
                    (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i])
                Sv[i] = Sv[i] + (dtv / 6.0) * \
                    (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i])
    for i in range(n):
        if not (r[i] == r[i] and Sv[i] == Sv[i] and
                -1e308 < r[i] < 1e308 and -1e308 < Sv[i] < 1e308):
            ok = False
            break
    return 0 if ok else 1
