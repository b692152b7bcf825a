"""Pure numpy implementation of the hot kernels.

Three kernels live here (and in the compiled twin ``_core.pyx``):

* counter-based normal deviates (Philox-4x32-10 + Box-Muller),
* Euler-Maruyama propagation of a walker ensemble under a linear drift,
* the 1-D coupled continuity / Hamilton-Jacobi stepper (RK4).

Noise layout contract
---------------------
The normal deviate consumed at ``(seed, stream, step, walker, site)`` is a pure
function of those five integers: Philox counter words are
``(site_block, walker, step, stream)`` with ``site_block = site // 2`` (one
128-bit block yields two normals via Box-Muller), and the 64-bit seed is split
into the two 32-bit key words.  Both backends reproduce the same integer
stream bit for bit; the float outputs can differ only in the last ulp of the
libm calls.  Propagation is therefore reproducible under any step chunking and
any walker-level parallel schedule.
"""

import numpy as np

# Philox-4x32 round constants (Salmon et al. counter-based RNG).
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)

#: stream tags (domain separation of noise draws)
STREAM_EM = 0
STREAM_INIT = 1
STREAM_TEST = 7


def philox4x32(c0, c1, c2, c3, k0, k1):
    """10-round Philox-4x32 block cipher, vectorized over counter arrays.

    All inputs are uint64 arrays/scalars holding 32-bit values; returns the
    four 32-bit output words as uint64 arrays.
    """
    c0 = np.asarray(c0, dtype=np.uint64)
    c1 = np.asarray(c1, dtype=np.uint64)
    c2 = np.asarray(c2, dtype=np.uint64)
    c3 = np.asarray(c3, dtype=np.uint64)
    k0 = np.uint64(k0)
    k1 = np.uint64(k1)
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0 = p0 >> np.uint64(32)
        lo0 = p0 & _MASK32
        hi1 = p1 >> np.uint64(32)
        lo1 = p1 & _MASK32
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _uniforms_from_words(w0, w1):
    """Map two 32-bit words to one double in the open interval (0, 1)."""
    x = (w0 << np.uint64(32)) | w1
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def normals(seed, stream, step, walker0, n_walkers, n_sites):
    """Standard normal block for ``n_walkers`` x ``n_sites`` at one step.

    Walker ``w`` of the returned block has absolute walker index
    ``walker0 + w`` in the noise layout.
    """
    n_blocks = (n_sites + 1) // 2
    walkers = (np.uint64(walker0) +
               np.arange(n_walkers, dtype=np.uint64))[:, None]
    blocks = np.arange(n_blocks, dtype=np.uint64)[None, :]
    c0 = np.broadcast_to(blocks, (n_walkers, n_blocks))
    c1 = np.broadcast_to(walkers, (n_walkers, n_blocks))
    c2 = np.uint64(step)
    c3 = np.uint64(stream)
    k0 = np.uint64(seed) & _MASK32
    k1 = (np.uint64(seed) >> np.uint64(32)) & _MASK32
    r0, r1, r2, r3 = philox4x32(c0, c1, c2, c3, k0, k1)
    u1 = _uniforms_from_words(r0, r1)
    u2 = _uniforms_from_words(r2, r3)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    z = np.empty((n_walkers, 2 * n_blocks))
    z[:, 0::2] = r * np.cos(ang)
    z[:, 1::2] = r * np.sin(ang)
    return np.ascontiguousarray(z[:, :n_sites])


def em_propagate(fields, drift_matrix, dt, noise_scale, seed, step0, n_steps,
                 stream=STREAM_EM):
    """Advance an ensemble ``n_steps`` Euler-Maruyama steps in place.

    Drift is linear, ``b = -drift_matrix @ phi`` per walker; the per-site noise
    is ``noise_scale`` times a unit normal from the counter-based stream.
    ``fields`` has shape (n_walkers, n_sites).
    """
    n_walkers, n_sites = fields.shape
    neg_a_dt = -dt * drift_matrix.T
    for k in range(n_steps):
        z = normals(seed, stream, step0 + k, 0, n_walkers, n_sites)
        fields += fields @ neg_a_dt + noise_scale * z
    return fields


def _smoothstep(z):
    z = np.clip(z, 0.0, 1.0)
    return z * z * (3.0 - 2.0 * z)


def _fphj_rhs(rho, S, V, h, eta, a_coeff, qreg, cnu, nu0, lr_on, lr_full,
              drho, dS):
    n = rho.shape[0]
    peak = rho.max()
    # continuity: conservative central flux, closed walls
    v_face = (eta / h) * (S[1:] - S[:-1])
    F = 0.5 * (rho[1:] + rho[:-1]) * v_face
    drho[0] = -F[0] / h
    drho[-1] = F[-1] / h
    drho[1:-1] = -(F[1:] - F[:-1]) / h
    # quantum potential from the floor-regularized amplitude
    s = np.sqrt(np.maximum(rho, 0.0) + qreg * peak)
    Q = np.empty(n)
    Q[1:-1] = (0.5 * eta * eta * a_coeff) * \
        (s[2:] - 2.0 * s[1:-1] + s[:-2]) / (h * h) / s[1:-1]
    Q[0] = 2.0 * Q[1] - Q[2]
    Q[-1] = 2.0 * Q[-2] - Q[-3]
    gS = np.empty(n)
    gS[1:-1] = (S[2:] - S[:-2]) / (2.0 * h)
    gS[0] = (S[1] - S[0]) / h
    gS[-1] = (S[-1] - S[-2]) / h
    dS[:] = -((0.5 * eta * eta) * gS * gS - Q + V) / eta
    # phase viscosity: O(h) everywhere, boosted below the density floor
    lr = -np.log(np.maximum(rho, 1e-300 * peak) / peak)
    nu = cnu * h * eta + nu0 * _smoothstep((lr - lr_on) / (lr_full - lr_on))
    dS[1:-1] += nu[1:-1] * (S[2:] - 2.0 * S[1:-1] + S[:-2]) / (h * h)
    dS[0] = 2.0 * dS[1] - dS[2]
    dS[-1] = 2.0 * dS[-2] - dS[-3]


def fphj_propagate(rho, S, V, h, dt, n_steps, eta=1.0, a_coeff=1.0,
                   qreg=1e-14, cnu=12.0, nu0=0.3,
                   lr_on=23.025850929940457, lr_full=29.933606208922594):
    """Advance the 1-D (rho, S) pair ``n_steps`` RK4 steps in place.

    Returns 0 on success, 1 if a non-finite value appeared (caller decides how
    to diagnose; the fields are left in their failed state).
    """
    n = rho.shape[0]
    k1r = np.empty(n); k1s = np.empty(n)
    k2r = np.empty(n); k2s = np.empty(n)
    k3r = np.empty(n); k3s = np.empty(n)
    k4r = np.empty(n); k4s = np.empty(n)
    args = (V, h, eta, a_coeff, qreg, cnu, nu0, lr_on, lr_full)
    for _ in range(n_steps):
        _fphj_rhs(rho, S, *args, k1r, k1s)
        _fphj_rhs(rho + (0.5 * dt) * k1r, S + (0.5 * dt) * k1s, *args, k2r, k2s)
        _fphj_rhs(rho + (0.5 * dt) * k2r, S + (0.5 * dt) * k2s, *args, k3r, k3s)
        _fphj_rhs(rho + dt * k3r, S + dt * k3s, *args, k4r, k4s)
        rho += (dt / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        S += (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    if not (np.isfinite(rho).all() and np.isfinite(S).all()):
        return 1
    return 0
