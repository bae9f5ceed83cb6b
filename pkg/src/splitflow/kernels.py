"""Transfer-matrix kernels for the rank-2 first order system on an arc.

The system is ``sigma f' + (V(u) - lam) f = 0`` with ``sigma = [[0,-1],[1,0]]``
and ``V(u)`` real symmetric, i.e. ``f' = M(u) f`` with

    M(u) = sigma (V(u) - lam Id) = [[-q, lam - r], [p - lam, q]],

where ``V = [[p, q], [q, r]]``.  ``M`` is traceless, so each step matrix is a
closed-form 2x2 exponential and the flow is exactly area preserving
(``det = 1``), which keeps Cauchy data spaces Lagrangian to rounding error.

Two potential representations are supported:

* piecewise constant in ``u``: the transfer matrix is an exact product of
  segment exponentials (``transfer_pwc``);
* smooth in ``u``, given as a sampled table with cubic interpolation: a
  fourth-order two-node Magnus integrator (``transfer_smooth``), whose step
  matrices are exponentials of traceless matrices and therefore still exactly
  area preserving.

These propagators are the innermost loop of every eigenvalue scan, so both
carry a numba-compiled scalar implementation and a numpy implementation
vectorized over the spectral parameter batch; see :mod:`splitflow.backend`.
"""

import math

import numpy as np

from .backend import USE_NUMBA, jit

__all__ = [
    "transfer_pwc",
    "transfer_smooth",
    "transfer_pwc_numpy",
    "transfer_smooth_numpy",
]

_GAUSS_OFF = math.sqrt(3.0) / 6.0  # Gauss-Legendre node offset from midpoint
_SERIES_CUT = 1e-6


def _pwc_scalar(lengths, pots, lams, out):
    # out[i] = product over segments of expm(h * M(lam_i)), first segment first
    nseg = lengths.shape[0]
    for i in range(lams.shape[0]):
        lam = lams[i]
        t00 = 1.0
        t01 = 0.0
        t10 = 0.0
        t11 = 1.0
        for s in range(nseg):
            h = lengths[s]
            p = pots[s, 0]
            q = pots[s, 1]
            r = pots[s, 2]
            m00 = -q
            m01 = lam - r
            m10 = p - lam
            m11 = q
            delta = (h * h) * (q * q - (r - lam) * (p - lam))
            if delta > _SERIES_CUT:
                rt = math.sqrt(delta)
                ch = math.cosh(rt)
                sh = math.sinh(rt) / rt
            elif delta < -_SERIES_CUT:
                rt = math.sqrt(-delta)
                ch = math.cos(rt)
                sh = math.sin(rt) / rt
            else:
                ch = 1.0 + delta * (0.5 + delta * (1.0 / 24.0 + delta / 720.0))
                sh = 1.0 + delta * (1.0 / 6.0 + delta * (1.0 / 120.0 + delta / 5040.0))
            e00 = ch + sh * h * m00
            e01 = sh * h * m01
            e10 = sh * h * m10
            e11 = ch + sh * h * m11
            n00 = e00 * t00 + e01 * t10
            n01 = e00 * t01 + e01 * t11
            n10 = e10 * t00 + e11 * t10
            n11 = e10 * t01 + e11 * t11
            t00 = n00
            t01 = n01
            t10 = n10
            t11 = n11
        out[i, 0, 0] = t00
        out[i, 0, 1] = t01
        out[i, 1, 0] = t10
        out[i, 1, 1] = t11


@jit
def _interp_cubic(tab, n, x):
    # 4-point Lagrange interpolation on a uniform grid, x in index units
    k = int(math.floor(x))
    if k < 1:
        k = 1
    if k > n - 3:
        k = n - 3
    s = x - k
    wm = -s * (s - 1.0) * (s - 2.0) / 6.0
    w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
    w1 = -(s + 1.0) * s * (s - 2.0) / 2.0
    w2 = (s + 1.0) * s * (s - 1.0) / 6.0
    return wm * tab[k - 1] + w0 * tab[k] + w1 * tab[k + 1] + w2 * tab[k + 2]


def _smooth_scalar(vtab, u0, du, a, b, nsteps, lams, out):
    # Fourth-order Magnus with two Gauss nodes per step; vtab samples V on a
    # uniform grid starting at u0 with spacing du.
    n = vtab.shape[0]
    h = (b - a) / nsteps
    # Node potentials are shared across the lam batch: precompute.
    vp1 = np.empty(nsteps)
    vq1 = np.empty(nsteps)
    vr1 = np.empty(nsteps)
    vp2 = np.empty(nsteps)
    vq2 = np.empty(nsteps)
    vr2 = np.empty(nsteps)
    for s in range(nsteps):
        um = a + (s + 0.5) * h
        x1 = (um - _GAUSS_OFF * h - u0) / du
        x2 = (um + _GAUSS_OFF * h - u0) / du
        vp1[s] = _interp_cubic(vtab[:, 0], n, x1)
        vq1[s] = _interp_cubic(vtab[:, 1], n, x1)
        vr1[s] = _interp_cubic(vtab[:, 2], n, x1)
        vp2[s] = _interp_cubic(vtab[:, 0], n, x2)
        vq2[s] = _interp_cubic(vtab[:, 1], n, x2)
        vr2[s] = _interp_cubic(vtab[:, 2], n, x2)
    for i in range(lams.shape[0]):
        lam = lams[i]
        t00 = 1.0
        t01 = 0.0
        t10 = 0.0
        t11 = 1.0
        for s in range(nsteps):
            a00 = -vq1[s]
            a01 = lam - vr1[s]
            a10 = vp1[s] - lam
            a11 = vq1[s]
            b00 = -vq2[s]
            b01 = lam - vr2[s]
            b10 = vp2[s] - lam
            b11 = vq2[s]
            # Omega = (h/2)(M1+M2) + (sqrt(3)/12) h^2 [M2, M1]
            c00 = b00 * a00 + b01 * a10 - (a00 * b00 + a01 * b10)
            c01 = b00 * a01 + b01 * a11 - (a00 * b01 + a01 * b11)
            c10 = b10 * a00 + b11 * a10 - (a10 * b00 + a11 * b10)
            c11 = b10 * a01 + b11 * a11 - (a10 * b01 + a11 * b11)
            f1 = 0.5 * h
            f2 = (math.sqrt(3.0) / 12.0) * h * h
            o00 = f1 * (a00 + b00) + f2 * c00
            o01 = f1 * (a01 + b01) + f2 * c01
            o10 = f1 * (a10 + b10) + f2 * c10
            o11 = f1 * (a11 + b11) + f2 * c11
            delta = -(o00 * o11 - o01 * o10)
            if delta > _SERIES_CUT:
                rt = math.sqrt(delta)
                ch = math.cosh(rt)
                sh = math.sinh(rt) / rt
            elif delta < -_SERIES_CUT:
                rt = math.sqrt(-delta)
                ch = math.cos(rt)
                sh = math.sin(rt) / rt
            else:
                ch = 1.0 + delta * (0.5 + delta * (1.0 / 24.0 + delta / 720.0))
                sh = 1.0 + delta * (1.0 / 6.0 + delta * (1.0 / 120.0 + delta / 5040.0))
            e00 = ch + sh * o00
            e01 = sh * o01
            e10 = sh * o10
            e11 = ch + sh * o11
            n00 = e00 * t00 + e01 * t10
            n01 = e00 * t01 + e01 * t11
            n10 = e10 * t00 + e11 * t10
            n11 = e10 * t01 + e11 * t11
            t00 = n00
            t01 = n01
            t10 = n10
            t11 = n11
        out[i, 0, 0] = t00
        out[i, 0, 1] = t01
        out[i, 1, 0] = t10
        out[i, 1, 1] = t11


_pwc_compiled = jit(_pwc_scalar)
_smooth_compiled = jit(_smooth_scalar)


def _expm_traceless_batch(m):
    """Vectorized expm for a (..., 2, 2) batch of traceless matrices."""
    delta = -(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0])
    ch = np.empty_like(delta)
    sh = np.empty_like(delta)
    pos = delta > _SERIES_CUT
    neg = delta < -_SERIES_CUT
    mid = ~(pos | neg)
    rt = np.sqrt(np.abs(delta[pos]))
    ch[pos] = np.cosh(rt)
    sh[pos] = np.sinh(rt) / rt
    rt = np.sqrt(np.abs(delta[neg]))
    ch[neg] = np.cos(rt)
    sh[neg] = np.sin(rt) / rt
    d = delta[mid]
    ch[mid] = 1.0 + d * (0.5 + d * (1.0 / 24.0 + d / 720.0))
    sh[mid] = 1.0 + d * (1.0 / 6.0 + d * (1.0 / 120.0 + d / 5040.0))
    out = sh[..., None, None] * m
    out[..., 0, 0] += ch
    out[..., 1, 1] += ch
    return out


def _m_of(lams, p, q, r):
    m = np.empty((lams.shape[0], 2, 2))
    m[:, 0, 0] = -q
    m[:, 0, 1] = lams - r
    m[:, 1, 0] = p - lams
    m[:, 1, 1] = q
    return m


def transfer_pwc_numpy(lengths, pots, lams):
    """Pure-numpy piecewise-constant transfer, vectorized over ``lams``."""
    lams = np.asarray(lams, dtype=float)
    total = np.broadcast_to(np.eye(2), (lams.shape[0], 2, 2)).copy()
    for s in range(lengths.shape[0]):
        m = _m_of(lams, pots[s, 0], pots[s, 1], pots[s, 2]) * lengths[s]
        total = _expm_traceless_batch(m) @ total
    return total


def transfer_smooth_numpy(vtab, u0, du, a, b, nsteps, lams):
    """Pure-numpy Magnus-4 transfer on a tabulated potential."""
    lams = np.asarray(lams, dtype=float)
    n = vtab.shape[0]
    h = (b - a) / nsteps
    mids = a + (np.arange(nsteps) + 0.5) * h
    x1 = (mids - _GAUSS_OFF * h - u0) / du
    x2 = (mids + _GAUSS_OFF * h - u0) / du

    def interp(xs):
        k = np.clip(np.floor(xs).astype(int), 1, n - 3)
        s = xs - k
        wm = -s * (s - 1.0) * (s - 2.0) / 6.0
        w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0
        w1 = -(s + 1.0) * s * (s - 2.0) / 2.0
        w2 = (s + 1.0) * s * (s - 1.0) / 6.0
        return (
            wm[:, None] * vtab[k - 1]
            + w0[:, None] * vtab[k]
            + w1[:, None] * vtab[k + 1]
            + w2[:, None] * vtab[k + 2]
        )

    v1 = interp(x1)
    v2 = interp(x2)
    f2 = (math.sqrt(3.0) / 12.0) * h * h
    total = np.broadcast_to(np.eye(2), (lams.shape[0], 2, 2)).copy()
    for s in range(nsteps):
        m1 = _m_of(lams, v1[s, 0], v1[s, 1], v1[s, 2])
        m2 = _m_of(lams, v2[s, 0], v2[s, 1], v2[s, 2])
        omega = (0.5 * h) * (m1 + m2) + f2 * (m2 @ m1 - m1 @ m2)
        total = _expm_traceless_batch(omega) @ total
    return total


def transfer_pwc(lengths, pots, lams):
    """Transfer matrix across consecutive constant-potential segments.

    Parameters
    ----------
    lengths : (S,) float array of segment lengths, traversed in order.
    pots : (S, 3) float array of symmetric potentials ``(p, q, r)``.
    lams : (m,) spectral parameters.

    Returns
    -------
    (m, 2, 2) array of transfer matrices (initial point to final point).
    """
    lengths = np.ascontiguousarray(lengths, dtype=float)
    pots = np.ascontiguousarray(pots, dtype=float)
    lams = np.ascontiguousarray(lams, dtype=float)
    if not USE_NUMBA:
        return transfer_pwc_numpy(lengths, pots, lams)
    out = np.empty((lams.shape[0], 2, 2))
    _pwc_compiled(lengths, pots, lams, out)
    return out


def transfer_smooth(vtab, u0, du, a, b, nsteps, lams):
    """Transfer matrix for a smooth tabulated potential from ``a`` to ``b``.

    ``vtab`` holds ``(p, q, r)`` samples on the uniform grid
    ``u0 + i * du``; the table must cover ``[a, b]`` with one spare node on
    each side for the cubic stencil.
    """
    vtab = np.ascontiguousarray(vtab, dtype=float)
    lams = np.ascontiguousarray(lams, dtype=float)
    if not USE_NUMBA:
        return transfer_smooth_numpy(vtab, u0, du, a, b, nsteps, lams)
    out = np.empty((lams.shape[0], 2, 2))
    _smooth_compiled(vtab, u0, du, a, b, nsteps, lams, out)
    return out
