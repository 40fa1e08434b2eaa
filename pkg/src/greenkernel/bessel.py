"""Modified Bessel functions of the second kind for the orders the catalog needs.

Only orders in (1/2)Z are supported: Matern kernels use nu = d/2 - n with
integer d and n, and the regularized log/Bessel kernel uses nu = 0.

* half-integer orders: closed form for K_{1/2}, then upward recurrence;
* integer orders: power series for z <= 2, Steed's continued fraction
  (Temme's CF2) for z > 2, then upward recurrence.

The upward recurrence K_{v+1}(z) = K_{v-1}(z) + (2v/z) K_v(z) is stable for K.
"""

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_SERIES_TERMS = 30
_CF_MAXIT = 10000
_EPS = 1e-16


def _check_order(nu):
    twice = 2.0 * nu
    if abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"Bessel order {nu} is not an integer or half-integer")
    return abs(nu)


def _k01_series(z):
    """K_0, K_1 by the ascending series; accurate for 0 < z <= 2."""
    y = 0.25 * z * z
    log_half = np.log(0.5 * z)
    term0 = np.ones_like(z)  # (z^2/4)^k / (k!)^2
    term1 = np.ones_like(z)  # (z^2/4)^k / (k! (k+1)!)
    i0 = np.zeros_like(z)
    i1 = np.zeros_like(z)
    s0 = np.zeros_like(z)
    s1 = np.zeros_like(z)
    psi_k = -EULER_GAMMA  # psi(k+1)
    for k in range(_SERIES_TERMS):
        psi_k1 = psi_k + 1.0 / (k + 1)  # psi(k+2)
        i0 += term0
        i1 += term1
        s0 += psi_k * term0
        s1 += (psi_k + psi_k1) * term1
        term0 = term0 * y / ((k + 1) * (k + 1))
        term1 = term1 * y / ((k + 1) * (k + 2))
        psi_k = psi_k1
    i1 = 0.5 * z * i1
    k0 = -log_half * i0 + s0
    k1 = 1.0 / z + log_half * i1 - 0.25 * z * s1
    return k0, k1


def _k01_continued_fraction(x):
    """K_0, K_1 by Steed's method on Temme's CF2; for x >= 2."""
    x = np.asarray(x, dtype=float)
    a1 = 0.25
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(x.shape, dtype=bool)
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = np.where(active, -a * c / i, c)
        qnew = np.where(active, (q1 - b * q2) / a, q2)
        q1 = np.where(active, q2, q1)
        q2 = qnew
        q = np.where(active, q + c * qnew, q)
        b = np.where(active, b + 2.0, b)
        d = np.where(active, 1.0 / (b + a * d), d)
        delh = np.where(active, (b * d - 1.0) * delh, delh)
        h = np.where(active, h + delh, h)
        dels = q * delh
        s = np.where(active, s + dels, s)
        active &= np.abs(dels / s) >= _EPS
        if not active.any():
            break
    else:
        raise ArithmeticError("Bessel K continued fraction did not converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k01(z):
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    small = z <= 2.0
    if small.any():
        k0[small], k1[small] = _k01_series(z[small])
    if (~small).any():
        k0[~small], k1[~small] = _k01_continued_fraction(z[~small])
    return k0, k1


def kv(nu, z):
    """K_nu(z) for nu in (1/2)Z and z > 0.

    Parameters
    ----------
    nu : float
        Order; must be an integer or a half-integer. K is even in nu.
    z : array_like
        Positive arguments.

    Returns
    -------
    ndarray
        Values with the shape of ``z``. Zero arguments give ``inf``.
    """
    nu = _check_order(nu)
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = z.ravel()
    if np.any(z < 0):
        raise ValueError("kv requires nonnegative arguments")
    out = np.full(z.shape, np.inf)
    pos = z > 0
    zp = z[pos]
    if nu != int(nu):
        prev = np.sqrt(np.pi / (2.0 * zp)) * np.exp(-zp)  # K_{1/2}
        cur = prev * (1.0 + 1.0 / zp)  # K_{3/2}
        order = 0.5
    else:
        prev, cur = _k01(zp)
        order = 0.0
    if nu == order:
        out[pos] = prev
        return out.reshape(shape)
    order += 1.0
    while order < nu:
        prev, cur = cur, prev + (2.0 * order / zp) * cur
        order += 1.0
    out[pos] = cur
    return out.reshape(shape)


def scaled_kv(nu, z):
    """z**nu * K_|nu|(z), with the finite limit 2**(nu-1) Gamma(nu) at z = 0 for nu > 0.

    This is the building block of the Matern family: derivatives satisfy
    (1/z d/dz) [z^nu K_nu(z)] = -z^(nu-1) K_(nu-1)(z).
    """
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    zero = z == 0
    nz = ~zero
    if nz.any():
        zz = z[nz]
        out[nz] = zz ** nu * kv(nu, zz)
    if zero.any():
        if nu > 0:
            out[zero] = 2.0 ** (nu - 1.0) * math.gamma(nu)
        else:
            out[zero] = np.inf
    return out
