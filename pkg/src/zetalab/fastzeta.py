"""Vectorised double precision zeta for bulk work (scans, quadrature, contours).

Same Euler-Maclaurin expansion as :mod:`zetalab.engine`, compiled with numba
and truncated at double precision.  Absolute accuracy is about 1e-13 near
t = 1000 and 1e-11 near t = 5000 (phase rounding of t log n dominates).
Anything that needs more is confirmed with the arbitrary precision engine.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from numba import njit
from scipy.special import loggamma as _sp_loggamma

_KMAX = 120


def _bernoulli_table() -> np.ndarray:
    with mpmath.workdps(30):
        return np.array([float(mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k)) for k in range(_KMAX + 1)])


_BERN = _bernoulli_table()
_LOGS = np.log(np.arange(1, 200001, dtype=np.float64))  # _LOGS[n-1] = log n


def _logs_for(n_max: int) -> np.ndarray:
    global _LOGS
    if n_max > len(_LOGS):
        _LOGS = np.log(np.arange(1, 2 * n_max + 1, dtype=np.float64))
    return _LOGS


@njit(cache=True)
def _em_point(s, order, logs, bern, out):
    t = abs(s.imag)
    n = int(math.ceil(t / (2 * math.pi * 0.6))) + 10
    if n < 20:
        n = 20
    sig = s.real
    a0 = 1.0 + 0j
    a1 = 0j
    a2 = 0j
    for k in range(2, n):
        ln = logs[k - 1]
        amp = math.exp(-sig * ln)
        ph = s.imag * ln
        w = complex(amp * math.cos(ph), -amp * math.sin(ph))
        a0 += w
        if order >= 1:
            lw = ln * w
            a1 -= lw
            if order >= 2:
                a2 += ln * lw
    big_l = logs[n - 1]
    e = np.exp(-s * big_l)
    h = 1.0 / (s - 1.0)
    a0 += n * e * h + 0.5 * e
    if order >= 1:
        a1 += n * e * (-h * h - big_l * h) - 0.5 * big_l * e
    if order >= 2:
        a2 += n * e * (2 * h * h * h + 2 * big_l * h * h + big_l * big_l * h) + 0.5 * big_l * big_l * e
    # scaled P_k(s)/N^(2k-1) jets
    inv_n2 = 1.0 / (n * float(n))
    p0 = 1.0 / n + 0j
    p1 = 0j
    p2 = 0j
    for k in range(1, len(bern)):
        if k == 1:
            q = s
            p2 = p2 * q + 2 * p1
            p1 = p1 * q + p0
            p0 = p0 * q
        else:
            for j in (2 * k - 3, 2 * k - 2):
                q = s + j
                p2 = p2 * q + 2 * p1
                p1 = p1 * q + p0
                p0 = p0 * q
            p0 *= inv_n2
            p1 *= inv_n2
            p2 *= inv_n2
        c = bern[k] * e
        t0 = c * p0
        a0 += t0
        mag = abs(t0)
        if order >= 1:
            t1 = c * (p1 - big_l * p0)
            a1 += t1
            mag = max(mag, abs(t1))
            if order >= 2:
                t2 = c * (p2 - 2 * big_l * p1 + big_l * big_l * p0)
                a2 += t2
                mag = max(mag, abs(t2))
        if mag < 1e-18 * (1.0 + abs(a0)):
            break
    out[0] = a0
    if order >= 1:
        out[1] = a1
    if order >= 2:
        out[2] = a2


@njit(cache=True)
def _em_many(s_arr, order, logs, bern):
    res = np.empty((order + 1, s_arr.size), dtype=np.complex128)
    buf = np.empty(3, dtype=np.complex128)
    for i in range(s_arr.size):
        _em_point(s_arr[i], order, logs, bern, buf)
        for j in range(order + 1):
            res[j, i] = buf[j]
    return res


def zeta_jets(s, order: int = 1) -> np.ndarray:
    """Array of shape (order+1, len(s)): zeta and its derivatives at each point."""
    s_arr = np.ascontiguousarray(np.atleast_1d(np.asarray(s, dtype=np.complex128)).ravel())
    if s_arr.size == 0:
        return np.empty((order + 1, 0), dtype=np.complex128)
    t_max = float(np.max(np.abs(s_arr.imag)))
    logs = _logs_for(int(t_max / (2 * math.pi * 0.6)) + 20)
    return _em_many(s_arr, order, logs, _BERN)


def zeta(s) -> np.ndarray:
    return zeta_jets(s, 0)[0]


def zeta_prime(s) -> np.ndarray:
    return zeta_jets(s, 1)[1]


def logderiv(s) -> np.ndarray:
    z, zp = zeta_jets(s, 1)
    return zp / z


_THETA_COEFFS = (1 / 48, 7 / 5760, 31 / 80640, 127 / 430080, 511 / 1216512, 1414477 / 1476034560)


def theta(t) -> np.ndarray:
    """Riemann-Siegel theta: asymptotic series for t >= 10, log-Gamma below."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    big = t >= 10
    tb = t[big]
    acc = tb / 2 * np.log(tb / (2 * math.pi)) - tb / 2 - math.pi / 8
    inv = 1.0 / tb
    inv2 = inv * inv
    p = inv
    for c in _THETA_COEFFS:
        acc = acc + c * p
        p = p * inv2
    out[big] = acc
    small = ~big
    if np.any(small):
        ts = t[small]
        out[small] = _sp_loggamma(0.25 + 0.5j * ts).imag - ts / 2 * math.log(math.pi)
    return out


def hardy_z(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    z = zeta(0.5 + 1j * t.ravel()).reshape(t.shape)
    return (np.exp(1j * theta(t)) * z).real


def arg_track(values: np.ndarray) -> np.ndarray:
    """Cumulative continuous argument of a sampled path (principal increments)."""
    inc = np.angle(values[1:] / values[:-1])
    return np.concatenate(([np.angle(values[0])], np.angle(values[0]) + np.cumsum(inc)))


def log_zeta(s: complex, *, sigma_start: float = 10.0, max_step_arg: float = math.pi / 4,
             min_step: float = 1e-10) -> complex:
    """log zeta(s) continued along sigma from ``sigma_start`` at fixed t (double precision).

    Samples are refined until every principal argument increment is below
    ``max_step_arg``.
    """
    sigma_t, t = s.real, s.imag
    if sigma_t >= sigma_start:
        return complex(np.log(zeta(s)[0]))
    # geometric spacing toward the target
    sig = sigma_t + (sigma_start - sigma_t) * (1 - np.linspace(0.0, 1.0, 33)) ** 2
    sig = np.unique(np.concatenate((sig, [sigma_t, sigma_start])))[::-1]
    vals = zeta(sig + 1j * t)
    while True:
        inc = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(np.abs(inc) > max_step_arg)[0]
        if bad.size == 0:
            break
        mids = 0.5 * (sig[bad] + sig[bad + 1])
        if np.min(sig[bad] - sig[bad + 1]) < min_step:
            raise ArithmeticError(f"argument tracking stalled near sigma={mids[0]}, t={t}")
        sig = np.concatenate((sig, mids))
        order = np.argsort(-sig, kind="stable")
        vals = np.concatenate((vals, zeta(mids + 1j * t)))[order]
        sig = sig[order]
    arg = float(np.angle(vals[0]) + np.sum(np.angle(vals[1:] / vals[:-1])))
    return complex(math.log(abs(vals[-1])), arg)
