"""Arbitrary precision evaluation of zeta, its derivatives and companion functions.

Everything here runs on a private mpmath context per working precision, so
callers never need to touch the global ``mpmath.mp`` state.  Values are
returned as ``mpc``/``mpf`` numbers of that context.

zeta and its derivatives come from Euler-Maclaurin summation

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_{k=1}^{M} B_2k/(2k)! s(s+1)...(s+2k-2) N^(1-s-2k) + R_M

with |R_M| bounded by the first omitted term times |s+2M+1|/(sigma+2M+1).
Derivatives are taken term by term.
"""

from __future__ import annotations

import math
from functools import lru_cache

from mpmath.ctx_mp import MPContext
from mpmath.libmp import MPZ, from_man_exp, to_fixed

from .config import DEFAULT_PRECISION, PrecisionConfig
from .errors import (
    NearZero,
    NonFiniteValue,
    PathTooCloseToZero,
    PoleAtNonpositiveInteger,
    PoleAtOne,
    PoleInFactor,
    PrecisionExhausted,
    TableIncomplete,
)

_MAX_BERNOULLI = 600
_N_FACTORS = (1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


@lru_cache(maxsize=None)
def context(dps: int) -> MPContext:
    ctx = MPContext()
    ctx.dps = dps
    return ctx


def ctx_for(cfg: PrecisionConfig) -> MPContext:
    return context(cfg.guard_digits)


# Memo tables below only ever grow and hold exact constants.
_LOGS: dict[int, list] = {}
_SPF: list[int] = [0, 1]
_BERN: dict[int, list] = {}
_FIXED_LOGS: dict[tuple[int, int], list] = {}


def _smallest_prime_factors(n: int) -> list[int]:
    global _SPF
    if len(_SPF) > n:
        return _SPF
    size = max(n + 1, 2 * len(_SPF))
    spf = list(range(size))
    for p in range(2, int(size**0.5) + 1):
        if spf[p] == p:
            for m in range(p * p, size, p):
                if spf[m] == m:
                    spf[m] = p
    _SPF = spf
    return spf


def _log_table(ctx: MPContext, n: int) -> list:
    table = _LOGS.setdefault(ctx.prec, [ctx.zero, ctx.zero])
    if len(table) <= n:
        spf = _smallest_prime_factors(n)
        for m in range(len(table), n + 1):
            p = spf[m]
            table.append(ctx.log(m) if p == m else table[p] + table[m // p])
    return table


def _fixed_logs(ctx: MPContext, n: int, wp: int) -> list:
    key = (ctx.prec, wp)
    table = _FIXED_LOGS.get(key)
    if table is None or len(table) <= n:
        logs = _log_table(ctx, n)
        table = [to_fixed(v._mpf_, wp) for v in logs[: n + 1]]
        _FIXED_LOGS[key] = table
    return table


def _direct_sum(ctx: MPContext, s, n: int, order: int) -> list:
    """sum_{k<n} (-log k)^j k^-s for j <= order, in fixed point.

    k^-s is exponentiated only for primes; composites reuse the complete
    multiplicativity k^-s = p^-s (k/p)^-s.
    """
    wp = ctx.prec + 24
    logs = _log_table(ctx, n)
    flogs = _fixed_logs(ctx, n, wp)
    spf = _smallest_prime_factors(n)
    one = MPZ(1) << wp
    pr = [MPZ(0), one]
    pi = [MPZ(0), MPZ(0)]
    s0r, s0i = one, MPZ(0)
    s1r = s1i = s2r = s2i = MPZ(0)
    neg_s = -s
    for k in range(2, n):
        p = spf[k]
        if p == k:
            w = ctx.exp(neg_s * logs[k])
            re = to_fixed(w.real._mpf_, wp)
            im = to_fixed(w.imag._mpf_, wp)
        else:
            a, b = pr[p], pi[p]
            q = k // p
            c, d = pr[q], pi[q]
            re = (a * c - b * d) >> wp
            im = (a * d + b * c) >> wp
        pr.append(re)
        pi.append(im)
        s0r += re
        s0i += im
        if order >= 1:
            lg = flogs[k]
            lr = (lg * re) >> wp
            li = (lg * im) >> wp
            s1r -= lr
            s1i -= li
            if order >= 2:
                s2r += (lg * lr) >> wp
                s2i += (lg * li) >> wp

    def back(x, y):
        return ctx.mpc(ctx.make_mpf(from_man_exp(x, -wp)), ctx.make_mpf(from_man_exp(y, -wp)))

    out = [back(s0r, s0i), back(s1r, s1i), back(s2r, s2i)]
    return out[: order + 1]


def _bernoulli_coeffs(ctx: MPContext, m: int) -> list:
    """B_2k/(2k)! for k = 0..m."""
    table = _BERN.setdefault(ctx.prec, [ctx.one])
    k = len(table)
    while k <= m:
        table.append(ctx.bernoulli(2 * k) / ctx.factorial(2 * k))
        k += 1
    return table


def _as_mpc(ctx: MPContext, s):
    z = ctx.mpc(s)
    if not (ctx.isfinite(z.real) and ctx.isfinite(z.imag)):
        raise NonFiniteValue(f"non-finite argument {s!r}")
    return z


def _check_finite(ctx: MPContext, value, what: str):
    if not (ctx.isfinite(value.real) and ctx.isfinite(value.imag)):
        raise NonFiniteValue(f"{what} evaluated to a non-finite value")
    return value


def plan_terms(s: complex, tol: float, n_min: int, order: int = 0) -> tuple[int, int]:
    """Choose (N, M) so the Euler-Maclaurin remainder estimate falls below ``tol``.

    Uses |B_2k|/(2k)! ~ 2/(2 pi)^2k and picks the cheapest admissible N among a
    few multiples of the minimum.  Raises PrecisionExhausted when none works.
    """
    sigma, t = s.real, s.imag
    n0 = max(n_min, math.ceil(abs(t) / (2 * math.pi)) + 10)
    log_tol = math.log(tol)
    best = None
    for factor in _N_FACTORS:
        n = math.ceil(n0 * factor)
        log_n = math.log(n)
        # derivative jets carry up to (log N + |s|/k)^order extra; keep a margin
        log_tol_n = log_tol - math.log(10.0) - order * math.log(1 + log_n + abs(s))
        log_2pin = math.log(2 * math.pi * n)
        log_prod = 0.0
        prev = math.inf
        for k in range(1, _MAX_BERNOULLI):
            # |P_k(s)| picks up (s+2k-3)(s+2k-2), or just s for k == 1; factors are
            # floored at 1 so vanishing values do not hide nonzero derivatives
            if k == 1:
                log_prod = math.log(max(abs(s), 1.0))
            else:
                log_prod += math.log(max(abs(s + 2 * k - 3), 1.0)) + math.log(max(abs(s + 2 * k - 2), 1.0))
            log_term = math.log(2.0) + log_prod - 2 * k * log_2pin + (1 - sigma) * log_n
            denom = sigma + 2 * k - 1
            if denom > 0:
                log_bound = log_term + math.log(max(abs(s + 2 * k - 1), 1.0) / denom)
                if log_bound < log_tol_n:
                    cost = n + 4 * (k - 1)
                    if best is None or cost < best[0]:
                        best = (cost, n, k - 1)
                    break
            if log_term > prev and k > 4:
                break
            prev = log_term
        if best is not None and n > best[0]:
            break
    if best is None:
        raise PrecisionExhausted(f"Euler-Maclaurin cannot reach tol={tol:g} at s={s}")
    return best[1], best[2]


def _em_jets(ctx: MPContext, s, cfg: PrecisionConfig, order: int):
    """Return [zeta^(j)(s) for j <= order] and the remainder bound."""
    s_c = complex(s)
    n, m = plan_terms(s_c, cfg.tail_tol, cfg.em_terms_min, order)
    logs = _log_table(ctx, n)
    bern = _bernoulli_coeffs(ctx, m + 2)

    acc = _direct_sum(ctx, s, n, order)

    big_l = logs[n]
    e = ctx.exp(-s * big_l)  # N^-s
    h = 1 / (s - 1)
    # N^(1-s)/(s-1) and N^-s/2 with their derivatives
    main = [n * e * h, n * e * (-h * h - big_l * h), n * e * (2 * h**3 + 2 * big_l * h * h + big_l**2 * h)]
    half = [e / 2, -big_l * e / 2, big_l**2 * e / 2]
    for j in range(order + 1):
        acc[j] += main[j] + half[j]

    # P_k(s) jets (P, P', P'') built by multiplying in (s + j)
    p0, p1, p2 = ctx.one, ctx.zero, ctx.zero
    n_pow = ctx.mpf(n)  # N^(2k-1)
    n2 = ctx.mpf(n) ** 2

    def factor(p0, p1, p2, q):
        return p0 * q, p1 * q + p0, p2 * q + 2 * p1

    def term(k, p0, p1, p2, n_pow):
        c = bern[k] * e / n_pow
        out = [c * p0]
        if order >= 1:
            out.append(c * (p1 - big_l * p0))
        if order >= 2:
            out.append(c * (p2 - 2 * big_l * p1 + big_l**2 * p0))
        return out

    for k in range(1, m + 1):
        if k == 1:
            p0, p1, p2 = factor(p0, p1, p2, s)
        else:
            p0, p1, p2 = factor(p0, p1, p2, s + (2 * k - 3))
            p0, p1, p2 = factor(p0, p1, p2, s + (2 * k - 2))
            n_pow *= n2
        for j, v in enumerate(term(k, p0, p1, p2, n_pow)):
            acc[j] += v

    # remainder bound from the first omitted term
    k = m + 1
    if k == 1:
        q0, q1, q2 = factor(p0, p1, p2, s)
        np_next = n_pow
    else:
        q0, q1, q2 = factor(p0, p1, p2, s + (2 * k - 3))
        q0, q1, q2 = factor(q0, q1, q2, s + (2 * k - 2))
        np_next = n_pow * n2
    nxt = term(k, q0, q1, q2, np_next)
    sigma = ctx.re(s)
    ratio = abs(s + 2 * m + 1) / (sigma + 2 * m + 1)
    bound = max(abs(v) for v in nxt) * ratio
    if bound > cfg.tail_tol:
        raise PrecisionExhausted(f"remainder bound {float(bound):.3g} exceeds tail_tol at s={s_c}")
    return acc, bound


def _guard_pole(ctx, s, cfg):
    if abs(s - 1) <= cfg.tail_tol:
        raise PoleAtOne("zeta has a pole at s = 1")


def zeta(s, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """zeta(s) with absolute error below ``cfg.tail_tol``."""
    ctx = ctx_for(cfg)
    s = _as_mpc(ctx, s)
    _guard_pole(ctx, s, cfg)
    (z,), _ = _em_jets(ctx, s, cfg, 0)
    return _check_finite(ctx, z, "zeta")


def zeta_prime(s, cfg: PrecisionConfig = DEFAULT_PRECISION):
    ctx = ctx_for(cfg)
    s = _as_mpc(ctx, s)
    _guard_pole(ctx, s, cfg)
    (_, zp), _ = _em_jets(ctx, s, cfg, 1)
    return _check_finite(ctx, zp, "zeta'")


def zeta_jets(s, cfg: PrecisionConfig = DEFAULT_PRECISION, order: int = 2):
    """zeta and its first ``order`` derivatives from one shared summation."""
    ctx = ctx_for(cfg)
    s = _as_mpc(ctx, s)
    _guard_pole(ctx, s, cfg)
    jets, _ = _em_jets(ctx, s, cfg, order)
    return [_check_finite(ctx, v, "zeta jet") for v in jets]


def zeta_logderiv(s, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """zeta'(s)/zeta(s); raises NearZero when |zeta(s)| <= 10*tail_tol."""
    z, zp = zeta_jets(s, cfg, 1)
    if abs(z) <= 10 * cfg.tail_tol:
        raise NearZero(f"|zeta(s)| = {float(abs(z)):.3g} at s={complex(s)}")
    return zp / z


# --- Gamma family ------------------------------------------------------------


def _stirling_shift(ctx, z, tol, floor):
    """Shift count m so that Re(z+m) >= floor and the Stirling tail is below tol."""
    # B_2k/(2k(2k-1) w^(2k-1)) ~ 2 (2k)!/((2 pi |w|)^2k) is minimal near k = pi |w|,
    # where it is about exp(-2 pi |w|).
    need = max(floor, -math.log(tol) / (2 * math.pi) + 2)
    x = float(ctx.re(z))
    y = abs(float(ctx.im(z)))
    m = 0
    while math.hypot(x + m, y) < need or x + m < floor:
        m += 1
    return m


def _stirling_terms(ctx, w, tol, power_offset):
    """Yield B_2k/(2k) / w^(2k - power_offset) until the terms fall below tol."""
    bern_k = 1
    w2 = w * w
    wp = w ** (2 - power_offset)
    while True:
        b = ctx.bernoulli(2 * bern_k)
        yield bern_k, b, wp
        wp *= w2
        bern_k += 1
        if bern_k > _MAX_BERNOULLI:
            raise PrecisionExhausted("Stirling series did not converge")


def _check_nonpositive_integer(ctx, z, cfg, error):
    x, y = float(ctx.re(z)), float(ctx.im(z))
    if x <= 0.5 and abs(y) <= cfg.zero_clearance and abs(x - round(x)) <= cfg.zero_clearance:
        raise error(f"pole at nonpositive integer near {complex(z)}")


def loggamma(z, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Analytic branch of log Gamma(z), continuous off the negative real axis."""
    ctx = ctx_for(cfg)
    z = _as_mpc(ctx, z)
    _check_nonpositive_integer(ctx, z, cfg, PoleAtNonpositiveInteger)
    tol = cfg.tail_tol / 100
    m = _stirling_shift(ctx, z, tol, 10)
    w = z + m
    acc = (w - ctx.mpf(0.5)) * ctx.log(w) - w + ctx.log(2 * ctx.pi) / 2
    for k, b, wp in _stirling_terms(ctx, w, tol, 1):
        term = b / (2 * k * (2 * k - 1) * wp)
        acc += term
        if abs(term) < tol:
            break
    for j in range(m):
        acc -= ctx.log(z + j)
    return acc


def digamma(s, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Gamma'(s)/Gamma(s) by upward recurrence to Re >= 10 and the asymptotic series."""
    ctx = ctx_for(cfg)
    z = _as_mpc(ctx, s)
    _check_nonpositive_integer(ctx, z, cfg, PoleAtNonpositiveInteger)
    tol = cfg.tail_tol / 100
    m = _stirling_shift(ctx, z, tol, 10)
    w = z + m
    acc = ctx.log(w) - 1 / (2 * w)
    for k, b, wp in _stirling_terms(ctx, w, tol, 0):
        term = b / (2 * k * wp)
        acc -= term
        if abs(term) < tol:
            break
    for j in range(m):
        acc -= 1 / (z + j)
    return acc


def chi_factor(s, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """chi(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s), so that zeta(s) = chi(s) zeta(1-s).

    Gamma(1-s) has poles at s = 1, 2, 3, ...; those points are refused even
    where the sine factor makes the singularity removable.
    """
    ctx = ctx_for(cfg)
    s = _as_mpc(ctx, s)
    x, y = float(ctx.re(s)), float(ctx.im(s))
    if x >= 0.5 and abs(y) <= cfg.zero_clearance and abs(x - round(x)) <= cfg.zero_clearance:
        raise PoleInFactor(f"chi(s) is evaluated through Gamma(1-s), singular at s={complex(s)}")
    gamma_1ms = ctx.exp(loggamma(1 - s, cfg))
    return ctx.power(2, s) * ctx.power(ctx.pi, s - 1) * ctx.sinpi(s / 2) * gamma_1ms


def _theta_series_terms(ctx, t, tol):
    """Asymptotic series of theta(t); returns None if it cannot reach tol."""
    acc = t / 2 * ctx.log(t / (2 * ctx.pi)) - t / 2 - ctx.pi / 8
    t2 = t * t
    tp = t
    prev = None
    for k in range(1, _MAX_BERNOULLI):
        b = abs(ctx.bernoulli(2 * k))
        coeff = (1 - ctx.mpf(2) ** (1 - 2 * k)) * b / (4 * k * (2 * k - 1))
        term = coeff / tp
        if prev is not None and abs(term) > abs(prev):
            return None
        acc += term
        if abs(term) < tol:
            return acc
        prev = term
        tp *= t2
    return None


def rs_theta(t, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Riemann-Siegel theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log pi."""
    ctx = ctx_for(cfg)
    t = ctx.mpf(t)
    if not t > 0:
        raise ValueError("rs_theta requires t > 0")
    tol = cfg.tail_tol / 10
    # the series in 1/t drops a term of size exp(-pi t)/2
    if t >= 10 and ctx.exp(-ctx.pi * t) < tol:
        value = _theta_series_terms(ctx, t, tol)
        if value is not None:
            return value
    return ctx.im(loggamma(ctx.mpc(0.25, t / 2), cfg)) - t / 2 * ctx.log(ctx.pi)


def hardy_z(t, cfg: PrecisionConfig = DEFAULT_PRECISION):
    """Z(t) = exp(i theta(t)) zeta(1/2 + it), real for real t."""
    ctx = ctx_for(cfg)
    t = ctx.mpf(t)
    if not t > 0:
        raise ValueError("hardy_z requires t > 0")
    z = ctx.expj(rs_theta(t, cfg)) * zeta(ctx.mpc(0.5, t), cfg)
    if abs(ctx.im(z)) > 10 * cfg.tail_tol * max(1, abs(z)):
        raise PrecisionExhausted(f"Z({float(t)}) has imaginary part {float(ctx.im(z)):.3g}")
    return ctx.re(z)


# --- log zeta ------------------------------------------------------------------


def _principal_arg_step(ctx, new, old):
    return ctx.arg(new / old)


def log_zeta(s, table, cfg: PrecisionConfig = DEFAULT_PRECISION, *, max_step_arg: float = math.pi / 4):
    """Branch of log zeta(s) continued along sigma from 10 down to Re s at fixed t.

    ``table`` is a ZeroTable (anything with ``gammas`` and ``t_max``); it is used
    to verify that the horizontal path keeps ``cfg.zero_clearance`` away from
    every zero.  The imaginary part is arg zeta(s).
    """
    ctx = ctx_for(cfg)
    s = _as_mpc(ctx, s)
    sigma_target = ctx.re(s)
    t = ctx.im(s)
    tf = float(t)
    if tf < 10:
        raise ValueError("log_zeta requires t >= 10")
    check_path_clearance(float(sigma_target), tf, table, cfg.zero_clearance)
    start = ctx.mpf(10)
    z = zeta(ctx.mpc(start, t), cfg)
    if sigma_target >= start:
        z = zeta(s, cfg)
        return ctx.log(z)
    arg = ctx.arg(z)
    sigma = start
    step = ctx.mpf(0.5)
    min_step = ctx.mpf(10) ** (-12)
    while sigma > sigma_target:
        trial = max(sigma - step, sigma_target)
        z_new = zeta(ctx.mpc(trial, t), cfg)
        d = _principal_arg_step(ctx, z_new, z)
        if abs(d) > max_step_arg:
            step /= 2
            if step < min_step:
                raise PrecisionExhausted("argument tracking step underflow")
            continue
        arg += d
        sigma, z = trial, z_new
        step *= 1.5
    return ctx.mpc(ctx.log(abs(z)), arg)


def check_path_clearance(sigma_target: float, t: float, table, clearance: float) -> None:
    """Validate table coverage and horizontal-path clearance for log zeta at height t."""
    if table.t_max < t + 1:
        raise TableIncomplete(f"zero table reaches {table.t_max}, needs {t + 1}")
    if sigma_target >= 10:
        return
    dx = max(0.0, 0.5 - sigma_target)
    for g in table.gammas_near(t, 1.0 + clearance):
        dist = abs(t - g) if dx > 0 or sigma_target <= 0.5 else math.hypot(sigma_target - 0.5, t - g)
        if dist < clearance:
            raise PathTooCloseToZero(f"path at t={t} passes within {dist:.3g} of zero {g}")
