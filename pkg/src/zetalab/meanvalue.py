"""Mean squares of zeta'/zeta near the critical line and residual profiles of
the partial-fraction approximations to zeta'/zeta and log zeta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from . import engine, fastzeta
from .config import DEFAULT_PRECISION, PrecisionConfig
from .errors import GridTouchesZero, QuadratureStalled, TableIncomplete, TailDominates
from .zerofinder import ZeroTable, count_main_term

TWO_PI = 2 * math.pi
GL_NODES = 8
REL_TOL = 1e-6
MAX_LEVELS = 9
WINDOWS = ("unit", "loglog", "one_pole")


@dataclass(frozen=True)
class MeanValueResult:
    t_cap: float
    a: float
    sigma: float
    integral: float
    comparator_B: float
    comparator_C: float
    comparator_D: float
    comparator_T2: float
    quad_error_est: float


@dataclass(frozen=True)
class ResidualProfile:
    t: np.ndarray
    sigma: np.ndarray
    residual: np.ndarray
    scale: np.ndarray
    sup_ratio: float
    label: str = ""

    @property
    def ratio(self) -> np.ndarray:
        return self.residual / self.scale


def _profile(t, sigma, residual, scale, label) -> ResidualProfile:
    t, sigma, residual, scale = (np.asarray(x, dtype=np.float64) for x in (t, sigma, residual, scale))
    if not np.all(np.isfinite(residual)):
        raise ArithmeticError(f"non-finite residual in profile {label}")
    sup = float(np.max(residual / scale)) if residual.size else 0.0
    return ResidualProfile(t, sigma, residual, scale, sup, label)


# --- comparators -----------------------------------------------------------------------------


def comparators(a: float, t_cap: float) -> dict[str, float]:
    base = t_cap * math.log(t_cap) ** 2
    comp_c = base / (2 * a)
    return {
        "B": base / (4 * a * a),
        "C": comp_c,
        "D": -math.expm1(-2 * a) / (4 * a * a) * base,
        "T2": comp_c * (1 - math.log(TWO_PI * math.e) / math.log(t_cap)),
    }


def lorentzian_block_integral(d: float, gamma: float, t_lo: float, t_hi: float) -> float:
    """Exact value of the integral of dt / (d^2 + (t - gamma)^2) over [t_lo, t_hi]."""
    if not d > 0:
        raise ValueError("d must be positive")
    if t_hi == t_lo:
        return 0.0
    return (math.atan((t_hi - gamma) / d) - math.atan((t_lo - gamma) / d)) / d


# --- pole-aware quadrature ---------------------------------------------------------------------


def _composite(a: np.ndarray, b: np.ndarray, counts: np.ndarray):
    """Composite Gauss-Legendre nodes on segments [a_i, b_i] with counts_i equal panels."""
    x, w = leggauss(GL_NODES)
    seg = np.repeat(np.arange(len(a)), counts)
    k = np.arange(int(counts.sum())) - np.repeat(np.cumsum(counts) - counts, counts)
    h = ((b - a) / counts)[seg]
    left = a[seg] + h * k
    nodes = left[:, None] + (0.5 * h)[:, None] * (x + 1)[None, :]
    weights = (0.5 * h)[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel(), np.repeat(seg, GL_NODES)


CORE_WIDTHS = 20.0   # core half-width around each pole, in units of d
OUTER_STEP = 0.25    # initial panel length away from the pole
CORE_STEP = 0.25     # initial panel width in theta, i.e. t-step <= d/4 at the pole


def block_quadrature(integrand: Callable[[np.ndarray], np.ndarray], d: float, gammas, lo, hi,
                     rel_tol: float = REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Integrals of ``integrand(t)`` over blocks [lo_k, hi_k], each holding one near-pole at gamma_k.

    Within ``CORE_WIDTHS * d`` of gamma_k the substitution t = gamma + d tan(theta)
    flattens the Lorentzian peak; the rest of the block uses Gauss-Legendre
    panels in t.  Panel counts double per block until the block value moves
    by less than a tenth of ``rel_tol``.  Returns (values, error estimates).
    """
    gammas, lo, hi = (np.asarray(x, dtype=np.float64) for x in (gammas, lo, hi))
    r = CORE_WIDTHS * d
    c_lo = np.clip(gammas - r, lo, hi)
    c_hi = np.clip(gammas + r, lo, hi)
    th_lo = np.arctan((c_lo - gammas) / d)
    th_hi = np.arctan((c_hi - gammas) / d)
    base_core = np.maximum(1, np.ceil((th_hi - th_lo) / CORE_STEP)).astype(np.int64)
    base_left = np.maximum(1, np.ceil((c_lo - lo) / OUTER_STEP)).astype(np.int64)
    base_right = np.maximum(1, np.ceil((hi - c_hi) / OUTER_STEP)).astype(np.int64)

    def evaluate(idx: np.ndarray, scale: int) -> np.ndarray:
        m = len(idx)
        out = np.zeros(m)
        th, wt, seg = _composite(th_lo[idx], th_hi[idx], base_core[idx] * scale)
        tan = np.tan(th)
        f = integrand(gammas[idx][seg] + d * tan)
        out += np.bincount(seg, weights=f * d * (1 + tan * tan) * wt, minlength=m)
        for a, b, base in ((lo, c_lo, base_left), (c_hi, hi, base_right)):
            sel = np.nonzero(b[idx] > a[idx])[0]
            if sel.size:
                tt, wt, seg = _composite(a[idx][sel], b[idx][sel], base[idx][sel] * scale)
                part = np.bincount(seg, weights=integrand(tt) * wt, minlength=sel.size)
                out[sel] += part
        return out

    values = np.zeros(len(gammas))
    errors = np.zeros(len(gammas))
    active = np.arange(len(gammas))
    prev = evaluate(active, 1)
    prev_change = None
    scale = 1
    for level in range(1, MAX_LEVELS):
        scale *= 2
        cur = evaluate(active, scale)
        change = np.abs(cur - prev)
        done = change <= 0.1 * rel_tol * np.abs(cur)
        if prev_change is not None and level >= 3:
            stalled = ~done & (change >= prev_change)
            if np.any(stalled):
                k = active[np.nonzero(stalled)[0][0]]
                raise QuadratureStalled(f"block [{lo[k]}, {hi[k]}] around gamma={gammas[k]} is not converging")
        values[active] = cur
        errors[active] = change
        keep = ~done
        active = active[keep]
        if active.size == 0:
            return values, errors
        prev, prev_change = cur[keep], change[keep]
    raise QuadratureStalled(f"{active.size} blocks unconverged after {MAX_LEVELS} refinements")


def _blocks(table: ZeroTable, t_lo: float, t_hi: float):
    """Partition [t_lo, t_hi] at midpoints between consecutive ordinates; one ordinate per block."""
    g = table.gammas
    k = int(np.searchsorted(g, t_hi, side="right"))
    use = g[: k + 1]                    # includes the first ordinate above t_hi when present
    mids = 0.5 * (use[1:] + use[:-1])
    mids = mids[(mids > t_lo) & (mids < t_hi)]
    edges = np.concatenate(([t_lo], mids, [t_hi]))
    centers = use[: len(edges) - 1]
    return centers, edges[:-1], edges[1:]


def mean_square_logderiv(a: float, t_cap: float, table: ZeroTable, cfg: PrecisionConfig = DEFAULT_PRECISION,
                         *, integrand: Callable[[np.ndarray, float], np.ndarray] | None = None,
                         rel_tol: float = REL_TOL) -> MeanValueResult:
    """Integral over [1, T] of |zeta'/zeta(sigma + it)|^2 with sigma = 1/2 + a/log T."""
    # log(T)/2 keeps sigma <= 1 and admits a = 2 at T = 1000
    if not 0 < a <= math.log(t_cap) / 2:
        raise ValueError(f"a must lie in (0, log(T)/2], got {a}")
    if not table.certified or table.t_max < t_cap + 1:
        raise TableIncomplete(f"mean square to {t_cap} needs a certified table to {t_cap + 1}")
    sigma = 0.5 + a / math.log(t_cap)
    d = sigma - 0.5
    if integrand is None:
        def f(t):
            return np.abs(fastzeta.logderiv(sigma + 1j * t)) ** 2
    else:
        def f(t):
            return integrand(t, sigma)
    centers, lo, hi = _blocks(table, 1.0, t_cap)
    vals, errs = block_quadrature(f, d, centers, lo, hi, rel_tol)
    comp = comparators(a, t_cap)
    return MeanValueResult(float(t_cap), float(a), sigma, math.fsum(vals),
                           comp["B"], comp["C"], comp["D"], comp["T2"], math.fsum(errs))


# --- residual profiles --------------------------------------------------------------------------


def _check_grid(t_grid: np.ndarray, table: ZeroTable, clearance: float, upper: float):
    if not table.certified:
        raise TableIncomplete("profiles need a certified zero table")
    if t_grid.size and (t_grid.min() < 10 or t_grid.max() > upper):
        raise ValueError(f"grid must lie in [10, {upper}]")
    g = table.gammas
    idx = np.clip(np.searchsorted(g, t_grid), 1, len(g) - 1)
    dist = np.minimum(np.abs(t_grid - g[idx - 1]), np.abs(t_grid - g[idx]))
    if np.any(dist < clearance):
        bad = float(t_grid[int(np.argmin(dist))])
        raise GridTouchesZero(f"grid point t={bad} is within {clearance} of a zero")


def _window_sum(s: complex, gammas: np.ndarray) -> complex:
    terms = 1.0 / (s - (0.5 + 1j * gammas))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def decomposition_residual(t_grid, c: float, window: str, table: ZeroTable,
                           cfg: PrecisionConfig = DEFAULT_PRECISION, *,
                           logderiv: Callable[[np.ndarray], np.ndarray] | None = None) -> ResidualProfile:
    """|zeta'/zeta(s) - sum over the window of 1/(s - rho)| at s = 1/2 + c/log t + it, scaled by log t.

    ``logderiv`` replaces zeta'/zeta (used with synthetic tables).
    """
    if window not in WINDOWS:
        raise ValueError(f"window must be one of {WINDOWS}")
    t = np.asarray(t_grid, dtype=np.float64)
    _check_grid(t, table, cfg.zero_clearance, table.t_max - 1)
    sigma = 0.5 + c / np.log(t)
    s = sigma + 1j * t
    ld = (logderiv or fastzeta.logderiv)(s)
    res = np.empty(len(t))
    for i, (ti, si) in enumerate(zip(t, s)):
        if window == "unit":
            near = table.gammas_near(ti, 1.0)
        elif window == "loglog":
            near = table.gammas_near(ti, 1.0 / math.log(math.log(ti)))
        else:
            near = np.array([_nearest_gamma(ti, table.gammas)])
        res[i] = abs(ld[i] - _window_sum(si, near))
    return _profile(t, sigma, res, np.log(t), f"decomposition/{window}")


def _nearest_gamma(t: float, g: np.ndarray) -> float:
    # same tie rule as nearest_zero, but clamps below gamma_1 and trusts the table as given
    i = int(np.searchsorted(g, t))
    if i == 0:
        return float(g[0])
    if i == len(g) or 2 * t <= g[i - 1] + g[i]:
        return float(g[i - 1])
    return float(g[i])


def table_model_logderiv(table: ZeroTable) -> Callable[[np.ndarray], np.ndarray]:
    """Partial-fraction model sum over |gamma - t| <= 1 of 1/(s - rho) built from the table alone."""
    def model(s):
        s = np.atleast_1d(s)
        return np.array([_window_sum(si, table.gammas_near(si.imag, 1.0)) for si in s])
    return model


def close_pair_probe(table: ZeroTable, t_lo: float, t_hi: float, c: float = 0.01) -> tuple[int, float, float]:
    """One-pole residual ratio at the closest adjacent pair in (t_lo, t_hi], on the table's own model.

    At s = 1/2 + c/log t + i gamma_{n+1} the partner pole contributes about
    1/((gamma_{n+1} - gamma_n) log t) to the ratio, so a near-multiple pair in
    the table drives it up.  Returns (n, normalised gap, ratio).
    """
    g = table.gammas
    lo = int(np.searchsorted(g, t_lo, side="right"))
    hi = int(np.searchsorted(g, t_hi, side="right"))
    if hi - lo < 2:
        raise TableIncomplete("close-pair probe needs two ordinates in range")
    gaps = np.diff(g[lo:hi]) * np.log(g[lo:hi - 1])
    k = lo + int(np.argmin(gaps))
    t = float(g[k + 1])
    s = complex(0.5 + c / math.log(t), t)
    model = table_model_logderiv(table)(s)[0]
    residual = abs(model - 1.0 / (s - complex(0.5, t)))
    return k + 1, float(gaps[k - lo]), residual / math.log(t)


def _sigma_samples(t: float, lo: float, hi: float, n: int) -> np.ndarray:
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def logderiv_bound_profile(t_grid, sigma_rule: tuple[float, float], table: ZeroTable,
                           cfg: PrecisionConfig = DEFAULT_PRECISION, *, n_sigma: int = 5) -> ResidualProfile:
    """|zeta'/zeta(sigma + it)| against (log t)^(2 - 2 sigma) for 1/2 + c/log t <= sigma <= sigma1."""
    c, sigma1 = sigma_rule
    t = np.asarray(t_grid, dtype=np.float64)
    _check_grid(t, table, cfg.zero_clearance, table.t_max)
    tt, ss = [], []
    for ti in t:
        lo = 0.5 + c / math.log(ti)
        if lo > sigma1:
            continue
        for sg in _sigma_samples(ti, lo, sigma1, n_sigma):
            tt.append(ti)
            ss.append(sg)
    tt, ss = np.array(tt), np.array(ss)
    res = np.abs(fastzeta.logderiv(ss + 1j * tt))
    return _profile(tt, ss, res, np.log(tt) ** (2 - 2 * ss), "corollary1")


def log_zeta_fast(s: complex, table: ZeroTable, cfg: PrecisionConfig = DEFAULT_PRECISION) -> complex:
    """Double precision log zeta on the same branch as :func:`engine.log_zeta`."""
    engine.check_path_clearance(s.real, s.imag, table, cfg.zero_clearance)
    return fastzeta.log_zeta(s, sigma_start=10.0)


def log_zeta_bound_profile(t_grid, sigma_rule: tuple[float, float], table: ZeroTable,
                           cfg: PrecisionConfig = DEFAULT_PRECISION, *, n_sigma: int = 4) -> dict[str, ResidualProfile]:
    """Three families: |log zeta| (sigma >= 1/2 + c/log t), log|zeta| two-sided envelope and |arg zeta|
    (both for 1/2 < sigma <= 1/2 + c/log log t)."""
    c, sigma1 = sigma_rule
    t = np.asarray(t_grid, dtype=np.float64)
    _check_grid(t, table, cfg.zero_clearance, table.t_max - 1)
    fam = {"log_zeta": ([], [], [], []), "log_abs": ([], [], [], []), "arg": ([], [], [], [])}

    def add(name, ti, sg, r, sc):
        for lst, v in zip(fam[name], (ti, sg, r, sc)):
            lst.append(v)

    for ti in t:
        lt = math.log(ti)
        llt = math.log(lt)
        lo = 0.5 + c / lt
        if lo <= sigma1:
            for sg in _sigma_samples(ti, lo, sigma1, n_sigma):
                v = log_zeta_fast(complex(sg, ti), table, cfg)
                add("log_zeta", ti, sg, abs(v), lt ** (2 - 2 * sg) / llt)
        hi = 0.5 + c / llt
        for sg in np.linspace(0.5, hi, n_sigma + 1)[1:]:
            v = log_zeta_fast(complex(sg, ti), table, cfg)
            upper = lt / llt
            lower = upper * math.log(2 / ((sg - 0.5) * llt))
            add("log_abs", ti, sg, abs(v.real), upper if v.real >= 0 else abs(lower))
            add("arg", ti, sg, abs(v.imag), upper)
    return {name: _profile(*cols, name) for name, cols in fam.items()}


# --- partial-fraction identity for Re zeta'/zeta ---------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    s: complex
    residual: float          # |LHS - RHS|
    zero_sum: float          # sum over all zeros of Re 1/(s - rho), tail included
    tail: float              # contribution attributed to ordinates above the table
    tail_error: float        # bound on the error of that tail approximation
    deviation_26: float      # |zero_sum - (1/2) log t|


def _pair_kernel(sigma: float, t: float, u):
    d = sigma - 0.5
    return d / (d * d + (t - u) ** 2) + d / (d * d + (t + u) ** 2)


S_BOUND = 3.0  # desk-range bound on |S(u)| used for the tail error


def identity_2_3_check(s: complex, table: ZeroTable, cfg: PrecisionConfig = DEFAULT_PRECISION,
                       *, tail_budget: float = 1e-4) -> IdentityCheck:
    """Evaluate both sides of the partial-fraction formula for Re zeta'/zeta.

    The zero sum pairs rho with its conjugate.  Ordinates above ``table.t_max``
    enter through the smooth density with an endpoint correction for the
    observed count; the remaining error is at most S_BOUND times the kernel at
    t_max, and that bound must stay within ``tail_budget``.
    """
    sigma, t = float(s.real), abs(float(s.imag))
    if t < 10:
        raise ValueError("identity check requires t >= 10")
    if not table.certified or table.t_max < t + 10:
        raise TableIncomplete(f"identity check at t={t} needs a certified table to {t + 10}")
    if sigma == 0.5 and np.any(np.abs(table.gammas_near(t, 1.0) - t) < cfg.zero_clearance):
        raise GridTouchesZero(f"s={s} sits on a zero")
    big_t = table.t_max
    tail_error = S_BOUND * _pair_kernel(sigma, t, big_t)
    if tail_error > tail_budget:
        raise TailDominates(f"tail error bound {tail_error:.3g} exceeds {tail_budget:.3g}; t too close to t_max")
    direct = math.fsum(_pair_kernel(sigma, t, table.gammas))
    smooth, _ = integrate.quad(lambda u: _pair_kernel(sigma, t, u) * math.log(u / TWO_PI) / TWO_PI,
                               big_t, np.inf, epsabs=1e-15, epsrel=1e-12, limit=400)
    n_smooth = count_main_term(big_t) + 7 / 8
    tail = smooth - _pair_kernel(sigma, t, big_t) * (len(table) - n_smooth)
    zero_sum = direct + tail

    ctx = engine.ctx_for(cfg)
    sp = ctx.mpc(sigma, float(s.imag))
    lhs = float(ctx.re(engine.zeta_logderiv(sp, cfg)))
    rhs = float(ctx.log(ctx.pi) / 2 - ctx.re(1 / (sp - 1)) - ctx.re(engine.digamma(sp / 2 + 1, cfg)) / 2) + zero_sum
    return IdentityCheck(complex(sigma, float(s.imag)), abs(lhs - rhs), zero_sum, tail, tail_error,
                         abs(zero_sum - 0.5 * math.log(t)))
