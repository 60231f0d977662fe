"""Statistics of zero ordinates: gaps, M_n sums, form factor, pair correlation,
large-gap census, pairing of small gaps with zeros of zeta', extreme values of |Z|.

All functions are pure folds over an immutable :class:`ZeroTable`.  Sums go
through ``math.fsum`` so results do not depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import engine, fastzeta
from .config import DEFAULT_PRECISION, PrecisionConfig
from .errors import (
    EmptyInput,
    InadmissibleAlphas,
    PrimesCoverageInsufficient,
    TableIncomplete,
    TooManyZeros,
    TOutsideAdmissibleInterval,
    WindowNotCovered,
)
from .zerofinder import ZeroTable, ZetaPrimeZero

TWO_PI = 2 * math.pi
MAX_FORM_FACTOR_ZEROS = 20_000
DEFAULT_C1 = 0.1
DEFAULT_DELTA = 0.3


@dataclass(frozen=True)
class GapStat:
    n: int
    gap: float
    normalized: float


@dataclass(frozen=True)
class MnStat:
    n: int
    m_n: float
    m_n_scaled: float
    s2_n: float            # sum over every other zero in the table
    s2_window: float       # the part with 0 < |gamma_m - gamma_n| <= 1
    tail_note: float       # density estimate of the contribution from ordinates above t_max


@dataclass(frozen=True)
class FormFactorResult:
    t_cap: float
    alphas: np.ndarray
    values: np.ndarray
    max_imag: float
    zero_count: int


@dataclass(frozen=True)
class PairCorrelationHistogram:
    t_cap: float
    beta_max: float
    edges: np.ndarray
    counts: np.ndarray
    density_integrals: np.ndarray  # integral of 1 - sinc^2 over each bin
    expected: np.ndarray           # density integral times (T/2pi) log T
    pair_count: int


@dataclass(frozen=True)
class PairingReport:
    n: int
    gap_norm: float
    matched: bool
    dist_norm: float


@dataclass(frozen=True)
class ExtremeResult:
    t_cap: float
    t_star: float
    max_abs: float
    comparator: float

    @property
    def ratio(self) -> float:
        return self.max_abs / self.comparator


def _require_certified(table: ZeroTable, t_cap: float | None = None, *, strict: bool = False):
    if not table.certified:
        raise TableIncomplete("statistics need a certified zero table")
    if t_cap is not None and (table.t_max < t_cap or (strict and table.t_max <= t_cap)):
        raise TableIncomplete(f"table reaches {table.t_max}, needs {t_cap}")


def weight(u):
    """Montgomery's weight 4/(4 + u^2)."""
    return 4.0 / (4.0 + np.square(u))


def pair_density(u):
    """1 - (sin(pi u)/(pi u))^2."""
    return 1.0 - np.square(np.sinc(u))


# --- gaps ------------------------------------------------------------------------------


def gap_table(table: ZeroTable) -> tuple[list[GapStat], float]:
    """Consecutive gaps and their normalisation by log gamma_n, with the minimum normalised gap."""
    _require_certified(table)
    g = table.gammas
    if len(g) < 2:
        raise TableIncomplete("gap_table needs at least two zeros")
    gaps = np.diff(g)
    norm = gaps * np.log(g[:-1])
    stats = [GapStat(i + 1, float(gaps[i]), float(norm[i])) for i in range(len(gaps))]
    return stats, float(norm.min())


def beta_prime_proxy(primes: list[ZetaPrimeZero]) -> tuple[float, list[tuple[float, float]]]:
    """min (beta' - 1/2) log gamma' and the full profile sorted by gamma'."""
    if not primes:
        raise EmptyInput("beta_prime_proxy needs at least one zero of zeta'")
    if any(p.gamma < 10 for p in primes):
        raise ValueError("beta_prime_proxy expects gamma' >= 10")
    profile = sorted((p.gamma, (p.beta - 0.5) * math.log(p.gamma)) for p in primes)
    return min(v for _, v in profile), profile


# --- M_n and square sums -----------------------------------------------------------------


def _window(g: np.ndarray, n: int) -> tuple[int, int]:
    """Index range [lo, hi) of ordinates within distance 1 of gamma_n (inclusive edges)."""
    c = g[n - 1]
    return int(np.searchsorted(g, c - 1.0, side="left")), int(np.searchsorted(g, c + 1.0, side="right"))


def _check_index(table: ZeroTable, n: int):
    if not 1 <= n <= len(table):
        raise IndexError(f"zero index {n} outside 1..{len(table)}")
    if table.gammas[n - 1] + 2.0 > table.t_max:
        raise WindowNotCovered(f"window around gamma_{n} extends past t_max={table.t_max}")


def _s2_tail(gamma: float, t_max: float) -> float:
    """Integral of the zero density log(u/2pi)/2pi against (u - gamma)^-2 beyond t_max."""
    f = lambda u: math.log(u / TWO_PI) / TWO_PI / (u - gamma) ** 2
    val, _ = integrate.quad(f, t_max, np.inf, epsabs=1e-14, epsrel=1e-10, limit=200)
    return val


def compute_Mn(table: ZeroTable, n: int) -> MnStat:
    _require_certified(table)
    _check_index(table, n)
    g = table.gammas
    c = g[n - 1]
    lo, hi = _window(g, n)
    near = np.concatenate((g[lo:n - 1], g[n:hi]))
    m_n = math.fsum(1.0 / (c - near))
    s2_window = math.fsum(1.0 / np.square(c - near))
    others = np.concatenate((g[:n - 1], g[n:]))
    s2 = math.fsum(1.0 / np.square(c - others))
    return MnStat(n, m_n, abs(m_n) / math.log(c), s2, s2_window, _s2_tail(c, table.t_max))


def compute_Mn_of_t(table: ZeroTable, n: int, t: float, c1: float = DEFAULT_C1) -> float:
    """sum over 0 < |gamma_m - gamma_n| <= 1 of 1/(t - gamma_m), for t between the neighbours."""
    _require_certified(table)
    _check_index(table, n)
    g = table.gammas
    lg = math.log(g[n - 1])
    left = g[n - 2] + c1 / lg if n >= 2 else 0.0
    right = g[n] - c1 / lg
    if not left < t < right:
        raise TOutsideAdmissibleInterval(f"t={t} outside ({left}, {right})")
    lo, hi = _window(g, n)
    near = np.concatenate((g[lo:n - 1], g[n:hi]))
    return math.fsum(1.0 / (t - near))


# --- form factor and pair correlation ---------------------------------------------------------


def _zeros_upto(table: ZeroTable, t_cap: float) -> np.ndarray:
    _require_certified(table, t_cap)
    g = table.gammas[: int(np.searchsorted(table.gammas, t_cap, side="right"))]
    if len(g) > MAX_FORM_FACTOR_ZEROS:
        raise TooManyZeros(f"{len(g)} zeros below {t_cap}; the direct double sum allows {MAX_FORM_FACTOR_ZEROS}")
    return g


def form_factor(table: ZeroTable, t_cap: float, alphas, *, block: int = 256) -> FormFactorResult:
    """F(alpha, T) = ((T/2pi) log T)^-1 sum over pairs of T^{i alpha (g - g')} w(g - g')."""
    g = _zeros_upto(table, t_cap)
    alphas = np.asarray(alphas, dtype=np.float64)
    log_t = math.log(t_cap)
    norm = t_cap / TWO_PI * log_t
    re_parts = [[] for _ in alphas]
    im_parts = [[] for _ in alphas]
    for i0 in range(0, len(g), block):
        d = g[i0:i0 + block, None] - g[None, :]
        w = weight(d)
        for k, a in enumerate(alphas):
            ph = (a * log_t) * d
            re_parts[k].append(float(np.sum(np.cos(ph) * w)))
            im_parts[k].append(float(np.sum(np.sin(ph) * w)))
    values = np.array([math.fsum(p) / norm for p in re_parts])
    imag = np.array([math.fsum(p) / norm for p in im_parts])
    max_imag = float(np.max(np.abs(imag))) if imag.size else 0.0
    if max_imag >= 1e-8:
        raise ArithmeticError(f"form factor imaginary part {max_imag} did not cancel")
    return FormFactorResult(float(t_cap), alphas, values, max_imag, len(g))


def pair_density_integral(a: float, b: float) -> float:
    if b <= a:
        return 0.0
    val, _ = integrate.quad(pair_density, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def pair_correlation_histogram(table: ZeroTable, t_cap: float, beta_max: float, bins: int) -> PairCorrelationHistogram:
    """Histogram of (g - g') log T / 2pi over ordered pairs with 0 < g - g' <= 2 pi beta_max / log T.

    Bins are half-open (lo, hi].  ``expected`` scales the conjectured density
    integral by (T/2pi) log T, the normalisation under which it predicts counts.
    """
    if bins < 4:
        raise ValueError("bins must be >= 4")
    if not beta_max > 0:
        raise ValueError("beta_max must be positive")
    g = _zeros_upto(table, t_cap)
    log_t = math.log(t_cap)
    edges = np.linspace(0.0, beta_max, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    reach = TWO_PI * beta_max / log_t
    for i in range(len(g)):
        j = int(np.searchsorted(g, g[i] + reach, side="right"))
        u = (g[i + 1:j] - g[i]) * log_t / TWO_PI
        u = u[(u > 0) & (u <= beta_max)]
        idx = np.searchsorted(edges, u, side="left") - 1
        np.add.at(counts, np.clip(idx, 0, bins - 1), 1)
    dens = np.array([pair_density_integral(edges[k], edges[k + 1]) for k in range(bins)])
    scale = t_cap / TWO_PI * log_t
    return PairCorrelationHistogram(float(t_cap), float(beta_max), edges, counts, dens, dens * scale,
                                    int(counts.sum()))


def large_gap_census(table: ZeroTable, t_cap: float, lam: float) -> int:
    """#{n : gamma_n <= T, gamma_{n+1} - gamma_n >= lam / log T}."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    _require_certified(table, t_cap)
    g = table.gammas
    k = int(np.searchsorted(g, t_cap, side="right"))
    if k >= len(g):
        raise TableIncomplete(f"census to {t_cap} needs a zero above it in the table")
    gaps = g[1:k + 1] - g[:k]
    return int(np.count_nonzero(gaps >= lam / math.log(t_cap)))


# --- small gaps and zeros of zeta' ------------------------------------------------------------


def theorem_a_threshold(alpha1: float) -> float:
    return alpha1 / (1.0 - math.sqrt(alpha1 / TWO_PI))


def theorem_a_pairing(table: ZeroTable, primes: list[ZetaPrimeZero], alpha1: float, alpha2: float,
                      t_cap: float | None = None) -> list[PairingReport]:
    """For each zero with (gamma^+ - gamma) log gamma < alpha1, the distance to the nearest zero of zeta'."""
    if not 0 < alpha1 < TWO_PI:
        raise InadmissibleAlphas(f"alpha1 must lie in (0, 2 pi), got {alpha1}")
    if not alpha2 > theorem_a_threshold(alpha1):
        raise InadmissibleAlphas(f"alpha2={alpha2} must exceed {theorem_a_threshold(alpha1):.6f}")
    _require_certified(table)
    g = table.gammas
    pg = np.array([p.gamma for p in primes])
    order = np.argsort(pg, kind="stable")
    pg = pg[order]
    pz = np.array([complex(primes[i].beta, primes[i].gamma) for i in order])
    reports = []
    for i in range(len(g) - 1):
        if t_cap is not None and g[i] > t_cap:
            break
        lg = math.log(g[i])
        gap_norm = (g[i + 1] - g[i]) * lg
        if gap_norm >= alpha1:
            continue
        lo = np.searchsorted(pg, g[i] - 2.0, side="left")
        hi = np.searchsorted(pg, g[i] + 2.0, side="right")
        if hi <= lo:
            raise PrimesCoverageInsufficient(f"no zero of zeta' within 2 of gamma_{i + 1}={g[i]}")
        dist = float(np.min(np.abs(pz[lo:hi] - complex(0.5, g[i]))))
        reports.append(PairingReport(i + 1, float(gap_norm), dist * lg < alpha2, dist * lg))
    return reports


# --- extreme values on the critical line ---------------------------------------------------


def extreme_comparator(t: float) -> float:
    return math.exp(math.sqrt(0.5 * math.log(t) * math.log(math.log(t))))


def extreme_scan(t_cap: float, cfg: PrecisionConfig = DEFAULT_PRECISION, *, step_factor: float = 0.125,
                 keep: float = 0.5) -> ExtremeResult:
    """Maximum of |Z(t)| on [10, t_cap]: fine grid, then local refinement of the larger maxima.

    Grid step is ``step_factor * 2 pi / log t``; every local maximum within
    ``keep`` of the grid maximum is refined.
    """
    if t_cap < 100:
        raise ValueError("extreme_scan requires t_cap >= 100")
    ts = [10.0]
    while ts[-1] < t_cap:
        ts.append(min(ts[-1] + step_factor * TWO_PI / math.log(ts[-1]), t_cap))
    ts = np.array(ts)
    za = np.abs(fastzeta.hardy_z(ts))
    best = float(za.max())
    interior = np.nonzero((za[1:-1] >= za[:-2]) & (za[1:-1] >= za[2:]) & (za[1:-1] >= keep * best))[0] + 1
    cand_t = [float(ts[int(np.argmax(za))])]
    cand_v = [best]
    for i in interior:
        res = optimize.minimize_scalar(lambda x: -abs(float(fastzeta.hardy_z(np.array([x]))[0])),
                                       bounds=(ts[i - 1], ts[i + 1]), method="bounded",
                                       options={"xatol": 1e-10})
        cand_t.append(float(res.x))
        cand_v.append(-float(res.fun))
    k = int(np.argmax(cand_v))
    t_star = cand_t[k]
    value = float(abs(engine.hardy_z(t_star, cfg)))
    return ExtremeResult(float(t_cap), t_star, max(value, best), extreme_comparator(t_cap))
