"""Locate zeros of zeta on the critical line and zeros of zeta' in rectangles.

Critical-line zeros come from sign changes of Hardy's Z on an adaptive grid and
are certified against the argument-principle count theta(T)/pi + 1 + S(T).
Zeros of zeta' are isolated by winding numbers of zeta' along rectangle
boundaries and polished by Newton's method.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import engine, fastzeta
from .config import DEFAULT_PRECISION, PrecisionConfig
from .errors import (
    BoundaryZero,
    CertificationFailed,
    OutOfRange,
    PrecisionExhausted,
    TableIncomplete,
    WindingUnstable,
)
from .parallel import pmap

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
SCAN_START = 10.0
SCAN_UNIT = 200.0
REFINE_CHUNK = 64


@dataclass(frozen=True)
class ZetaZero:
    n: int
    gamma: float
    residual: float
    # decimal text of the high precision ordinate, used for lossless CSV output
    gamma_text: str | None = None


@dataclass(frozen=True)
class ZeroTable:
    zeros: tuple[ZetaZero, ...]
    t_max: float
    certified: bool
    count_check: int
    gammas: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.array([z.gamma for z in self.zeros], dtype=np.float64)
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValueError("zero ordinates must be strictly increasing")
        if self.certified and self.count_check != len(self.zeros):
            raise ValueError("a certified table must match its zero count")
        g.setflags(write=False)
        object.__setattr__(self, "gammas", g)

    @classmethod
    def from_gammas(cls, gammas, t_max: float, *, certified: bool = True, count_check: int | None = None):
        """Table from bare ordinates (synthetic inputs, tests)."""
        gammas = sorted(float(g) for g in gammas)
        zeros = tuple(ZetaZero(i + 1, g, 0.0) for i, g in enumerate(gammas))
        count = len(zeros) if count_check is None else count_check
        return cls(zeros, float(t_max), certified and count == len(zeros), count)

    def __len__(self) -> int:
        return len(self.zeros)

    def gammas_near(self, t: float, radius: float) -> np.ndarray:
        lo = np.searchsorted(self.gammas, t - radius, side="left")
        hi = np.searchsorted(self.gammas, t + radius, side="right")
        return self.gammas[lo:hi]

    def prefix(self, t_cap: float) -> "ZeroTable":
        """Sub-table of zeros with gamma <= t_cap, certified when the parent is."""
        k = int(np.searchsorted(self.gammas, t_cap, side="right"))
        return ZeroTable(self.zeros[:k], float(t_cap), self.certified, k if self.certified else self.count_check)


@dataclass(frozen=True)
class Rectangle:
    sigma_lo: float
    sigma_hi: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not (self.sigma_lo < self.sigma_hi and self.t_lo < self.t_hi):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.sigma_hi - self.sigma_lo

    @property
    def height(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def center(self) -> complex:
        return complex((self.sigma_lo + self.sigma_hi) / 2, (self.t_lo + self.t_hi) / 2)

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (self.sigma_lo - slack <= z.real <= self.sigma_hi + slack
                and self.t_lo - slack <= z.imag <= self.t_hi + slack)

    def split_at(self, cut: float, along_t: bool) -> tuple["Rectangle", "Rectangle"]:
        if along_t:
            return (Rectangle(self.sigma_lo, self.sigma_hi, self.t_lo, cut),
                    Rectangle(self.sigma_lo, self.sigma_hi, cut, self.t_hi))
        return (Rectangle(self.sigma_lo, cut, self.t_lo, self.t_hi),
                Rectangle(cut, self.sigma_hi, self.t_lo, self.t_hi))


@dataclass(frozen=True)
class ZetaPrimeZero:
    beta: float
    gamma: float
    residual: float
    box: Rectangle
    beta_text: str | None = None
    gamma_text: str | None = None


# --- counting formulas ---------------------------------------------------------


def count_main_term(t: float) -> float:
    """(t/2pi) log(t/(2 pi e)), the main term of the zero count of zeta."""
    return t / TWO_PI * math.log(t / (TWO_PI * math.e))


def berndt_main_term(t: float) -> float:
    """(t/2pi) log(t/(4 pi e)), the main term of the zero count of zeta'."""
    return t / TWO_PI * math.log(t / (2 * TWO_PI * math.e))


def zero_count(t: float) -> float:
    """theta(t)/pi + 1 + S(t) with S(t) tracked along sigma from 2 to 1/2.

    Close to an integer whenever t is not an ordinate.
    """
    s_val = fastzeta.log_zeta(complex(0.5, t), sigma_start=2.0).imag / math.pi
    return float(fastzeta.theta(np.array([t]))[0]) / math.pi + 1 + s_val


def _certified_count(t: float) -> int:
    x = zero_count(t)
    k = round(x)
    if abs(x - k) > 0.25:
        raise PrecisionExhausted(f"zero count at t={t} is not near an integer ({x})")
    return int(k)


# --- critical line scan ------------------------------------------------------------


def _grid(lo: float, hi: float, step_factor: float) -> np.ndarray:
    pts = [lo]
    t = lo
    while True:
        t += step_factor * TWO_PI / math.log(t)
        if t >= hi:
            break
        pts.append(t)
    pts.append(hi)
    return np.array(pts)


def _signs(z: np.ndarray) -> np.ndarray:
    s = np.sign(z)
    s[s == 0] = 1.0
    return s


def _halve(ts: np.ndarray, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mids = 0.5 * (ts[:-1] + ts[1:])
    zm = fastzeta.hardy_z(mids)
    t2 = np.empty(2 * ts.size - 1)
    z2 = np.empty_like(t2)
    t2[0::2], t2[1::2] = ts, mids
    z2[0::2], z2[1::2] = zs, zm
    return t2, z2


def _count_changes(zs: np.ndarray) -> int:
    s = _signs(zs)
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _scan_unit(args) -> list[tuple[float, float, float, float]]:
    """Brackets (a, b, Z(a), Z(b)) of sign changes of Z in one work unit."""
    lo, hi, step_factor, window, max_depth = args
    ts = _grid(lo, hi, step_factor)
    zs = fastzeta.hardy_z(ts)
    brackets = []
    for i0 in range(0, ts.size - 1, window):
        wt = ts[i0:i0 + window + 1]
        wz = zs[i0:i0 + window + 1]
        count = _count_changes(wz)
        for _ in range(max_depth):
            wt, wz = _halve(wt, wz)
            c2 = _count_changes(wz)
            if c2 == count:
                break
            count = c2
        s = _signs(wz)
        for j in np.nonzero(s[1:] != s[:-1])[0]:
            brackets.append((float(wt[j]), float(wt[j + 1]), float(wz[j]), float(wz[j + 1])))
    return brackets


def _refine_float(brackets) -> np.ndarray:
    a = np.array([b[0] for b in brackets])
    b = np.array([b[1] for b in brackets])
    za = np.array([b[2] for b in brackets])
    zb = np.array([b[3] for b in brackets])
    for _ in range(26):
        m = 0.5 * (a + b)
        zm = fastzeta.hardy_z(m)
        left = np.sign(zm) == np.sign(za)
        a = np.where(left, m, a)
        za = np.where(left, zm, za)
        b = np.where(left, b, m)
        zb = np.where(left, zb, zm)
    denom = np.where(zb != za, zb - za, 1.0)
    return a - za * (b - a) / denom


def _refine_hp(args) -> list[tuple[str, float]]:
    """Secant polish of Z at high precision; returns (gamma text, |Z(gamma)|)."""
    starts, cfg = args
    ctx = engine.ctx_for(cfg)
    out = []
    for g in starts:
        delta = ctx.mpf(1e-10) * max(1.0, g / 1000)
        x0, x1 = ctx.mpf(g) - delta, ctx.mpf(g) + delta
        z0, z1 = engine.hardy_z(x0, cfg), engine.hardy_z(x1, cfg)
        tol_x = ctx.mpf(10) ** (-(cfg.working_digits - 12)) * max(1.0, g)
        for _ in range(8):
            x2 = x1 - z1 * (x1 - x0) / (z1 - z0)
            z2 = engine.hardy_z(x2, cfg)
            if abs(x2 - x1) < tol_x or z2 == 0:
                break
            x0, z0, x1, z1 = x1, z1, x2, z2
        if abs(z2) > 1e-12 or abs(x2 - g) > 1e-6:
            raise PrecisionExhausted(f"zero refinement near t={g} did not converge")
        out.append((ctx.nstr(x2, 24, strip_zeros=False), float(abs(z2))))
    return out


def scan_zeta_zeros(t_max: float, cfg: PrecisionConfig = DEFAULT_PRECISION, *, jobs: int = 1,
                    step_factor: float = 1.0, strict: bool = True) -> ZeroTable:
    """All zeros 1/2 + i gamma with 0 < gamma <= t_max, certified against N(t_max).

    The grid starts at step ``step_factor * 2 pi / log t`` and is halved per
    window until the window's sign-change count stabilises.
    """
    if not t_max >= 20:
        raise ValueError("scan_zeta_zeros requires t_max >= 20")
    units = []
    lo = SCAN_START
    while lo < t_max:
        hi = min(lo + SCAN_UNIT, t_max)
        units.append((lo, hi))
        lo = hi

    def scan(unit_list, factor, depth):
        jobs_args = [(a, b, factor, 8, depth) for a, b in unit_list]
        return pmap(_scan_unit, jobs_args, jobs)

    per_unit = scan(units, step_factor, 6)
    failure = None
    count_check = _certified_count(t_max)
    located = sum(len(b) for b in per_unit)
    if located != count_check:
        # localise the discrepancy with counts at unit boundaries, then rescan there
        log.info("scan found %d of %d zeros; localising", located, count_check)
        bounds = [SCAN_START] + [u[1] for u in units]
        expected = [0] + [_certified_count(u[1]) for u in units[:-1]] + [count_check]
        for i, (a, b) in enumerate(units):
            want = expected[i + 1] - expected[i]
            if len(per_unit[i]) != want:
                per_unit[i] = scan([(a, b)], step_factor / 8, 12)[0]
                if len(per_unit[i]) != want and failure is None:
                    failure = CertificationFailed(
                        f"found {len(per_unit[i])} zeros in ({bounds[i]}, {bounds[i + 1]}], expected {want}",
                        interval=(a, b),
                    )
        located = sum(len(b) for b in per_unit)
    if failure is not None and strict:
        raise failure
    brackets = [b for unit in per_unit for b in unit]
    starts = _refine_float(brackets) if brackets else np.empty(0)
    chunks = [(list(map(float, starts[i:i + REFINE_CHUNK])), cfg) for i in range(0, len(starts), REFINE_CHUNK)]
    refined = [r for chunk in pmap(_refine_hp, chunks, jobs) for r in chunk]
    zeros = tuple(ZetaZero(i + 1, float(text), res, text) for i, (text, res) in enumerate(refined))
    return ZeroTable(zeros, float(t_max), located == count_check, count_check)


def nearest_zero(t: float, table: ZeroTable) -> ZetaZero:
    """Zero with ordinate closest to t; exact ties go to the smaller ordinate."""
    if not table.certified:
        raise TableIncomplete("nearest_zero needs a certified table")
    g = table.gammas
    if len(g) == 0 or not (g[0] <= t <= table.t_max):
        raise OutOfRange(f"t={t} outside [gamma_1, t_max]")
    i = bisect.bisect_left(g, t)
    if i < len(g) and g[i] == t:
        return table.zeros[i]
    if i == len(g):
        return table.zeros[-1]
    # t lies strictly between g[i-1] and g[i]; 2t versus their sum avoids midpoint rounding
    return table.zeros[i - 1] if 2 * t <= g[i - 1] + g[i] else table.zeros[i]


# --- zeros of zeta' ------------------------------------------------------------------


def _fprime(z: np.ndarray) -> np.ndarray:
    return fastzeta.zeta_jets(z, 1)[1]


class _WindingCounter:
    """Argument-principle counts of zeta' zeros, memoising shared edges."""

    def __init__(self, max_step_arg: float = math.pi / 4, min_step: float = 1e-9):
        self.max_step_arg = max_step_arg
        self.min_step = min_step
        self._edges: dict[tuple[complex, complex], float] = {}

    def edge(self, z0: complex, z1: complex) -> float:
        key = (z0, z1)
        if key in self._edges:
            return self._edges[key]
        if (z1, z0) in self._edges:
            return -self._edges[(z1, z0)]
        value = self._edge(z0, z1)
        self._edges[key] = value
        return value

    def _edge(self, z0: complex, z1: complex) -> float:
        length = abs(z1 - z0)
        base = 0.05 if z0.real == z1.real else 0.2
        n = max(8, math.ceil(length / base))
        u = np.linspace(0.0, 1.0, n + 1)
        vals = _fprime(z0 + u * (z1 - z0))
        while True:
            inc = np.angle(vals[1:] / vals[:-1])
            bad = np.nonzero(np.abs(inc) > self.max_step_arg)[0]
            if bad.size == 0:
                return float(np.sum(inc))
            if np.min(u[bad + 1] - u[bad]) * length < self.min_step:
                raise WindingUnstable(f"argument increment stays above {self.max_step_arg:.3g} on edge {z0}->{z1}")
            mids = 0.5 * (u[bad] + u[bad + 1])
            mv = _fprime(z0 + mids * (z1 - z0))
            u_new = np.concatenate((u, mids))
            order = np.argsort(u_new, kind="stable")
            u = u_new[order]
            vals = np.concatenate((vals, mv))[order]

    def winding(self, r: Rectangle) -> int:
        a = complex(r.sigma_lo, r.t_lo)
        b = complex(r.sigma_hi, r.t_lo)
        c = complex(r.sigma_hi, r.t_hi)
        d = complex(r.sigma_lo, r.t_hi)
        total = self.edge(a, b) + self.edge(b, c) - self.edge(d, c) - self.edge(a, d)
        w = total / TWO_PI
        k = round(w)
        if abs(w - k) > 1e-6:
            raise WindingUnstable(f"non-integer winding {w} on {r}", box=r)
        return int(k)


def winding_number(region: Rectangle) -> int:
    """Number of zeros of zeta' inside ``region`` (argument principle)."""
    return _WindingCounter().winding(region)


def _nudged_region(region: Rectangle, counter: _WindingCounter, shift: float, tries: int = 5) -> Rectangle:
    r = region
    for k in range(tries + 1):
        try:
            counter.winding(r)
            return r
        except WindingUnstable:
            d = shift * (k + 1)
            r = Rectangle(r.sigma_lo - d, r.sigma_hi + d, r.t_lo - d, r.t_hi + d)
    raise BoundaryZero(f"could not move the boundary of {region} off a zero of zeta'")


def _split(box: Rectangle, counter: _WindingCounter, shift: float, tries: int = 5):
    along_t = box.height >= box.width
    lo, hi = (box.t_lo, box.t_hi) if along_t else (box.sigma_lo, box.sigma_hi)
    mid = 0.5 * (lo + hi)
    for k in range(tries + 1):
        cut = mid + (k + 1) // 2 * shift * (1 if k % 2 else -1)
        if not lo < cut < hi:
            continue
        left, right = box.split_at(cut, along_t)
        try:
            return (left, counter.winding(left)), (right, counter.winding(right))
        except WindingUnstable:
            continue
    raise BoundaryZero(f"could not place a cut through {box} away from zeros of zeta'")


def _newton_float(z: complex, box: Rectangle, iters: int = 50) -> complex | None:
    slack = max(box.width, box.height)
    for _ in range(iters):
        _, f1, f2 = fastzeta.zeta_jets(np.array([z]), 2)[:, 0]
        if f2 == 0:
            return None
        dz = f1 / f2
        z -= dz
        if not box.contains(z, slack):
            return None
        if abs(dz) < 1e-14 * abs(z):
            break
    return z if box.contains(z) else None


def _polish(z: complex, cfg: PrecisionConfig):
    ctx = engine.ctx_for(cfg)
    w = ctx.mpc(z)
    for _ in range(6):
        _, f1, f2 = engine.zeta_jets(w, cfg, 2)
        if abs(f1) < 1e-25:
            break
        step = f1 / f2
        w -= step
        if abs(step) < ctx.mpf(10) ** (-(cfg.working_digits - 10)):
            f1 = engine.zeta_prime(w, cfg)
            break
    return w, float(abs(f1))


def _isolate(args) -> list[ZetaPrimeZero]:
    strip, cfg, min_box = args
    counter = _WindingCounter()
    shift = 10 * cfg.zero_clearance
    found = []
    w = counter.winding(strip)
    stack = [(strip, w)]
    while stack:
        box, w = stack.pop()
        if w == 0:
            continue
        if w < 0:
            raise WindingUnstable(f"negative winding {w} on {box}", box=box)
        small = max(box.width, box.height) < min_box
        if w == 1:
            z = _newton_float(box.center, box)
            if z is not None:
                found.append((box, z))
                continue
        if small:
            if w > 1:
                raise WindingUnstable(f"winding {w} in a minimal box {box}: multiple zero of zeta'?", box=box)
            raise WindingUnstable(f"Newton failed inside isolating box {box}", box=box)
        (b1, w1), (b2, w2) = _split(box, counter, min(shift, 0.01 * max(box.width, box.height)))
        if w1 + w2 != w:
            raise WindingUnstable(f"winding not conserved when splitting {box}", box=box)
        stack.extend([(b2, w2), (b1, w1)])
    out = []
    ctx = engine.ctx_for(cfg)
    for box, z in found:
        w, res = _polish(z, cfg)
        zc = complex(w)
        if not box.contains(zc):
            raise WindingUnstable(f"polished zero {zc} left its isolating box", box=box)
        out.append(ZetaPrimeZero(zc.real, zc.imag, res, box,
                                 ctx.nstr(w.real, 24, strip_zeros=False), ctx.nstr(w.imag, 24, strip_zeros=False)))
    return out


def find_zeta_prime_zeros(region: Rectangle, cfg: PrecisionConfig = DEFAULT_PRECISION, *, jobs: int = 1,
                          strip_height: float = 2.0, min_box: float = 1e-6) -> list[ZetaPrimeZero]:
    """All zeros of zeta' inside ``region``, each in a box of winding exactly 1."""
    if region.sigma_lo < 0.4 - 1e-12 or region.sigma_hi > 10 + 1e-12 or region.t_lo < 10 - 1e-12:
        raise ValueError("region must lie within sigma in [0.4, 10], t >= 10")
    counter = _WindingCounter()
    region = _nudged_region(region, counter, 10 * cfg.zero_clearance)
    cuts = [region.t_lo]
    while cuts[-1] + strip_height < region.t_hi - 1e-9:
        cuts.append(cuts[-1] + strip_height)
    cuts.append(region.t_hi)
    strips = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        strips.append(Rectangle(region.sigma_lo, region.sigma_hi, a, b))
    strips = [_clear_strip(s, counter, 10 * cfg.zero_clearance) for s in strips]
    # strips may have been nudged; rebuild contiguous cuts
    fixed = []
    prev_hi = region.t_lo
    for s in strips:
        fixed.append(Rectangle(region.sigma_lo, region.sigma_hi, prev_hi, s.t_hi))
        prev_hi = s.t_hi
    results = pmap(_isolate, [(s, cfg, min_box) for s in fixed], jobs)
    zeros = sorted((z for part in results for z in part), key=lambda z: (z.gamma, z.beta))
    total = sum(counter.winding(s) for s in fixed)
    if total != len(zeros):
        raise WindingUnstable(f"located {len(zeros)} zeros of zeta' but the winding count is {total}")
    return zeros


def _clear_strip(strip: Rectangle, counter: _WindingCounter, shift: float, tries: int = 5) -> Rectangle:
    """Move the top edge of a strip off any zero of zeta' sitting on it."""
    r = strip
    for k in range(tries + 1):
        try:
            counter.winding(r)
            return r
        except WindingUnstable:
            r = Rectangle(r.sigma_lo, r.sigma_hi, r.t_lo, strip.t_hi + shift * (k + 1))
    raise BoundaryZero(f"could not clear the top edge of {strip}")
