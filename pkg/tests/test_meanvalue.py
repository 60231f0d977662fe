from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from zetalab import meanvalue as mv
from zetalab.errors import GridTouchesZero, TableIncomplete, TailDominates
from zetalab.zerofinder import ZeroTable


def test_lorentzian_closed_form():
    d, g, h = 0.05, 100.0, 0.3
    assert mv.lorentzian_block_integral(d, g, g - h, g + h) == pytest.approx(2 / d * math.atan(h / d), rel=1e-15)
    assert mv.lorentzian_block_integral(d, g, 3.0, 3.0) == 0.0
    assert mv.lorentzian_block_integral(d, g, g - 1e9, g + 1e9) == pytest.approx(math.pi / d, rel=1e-9)


def test_quadrature_one_pole_blocks():
    rng = np.random.default_rng(17)
    for _ in range(100):
        d = rng.uniform(0.01, 0.3)
        g = rng.uniform(20, 5000)
        lo = g - rng.uniform(0.05, 3.0)
        hi = g + rng.uniform(0.05, 3.0)
        f = lambda t, g=g, d=d: 1.0 / (d * d + (t - g) ** 2)
        val, _ = mv.block_quadrature(f, d, [g], [lo], [hi])
        exact = mv.lorentzian_block_integral(d, g, lo, hi)
        assert abs(val[0] - exact) < 1e-9 * max(1.0, exact)


def test_quadrature_single_pole_model_through_mean_square(table_small):
    # the model |1/(s - rho_n)|^2 on every block reproduces the arctan sums
    a, T = 0.5, 200.0
    sigma = 0.5 + a / math.log(T)
    d = sigma - 0.5
    centers, lo, hi = mv._blocks(table_small, 1.0, T)

    def model(t, s):
        idx = np.clip(np.searchsorted(hi, t, side="left"), 0, len(centers) - 1)
        return 1.0 / (d * d + (t - centers[idx]) ** 2)

    r = mv.mean_square_logderiv(a, T, table_small, integrand=model)
    exact = math.fsum(mv.lorentzian_block_integral(d, c, l, h) for c, l, h in zip(centers, lo, hi))
    assert r.integral == pytest.approx(exact, rel=1e-9)


def test_comparators():
    c = mv.comparators(0.5, 1000.0)
    base = 1000 * math.log(1000) ** 2
    assert c["D"] / base == pytest.approx(0.6321205588285577, rel=1e-14)
    assert c["C"] / base == pytest.approx(1.0, rel=1e-15)
    assert c["T2"] == pytest.approx(c["C"] * (1 - math.log(2 * math.pi * math.e) / math.log(1000)), rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(a=hst.floats(1e-4, 0.5), T=hst.floats(100, 1e5))
def test_comparator_algebra(a, T):
    c = mv.comparators(a, T)
    ratio = c["D"] / c["C"]
    assert ratio == pytest.approx(-math.expm1(-2 * a) / (2 * a), rel=1e-13)
    assert abs(ratio - 1) <= a
    assert c["D"] < c["B"]


def test_mean_square_1000(table_small):
    r = mv.mean_square_logderiv(0.5, 1000.0, table_small)
    assert r.sigma == 0.5 + 0.5 / math.log(1000.0)
    assert r.integral > 0
    assert 0.5 <= r.integral / r.comparator_D <= 2.0
    assert r.quad_error_est < 1e-6 * r.integral


def test_mean_square_refinement_consistent(table_small):
    a, T = 1.0, 300.0
    r = mv.mean_square_logderiv(a, T, table_small)
    tight = mv.mean_square_logderiv(a, T, table_small, rel_tol=1e-9)
    assert abs(tight.integral - r.integral) < 3 * r.quad_error_est + 1e-12


def test_mean_square_preconditions(table_small):
    with pytest.raises(ValueError):
        mv.mean_square_logderiv(0.0, 1000.0, table_small)
    with pytest.raises(TableIncomplete):
        mv.mean_square_logderiv(0.5, 1009.5, table_small)


def _grid(table, lo, hi, n):
    t = np.linspace(lo, hi, n)
    for i, ti in enumerate(t):
        near = table.gammas_near(ti, 0.01)
        if near.size:
            t[i] = near.max() + 0.03
    return t


def test_decomposition_unit_window(table_small):
    t = _grid(table_small, 11, 1000, 300)
    prof = mv.decomposition_residual(t, 1.0, "unit", table_small)
    assert np.isfinite(prof.sup_ratio)
    assert prof.sup_ratio == pytest.approx(np.max(prof.residual / np.log(t)))


def test_decomposition_window_widening(table_small):
    t = _grid(table_small, 20, 990, 200)
    narrow = mv.decomposition_residual(t, 1.0, "loglog", table_small)
    wide = mv.decomposition_residual(t, 1.0, "unit", table_small)
    for ti, sg, rn, rw in zip(t, narrow.sigma, narrow.residual, wide.residual):
        s = complex(sg, ti)
        dropped = [g for g in table_small.gammas_near(ti, 1.0) if abs(g - ti) > 1 / math.log(math.log(ti))]
        assert rw <= rn + sum(1 / abs(s - complex(0.5, g)) for g in dropped) + 1e-9


def test_one_pole_synthetic_close_pair():
    # sigma - 1/2 well below the gap, so the partner pole 1/gap dominates
    t0 = 1000.0
    lt = math.log(t0)

    def ratio(gap):
        gs = [t0 - 0.5 * gap, t0 + 0.5 * gap]
        table = ZeroTable.from_gammas(gs, 1010.0)
        model = lambda s: np.array([sum(1 / (x - complex(0.5, g)) for g in gs) for x in np.atleast_1d(s)])
        t = np.array([t0 + 0.5 * gap + 2e-3])  # just outside the zero clearance
        return mv.decomposition_residual(t, 0.01, "one_pole", table, logderiv=model).sup_ratio

    close, spaced = ratio(0.1 / lt), ratio(2 * math.pi / lt)
    assert close > 5
    assert close > 20 * spaced


def test_close_pair_probe():
    base = [100.0, 101.0, 102.0, 103.0]
    _, gap, ratio = mv.close_pair_probe(ZeroTable.from_gammas(base, 110.0), 99, 104)
    assert gap == pytest.approx(math.log(100.0))
    assert ratio < 1
    n, gap, ratio = mv.close_pair_probe(ZeroTable.from_gammas(base + [101.0001], 110.0), 99, 104)
    assert n == 2 and ratio > 50


def test_decomposition_grid_guard(table_small):
    g = table_small.gammas[20]
    with pytest.raises(GridTouchesZero):
        mv.decomposition_residual(np.array([g + 1e-5]), 1.0, "unit", table_small)


def test_decomposition_order_invariance(table_small):
    t = _grid(table_small, 50, 900, 50)
    a = mv.decomposition_residual(t, 1.0, "unit", table_small)
    b = mv.decomposition_residual(t[::-1], 1.0, "unit", table_small)
    assert np.max(np.abs(a.residual - b.residual[::-1])) <= 1e-9


def test_corollary1_profile(table_small):
    t = _grid(table_small, 20, 990, 100)
    prof = mv.logderiv_bound_profile(t, (1.0, 0.9), table_small)
    at_edge = prof.sigma == 0.9
    assert np.allclose(prof.scale[at_edge], np.log(prof.t[at_edge]) ** 0.2)
    wider = mv.logderiv_bound_profile(t, (2.0, 0.9), table_small)
    assert wider.sup_ratio <= prof.sup_ratio + 1e-12


def test_log_zeta_profile(table_small):
    t = _grid(table_small, 20, 990, 40)
    fams = mv.log_zeta_bound_profile(t, (1.0, 0.9), table_small)
    assert set(fams) == {"log_zeta", "log_abs", "arg"}
    assert all(np.isfinite(p.sup_ratio) for p in fams.values())
    # t = 1000 with sigma on the line 1/2 + 1/log t
    at_1000 = mv.log_zeta_bound_profile(_grid(table_small, 1000, 1000, 1), (1.0, 0.9), table_small)
    assert all(np.isfinite(p.residual).all() and p.residual.size for p in at_1000.values())


def test_log_zeta_fast_branch(table_small):
    for t in (100.0, 999.0):
        v = mv.log_zeta_fast(complex(2, t), table_small)
        assert -math.pi / 2 < v.imag < math.pi / 2


def test_identity_examples(table_small):
    r = mv.identity_2_3_check(2 + 100j, table_small)
    assert r.residual < 1e-6
    rc = mv.identity_2_3_check(2 - 100j, table_small)
    assert rc.residual == pytest.approx(r.residual, abs=1e-15)
    with pytest.raises(TailDominates):
        mv.identity_2_3_check(0.6 + 999.0j, ZeroTable.from_gammas(table_small.gammas, 1009.0))
