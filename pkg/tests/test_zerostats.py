from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from zetalab import zerostats as st
from zetalab.errors import (
    EmptyInput,
    InadmissibleAlphas,
    PrimesCoverageInsufficient,
    TableIncomplete,
    TOutsideAdmissibleInterval,
    WindowNotCovered,
)
from zetalab.zerofinder import Rectangle, ZeroTable, ZetaPrimeZero


def brute_mn(g: np.ndarray, n: int) -> tuple[float, float]:
    """Naive double loop: (M_n, full square sum)."""
    c = g[n - 1]
    m = 0.0
    s2 = 0.0
    for k, x in enumerate(g):
        if k == n - 1:
            continue
        s2 += 1.0 / (c - x) ** 2
        if 0 < abs(x - c) <= 1:
            m += 1.0 / (c - x)
    return m, s2


def prime(beta, gamma):
    return ZetaPrimeZero(beta, gamma, 0.0, Rectangle(beta - 0.1, beta + 0.1, gamma - 0.1, gamma + 0.1))


def test_gap_toy_table():
    g = 2 * math.pi / math.log(100)
    stats, mn = st.gap_table(ZeroTable.from_gammas([100.0, 100.0 + g], 110.0))
    assert stats[0].normalized == pytest.approx(2 * math.pi, rel=1e-14)
    assert mn == stats[0].normalized


def test_gap_real_table(table_small):
    stats, mn = st.gap_table(table_small.prefix(1000))
    assert 0 < mn < 2 * math.pi * 0.6
    assert all(s.gap > 0 and s.normalized > 0 for s in stats)


def test_gap_prefix_stability(table_small):
    a, _ = st.gap_table(table_small.prefix(500))
    b, _ = st.gap_table(table_small)
    assert b[: len(a)] == a


def test_gap_needs_two():
    with pytest.raises(TableIncomplete):
        st.gap_table(ZeroTable.from_gammas([14.0], 20.0))


def test_beta_prime_proxy():
    v, prof = st.beta_prime_proxy([prime(0.5 + 1 / math.log(100), 100.0)])
    assert v == pytest.approx(1.0, abs=1e-15)
    assert st.beta_prime_proxy([prime(0.5, 50.0)])[0] == 0.0
    with pytest.raises(EmptyInput):
        st.beta_prime_proxy([])


def test_beta_prime_proxy_real(primes):
    v, prof = st.beta_prime_proxy([p for p in primes if p.gamma <= 1000])
    assert v > 0
    assert [p[0] for p in prof] == sorted(p[0] for p in prof)


def test_mn_synthetic():
    t = ZeroTable.from_gammas([99.7, 100.0, 100.3], 110.0)
    assert st.compute_Mn(t, 2).m_n == 0.0
    t = ZeroTable.from_gammas([100.0, 100.25], 110.0)
    assert st.compute_Mn(t, 1).m_n == pytest.approx(-1 / 0.25, rel=1e-14)


def test_mn_window_edge_inclusive():
    t = ZeroTable.from_gammas([99.0, 100.0, 101.5], 110.0)
    assert st.compute_Mn(t, 2).m_n == pytest.approx(1.0)


def test_mn_window_not_covered():
    t = ZeroTable.from_gammas([100.0, 100.5], 101.0)
    with pytest.raises(WindowNotCovered):
        st.compute_Mn(t, 1)


def test_mn_oracle_real_table(table_small):
    g = table_small.gammas
    for n in (1, 2, 50, 100, 400, 640):
        m = st.compute_Mn(table_small, n)
        ref_m, ref_s2 = brute_mn(g, n)
        assert abs(m.m_n - ref_m) < 1e-12
        assert abs(m.s2_n - ref_s2) <= 1e-12 * ref_s2
        assert m.s2_n > 0 and 0 <= m.s2_window <= m.s2_n
        assert m.tail_note > 0


def test_mn_of_t(table_small):
    n = 50
    g = table_small.gammas
    assert st.compute_Mn_of_t(table_small, n, g[n - 1]) == pytest.approx(st.compute_Mn(table_small, n).m_n,
                                                                          abs=1e-15)
    # gamma_50 has no other ordinate within 1, so take the first n with a nonempty window
    n = next(k for k in range(50, len(g)) if g[k] - g[k - 1] <= 1 and g[k - 1] - g[k - 2] <= 1)
    lg = math.log(g[n - 1])
    ts = np.linspace(g[n - 2] + 0.2 / lg, g[n] - 0.2 / lg, 3)
    vals = [st.compute_Mn_of_t(table_small, n, t) for t in ts]
    assert vals[0] > vals[1] > vals[2]
    with pytest.raises(TOutsideAdmissibleInterval):
        st.compute_Mn_of_t(table_small, n, g[n])


def test_mn_of_t_symmetric():
    t = ZeroTable.from_gammas([99.6, 100.0, 100.4], 110.0)
    assert st.compute_Mn_of_t(t, 2, 100.0) == 0.0


def test_weight_and_density():
    assert st.weight(2.0) == 0.5
    assert st.weight(0.0) == 1.0
    assert st.pair_density(1.0) == pytest.approx(1.0, abs=1e-15)
    assert st.pair_density_integral(0.0, 0.0) == 0.0


def test_form_factor(table_small):
    alphas = np.array([-1.5, -0.5, 0.0, 0.5, 1.5])
    r = st.form_factor(table_small, 1000.0, alphas)
    norm = 1000 / (2 * math.pi) * math.log(1000)
    assert r.values[2] >= r.zero_count / norm
    assert r.values[0] == pytest.approx(r.values[4], abs=1e-10)
    assert r.values[1] == pytest.approx(r.values[3], abs=1e-10)
    assert r.max_imag < 1e-8


def test_form_factor_requires_coverage(table_small):
    with pytest.raises(TableIncomplete):
        st.form_factor(table_small, 2000.0, [0.0])


def test_pair_histogram_conservation(table_small):
    h = st.pair_correlation_histogram(table_small, 1000.0, 3.0, 12)
    g = table_small.prefix(1000).gammas
    reach = 2 * math.pi * 3.0 / math.log(1000)
    d = g[None, :] - g[:, None]
    assert h.pair_count == int(np.count_nonzero((d > 0) & (d <= reach))) == int(h.counts.sum())
    assert h.density_integrals.sum() == pytest.approx(st.pair_density_integral(0, 3.0), abs=1e-10)


def test_census(table_small):
    n1000 = len(table_small.prefix(1000))
    assert st.large_gap_census(table_small, 1000.0, 0.0) == n1000
    assert st.large_gap_census(table_small, 1000.0, 1e6) == 0
    counts = [st.large_gap_census(table_small, 1000.0, lam) for lam in (1, 2, 4, 8)]
    assert counts == sorted(counts, reverse=True)
    with pytest.raises(TableIncomplete):
        st.large_gap_census(table_small, table_small.t_max, 1.0)


def test_theorem_a_admissibility():
    assert st.theorem_a_threshold(3.0) == pytest.approx(3 / (1 - math.sqrt(3 / (2 * math.pi))), rel=1e-15)
    assert 9.70 < st.theorem_a_threshold(3.0) < 10.0
    t = ZeroTable.from_gammas([100.0, 100.1], 110.0)
    with pytest.raises(InadmissibleAlphas):
        st.theorem_a_pairing(t, [], 3.0, 9.7)
    with pytest.raises(InadmissibleAlphas):
        st.theorem_a_pairing(t, [], 7.0, 100.0)


def test_theorem_a_vacuous_and_coverage():
    t = ZeroTable.from_gammas([100.0, 100.1, 103.0], 110.0)
    assert st.theorem_a_pairing(t, [], 1e-6, 10.0) == []
    with pytest.raises(PrimesCoverageInsufficient):
        st.theorem_a_pairing(t, [prime(0.7, 200.0)], 3.0, 10.0)
    rep = st.theorem_a_pairing(t, [prime(0.52, 100.05)], 3.0, 10.0)
    assert len(rep) == 1 and rep[0].matched
    assert rep[0].dist_norm == pytest.approx(abs(complex(0.02, 0.05)) * math.log(100.0))


def test_theorem_a_real(table_small, primes):
    rep = st.theorem_a_pairing(table_small, primes, 3.0, 10.0, t_cap=1000.0)
    assert rep
    assert all(r.matched == (r.dist_norm < 10.0) for r in rep)
    assert all(r.matched for r in rep)


def test_extreme_scan():
    r = st.extreme_scan(100.0)
    from zetalab import engine

    assert r.max_abs >= abs(float(engine.hardy_z(50.0)))
    r2 = st.extreme_scan(100.0, step_factor=0.0625)
    assert r2.max_abs >= r.max_abs - 1e-9
    with pytest.raises(ValueError):
        st.extreme_scan(50.0)


@settings(max_examples=30, deadline=None)
@given(hst.lists(hst.floats(12.0, 60.0), min_size=3, max_size=30, unique=True))
def test_mn_matches_brute_force_synthetic(gs):
    gs = sorted(gs)
    if np.min(np.diff(gs)) < 1e-6:
        return
    t = ZeroTable.from_gammas(gs, 70.0)
    for n in range(1, len(gs) + 1):
        m = st.compute_Mn(t, n)
        ref_m, ref_s2 = brute_mn(np.array(gs), n)
        assert abs(m.m_n - ref_m) <= 1e-9 * max(1.0, abs(ref_m))
        assert abs(m.s2_n - ref_s2) <= 1e-12 * ref_s2
