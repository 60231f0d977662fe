from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from zetalab import engine, fastzeta
from zetalab.config import ORACLE_PRECISION, PrecisionConfig
from zetalab.errors import (
    ConfigError,
    NearZero,
    PathTooCloseToZero,
    PoleAtNonpositiveInteger,
    PoleAtOne,
    PoleInFactor,
    TableIncomplete,
)
from zetalab.zerofinder import ZeroTable


def test_precision_config_validation():
    with pytest.raises(ConfigError):
        PrecisionConfig(working_digits=24)
    with pytest.raises(ConfigError):
        PrecisionConfig(zero_clearance=0)
    assert PrecisionConfig(working_digits=30).tail_tol == pytest.approx(1e-29)


def test_classical_values():
    assert abs(complex(engine.zeta(2)) - math.pi ** 2 / 6) < 1e-12
    assert abs(complex(engine.zeta(0)) + 0.5) < 1e-12
    assert abs(complex(engine.zeta(-2))) < 1e-12
    assert abs(complex(engine.zeta_prime(0)) + 0.5 * math.log(2 * math.pi)) < 1e-12


def test_pole_at_one():
    with pytest.raises(PoleAtOne):
        engine.zeta(1)


@pytest.mark.parametrize("s", [2, 0.3 + 0.5j, 0.5 + 14.134j, 3 + 20j, 0.55 + 1000.3j, 0.6 + 4999.7j, -2.5 + 7j])
def test_zeta_matches_mpmath(s):
    with mpmath.workdps(50):
        ref = mpmath.zeta(s)
        ref1 = mpmath.zeta(s, derivative=1)
    assert abs(engine.zeta(s) - ref) < 1e-35
    assert abs(engine.zeta_prime(s) - ref1) < 1e-35


def test_zeta_prime_finite_difference_at_two():
    ctx = engine.ctx_for(ORACLE_PRECISION)
    h = ctx.mpf("1e-8")
    fd = (engine.zeta(2 + h, ORACLE_PRECISION) - engine.zeta(2 - h, ORACLE_PRECISION)) / (2 * h)
    assert abs(engine.zeta_prime(2) - fd) < 1e-6


def test_derivative_consistency_random_points():
    rng = np.random.default_rng(7)
    ctx = engine.ctx_for(ORACLE_PRECISION)
    h = ctx.mpf("1e-8")
    for sigma, t in zip(rng.uniform(0.1, 3, 20), rng.uniform(10, 500, 20)):
        s = ctx.mpc(sigma, t)
        fd = (engine.zeta(s + h, ORACLE_PRECISION) - engine.zeta(s - h, ORACLE_PRECISION)) / (2 * h)
        assert abs(engine.zeta_prime(s, ORACLE_PRECISION) - fd) < 1e-6


def test_reflection_random_points():
    rng = np.random.default_rng(11)
    cfg = engine.DEFAULT_PRECISION
    for sigma, t in zip(rng.uniform(0, 3, 100), rng.uniform(10, 1000, 100)):
        s = complex(sigma, t)
        assert abs(engine.zeta(s.conjugate()) - engine.ctx_for(cfg).conj(engine.zeta(s))) < 10 * cfg.tail_tol


def test_logderiv():
    z2 = engine.zeta_logderiv(2)
    assert abs(z2 - engine.zeta_prime(2) / engine.zeta(2)) < 1e-10
    assert abs(engine.zeta_logderiv(0) - math.log(2 * math.pi)) < 1e-12
    with mpmath.workdps(50):
        g1 = mpmath.zetazero(1).imag
    with pytest.raises(NearZero):
        engine.zeta_logderiv(engine.ctx_for(engine.DEFAULT_PRECISION).mpc(0.5, g1))


def test_digamma_values():
    with mpmath.workdps(50):
        assert abs(engine.digamma(1) + mpmath.euler) < 1e-25
        assert abs(engine.digamma(2) - (1 - mpmath.euler)) < 1e-25
    with pytest.raises(PoleAtNonpositiveInteger):
        engine.digamma(-3)
    s = 100 * complex(math.cos(math.pi / 4), math.sin(math.pi / 4))
    assert abs(engine.digamma(s) - mpmath.log(s)) < 1 / abs(s)
    with mpmath.workdps(50):
        assert abs(engine.digamma(3 - 40j) - mpmath.digamma(mpmath.mpc(3, -40))) < 1e-30


@settings(max_examples=50, deadline=None)
@given(r=hst.floats(50, 1e4), phi=hst.floats(-2.5, 2.5))
def test_digamma_standard_fact(r, phi):
    s = complex(r * math.cos(phi), r * math.sin(phi))
    assert abs(complex(engine.digamma(s)) - complex(mpmath.log(s))) <= 1 / abs(s)


def test_loggamma_matches_mpmath():
    with mpmath.workdps(50):
        for z in (0.25 + 7j, 12.5 - 3j, 0.1 + 0.1j):
            assert abs(engine.loggamma(z) - mpmath.loggamma(z)) < 1e-30


def test_functional_equation_grid():
    for sigma in (0.1, 0.3, 0.7, 0.9):
        for t in (5.0, 20.0, 77.7, 300.0, 1234.5):
            s = complex(sigma, t)
            assert abs(engine.zeta(s) - engine.chi_factor(s) * engine.zeta(1 - s)) < 1e-10
    s = 0.3 + 20j
    assert abs(engine.zeta(s) - engine.chi_factor(s) * engine.zeta(1 - s)) < 1e-10


def test_chi_unit_modulus_on_line():
    for t in (10.0, 100.0, 2500.0):
        x = engine.chi_factor(complex(0.5, t))
        assert abs(abs(x) ** 2 - 1) < 1e-10


def test_chi_symmetry_point_and_poles():
    x = engine.chi_factor(0.5)
    assert abs(x - 1) < 1e-25
    # s = 0 goes through Gamma(1); sin(0) makes the factor vanish
    assert abs(complex(engine.chi_factor(0))) < 1e-30
    with pytest.raises(PoleInFactor):
        engine.chi_factor(3)


def test_theta_and_hardy_z():
    with mpmath.workdps(50):
        for t in (5.0, 14.0, 50.0, 500.0, 5000.0):
            assert abs(engine.rs_theta(t) - mpmath.siegeltheta(t)) < 1e-30
            assert abs(engine.hardy_z(t) - mpmath.siegelz(t)) < 1e-25
    assert engine.hardy_z(14) * engine.hardy_z(15) < 0


def test_hardy_z_real_part_only():
    ctx = engine.ctx_for(engine.DEFAULT_PRECISION)
    for t in (50.0, 500.0, 5000.0):
        v = ctx.expj(engine.rs_theta(t)) * engine.zeta(ctx.mpc(0.5, t))
        assert abs(ctx.im(v)) < 1e-10


def test_hardy_z_imaginary_part_sampled():
    rng = np.random.default_rng(3)
    ctx = engine.ctx_for(engine.DEFAULT_PRECISION)
    worst = 0.0
    for t in rng.uniform(10, 5000, 40):
        v = ctx.expj(engine.rs_theta(t)) * engine.zeta(ctx.mpc(0.5, t))
        worst = max(worst, float(abs(ctx.im(v))))
    assert worst < 10 * engine.DEFAULT_PRECISION.tail_tol


def test_fast_path_agrees():
    t = np.array([15.0, 140.5, 999.9, 4800.2])
    z = fastzeta.hardy_z(t)
    for ti, zi in zip(t, z):
        assert abs(zi - float(engine.hardy_z(ti))) < 1e-10
    s = np.array([0.6 + 300j, 2 + 1000j])
    for si, v in zip(s, fastzeta.zeta_jets(s, 2).T):
        j = engine.zeta_jets(si, order=2)
        assert all(abs(v[k] - complex(j[k])) < 1e-9 for k in range(3))


def _table(gammas, t_max):
    return ZeroTable.from_gammas(gammas, t_max)


def test_log_zeta_branch(table_small):
    for t in (100.0, 1000.0 - 0.5):
        v = engine.log_zeta(complex(2, t), table_small)
        assert -math.pi / 2 < float(v.imag) < math.pi / 2
    v = engine.log_zeta(complex(10, 123.0), table_small)
    assert abs(engine.ctx_for(engine.DEFAULT_PRECISION).exp(v) - engine.zeta(complex(10, 123.0))) < 1e-10


def test_log_zeta_tracks_zero_count(table_small):
    # S(t) = arg zeta(1/2 + eps + it)/pi jumps by one across each ordinate
    g = table_small.gammas
    for k in (3, 40):
        lo = 0.5 * (g[k - 1] + g[k])
        hi = 0.5 * (g[k] + g[k + 1])
        th = lambda t: float(engine.rs_theta(t)) / math.pi + 1
        s_lo = float(engine.log_zeta(complex(0.5 + 1e-9, lo), table_small).imag) / math.pi
        s_hi = float(engine.log_zeta(complex(0.5 + 1e-9, hi), table_small).imag) / math.pi
        assert round(th(lo) + s_lo) == k
        assert round(th(hi) + s_hi) == k + 1


def test_log_zeta_refuses_bad_paths(table_small):
    g = table_small.gammas[10]
    with pytest.raises(PathTooCloseToZero):
        engine.log_zeta(complex(0.4, g + 1e-5), table_small)
    with pytest.raises(TableIncomplete):
        engine.log_zeta(complex(0.6, 1200.0), table_small)
