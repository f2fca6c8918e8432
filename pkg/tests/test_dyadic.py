import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlhardy.dyadic import (
    CKNParams,
    annulus,
    annulus_mean,
    annulus_pair,
    dyadic_penalty,
    dyadic_profile,
    holder_min_constant,
    interpolation_ratio,
    poincare_ratio,
    support_annulus_range,
)
from nlhardy.energy import EnergyParams, i_delta, gradient_energy
from nlhardy.errors import ParamViolation, UnboundedDomain
from nlhardy.fields import Region, SupportInfo, make_bump, make_constant, make_radial_power, make_step_1d, make_tent
from nlhardy.quad import QuadConfig

from oracles import radial_integral


# ---------------------------------------------------------------------------
# support index ranges
# ---------------------------------------------------------------------------


def test_support_range_examples():
    assert support_annulus_range(make_tent(3, 1.0))[1] == 1
    assert support_annulus_range(make_radial_power(2, 1.5, SupportInfo.complement_of_ball(1.0), 0.25))[0] == 0
    u = make_radial_power(2, 0.5, SupportInfo.annulus(0.5, 4.0), 0.1)
    assert support_annulus_range(u) == (-1, 3)


def test_support_range_dyadic_conditions():
    for radius in (0.3, 1.0, 2.0, 5.7):
        u = make_tent(2, radius)
        n = support_annulus_range(u)[1]
        assert 2.0 ** (n - 1) <= radius < 2.0**n


def test_support_range_default_depth():
    m, n = support_annulus_range(make_tent(3, 1.0))
    assert m == n - 21  # inner annuli still sampled for fields alive near 0


def test_support_range_whole_space_raises():
    with pytest.raises(UnboundedDomain):
        support_annulus_range(make_step_1d())


# ---------------------------------------------------------------------------
# annulus means
# ---------------------------------------------------------------------------


def test_annulus_mean_constant(cfg):
    assert annulus_mean(make_constant(2, 2.5), 0, cfg) == pytest.approx(2.5, rel=1e-12)


def test_annulus_mean_absolute_value_1d(cfg):
    # mean of |x| over [-2,-1] union [1,2] is 3/2
    u = make_radial_power(1, -1.0, SupportInfo.ball(8.0), smoothing=1e-9)
    # profile is rho on [0, 8): restrict attention to annulus 0
    assert annulus_mean(u, 0, cfg) == pytest.approx(1.5, rel=1e-6)


def test_annulus_mean_outside_support_is_zero(cfg):
    assert annulus_mean(make_tent(2, 1.0), 4, cfg) == 0.0


# ---------------------------------------------------------------------------
# CKN parameter tuples
# ---------------------------------------------------------------------------


def test_ckn_balance_enforced():
    with pytest.raises(ParamViolation):
        CKNParams(d=3, p=2, q=2, tau=2, a=0.5, alpha=0.25, beta=0.0, gamma=0.3, sigma=0.6)


def test_ckn_balanced_solves_tau():
    ck = CKNParams.balanced(3, 2.0, 2.0, 0.5, alpha=0.25, beta=0.0, sigma=0.25)
    assert ck.tau == pytest.approx(3.0)
    assert abs(ck.balance_residual) < 1e-12
    assert ck.sigma_gap_ok


def test_ckn_balanced_fixed_tau_solves_sigma():
    ck = CKNParams.balanced(3, 2.0, 2.0, 0.5, alpha=-2.0, beta=0.0, sigma=0.0, tau=2.0)
    assert ck.gamma == pytest.approx(-1.5)
    assert ck.sigma == pytest.approx(-3.0)
    assert ck.homogeneity == pytest.approx(0.0, abs=1e-13)


def test_ckn_requires_alpha_at_least_sigma():
    with pytest.raises(ParamViolation):
        CKNParams.balanced(3, 2.0, 2.0, 0.5, alpha=0.0, beta=0.0, sigma=0.5)


# ---------------------------------------------------------------------------
# dyadic profile
# ---------------------------------------------------------------------------


def _params_g1(d=3):
    return CKNParams.balanced(d, 2.0, 2.0, 0.5, alpha=0.25, beta=0.0, sigma=0.25)


def test_profile_constant_field_is_pure_penalty(cfg):
    ck = _params_g1()
    u = make_constant(3, 5.0)
    prof = dyadic_profile(u, ck, 0.1, cfg.with_(samples=2000), m=-2, n=2)
    for e in prof.entries:
        assert e.i_delta_k == pytest.approx(dyadic_penalty(e.k, ck, 0.1), rel=1e-12)
        assert e.mean == pytest.approx(5.0, rel=1e-9)


def test_profile_grad_sum_counts_overlap(cfg):
    # A_k union A_{k+1} covers each annulus at most twice, so the summed
    # gradient branch lands between 1 and 2 times the global energy.
    u = make_radial_power(3, 0.5, SupportInfo.annulus(1.0, 2.0), smoothing=0.2)
    ck = _params_g1()
    prof = dyadic_profile(u, ck, 0.1, cfg.with_(samples=4000))
    total = gradient_energy(u, ck.alpha, ck.p, cfg).value
    s = prof.grad_sum()
    assert 1.0 * total * (1 - 1e-6) <= s <= 2.0 * total * (1 + 1e-6)


def test_profile_pipeline_bump_2d(cfg):
    ck = CKNParams.balanced(2, 1.5, 2.0, 0.5, alpha=0.25, beta=0.0, sigma=0.25)
    u = make_bump(2, 1.0)
    prof = dyadic_profile(u, ck, 0.1, cfg.with_(samples=4000))
    assert prof.n == 1  # 2^0 <= 1 < 2^1
    assert all(np.isfinite(e.i_delta_k) for e in prof.entries)
    assert [e.k for e in prof.entries] == list(range(prof.m - 1, prof.n + 1))


def test_profile_sum_dominates_cover_energy():
    # Overlapping covers only add mass: sum_k I(k, u) >= I(u, cover, alpha).
    cfg = QuadConfig(samples=30_000, seed=3)
    ck = _params_g1()
    u = make_tent(3, 1.0)
    prof = dyadic_profile(u, ck, 0.1, cfg, m=-6, n=1)
    cover = Region.annulus(2.0**-7, 2.0**3)
    whole = i_delta(u, cover, EnergyParams(ck.p, 0.1, ck.alpha), cfg)
    assert prof.i_delta_sum() >= whole.value - 3.0 * math.hypot(whole.std_err, prof.i_delta_sum_std())


def test_profile_csv_columns():
    cfg = QuadConfig(samples=1000, seed=3)
    prof = dyadic_profile(make_tent(3, 1.0), _params_g1(), 0.25, cfg, m=-2, n=1)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "k,mean,lq_norm,i_delta_k,i_delta_k_grad"
    assert len(lines) == 1 + (1 - (-2) + 2)


def test_partition_of_weighted_mass(cfg):
    # For u supported in an annulus the per-annulus tau-masses add up to the
    # full integral.
    u = make_radial_power(2, 0.5, SupportInfo.annulus(0.5, 4.0), smoothing=0.1)
    tau = 2.0
    m, n = support_annulus_range(u)
    total = 0.0
    for k in range(m, n + 1):
        reg = annulus(k)
        lo, hi = reg.radial_bounds
        total += radial_integral(lambda r: np.abs(u.radial_profile(np.array([r]))[0]) ** tau, 2, lo, hi)
    full = radial_integral(lambda r: np.abs(u.radial_profile(np.array([r]))[0]) ** tau, 2, 0.5, 4.0)
    assert total == pytest.approx(full, rel=1e-7)


# ---------------------------------------------------------------------------
# Poincare / interpolation ratios
# ---------------------------------------------------------------------------

D_ANNULUS = Region.annulus(1.0, 2.0)


def test_poincare_ratio_constant_zero(cfg):
    got = poincare_ratio(make_constant(2, 3.0), D_ANNULUS, 1.0, 2.0, 0.1, cfg)
    assert got == pytest.approx(0.0, abs=1e-20)  # quadrature dust only


def test_poincare_ratio_large_delta_exact(cfg):
    # delta >= 2 sup|u| empties the indicator: the ratio is the centered
    # p-moment divided by delta^p exactly.
    u = make_bump(2, 1.5)
    delta = 2.5
    got = poincare_ratio(u, D_ANNULUS, 1.0, 2.0, delta, cfg)
    reg = Region.annulus(1.0, 2.0)
    vol = reg.volume(2)
    mean = radial_integral(lambda r: u.radial_profile(np.array([r]))[0], 2, 1.0, 2.0) / vol
    mom = radial_integral(lambda r: (u.radial_profile(np.array([r]))[0] - mean) ** 2, 2, 1.0, 2.0) / vol
    assert got == pytest.approx(mom / delta**2, rel=1e-7)


def test_poincare_ratio_lambda_stability():
    cfg = QuadConfig(samples=60_000, seed=41)
    u = make_bump(2, 3.0)
    ratios = [poincare_ratio(u, D_ANNULUS, lam, 2.0, 0.1, cfg) for lam in (0.25, 1.0, 4.0)]
    assert max(ratios) <= 5.0 * min(r for r in ratios if r > 0)


def test_poincare_ratio_shift_invariance(cfg):
    # Compare u + 0 against u + c so both runs share the same sampling core:
    # the ratio depends on u only through differences and centered moments.
    u = make_bump(2, 1.5)
    a = poincare_ratio(u.shifted(0.0), D_ANNULUS, 1.0, 2.0, 0.2, cfg)
    b = poincare_ratio(u.shifted(0.7), D_ANNULUS, 1.0, 2.0, 0.2, cfg)
    assert b == pytest.approx(a, rel=1e-9)


def test_interpolation_reduces_to_poincare(cfg):
    u = make_bump(3, 1.5)
    p, delta = 2.0, 0.15
    pr = poincare_ratio(u, D_ANNULUS, 1.0, p, delta, cfg)
    ir = interpolation_ratio(u, D_ANNULUS, 1.0, p, 2.0, p, 1.0, delta, cfg)
    assert ir == pytest.approx(pr ** (1.0 / p), rel=1e-12)


def test_interpolation_constant_zero(cfg):
    assert interpolation_ratio(make_constant(3, 1.0), D_ANNULUS, 1.0, 2.0, 2.0, 2.0, 0.5, 0.1, cfg) == 0.0


def test_interpolation_lambda_stability():
    cfg = QuadConfig(samples=50_000, seed=43)
    u = make_bump(3, 3.0)
    tau = 1.0 / (0.5 * (1.0 / 2.0 - 1.0 / 3.0) + 0.5 / 2.0)  # equality case
    ratios = [interpolation_ratio(u, D_ANNULUS, lam, 2.0, 2.0, tau, 0.5, 0.1, cfg) for lam in (0.5, 1.0, 2.0)]
    assert max(ratios) <= 5.0 * min(ratios)


def test_interpolation_rejects_bad_exponents(cfg):
    u = make_bump(3, 1.5)
    with pytest.raises(ParamViolation):
        interpolation_ratio(u, D_ANNULUS, 1.0, 2.0, 2.0, 50.0, 0.5, 0.1, cfg)
    with pytest.raises(ParamViolation):
        interpolation_ratio(make_bump(2, 1.5), D_ANNULUS, 1.0, 2.0, 2.0, 2.0, 0.5, 0.1, cfg)  # p = d


# ---------------------------------------------------------------------------
# the Young-type constant
# ---------------------------------------------------------------------------


def test_holder_constant_tau2():
    assert holder_min_constant(2.0, 2.0) == pytest.approx(2.0, rel=1e-3)
    assert holder_min_constant(1.5, 2.0) == pytest.approx(1.5, rel=1e-3)


def test_holder_constant_monotone_in_lam():
    vals = [holder_min_constant(lam, 2.5) for lam in (1.2, 1.6, 2.0, 3.0)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_holder_constant_validates_on_random_triples(rng):
    for lam, tau in ((2.0, 2.0), (1.5, 3.0)):
        c_const = holder_min_constant(lam, tau)
        c = rng.uniform(1.0 + 1e-9, lam, 10_000)
        a = rng.uniform(-10.0, 10.0, 10_000)
        b = rng.uniform(-10.0, 10.0, 10_000)
        lhs = (np.abs(a) + np.abs(b)) ** tau
        rhs = c * np.abs(a) ** tau + c_const / (c - 1.0) ** (tau - 1.0) * np.abs(b) ** tau
        assert np.all(lhs <= rhs * (1.0 + 1e-9))


def test_holder_constant_validates_grid_preconditions():
    with pytest.raises(ParamViolation):
        holder_min_constant(2.0, 2.0, c_grid=10)
    with pytest.raises(ParamViolation):
        holder_min_constant(1.0, 2.0)
    with pytest.raises(ParamViolation):
        holder_min_constant(2.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(
    lam=st.floats(min_value=1.05, max_value=4.0),
    tau=st.floats(min_value=1.1, max_value=4.0),
    c=st.floats(min_value=0.0, max_value=1.0),
    x=st.floats(min_value=0.0, max_value=100.0),
)
def test_holder_constant_property(lam, tau, c, x):
    cc = 1.0 + (lam - 1.0) * max(c, 1e-9)
    c_const = holder_min_constant(lam, tau, c_grid=200, x_grid=400)
    lhs = (x + 1.0) ** tau
    rhs = cc * x**tau + c_const / (cc - 1.0) ** (tau - 1.0)
    assert lhs <= rhs * (1.0 + 1e-6) + 1e-9
