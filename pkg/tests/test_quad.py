import math

import numpy as np
import pytest

from nlhardy.errors import ConfigError, NonFinite, UnboundedDomain
from nlhardy.fields import Region, SupportInfo, make_bump, make_constant, make_radial_power, make_step_1d, make_tent
from nlhardy.quad import (
    EnergyEstimate,
    QuadConfig,
    integrate_pair_singular,
    integrate_region,
    pair_oracle_1d,
    pair_oracle_radial,
    pair_shell_mc,
    sphere_area,
    sphere_integral,
)

from oracles import clamp_i_delta_closed, make_clamp


# ---------------------------------------------------------------------------
# single integrals
# ---------------------------------------------------------------------------


def test_ball_volume_montecarlo(cfg):
    est = integrate_region(lambda pts: np.ones(len(pts)), Region.ball(1.0), 3, cfg)
    exact = 4.0 * math.pi / 3.0
    assert abs(est.value - exact) <= max(4.0 * est.std_err, 1e-3)
    assert est.std_err < 0.01


def test_hardy_integrand_radial_reduction():
    # u = (1-|x|)_+ in d=3: integral of u^2/|x|^2 equals 4 pi / 3
    u = make_tent(3, 1.0)
    prof = u.radial_profile

    def radial(rho):
        return prof(rho) ** 2 / rho**2

    est = integrate_region(
        None, Region.ball(1.0), 3, QuadConfig(method="radial_reduction", seed=0), radial=radial
    )
    assert est.value == pytest.approx(4.0 * math.pi / 3.0, rel=1e-9)
    assert est.std_err < 1e-6


def test_tensor_grid_region_integral():
    est = integrate_region(
        lambda pts: np.ones(len(pts)), Region.ball(1.0), 2, QuadConfig(method="tensor_grid", samples=3_000_000, seed=0)
    )
    assert est.value == pytest.approx(math.pi, rel=2e-3)


def test_integrate_region_determinism(cfg):
    f = lambda pts: np.exp(-np.linalg.norm(pts, axis=1) ** 2)  # noqa: E731
    a = integrate_region(f, Region.ball(2.0), 3, cfg)
    b = integrate_region(f, Region.ball(2.0), 3, cfg)
    assert a == b
    c = integrate_region(f, Region.ball(2.0), 3, cfg.with_(workers=4))
    assert a == c


def test_integrate_region_unbounded_raises(cfg):
    with pytest.raises(UnboundedDomain):
        integrate_region(lambda pts: np.ones(len(pts)), Region.whole_space(), 2, cfg)


def test_integrate_region_nonfinite_raises(cfg):
    def f(pts):
        out = np.ones(len(pts))
        out[np.linalg.norm(pts, axis=1) < 0.5] = np.inf
        return out

    with pytest.raises(NonFinite):
        integrate_region(f, Region.ball(1.0), 2, cfg)


# ---------------------------------------------------------------------------
# sphere integrals
# ---------------------------------------------------------------------------


def test_sphere_integral_constant_d2(cfg):
    est = sphere_integral(lambda s: np.ones(len(s)), 2, cfg)
    assert est.value == pytest.approx(2.0 * math.pi, rel=1e-12)  # zero-variance integrand


def test_sphere_integral_d1_exact(cfg):
    est = sphere_integral(lambda s: np.ones(len(s)), 1, cfg)
    assert est.value == 2.0 and est.std_err == 0.0


def test_sphere_integral_projection_d3(cfg):
    e = np.array([0.0, 0.0, 1.0])
    est = sphere_integral(lambda s: (s @ e) ** 2, 3, cfg.with_(samples=200_000))
    exact = 4.0 * math.pi / 3.0
    assert abs(est.value - exact) <= 4.0 * est.std_err
    assert abs(est.value - exact) / exact < 0.01


def test_sphere_integral_rotation_invariance(cfg):
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    a = sphere_integral(lambda s: np.abs(s @ e1) ** 1.5, 3, cfg)
    b = sphere_integral(lambda s: np.abs(s @ e2) ** 1.5, 3, cfg.with_(seed=4321))
    assert abs(a.value - b.value) <= 3.0 * math.hypot(a.std_err, b.std_err)


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)


# ---------------------------------------------------------------------------
# pair integrals: exact shortcuts and the closed-form ramp oracle
# ---------------------------------------------------------------------------


def test_pair_constant_field_is_exactly_zero(cfg):
    u = make_constant(2, 5.0)
    est = integrate_pair_singular(u, Region.whole_space(), 2.0, 0.5, 0.0, cfg)
    assert est == EnergyEstimate(0.0, 0.0, 0, 0.0, False)


def test_pair_oscillation_shortcut(cfg):
    u = make_bump(1, 1.0)  # sup|u| = 1
    est = integrate_pair_singular(u, Region.whole_space(), 2.0, 2.0, 0.0, cfg)
    assert est.value == 0.0 and est.std_err == 0.0 and est.n_samples == 0


def test_pair_matches_ramp_closed_form(cfg):
    u = make_clamp()
    c = cfg.with_(samples=150_000, far_field_cut=24.0)
    for delta, p in ((0.1, 2.0), (0.25, 2.0), (0.1, 1.5)):
        est = pair_shell_mc(u, Region.whole_space(), c, p=p, delta=delta)
        closed = clamp_i_delta_closed(delta, p)
        # windowed estimate: flagged, but the window bias is ~delta^p/(2T)
        assert est.diverged
        assert abs(est.value - closed) <= 4.0 * est.std_err + 1e-3


def test_pair_oracle_1d_matches_ramp_closed_form():
    # The ramp has unbounded support, so the oracle windows it: the value
    # carries a window bias of about 4 delta^p / W on top of the x-grid
    # resolution, and the estimate is flagged accordingly.
    u = make_clamp()
    w = 12.0
    cfg = QuadConfig(seed=1, far_field_cut=w, grid=2000)
    est = pair_oracle_1d(u, Region.whole_space(), p=2.0, delta=0.1, cfg=cfg)
    closed = clamp_i_delta_closed(0.1, 2.0)
    assert est.diverged
    assert est.value == pytest.approx(closed, rel=1.2e-2)


def test_pair_step_flags_divergence():
    u = make_step_1d()
    cfg = QuadConfig(samples=60_000, seed=7, far_field_cut=16.0)
    est = pair_shell_mc(u, Region.whole_space(), cfg, p=2.0, delta=0.1)
    assert est.diverged


def test_pair_step_without_cut_raises():
    u = make_step_1d()
    with pytest.raises(UnboundedDomain):
        pair_shell_mc(u, Region.whole_space(), QuadConfig(samples=1000, seed=7), p=2.0, delta=0.1)


# ---------------------------------------------------------------------------
# pair integrals: MC vs the deterministic oracles
# ---------------------------------------------------------------------------


def test_pair_mc_matches_oracle_1d_bump():
    u = make_bump(1, 1.0)
    o = pair_oracle_1d(u, Region.whole_space(), p=2.0, delta=0.01, cfg=QuadConfig(seed=1, grid=1200))
    m = pair_shell_mc(u, Region.whole_space(), QuadConfig(samples=150_000, seed=3), p=2.0, delta=0.01)
    assert abs(m.value - o.value) / o.value < 0.02


@pytest.mark.parametrize(
    "d,p,delta,region",
    [
        (3, 2.0, 0.1, Region.whole_space()),
        (2, 1.5, 0.05, Region.whole_space()),
        (3, 2.0, 0.1, Region.ball(1.5)),
    ],
)
def test_pair_mc_matches_radial_oracle(d, p, delta, region):
    u = make_tent(d, 1.0)
    o = pair_oracle_radial(u, region, p=p, delta=delta, cfg=QuadConfig(seed=1, grid=1400))
    m = pair_shell_mc(u, region, QuadConfig(samples=200_000, seed=3), p=p, delta=delta)
    assert abs(m.value - o.value) <= 4.0 * m.std_err + 2.0 * o.std_err + 0.01 * o.value


def test_pair_alpha_weight_against_radial_oracle():
    u = make_bump(2, 1.0)
    reg = Region.annulus(0.25, 1.0)
    o = pair_oracle_radial(u, reg, p=2.0, delta=0.05, alpha=0.25, cfg=QuadConfig(seed=1, grid=1400))
    m = pair_shell_mc(u, reg, QuadConfig(samples=200_000, seed=3), p=2.0, delta=0.05, alpha=0.25)
    assert abs(m.value - o.value) <= 4.0 * m.std_err + 2.0 * o.std_err + 0.01 * o.value


def test_tensor_grid_dispatch(cfg):
    u1 = make_bump(1, 1.0)
    est = integrate_pair_singular(u1, Region.whole_space(), 2.0, 0.1, 0.0, cfg.with_(method="tensor_grid", grid=600))
    assert est.value > 0
    with pytest.raises(ConfigError):
        integrate_pair_singular(u1, Region.whole_space(), 2.0, 0.1, 0.0, cfg.with_(method="radial_reduction"))


# ---------------------------------------------------------------------------
# estimator properties
# ---------------------------------------------------------------------------


def test_pair_determinism_and_worker_independence(cfg):
    u = make_bump(2, 1.0)
    a = pair_shell_mc(u, Region.whole_space(), cfg, p=2.0, delta=0.05)
    b = pair_shell_mc(u, Region.whole_space(), cfg, p=2.0, delta=0.05)
    c = pair_shell_mc(u, Region.whole_space(), cfg.with_(workers=3), p=2.0, delta=0.05)
    assert a == b == c


def test_lipschitz_shell_skip_is_exact(cfg):
    # The skipped shells contribute exactly zero, so enabling the skip does
    # not change the estimate at all under a shared seed.
    u = make_bump(1, 1.0)
    auto = pair_shell_mc(u, Region.whole_space(), cfg, p=2.0, delta=0.1)
    none = pair_shell_mc(u, Region.whole_space(), cfg.with_(rho_min_policy="none"), p=2.0, delta=0.1)
    assert auto.value == none.value
    assert auto.std_err == none.std_err


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("alpha", [0.0, 0.25])
def test_pair_scaling_law(lam, alpha):
    d, p, delta = 2, 1.5, 0.05
    u = make_bump(d, 1.0)
    base = pair_shell_mc(u, Region.whole_space(), QuadConfig(samples=120_000, seed=5), p=p, delta=delta, alpha=alpha)
    scaled = pair_shell_mc(
        u.rescaled(lam), Region.whole_space(), QuadConfig(samples=120_000, seed=6), p=p, delta=delta, alpha=alpha
    )
    factor = lam ** (d - p + p * alpha)
    combined = math.hypot(scaled.std_err, factor * base.std_err)
    assert abs(scaled.value - factor * base.value) <= 3.0 * combined


def test_domain_monotonicity():
    u = make_bump(2, 1.0)
    small = pair_shell_mc(u, Region.ball(0.7), QuadConfig(samples=80_000, seed=5), p=2.0, delta=0.05)
    big = pair_shell_mc(u, Region.ball(1.3), QuadConfig(samples=80_000, seed=5), p=2.0, delta=0.05)
    assert small.value <= big.value + 3.0 * math.hypot(small.std_err, big.std_err)


def test_estimate_invariants(cfg):
    u = make_bump(1, 1.0)
    est = pair_shell_mc(u, Region.whole_space(), cfg, p=2.0, delta=0.1)
    assert est.std_err >= 0
    assert 0.0 <= est.tail_analytic <= est.value
    assert est.n_samples == cfg.samples


def test_estimate_combinators():
    a = EnergyEstimate(2.0, 0.3)
    b = EnergyEstimate(1.0, 0.4)
    s = a.plus(b)
    assert s.value == 3.0 and s.std_err == pytest.approx(0.5)
    assert a.scaled(2.0).value == 4.0
    sq = a.powered(2.0)
    assert sq.value == 4.0 and sq.std_err == pytest.approx(2 * 2.0 * 0.3)
    with pytest.raises(NonFinite):
        EnergyEstimate(math.inf)


def test_quad_config_validation():
    with pytest.raises(ConfigError):
        QuadConfig(samples=0)
    with pytest.raises(ConfigError):
        QuadConfig(shells=0)
    with pytest.raises(ConfigError):
        QuadConfig(seed=-1)
    with pytest.raises(ConfigError):
        QuadConfig(rho_min_policy="explicit")
    with pytest.raises(ConfigError):
        QuadConfig(far_field_cut=0.0)
