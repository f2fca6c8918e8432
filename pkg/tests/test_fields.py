import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlhardy.fields import (
    Region,
    ScalarField,
    SupportInfo,
    make_bump,
    make_constant,
    make_family,
    make_linear_potential,
    make_radial_power,
    make_step_1d,
    make_tent,
)

from oracles import finite_difference_gradient

FAMILIES = [
    ("tent3", lambda: make_tent(3, 1.0)),
    ("bump2", lambda: make_bump(2, 1.0)),
    ("power_annulus", lambda: make_radial_power(2, 1.0, SupportInfo.annulus(0.5, 2.0), smoothing=0.25)),
    ("power_exterior", lambda: make_radial_power(2, 1.5, SupportInfo.complement_of_ball(0.5), smoothing=0.25)),
]


# ---------------------------------------------------------------------------
# pinned example values
# ---------------------------------------------------------------------------


def test_tent_values_d3():
    u = make_radial_power(3, 0.0, SupportInfo.ball(1.0), smoothing=1.0)
    assert u.value([0.0, 0.0, 0.0]) == 1.0
    assert u.value([1.0, 0.0, 0.0]) == 0.0
    assert u.value([0.8, 0.8, 0.8]) == 0.0  # |x| > 1


def test_ramp_is_linear_d1():
    u = make_radial_power(1, 0.0, SupportInfo.ball(1.0), smoothing=1.0)
    assert u.value([0.5]) == pytest.approx(0.5, abs=1e-15)


def test_radial_power_matches_formula_on_plateau():
    u = make_radial_power(2, 1.0, SupportInfo.annulus(0.5, 2.0), smoothing=0.25)
    for r in np.linspace(0.75, 1.75, 23):
        x = np.array([r, 0.0]) / math.sqrt(2) * math.sqrt(2)
        assert u.value([r, 0.0]) == pytest.approx(1.0 / r, rel=1e-12)


def test_bump_examples():
    u1 = make_bump(1, 1.0)
    assert u1.value([0.0]) == 1.0
    assert u1.value([1.0]) == 0.0
    assert u1.value([-1.0]) == 0.0
    assert u1.gradient([0.0])[0] == pytest.approx(0.0, abs=1e-14)
    u2 = make_bump(2, 1.0)
    g = u2.gradient([0.5, 0.0])
    assert g[0] == pytest.approx(-1.5, rel=1e-12)
    assert g[1] == pytest.approx(0.0, abs=1e-14)
    fd = finite_difference_gradient(u2, np.array([0.5, 0.0]))
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-7)


def test_step_examples():
    u = make_step_1d()
    assert u.value([3.2]) == 1.0
    assert u.value([-0.1]) == 0.0
    assert u.value([0.0]) == 0.0
    assert u.osc_bound == 1.0
    assert u.grad_fn is None and u.lipschitz is None
    # oscillation over any interval crossing 0 is 1
    xs = np.linspace(-0.5, 0.5, 101)[:, None]
    vals = u.values(xs)
    assert vals.max() - vals.min() == 1.0


def test_linear_potential_examples():
    a = make_linear_potential(2, [[0.0, -1.0], [1.0, 0.0]])
    assert np.allclose(a.at([1.0, 0.0]), [0.0, 1.0])
    b = make_linear_potential(1, [[2.0]])
    assert b.at([3.0])[0] == pytest.approx(6.0)
    z = make_linear_potential(2, np.zeros((2, 2)))
    assert np.all(z.vectors(np.random.default_rng(0).normal(size=(50, 2))) == 0.0)
    assert a.bound(2.0) == pytest.approx(2.0)  # rotation has operator norm 1


def test_radial_power_rejects_unbounded_origin():
    with pytest.raises(ValueError):
        make_radial_power(2, 1.0, SupportInfo.ball(1.0), smoothing=0.25)
    u = make_radial_power(2, 1.0, SupportInfo.ball(1.0), smoothing=0.25, allow_unbounded=True)
    assert u.osc_bound is None and u.lipschitz is None


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


def _interior_points(u, rng, n):
    """Random points inside the support, away from kinks and singularities."""
    lo, hi = u.support.radial_bounds
    hi = min(hi, lo + 4.0) if not math.isfinite(hi) else hi
    pts = []
    while len(pts) < n:
        x = rng.uniform(-hi, hi, size=u.dim)
        r = np.linalg.norm(x)
        if not (lo + 1e-3 < r < hi - 1e-3):
            continue
        if any(abs(r - k) < 1e-2 for k in u.kink_radii):
            continue
        pts.append(x)
    return np.array(pts)


@pytest.mark.parametrize("name,maker", FAMILIES)
def test_gradient_matches_finite_differences(name, maker, rng):
    u = maker()
    for x in _interior_points(u, rng, 100):
        g = u.gradient(x)
        fd = finite_difference_gradient(u, x)
        scale = max(np.linalg.norm(g), 1e-3)
        assert np.linalg.norm(g - fd) <= 1e-4 * scale + 1e-7, (name, x)


@pytest.mark.parametrize("name,maker", FAMILIES + [("step", make_step_1d)])
def test_values_vanish_outside_support(name, maker, rng):
    u = maker()
    lo, hi = u.support.radial_bounds
    pts = []
    while len(pts) < 1000:
        x = rng.normal(size=u.dim) * (hi if math.isfinite(hi) else lo + 1.0) * 2.0
        r = np.linalg.norm(x)
        inside = r >= lo if not math.isfinite(hi) else (lo <= r < hi)
        if name == "step":
            inside = x[0] > 0
        if not inside:
            pts.append(x)
    assert np.all(u.values(np.array(pts)) == 0.0)


@pytest.mark.parametrize("name,maker", FAMILIES)
def test_lipschitz_bound_holds_on_pairs(name, maker, rng):
    u = maker()
    assert u.lipschitz is not None
    lo, hi = u.support.radial_bounds
    span = (hi if math.isfinite(hi) else lo + 5.0) + 1.0
    x = rng.uniform(-span, span, size=(4000, u.dim))
    y = rng.uniform(-span, span, size=(4000, u.dim))
    lhs = np.abs(u.values(x) - u.values(y))
    rhs = u.lipschitz * np.linalg.norm(x - y, axis=1)
    assert np.all(lhs <= rhs * (1.0 + 1e-12) + 1e-12), name


@pytest.mark.parametrize("name,maker", FAMILIES)
def test_osc_bound_dominates_sup(name, maker, rng):
    u = maker()
    assert u.osc_bound is not None
    lo, hi = u.support.radial_bounds
    span = hi if math.isfinite(hi) else lo + 20.0
    x = rng.uniform(-span, span, size=(20000, u.dim))
    assert np.abs(u.values(x)).max() <= u.osc_bound * (1.0 + 1e-12)


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.7])
def test_rescaled_field_matches_composition(lam, rng):
    u = make_bump(2, 1.0)
    v = u.rescaled(lam)
    pts = rng.uniform(-2.5 * lam, 2.5 * lam, size=(500, 2))
    assert np.array_equal(v.values(pts), u.values(pts / lam))
    assert v.support.radial_bounds[1] == pytest.approx(lam)
    assert v.lipschitz == pytest.approx(u.lipschitz / lam)


def test_active_radius_of_decaying_field():
    u = make_radial_power(2, 2.0, SupportInfo.complement_of_ball(0.5), smoothing=0.25)
    r = u.active_radius(0.01)
    assert u.value([r * 1.01, 0.0]) <= 0.01
    assert math.isinf(make_step_1d().active_radius(0.5))


def test_constant_field():
    u = make_constant(2, 3.0)
    assert u.value([17.0, -4.0]) == 3.0
    assert u.osc_bound == 3.0 and u.lipschitz == 0.0


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


def test_region_membership_and_bounds():
    ann = Region.annulus(0.5, 2.0)
    pts = np.array([[0.4, 0.0], [0.5, 0.0], [1.9, 0.0], [2.0, 0.0]])
    assert list(ann.contains(pts, 2)) == [False, True, True, False]
    assert ann.radial_bounds == (0.5, 2.0)
    assert Region.whole_space().radial_bounds == (0.0, math.inf)
    assert Region.bounded_domain().radial_bounds == (0.0, 1.0)


def test_region_volume():
    assert Region.ball(1.0).volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)
    assert Region.annulus(1.0, 2.0).volume(2) == pytest.approx(math.pi * 3.0, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(
    lam=st.floats(min_value=0.1, max_value=8.0, allow_nan=False),
    x=st.floats(min_value=-3.0, max_value=3.0),
    y=st.floats(min_value=-3.0, max_value=3.0),
)
def test_scaled_region_membership(lam, x, y):
    base = Region.annulus(0.5, 2.0)
    pt = np.array([[x, y]])
    scaled = base.scaled(lam)
    assert scaled.contains(pt * lam, 2)[0] == base.contains(pt, 2)[0]


@settings(max_examples=30, deadline=None)
@given(r=st.floats(min_value=1e-3, max_value=10.0), R=st.floats(min_value=1e-3, max_value=10.0))
def test_support_radii_ordering_enforced(r, R):
    if r < R:
        SupportInfo.annulus(r, R)
    else:
        with pytest.raises(ValueError):
            SupportInfo.annulus(r, R)


def test_family_registry():
    u = make_family("bump", 2, R=1.5)
    assert u.support.radial_bounds[1] == pytest.approx(1.5)
    with pytest.raises(ValueError):
        make_family("bump", 2, wobble=3)
    with pytest.raises(ValueError):
        make_family("unknown", 2)
