"""Test-function families, vector potentials, and radial region geometry.

All built-in families are radial: a field is a profile ``g`` of the radius
together with support metadata, certified bounds (Lipschitz constant,
sup-norm) and declared kink radii where the gradient is not defined.  The
bounds are deliberately safe over-estimates: downstream quadrature uses the
Lipschitz constant to skip provably-empty near-diagonal shells and the
sup-norm bound to shortcut empty indicator sets, and both shortcuts are only
sound if the bounds really dominate the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

BALL = "ball"
COMPLEMENT = "complement_of_ball"
ANNULUS = "annulus"
WHOLE = "whole_space"

_KINDS = (BALL, COMPLEMENT, ANNULUS, WHOLE)


def _as_points(pts: np.ndarray, dim: int) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        if dim == 1:
            pts = pts[:, None]
        else:
            pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != dim:
        raise ValueError(f"expected points of shape (m, {dim}), got {pts.shape}")
    return pts


def ball_volume(d: int, radius: float) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius**d


# ---------------------------------------------------------------------------
# Regions and supports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """A radially defined region: ball, annulus, ball complement, or R^d."""

    kind: str
    r: Optional[float] = None
    R: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.kind in (COMPLEMENT, ANNULUS):
            if self.r is None or self.r <= 0:
                raise ValueError("inner radius must be positive")
        if self.kind in (BALL, ANNULUS):
            if self.R is None or self.R <= 0:
                raise ValueError("outer radius must be positive")
        if self.kind == ANNULUS and not self.r < self.R:
            raise ValueError("annulus needs r < R")

    # constructors ---------------------------------------------------------
    @staticmethod
    def ball(R: float) -> "Region":
        return Region(BALL, R=float(R))

    @staticmethod
    def annulus(r: float, R: float) -> "Region":
        return Region(ANNULUS, r=float(r), R=float(R))

    @staticmethod
    def complement_of_ball(r: float) -> "Region":
        return Region(COMPLEMENT, r=float(r))

    @staticmethod
    def whole_space() -> "Region":
        return Region(WHOLE)

    @staticmethod
    def bounded_domain() -> "Region":
        """The bounded-domain placeholder: the open unit ball."""
        return Region(BALL, R=1.0)

    # geometry -------------------------------------------------------------
    @property
    def radial_bounds(self) -> tuple[float, float]:
        lo = self.r if self.kind in (COMPLEMENT, ANNULUS) else 0.0
        hi = self.R if self.kind in (BALL, ANNULUS) else math.inf
        return (lo, hi)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.radial_bounds[1])

    def diameter(self) -> float:
        return 2.0 * self.radial_bounds[1]

    def volume(self, d: int) -> float:
        lo, hi = self.radial_bounds
        if not math.isfinite(hi):
            return math.inf
        return ball_volume(d, hi) - ball_volume(d, lo)

    def scaled(self, lam: float) -> "Region":
        """The dilated region {lam * x : x in self}."""
        if lam <= 0:
            raise ValueError("scaling factor must be positive")
        r = None if self.r is None else self.r * lam
        R = None if self.R is None else self.R * lam
        return Region(self.kind, r=r, R=R)

    def contains(self, pts: np.ndarray, dim: int) -> np.ndarray:
        """Vectorized membership test; balls are open, inner edges closed."""
        pts = _as_points(pts, dim)
        rho = np.linalg.norm(pts, axis=1)
        lo, hi = self.radial_bounds
        ok = np.ones(len(rho), dtype=bool)
        if lo > 0.0:
            ok &= rho >= lo
        if math.isfinite(hi):
            ok &= rho < hi
        return ok

    def intersect(self, other: "Region") -> Optional["Region"]:
        """Radial intersection, or None when it has empty interior."""
        lo = max(self.radial_bounds[0], other.radial_bounds[0])
        hi = min(self.radial_bounds[1], other.radial_bounds[1])
        if not lo < hi:
            return None
        return region_from_bounds(lo, hi)


def region_from_bounds(lo: float, hi: float) -> Region:
    if lo <= 0.0:
        return Region.whole_space() if not math.isfinite(hi) else Region.ball(hi)
    if not math.isfinite(hi):
        return Region.complement_of_ball(lo)
    return Region.annulus(lo, hi)


@dataclass(frozen=True)
class SupportInfo:
    """Support descriptor of a field: where it may be nonzero."""

    kind: str
    r: Optional[float] = None
    R: Optional[float] = None

    def __post_init__(self):
        # Reuse Region validation.
        Region(self.kind, r=self.r, R=self.R)

    @staticmethod
    def ball(R: float) -> "SupportInfo":
        return SupportInfo(BALL, R=float(R))

    @staticmethod
    def annulus(r: float, R: float) -> "SupportInfo":
        return SupportInfo(ANNULUS, r=float(r), R=float(R))

    @staticmethod
    def complement_of_ball(r: float) -> "SupportInfo":
        return SupportInfo(COMPLEMENT, r=float(r))

    @staticmethod
    def whole_space() -> "SupportInfo":
        return SupportInfo(WHOLE)

    def as_region(self) -> Region:
        return Region(self.kind, r=self.r, R=self.R)

    @property
    def radial_bounds(self) -> tuple[float, float]:
        return self.as_region().radial_bounds

    @property
    def bounded(self) -> bool:
        return self.as_region().bounded

    @property
    def contains_origin(self) -> bool:
        return self.kind in (BALL, WHOLE)

    def scaled(self, lam: float) -> "SupportInfo":
        reg = self.as_region().scaled(lam)
        return SupportInfo(reg.kind, r=reg.r, R=reg.R)


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """An evaluable test function with certified metadata.

    ``values_fn`` maps an (m, dim) array of points to (m,) values and must
    vanish outside ``support``.  ``grad_fn`` (optional) maps points to
    (m, dim) gradients, valid away from the declared ``kink_radii``.
    ``lipschitz`` and ``osc_bound`` are safe upper bounds for the global
    Lipschitz constant and for sup|u|.  Radial fields also carry their
    profile so deterministic radial quadrature can be used.
    """

    dim: int
    support: SupportInfo
    values_fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz: Optional[float] = None
    osc_bound: Optional[float] = None
    radial_profile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    radial_dprofile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    kink_radii: tuple[float, ...] = ()
    singular_radii: tuple[float, ...] = ()
    # Smallest radius beyond which |u| <= c, or +inf when no such radius is
    # known.  Used to window pair integrals on unbounded supports.
    active_radius_fn: Optional[Callable[[float], float]] = None
    label: str = "field"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if self.lipschitz is not None and self.lipschitz < 0:
            raise ValueError("lipschitz bound must be nonnegative")
        if self.osc_bound is not None and self.osc_bound < 0:
            raise ValueError("oscillation bound must be nonnegative")

    # evaluation -----------------------------------------------------------
    def values(self, pts: np.ndarray) -> np.ndarray:
        return self.values_fn(_as_points(pts, self.dim))

    def value(self, x) -> float:
        return float(self.values(np.atleast_2d(np.asarray(x, dtype=float)))[0])

    def gradients(self, pts: np.ndarray) -> np.ndarray:
        if self.grad_fn is None:
            raise ValueError(f"{self.label} has no analytic gradient")
        return self.grad_fn(_as_points(pts, self.dim))

    def gradient(self, x) -> np.ndarray:
        return self.gradients(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    @property
    def is_radial(self) -> bool:
        return self.radial_profile is not None

    def active_radius(self, c: float) -> float:
        if c <= 0:
            return math.inf
        if self.active_radius_fn is not None:
            return float(self.active_radius_fn(c))
        if self.support.bounded:
            return self.support.radial_bounds[1]
        return math.inf

    # derived fields -------------------------------------------------------
    def rescaled(self, lam: float) -> "ScalarField":
        """The dilation x -> u(x / lam), supported on the scaled region."""
        if lam <= 0:
            raise ValueError("scaling factor must be positive")
        lam = float(lam)
        base = self

        def values_fn(pts):
            return base.values_fn(pts / lam)

        grad_fn = None
        if base.grad_fn is not None:

            def grad_fn(pts):  # noqa: F811 - deliberate rebind
                return base.grad_fn(pts / lam) / lam

        profile = None
        dprofile = None
        if base.radial_profile is not None:
            profile = lambda rho: base.radial_profile(rho / lam)  # noqa: E731
        if base.radial_dprofile is not None:
            dprofile = lambda rho: base.radial_dprofile(rho / lam) / lam  # noqa: E731

        active = None
        if base.active_radius_fn is not None:
            active = lambda c: lam * base.active_radius_fn(c)  # noqa: E731

        return replace(
            base,
            support=base.support.scaled(lam),
            values_fn=values_fn,
            grad_fn=grad_fn,
            lipschitz=None if base.lipschitz is None else base.lipschitz / lam,
            radial_profile=profile,
            radial_dprofile=dprofile,
            kink_radii=tuple(k * lam for k in base.kink_radii),
            singular_radii=tuple(s * lam for s in base.singular_radii),
            active_radius_fn=active,
            label=f"{base.label}(x/{lam:g})",
        )

    def shifted(self, offset: float) -> "ScalarField":
        """u + offset.  Support becomes all of R^d; bounded-region use only."""
        base = self
        offset = float(offset)
        profile = None
        if base.radial_profile is not None:
            profile = lambda rho: base.radial_profile(rho) + offset  # noqa: E731
        return replace(
            base,
            support=SupportInfo.whole_space(),
            values_fn=lambda pts: base.values_fn(pts) + offset,
            osc_bound=None if base.osc_bound is None else base.osc_bound + abs(offset),
            radial_profile=profile,
            active_radius_fn=lambda c: math.inf,
            label=f"{base.label}+{offset:g}",
        )


def radial_field(
    dim: int,
    support: SupportInfo,
    profile: Callable[[np.ndarray], np.ndarray],
    dprofile: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    **kw,
) -> ScalarField:
    """Assemble a ScalarField from a radial profile g(|x|)."""

    def values_fn(pts):
        return profile(np.linalg.norm(pts, axis=1))

    grad_fn = None
    if dprofile is not None:

        def grad_fn(pts):
            rho = np.linalg.norm(pts, axis=1)
            gp = np.zeros_like(rho)
            m = rho > 0
            gp[m] = dprofile(rho[m]) / rho[m]
            return pts * gp[:, None]

    return ScalarField(
        dim=dim,
        support=support,
        values_fn=values_fn,
        grad_fn=grad_fn,
        radial_profile=profile,
        radial_dprofile=dprofile,
        **kw,
    )


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def _ramp_pieces(support: SupportInfo, w: float):
    """Breakpoints and ramp directions of the cutoff adapted to ``support``.

    Returns (kinks, chi, dchi) with chi the piecewise-linear cutoff of width
    ``w`` that is 1 deep inside the support and 0 outside it.
    """
    lo, hi = support.radial_bounds
    kinks: list[float] = []
    if support.kind in (COMPLEMENT, ANNULUS):
        kinks += [lo, lo + w]
    if support.kind in (BALL, ANNULUS):
        kinks += [max(hi - w, 0.0), hi]

    def chi(rho):
        out = np.ones_like(rho)
        if support.kind in (COMPLEMENT, ANNULUS):
            out = np.minimum(out, np.clip((rho - lo) / w, 0.0, 1.0))
        if support.kind in (BALL, ANNULUS):
            out = np.minimum(out, np.clip((hi - rho) / w, 0.0, 1.0))
        return out

    def dchi(rho):
        out = np.zeros_like(rho)
        if support.kind in (COMPLEMENT, ANNULUS):
            on = (rho > lo) & (rho < lo + w)
            # Only the active (smaller) branch of the min contributes.
            if support.kind == ANNULUS:
                on &= (rho - lo) <= (hi - rho)
            out[on] = 1.0 / w
        if support.kind in (BALL, ANNULUS):
            on = (rho > hi - w) & (rho < hi)
            if support.kind == ANNULUS:
                on &= (hi - rho) < (rho - lo)
            out[on] = -1.0 / w
        return out

    return sorted(set(kinks)), chi, dchi


def make_radial_power(
    d: int,
    s: float,
    support: SupportInfo,
    smoothing: float,
    allow_unbounded: bool = False,
) -> ScalarField:
    """|x|^(-s) truncated to ``support`` by a linear ramp of width ``smoothing``.

    With s = 0 and a ball support of radius R this is the tent
    (1 - |x|/R)_+ when smoothing = R.  Positive s on a support containing
    the origin is rejected unless ``allow_unbounded`` is set, because the
    field is then unbounded and carries no oscillation bound.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if smoothing <= 0:
        raise ValueError("smoothing width must be positive")
    w = float(smoothing)
    s = float(s)
    unbounded_origin = s > 0 and support.contains_origin
    if unbounded_origin and not allow_unbounded:
        raise ValueError(
            "radial power with s > 0 is unbounded on a support containing the "
            "origin; pass allow_unbounded=True to opt in"
        )

    kinks, chi, dchi = _ramp_pieces(support, w)
    lo, hi = support.radial_bounds
    if support.contains_origin:
        # Radial gradient direction is undefined at the origin (tent apex).
        kinks = sorted(set(kinks) | {0.0})

    def profile(rho):
        rho = np.asarray(rho, dtype=float)
        c = chi(rho)
        out = np.zeros_like(rho)
        m = c > 0.0
        if s == 0.0:
            out[m] = c[m]
        else:
            out[m] = rho[m] ** (-s) * c[m]
        return out

    def dprofile(rho):
        rho = np.asarray(rho, dtype=float)
        c = chi(rho)
        dc = dchi(rho)
        out = np.zeros_like(rho)
        m = (c > 0.0) | (dc != 0.0)
        if s == 0.0:
            out[m] = dc[m]
        else:
            out[m] = -s * rho[m] ** (-s - 1.0) * c[m] + rho[m] ** (-s) * dc[m]
        return out

    lipschitz = None if unbounded_origin else _power_lipschitz_bound(s, w, support, kinks)
    osc = _power_sup_bound(s, support, unbounded_origin)

    plateau_start = lo + w if support.kind in (COMPLEMENT, ANNULUS) else 0.0

    def active_radius(c):
        if support.bounded:
            return hi
        if s > 0:
            # Beyond the inner ramp the profile is rho^(-s), decreasing.
            return max(plateau_start, c ** (-1.0 / s))
        if s == 0.0 and support.kind == COMPLEMENT and c >= 1.0:
            return plateau_start
        return math.inf

    return radial_field(
        d,
        support,
        profile,
        dprofile,
        lipschitz=lipschitz,
        osc_bound=osc,
        kink_radii=tuple(kinks),
        singular_radii=(0.0,) if unbounded_origin else (),
        active_radius_fn=active_radius,
        label=f"radial_power(s={s:g},{support.kind},smoothing={w:g})",
    )


def _power_lipschitz_bound(s, w, support, kinks):
    """Safe upper bound for sup |g'| of the ramped power profile."""
    if s == 0.0:
        return 1.0 / w
    lo, hi = support.radial_bounds
    if support.contains_origin:
        # s < 0 here (s > 0 was the opt-in unbounded case).
        if not math.isfinite(hi):
            return None  # |x|^(2) style growth: no global bound
        pts = [k for k in kinks if k > 0] + [hi]
        lead = max(abs(s) * r ** (-s - 1.0) for r in pts)
        edge = max(r ** (-s) for r in pts)
        return lead + edge / w
    # Support excludes the origin: pieces live on [lo, hi].
    cap = hi if math.isfinite(hi) else lo + 16.0 * w + 16.0
    ends = sorted({lo, *[k for k in kinks if math.isfinite(k)], cap})
    if not math.isfinite(hi) and -s - 1.0 > 0:
        return None  # growing derivative at infinity
    lead = max(abs(s) * r ** (-s - 1.0) for r in ends if r > 0)
    edge = max(r ** (-s) for r in ends if r > 0)
    return lead + edge / w


def _power_sup_bound(s, support, unbounded_origin):
    if unbounded_origin:
        return None
    lo, hi = support.radial_bounds
    if s == 0.0:
        return 1.0
    if s > 0:
        return lo ** (-s)  # profile <= rho^(-s) <= lo^(-s) on the support
    if not math.isfinite(hi):
        return None
    return hi ** (-s)


def make_tent(d: int, R: float = 1.0) -> ScalarField:
    """The tent (1 - |x|/R)_+: unit-width ramp cutoff of the constant 1."""
    u = make_radial_power(d, 0.0, SupportInfo.ball(R), smoothing=R)
    return replace(u, label=f"tent(R={R:g})")


def make_bump(d: int, R: float = 1.0) -> ScalarField:
    """The C^1 bump (1 - |x|^2/R^2)^2 on the ball of radius R."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if R <= 0:
        raise ValueError("radius must be positive")
    R = float(R)

    def profile(rho):
        rho = np.asarray(rho, dtype=float)
        t = 1.0 - (rho / R) ** 2
        return np.where(rho < R, t * t, 0.0)

    def dprofile(rho):
        rho = np.asarray(rho, dtype=float)
        t = 1.0 - (rho / R) ** 2
        return np.where(rho < R, -4.0 * rho / R**2 * t, 0.0)

    # sup |g'| attained at rho = R/sqrt(3).
    lip = 8.0 / (3.0 * math.sqrt(3.0) * R)
    return radial_field(
        d,
        SupportInfo.ball(R),
        profile,
        dprofile,
        lipschitz=lip,
        osc_bound=1.0,
        kink_radii=(),
        label=f"bump(R={R:g})",
    )


def make_step_1d() -> ScalarField:
    """The 1-D unit step u(x) = 1 for x > 0, 0 for x <= 0.

    Carries no gradient and no Lipschitz bound; its support descriptor is
    the whole line, so pair integrals fall back to a windowed estimate and
    report divergence when the window cannot capture the energy.
    """

    def values_fn(pts):
        return (pts[:, 0] > 0.0).astype(float)

    return ScalarField(
        dim=1,
        support=SupportInfo.whole_space(),
        values_fn=values_fn,
        grad_fn=None,
        lipschitz=None,
        osc_bound=1.0,
        active_radius_fn=lambda c: math.inf if c < 1.0 else 0.0,
        label="step_1d",
    )


def make_constant(d: int, c: float) -> ScalarField:
    """The constant field u = c on R^d (calibration probe)."""

    def values_fn(pts):
        return np.full(len(pts), float(c))

    def grad_fn(pts):
        return np.zeros_like(pts)

    return ScalarField(
        dim=d,
        support=SupportInfo.whole_space(),
        values_fn=values_fn,
        grad_fn=grad_fn,
        lipschitz=0.0,
        osc_bound=abs(float(c)),
        radial_profile=lambda rho: np.full_like(np.asarray(rho, dtype=float), float(c)),
        radial_dprofile=lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
        active_radius_fn=lambda x: math.inf if x < abs(float(c)) else 0.0,
        label=f"constant({c:g})",
    )


def make_zero(d: int) -> ScalarField:
    """The zero field with a small nominal support (degenerate probe)."""

    def values_fn(pts):
        return np.zeros(len(pts))

    def grad_fn(pts):
        return np.zeros_like(pts)

    return ScalarField(
        dim=d,
        support=SupportInfo.ball(1.0),
        values_fn=values_fn,
        grad_fn=grad_fn,
        lipschitz=0.0,
        osc_bound=0.0,
        radial_profile=lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
        radial_dprofile=lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
        label="zero",
    )


# ---------------------------------------------------------------------------
# Vector potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorPotential:
    """A locally bounded vector field A : R^d -> R^d."""

    dim: int
    vectors_fn: Callable[[np.ndarray], np.ndarray]
    bound_fn: Callable[[float], float]
    label: str = "potential"

    def vectors(self, pts: np.ndarray) -> np.ndarray:
        return self.vectors_fn(_as_points(pts, self.dim))

    def at(self, x) -> np.ndarray:
        return self.vectors(np.atleast_2d(np.asarray(x, dtype=float)))[0]

    def bound(self, radius: float) -> float:
        """sup |A| over the closed ball of the given radius."""
        return float(self.bound_fn(float(radius)))


def make_linear_potential(d: int, matrix) -> VectorPotential:
    """A(x) = M x for a d-by-d coefficient matrix M."""
    M = np.asarray(matrix, dtype=float)
    if M.shape != (d, d):
        raise ValueError(f"matrix must be {d}x{d}, got {M.shape}")
    opnorm = float(np.linalg.norm(M, 2))

    def vectors_fn(pts):
        return pts @ M.T

    return VectorPotential(
        dim=d,
        vectors_fn=vectors_fn,
        bound_fn=lambda R: opnorm * R,
        label=f"linear_potential(opnorm={opnorm:g})",
    )


# ---------------------------------------------------------------------------
# Family registry (CLI instantiation by name + parameter map)
# ---------------------------------------------------------------------------


def make_family(name: str, d: int, **params) -> ScalarField:
    """Instantiate a field family by name; unknown names/params are errors."""
    name = name.lower()
    if name == "bump":
        _check_params(name, params, {"R"})
        return make_bump(d, R=float(params.get("R", 1.0)))
    if name == "tent":
        _check_params(name, params, {"R"})
        return make_tent(d, R=float(params.get("R", 1.0)))
    if name == "step":
        _check_params(name, params, set())
        if d != 1:
            raise ValueError("step family is one-dimensional")
        return make_step_1d()
    if name == "constant":
        _check_params(name, params, {"c"})
        return make_constant(d, float(params.get("c", 1.0)))
    if name == "radial_power":
        _check_params(name, params, {"s", "support", "r", "R", "smoothing", "allow_unbounded"})
        kind = params.get("support", BALL)
        r = params.get("r")
        R = params.get("R")
        sup = SupportInfo(kind, r=None if r is None else float(r), R=None if R is None else float(R))
        return make_radial_power(
            d,
            float(params.get("s", 0.0)),
            sup,
            smoothing=float(params.get("smoothing", 0.25)),
            allow_unbounded=bool(params.get("allow_unbounded", False)),
        )
    raise ValueError(f"unknown family {name!r}")


def _check_params(name: str, params: dict, allowed: set):
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"family {name!r} got unknown parameters {sorted(extra)}")
