"""The nonlocal energies, weighted norms, gradient energies, and K_{d,p}.

Every operation returns an :class:`~nlhardy.quad.EnergyEstimate`; outer
exponents (p/tau powers, products of norms) are applied by callers so a
single weighted-integral primitive serves every inequality case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quad
from .errors import ConfigError, MissingGradient, ParamViolation
from .fields import Region, ScalarField, VectorPotential
from .quad import EnergyEstimate, QuadConfig

LOG_NONE = "none"
LOG_R_OVER_X = "ln_R_over_x"
LOG_X_OVER_R = "ln_x_over_r"


@dataclass(frozen=True)
class EnergyParams:
    """Exponent p, threshold delta, and radial weight exponent alpha."""

    p: float
    delta: float
    alpha: float = 0.0

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("p must be >= 1")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")


@dataclass(frozen=True)
class WeightSpec:
    """Weight |x|^(gamma*tau) with an optional logarithmic denominator.

    ``log_kind`` selects ln(2R/|x|) or ln(2|x|/r); ``log_power`` is its
    exponent in the denominator.  The log argument must exceed 1 on the
    integration region (checked at evaluation time).
    """

    gamma: float
    tau: float
    log_kind: str = LOG_NONE
    log_radius: Optional[float] = None
    log_power: float = 0.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.log_kind not in (LOG_NONE, LOG_R_OVER_X, LOG_X_OVER_R):
            raise ConfigError(f"unknown log kind {self.log_kind!r}")
        if self.log_kind != LOG_NONE and (self.log_radius is None or self.log_radius <= 0):
            raise ConfigError("log weights need a positive reference radius")

    def log_argument(self, rho: np.ndarray) -> np.ndarray:
        if self.log_kind == LOG_R_OVER_X:
            return 2.0 * self.log_radius / rho
        if self.log_kind == LOG_X_OVER_R:
            return 2.0 * rho / self.log_radius
        return np.ones_like(rho)

    def weight(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        out = np.ones_like(rho)
        expo = self.gamma * self.tau
        if expo != 0.0:
            out = rho**expo
        if self.log_kind != LOG_NONE:
            arg = self.log_argument(rho)
            if np.any(arg <= 1.0):
                raise ParamViolation(
                    "log weight argument must exceed 1 on the integration region"
                )
            out = out / np.log(arg) ** self.log_power
        return out

    def validate_on(self, lo: float, hi: float) -> None:
        """Reject region bounds on which the log argument dips below 1."""
        if self.log_kind == LOG_R_OVER_X and hi >= 2.0 * self.log_radius:
            raise ParamViolation("ln(2R/|x|) weight needs |x| < 2R on the region")
        if self.log_kind == LOG_X_OVER_R and lo <= self.log_radius / 2.0:
            raise ParamViolation("ln(2|x|/r) weight needs |x| > r/2 on the region")


# ---------------------------------------------------------------------------
# Nonlocal energies
# ---------------------------------------------------------------------------


def i_delta(u: ScalarField, region: Region, params: EnergyParams, cfg: QuadConfig) -> EnergyEstimate:
    """The indicator pair energy I_delta(u, region, alpha)."""
    return quad.integrate_pair_singular(u, region, params.p, params.delta, params.alpha, cfg)


def j_delta(u: ScalarField, p: float, delta: float, cfg: QuadConfig) -> EnergyEstimate:
    """The scaled Gagliardo energy (1-delta) iint |u(x)-u(y)|^p / |x-y|^{d+p delta}."""
    if not 0 < delta < 1:
        raise ConfigError("j_delta needs 0 < delta < 1")
    if p < 1:
        raise ConfigError("p must be >= 1")
    return quad.pair_shell_mc(
        u, Region.whole_space(), cfg, p=p, delta=delta, alpha=0.0, mode=quad.GAGLIARDO
    )


def i_delta_magnetic(
    u: ScalarField, potential: VectorPotential, params: EnergyParams, cfg: QuadConfig
) -> EnergyEstimate:
    """The magnetic variant: indicator on |Psi_u(x,y) - Psi_u(x,x)|.

    For real u the squared modulus is (u(x)-u(y))^2 + 2 u(x) u(y) (1-cos th)
    with the phase th = (x-y) . A((x+y)/2); the second term vanishes
    identically for A = 0, reproducing the plain energy exactly under a
    shared seed.
    """
    if u.dim != potential.dim:
        raise ConfigError("field and potential dimensions differ")
    return quad.pair_shell_mc(
        u,
        Region.whole_space(),
        cfg,
        p=params.p,
        delta=params.delta,
        alpha=params.alpha,
        mode=quad.INDICATOR,
        potential=potential,
    )


# ---------------------------------------------------------------------------
# Weighted norms and gradient energies
# ---------------------------------------------------------------------------


def weighted_norm(u: ScalarField, region: Region, w: WeightSpec, cfg: QuadConfig) -> EnergyEstimate:
    """The unexponentiated integral of weight(x) |u(x)|^tau over the region.

    Radial fields integrate by the deterministic 1-D reduction over the
    intersection of the region with the support; callers apply any outer
    powers.  A divergence at the origin (gamma*tau <= -d with u(0) != 0 and
    the region touching 0) is flagged, with the value reported as the mass
    outside a small core.
    """
    d = u.dim
    lo, hi = region.radial_bounds
    s_lo, s_hi = u.support.radial_bounds
    lo, hi = max(lo, s_lo), min(hi, s_hi)
    if not lo < hi:
        return quad.exact_zero()
    w.validate_on(lo, hi)

    # Divergence at the origin: |x|^{gamma tau} with gamma tau <= -d is not
    # integrable against a nonvanishing u; exactly at the border a log
    # denominator of power > 1 restores convergence.
    expo = w.gamma * w.tau
    origin_div = expo < -d or (
        expo == -d and not (w.log_kind == LOG_R_OVER_X and w.log_power > 1.0)
    )
    diverged = False
    if origin_div and lo == 0.0:
        near_origin = abs(u.value(np.full(d, 1e-9)))
        if near_origin > 0.0:
            diverged = True
            lo = 1e-6  # report the mass outside a small core, flagged

    if u.is_radial:
        profile = u.radial_profile

        def radial(rho):
            vals = np.abs(profile(rho)) ** w.tau
            out = np.zeros_like(vals)
            m = vals > 0.0
            if m.any():
                out[m] = w.weight(rho[m]) * vals[m]
            return out

        est = quad.integrate_region(
            None,
            quad.region_from_bounds(lo, hi),
            d,
            cfg.with_(method=quad.RADIAL_REDUCTION),
            radial=radial,
            kinks=u.kink_radii,
        )
    else:
        if not math.isfinite(hi):
            raise quad.UnboundedDomain("weighted norm of a non-radial field needs bounded reach")

        def f(pts):
            rho = np.linalg.norm(pts, axis=1)
            vals = np.abs(u.values(pts)) ** w.tau
            out = np.zeros_like(vals)
            m = vals > 0.0
            if m.any():
                out[m] = w.weight(rho[m]) * vals[m]
            return out

        est = quad.integrate_region(
            f,
            quad.region_from_bounds(lo, hi),
            d,
            cfg,
            singular_radii=u.singular_radii,
        )
    if diverged:
        est = EnergyEstimate(est.value, est.std_err, est.n_samples, est.tail_analytic, True)
    return est


def gradient_energy(
    u: ScalarField,
    alpha: float,
    p: float,
    cfg: QuadConfig,
    region: Optional[Region] = None,
) -> EnergyEstimate:
    """The weighted gradient energy: integral of |x|^{p alpha} |grad u|^p.

    Defaults to the support of u; an explicit region restricts it (used for
    per-annulus energies).  Radial fields use the deterministic reduction.
    """
    if p < 1:
        raise ConfigError("p must be >= 1")
    if u.grad_fn is None:
        raise MissingGradient(f"{u.label} carries no analytic gradient")
    d = u.dim
    lo, hi = u.support.radial_bounds
    if region is not None:
        lo = max(lo, region.radial_bounds[0])
        hi = min(hi, region.radial_bounds[1])
        if not lo < hi:
            return quad.exact_zero()

    if u.is_radial and u.radial_dprofile is not None:
        dprof = u.radial_dprofile

        def radial(rho):
            out = np.abs(dprof(rho)) ** p
            if alpha != 0.0:
                out = out * rho ** (p * alpha)
            return out

        return quad.integrate_region(
            None,
            quad.region_from_bounds(lo, hi),
            d,
            cfg.with_(method=quad.RADIAL_REDUCTION),
            radial=radial,
            kinks=u.kink_radii,
        )

    if not math.isfinite(hi):
        raise quad.UnboundedDomain("gradient energy of a non-radial field needs a bounded support")

    def f(pts):
        g = np.linalg.norm(u.gradients(pts), axis=1) ** p
        if alpha != 0.0:
            g = g * np.linalg.norm(pts, axis=1) ** (p * alpha)
        return g

    return quad.integrate_region(
        f,
        quad.region_from_bounds(lo, hi),
        d,
        cfg,
        singular_radii=u.singular_radii,
    )


# ---------------------------------------------------------------------------
# The sphere constant
# ---------------------------------------------------------------------------


def k_constant(d: int, p: float) -> float:
    """K_{d,p} = (1/p) * integral over S^{d-1} of |e . sigma|^p.

    Closed form 2 pi^{(d-1)/2} Gamma((p+1)/2) / (p Gamma((d+p)/2)); equals
    2/p in d = 1 where the sphere carries the two-point counting measure.
    """
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    if p < 1:
        raise ConfigError("p must be >= 1")
    return (
        2.0
        * math.pi ** ((d - 1) / 2.0)
        * math.gamma((p + 1) / 2.0)
        / (p * math.gamma((d + p) / 2.0))
    )


def k_constant_mc(d: int, p: float, cfg: QuadConfig, e: Optional[np.ndarray] = None) -> EnergyEstimate:
    """Monte Carlo cross-check of K_{d,p} via the sphere integral."""
    if e is None:
        e_vec = np.zeros(d)
        e_vec[0] = 1.0
    else:
        e_vec = np.asarray(e, dtype=float)
        e_vec = e_vec / np.linalg.norm(e_vec)

    def g(sig):
        return np.abs(sig @ e_vec) ** p

    return quad.sphere_integral(g, d, cfg).scaled(1.0 / p)
