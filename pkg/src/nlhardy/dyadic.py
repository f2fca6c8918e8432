"""Dyadic annulus machinery.

The plane decomposes into annuli A_k = {2^k <= |x| < 2^{k+1}}.  This module
provides the support-to-index map, per-annulus means and energies, the
dyadic energy profile used by the general weighted-interpolation theorem,
the scale-invariant Poincare/interpolation ratio checks on annuli, and the
elementary Young-type inequality constant.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import energy as energy_mod
from . import rng
from .errors import ConfigError, ParamViolation, UnboundedDomain
from .fields import BALL, COMPLEMENT, ANNULUS, WHOLE, Region, ScalarField
from .quad import EnergyEstimate, QuadConfig, exact_zero, integrate_region, RADIAL_REDUCTION

DEFAULT_INNER_DEPTH = 21


def annulus(k: int) -> Region:
    """The dyadic annulus A_k = {2^k <= |x| < 2^{k+1}}."""
    return Region.annulus(2.0**k, 2.0 ** (k + 1))


def annulus_pair(k: int) -> Region:
    """A_k united with A_{k+1}: the annulus {2^k <= |x| < 2^{k+2}}."""
    return Region.annulus(2.0**k, 2.0 ** (k + 2))


def support_annulus_range(u: ScalarField, depth: int = DEFAULT_INNER_DEPTH) -> tuple[int, int]:
    """Dyadic index bounds (m, n) with 2^{n-1} <= R < 2^n and 2^m <= r < 2^{m+1}.

    For a one-sided support the missing index defaults ``depth`` levels
    beyond the known one; the inner annuli still matter numerically for
    fields that do not vanish near the origin.
    """
    kind = u.support.kind
    lo, hi = u.support.radial_bounds
    if kind == WHOLE:
        raise UnboundedDomain("whole-space support has no dyadic index range")

    def outer_index(R: float) -> int:
        # smallest n with R < 2^n and 2^{n-1} <= R
        return math.floor(math.log2(R)) + 1

    def inner_index(r: float) -> int:
        return math.floor(math.log2(r))

    if kind == BALL:
        n = outer_index(hi)
        return n - depth, n
    if kind == COMPLEMENT:
        m = inner_index(lo)
        return m, m + depth
    n = outer_index(hi)
    m = inner_index(lo)
    return m, n


def annulus_mean(u: ScalarField, k: int, cfg: QuadConfig) -> float:
    """Volume-normalized average of u over A_k."""
    reg = annulus(k)
    d = u.dim
    vol = reg.volume(d)
    est = _integral_over(u, reg, cfg, power=1.0, signed=True)
    return est.value / vol


def _integral_over(u: ScalarField, reg: Region, cfg: QuadConfig, power: float, signed: bool) -> EnergyEstimate:
    """Integral of u (signed) or |u|^power over a bounded radial region."""
    d = u.dim
    lo, hi = reg.radial_bounds
    s_lo, s_hi = u.support.radial_bounds
    lo2, hi2 = max(lo, s_lo), min(hi, s_hi)
    if not lo2 < hi2:
        return exact_zero() if not signed else EnergyEstimate(0.0)
    if u.is_radial:
        prof = u.radial_profile

        def radial(rho):
            v = prof(rho)
            if signed and power == 1.0:
                return v
            return np.abs(v) ** power

        return integrate_region(
            None,
            Region.annulus(lo2, hi2) if lo2 > 0 else Region.ball(hi2),
            d,
            cfg.with_(method=RADIAL_REDUCTION),
            radial=radial,
            kinks=u.kink_radii,
        )

    def f(pts):
        v = u.values(pts)
        if signed and power == 1.0:
            return v
        return np.abs(v) ** power

    return integrate_region(
        f,
        Region.annulus(lo2, hi2) if lo2 > 0 else Region.ball(hi2),
        d,
        cfg,
        singular_radii=u.singular_radii,
    )


# ---------------------------------------------------------------------------
# CKN parameter tuples
# ---------------------------------------------------------------------------

_BALANCE_TOL = 1e-12


@dataclass(frozen=True)
class CKNParams:
    """The exponent tuple (p, q, tau, a, alpha, beta, gamma, sigma) in R^d.

    Validates the dimensional balance relation

        1/tau + gamma/d = a (1/p + (alpha-1)/d) + (1-a) (1/q + beta/d)

    and gamma = a sigma + (1-a) beta to 1e-12, plus alpha - sigma >= 0.
    ``sigma_gap_ok`` records whether alpha - sigma <= 1 (required by the
    general dyadic theorem, optional elsewhere).
    """

    d: int
    p: float
    q: float
    tau: float
    a: float
    alpha: float
    beta: float
    gamma: float
    sigma: float

    def __post_init__(self):
        if self.d < 1:
            raise ParamViolation("dimension must be >= 1")
        if self.p < 1 or self.q < 1:
            raise ParamViolation("p and q must be >= 1")
        if self.tau <= 0:
            raise ParamViolation("tau must be positive")
        if not 0 < self.a <= 1:
            raise ParamViolation("a must lie in (0, 1]")
        if abs(self.balance_residual) > _BALANCE_TOL:
            raise ParamViolation(
                f"balance relation violated (residual {self.balance_residual:.3e})"
            )
        if abs(self.gamma - (self.a * self.sigma + (1 - self.a) * self.beta)) > _BALANCE_TOL:
            raise ParamViolation("gamma must equal a*sigma + (1-a)*beta")
        if self.alpha - self.sigma < -_BALANCE_TOL:
            raise ParamViolation("alpha - sigma must be nonnegative")

    @property
    def balance_residual(self) -> float:
        lhs = 1.0 / self.tau + self.gamma / self.d
        rhs = self.a * (1.0 / self.p + (self.alpha - 1.0) / self.d) + (1.0 - self.a) * (
            1.0 / self.q + self.beta / self.d
        )
        return lhs - rhs

    @property
    def sigma_gap_ok(self) -> bool:
        return self.alpha - self.sigma <= 1.0 + _BALANCE_TOL

    @property
    def homogeneity(self) -> float:
        """1/tau + gamma/d, whose sign selects the theorem branch."""
        return 1.0 / self.tau + self.gamma / self.d

    @staticmethod
    def balanced(
        d: int,
        p: float,
        q: float,
        a: float,
        alpha: float,
        beta: float,
        sigma: float,
        tau: Optional[float] = None,
    ) -> "CKNParams":
        """Solve gamma (and tau unless given) from the balance relation."""
        gamma = a * sigma + (1 - a) * beta
        if tau is None:
            inv_tau = (
                a * (1.0 / p + (alpha - 1.0) / d)
                + (1.0 - a) * (1.0 / q + beta / d)
                - gamma / d
            )
            if inv_tau <= 0:
                raise ParamViolation(f"balance gives non-positive 1/tau = {inv_tau:.3e}")
            tau = 1.0 / inv_tau
        else:
            # tau fixed: sigma must absorb the balance; recompute and check
            target = a * (1.0 / p + (alpha - 1.0) / d) + (1.0 - a) * (1.0 / q + beta / d)
            gamma = d * (target - 1.0 / tau)
            if a > 0:
                sigma = (gamma - (1 - a) * beta) / a
        return CKNParams(d=d, p=p, q=q, tau=tau, a=a, alpha=alpha, beta=beta, gamma=gamma, sigma=sigma)


# ---------------------------------------------------------------------------
# Dyadic profile
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProfileEntry:
    k: int
    mean: float
    lq_norm: float
    i_delta_k: float
    i_delta_k_grad: float
    i_delta_k_std: float = 0.0
    diverged: bool = False


@dataclass(frozen=True)
class DyadicProfile:
    """Per-annulus means, norms, and energies for k in [m-1, n].

    ``i_delta_k`` is the indicator pair energy over A_k union A_{k+1} (with
    radial weight alpha) plus the dyadic penalty 2^{k (alpha p + d - p)}
    delta^p; ``i_delta_k_grad`` is the weighted gradient energy over the
    same annulus pair (NaN when the field has no gradient); ``lq_norm`` is
    the beta-weighted L^q norm over A_k.
    """

    entries: tuple[ProfileEntry, ...]
    params: CKNParams
    m: int
    n: int
    delta: float
    inner_truncation_ok: bool = True

    def __post_init__(self):
        ks = [e.k for e in self.entries]
        if ks != list(range(self.m - 1, self.n + 1)):
            raise ValueError("profile entries must cover exactly k in [m-1, n]")

    def i_delta_sum(self) -> float:
        return float(sum(e.i_delta_k for e in self.entries))

    def i_delta_sum_std(self) -> float:
        return float(math.sqrt(sum(e.i_delta_k_std**2 for e in self.entries)))

    def grad_sum(self) -> float:
        return float(sum(e.i_delta_k_grad for e in self.entries))

    def any_diverged(self) -> bool:
        return any(e.diverged for e in self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "mean", "lq_norm", "i_delta_k", "i_delta_k_grad"])
        for e in self.entries:
            w.writerow([e.k, repr(e.mean), repr(e.lq_norm), repr(e.i_delta_k), repr(e.i_delta_k_grad)])
        return buf.getvalue()


def dyadic_penalty(k: int, params: CKNParams, delta: float) -> float:
    return 2.0 ** (k * (params.alpha * params.p + params.d - params.p)) * delta**params.p


def dyadic_profile(
    u: ScalarField,
    params: CKNParams,
    delta: float,
    cfg: QuadConfig,
    m: Optional[int] = None,
    n: Optional[int] = None,
    depth: int = DEFAULT_INNER_DEPTH,
) -> DyadicProfile:
    """Per-annulus profile for k in [m-1, n].

    Both the indicator-energy branch and (when a gradient exists) the
    gradient branch are computed so the two can be compared.  Each annulus
    energy draws from a seed derived from (cfg.seed, k) so entries are
    independent and reproducible.
    """
    if u.dim != params.d:
        raise ConfigError("field dimension does not match the parameter tuple")
    if delta <= 0:
        raise ConfigError("delta must be positive")
    if m is None or n is None:
        m0, n0 = support_annulus_range(u, depth=depth)
        m = m0 if m is None else m
        n = n0 if n is None else n
    if not m < n:
        raise ConfigError("need m < n")

    p, alpha, q, beta = params.p, params.alpha, params.q, params.beta
    entries = []
    for k in range(m - 1, n + 1):
        reg = annulus_pair(k)
        cfg_k = cfg.with_(seed=rng.derive_seed(cfg.seed, 11, k))
        pair = energy_mod.i_delta(u, reg, energy_mod.EnergyParams(p=p, delta=delta, alpha=alpha), cfg_k)
        i_k = pair.value + dyadic_penalty(k, params, delta)
        if u.grad_fn is not None:
            grad_k = energy_mod.gradient_energy(u, alpha, p, cfg_k, region=reg).value
        else:
            grad_k = math.nan
        lq = energy_mod.weighted_norm(
            u, annulus(k), energy_mod.WeightSpec(gamma=beta, tau=q), cfg_k
        ).powered(1.0 / q)
        entries.append(
            ProfileEntry(
                k=k,
                mean=annulus_mean(u, k, cfg_k),
                lq_norm=lq.value,
                i_delta_k=i_k,
                i_delta_k_grad=grad_k,
                i_delta_k_std=pair.std_err,
                diverged=pair.diverged,
            )
        )

    total = sum(e.i_delta_k for e in entries)
    inner = sum(e.i_delta_k for e in entries[:3])
    truncation_ok = (u.support.kind != BALL) or (inner <= 1e-3 * total if total > 0 else True)
    return DyadicProfile(
        entries=tuple(entries),
        params=params,
        m=m,
        n=n,
        delta=delta,
        inner_truncation_ok=truncation_ok,
    )


# ---------------------------------------------------------------------------
# Poincare / interpolation ratios on scaled annuli
# ---------------------------------------------------------------------------


def _centered_moment(u: ScalarField, reg: Region, power: float, cfg: QuadConfig) -> float:
    """Mean of |u - mean(u)|^power over the region (volume-normalized)."""
    d = u.dim
    vol = reg.volume(d)
    mean = _integral_over(u, reg, cfg, power=1.0, signed=True).value / vol
    lo, hi = reg.radial_bounds
    if u.is_radial:
        prof = u.radial_profile

        def radial(rho):
            return np.abs(prof(rho) - mean) ** power

        est = integrate_region(
            None, reg, d, cfg.with_(method=RADIAL_REDUCTION), radial=radial, kinks=u.kink_radii
        )
    else:

        def f(pts):
            return np.abs(u.values(pts) - mean) ** power

        est = integrate_region(f, reg, d, cfg, singular_radii=u.singular_radii)
    return est.value / vol


def poincare_ratio(
    u: ScalarField,
    D: Region,
    lam: float,
    p: float,
    delta: float,
    cfg: QuadConfig,
) -> float:
    """Empirical constant of the annulus Poincare inequality.

    Returns mean_{lam D}|u - mean_{lam D} u|^p divided by
    lam^{p-d} I_delta(u, lam D) + delta^p; finite by construction.
    """
    num, den = _poincare_pieces(u, D, lam, p, delta, cfg)
    return num / den


def _poincare_pieces(u, D, lam, p, delta, cfg):
    if D.kind != ANNULUS:
        raise ConfigError("the Poincare ratio is defined on annuli")
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    d = u.dim
    reg = D.scaled(lam)
    num = _centered_moment(u, reg, p, cfg)
    pair = energy_mod.i_delta(u, reg, energy_mod.EnergyParams(p=p, delta=delta, alpha=0.0), cfg)
    den = lam ** (p - d) * pair.value + delta**p
    return num, den


def interpolation_ratio(
    u: ScalarField,
    D: Region,
    lam: float,
    p: float,
    q: float,
    tau: float,
    a: float,
    delta: float,
    cfg: QuadConfig,
) -> float:
    """LHS/RHS of the annulus interpolation inequality.

    LHS is the centered tau-mean; RHS couples the indicator energy (power
    a/p) with the centered q-mean (power (1-a)/q).  Requires the exponent
    relation 1/tau >= a (1/p - 1/d) + (1-a)/q, and 1 < p < d for the
    energy form; returns 0 when the LHS vanishes.
    """
    d = u.dim
    if not 0 <= a <= 1:
        raise ParamViolation("a must lie in [0, 1]")
    if 1.0 / tau < a * (1.0 / p - 1.0 / d) + (1.0 - a) / q - 1e-12:
        raise ParamViolation("need 1/tau >= a(1/p - 1/d) + (1-a)/q")
    if a > 0 and not (1 < p < d):
        raise ParamViolation("the energy form of the interpolation needs 1 < p < d")
    reg = D.scaled(lam)
    lhs = _centered_moment(u, reg, tau, cfg) ** (1.0 / tau)
    if lhs == 0.0:
        return 0.0
    num_p, den_p = _poincare_pieces(u, D, lam, p, delta, cfg)
    rhs = den_p ** (a / p)
    if a < 1:
        rhs *= _centered_moment(u, reg, q, cfg) ** ((1.0 - a) / q)
    return lhs / rhs


# ---------------------------------------------------------------------------
# The elementary Young-type constant
# ---------------------------------------------------------------------------


def holder_min_constant(lam: float, tau: float, c_grid: int = 400, x_grid: int = 2000) -> float:
    """Smallest C with (x+1)^tau <= c x^tau + C/(c-1)^{tau-1} on the grids.

    Scans c over (1, lam] and x over [0, 1000] plus the per-c interior
    critical point x0 = (c^{1/(tau-1)} - 1)^{-1}; the x -> infinity limit
    imposes no constraint for c > 1.  Computed as the maximum of
    ((x+1)^tau - c x^tau) (c-1)^{tau-1}.
    """
    if lam <= 1:
        raise ParamViolation("lam must exceed 1")
    if tau <= 1:
        raise ParamViolation("tau must exceed 1")
    if c_grid < 100 or x_grid < 100:
        raise ParamViolation("grids must have at least 100 points")
    cs = 1.0 + (lam - 1.0) * (np.arange(1, c_grid + 1) / c_grid)
    xs = np.linspace(0.0, 1.0e3, x_grid)
    x0 = 1.0 / (cs ** (1.0 / (tau - 1.0)) - 1.0)
    best = 0.0
    for i, c in enumerate(cs):
        cand = np.append(xs, x0[i])
        gain = (cand + 1.0) ** tau - c * cand**tau
        best = max(best, float(gain.max() * (c - 1.0) ** (tau - 1.0)))
    return best
