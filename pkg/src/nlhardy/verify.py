"""The inequality harness.

Twenty-seven case ids cover the interior/exterior/critical Hardy ratios
(H1-H4), the weighted CKN ratios for a = 1 (C1-C4), the general dyadic CKN
ratios (G1-G4), the gradient-based assertions (P1-P4), the Sobolev-type
bound (S1), the bounded-domain variants on the unit ball (B1-B8), and the
small-threshold limit checks (L1, L2).  Each case enforces its own
hypotheses, evaluates LHS and RHS through the energy/dyadic modules, and
reports the ratio with error estimates.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import dyadic as dyadic_mod
from . import energy as energy_mod
from . import rng
from .dyadic import CKNParams
from .energy import EnergyParams, WeightSpec
from .errors import ConfigError, HypothesisViolation
from .fields import Region, ScalarField, make_family
from .quad import EnergyEstimate, QuadConfig, exact_zero

CASE_IDS = (
    "H1", "H2", "H3", "H4",
    "C1", "C2", "C3", "C4",
    "G1", "G2", "G3", "G4",
    "P1", "P2", "P3", "P4",
    "S1",
    "B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8",
    "L1", "L2",
)

# Component columns reported in CSV output (absent components stay blank).
COMPONENT_KEYS = (
    "i_delta",
    "penalty",
    "lp_norm_p",
    "lp_norm",
    "weighted_q_norm",
    "grad_term",
    "i_delta_sum",
    "delta",
)


@dataclass(frozen=True)
class InequalityCase:
    """A fully resolved inequality case: exponents plus geometry."""

    case_id: str
    dim: int
    p: float
    q: Optional[float] = None
    tau: Optional[float] = None
    a: Optional[float] = None
    alpha: float = 0.0
    beta: Optional[float] = None
    gamma: Optional[float] = None
    sigma: Optional[float] = None
    r: Optional[float] = None
    R: Optional[float] = None
    m: Optional[int] = None
    n: Optional[int] = None

    def ckn(self) -> CKNParams:
        return CKNParams(
            d=self.dim, p=self.p, q=self.q, tau=self.tau, a=self.a,
            alpha=self.alpha, beta=self.beta, gamma=self.gamma, sigma=self.sigma,
        )

    def echo(self) -> dict:
        out = {"case_id": self.case_id, "dim": self.dim}
        for k in ("p", "q", "tau", "a", "alpha", "beta", "gamma", "sigma", "r", "R", "m", "n"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out


@dataclass(frozen=True)
class InequalityReport:
    case_id: str
    family: str
    delta: float
    lhs: float
    rhs: float
    ratio: float
    components: dict
    std_errs: dict
    verdict: str
    runtime: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepSpec:
    """A family sweep for one case: instances x delta grid."""

    case_id: str
    dim: int
    family: str
    family_grid: tuple
    delta_grid: tuple
    case_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.case_id not in CASE_IDS:
            raise ConfigError(f"unknown case id {self.case_id!r}")
        dg = tuple(float(x) for x in self.delta_grid)
        if not dg or any(x <= 0 for x in dg):
            raise ConfigError("delta grid must be positive")
        if any(b >= a for a, b in zip(dg, dg[1:])):
            raise ConfigError("delta grid must be strictly decreasing")


# ---------------------------------------------------------------------------
# Case construction with per-case parameter defaults
# ---------------------------------------------------------------------------

# Balanced exponent sets used when the caller does not override them.  The
# gradient/log cases pin tau and derive (gamma, sigma) from the balance.
CASE_DEFAULTS = {
    "H1": dict(p=2.0),
    "H2": dict(p=3.0),
    "H3": dict(p=None),  # p = d enforced
    "H4": dict(p=None),
    "C1": dict(p=2.0, q=2.0, a=1.0, alpha=0.25, tau=3.0, beta=0.0),
    "C2": dict(p=2.0, q=2.0, a=1.0, alpha=-1.0, tau=3.0, beta=0.0),
    "C3": dict(p=2.0, q=2.0, a=1.0, tau=2.0, beta=0.0),  # alpha = 1 - d/p enforced
    "C4": dict(p=2.0, q=2.0, a=1.0, tau=2.0, beta=0.0),
    "G1": dict(p=2.0, q=2.0, a=0.5, alpha=0.25, sigma=0.25, beta=0.0),
    "G2": dict(p=2.0, q=2.0, a=0.5, alpha=-1.5, sigma=-2.0, beta=-2.0),
    "G3": dict(p=2.0, q=2.0, a=0.5, alpha=-2.0, beta=0.0, tau=2.0),
    "G4": dict(p=2.0, q=2.0, a=0.5, alpha=0.0, beta=-2.0, tau=2.0),
    "P1": dict(p=2.0, q=2.0, a=0.5, alpha=0.5, sigma=0.0, beta=0.0),
    "P2": dict(p=2.0, q=2.0, a=0.5, alpha=-1.5, sigma=-2.0, beta=-2.0),
    "P3": dict(p=2.0, q=2.0, a=0.5, alpha=-2.0, beta=0.0, tau=2.0),
    "P4": dict(p=2.0, q=2.0, a=0.5, alpha=0.0, beta=-2.0, tau=2.0),
    "S1": dict(p=2.0),
    "B1": dict(p=2.0),
    "B2": dict(p=3.0),
    "B3": dict(p=None),
    "B4": dict(p=None),
    "B5": dict(p=2.0, q=2.0, a=0.5, alpha=0.25, sigma=0.25, beta=0.0),
    "B6": dict(p=2.0, q=2.0, a=0.5, alpha=-1.5, sigma=-2.0, beta=-2.0),
    "B7": dict(p=2.0, q=2.0, a=0.5, alpha=-2.0, beta=0.0, tau=2.0),
    "B8": dict(p=2.0, q=2.0, a=0.5, alpha=0.0, beta=-2.0, tau=2.0),
    "L1": dict(p=2.0),
    "L2": dict(p=2.0),
}

_CKN_CASES = {"C1", "C2", "C3", "C4", "G1", "G2", "G3", "G4", "P1", "P2", "P3", "P4",
              "B5", "B6", "B7", "B8"}


def make_case(case_id: str, u: ScalarField, **overrides) -> InequalityCase:
    """Resolve a case id into a full parameter set for the given field.

    Geometry defaults come from the field's support; CKN exponents are
    completed through the balance relation.  Unknown parameter names are
    rejected.
    """
    if case_id not in CASE_IDS:
        raise ConfigError(f"unknown case id {case_id!r}")
    allowed = {"p", "q", "tau", "a", "alpha", "beta", "sigma", "r", "R", "m", "n"}
    extra = set(overrides) - allowed
    if extra:
        raise ConfigError(f"unknown case parameters {sorted(extra)}")
    d = u.dim
    params = dict(CASE_DEFAULTS[case_id])
    for k, v in overrides.items():
        if v is not None:
            params[k] = v
    p = params.get("p")
    if p is None:
        p = float(d)  # critical cases default to p = d
    p = float(p)

    s_lo, s_hi = u.support.radial_bounds
    r = overrides.get("r")
    R = overrides.get("R")

    def default_R():
        return s_hi if math.isfinite(s_hi) else (4.0 * (r if r is not None else max(s_lo, 0.25)))

    def default_r():
        if s_lo > 0:
            return s_lo
        RR = default_R()
        return RR / 8.0

    kw = dict(case_id=case_id, dim=d, p=p)
    if case_id in ("H1", "B1", "S1", "L1", "L2", "B2", "H2"):
        kw["R"] = float(R) if R is not None else float(default_R())
        if case_id in ("H2", "B2"):
            kw["r"] = float(r) if r is not None else float(default_r())
    if case_id in ("H3", "H4", "B3", "B4"):
        kw["R"] = float(R) if R is not None else float(default_R())
        kw["r"] = float(r) if r is not None else float(default_r())
    if case_id in _CKN_CASES:
        q = float(params.get("q", 2.0))
        a = float(params.get("a", 1.0))
        alpha = params.get("alpha")
        if case_id in ("C3", "C4") and alpha is None:
            alpha = 1.0 - d / p  # the critical-weight line d - p + p*alpha = 0
        alpha = float(alpha)
        beta = float(params.get("beta", 0.0))
        tau = params.get("tau")
        sigma = params.get("sigma")
        if tau is not None:
            ck = CKNParams.balanced(d, p, q, a, alpha, beta, sigma if sigma is not None else alpha, tau=float(tau))
        else:
            ck = CKNParams.balanced(d, p, q, a, alpha, beta, float(sigma) if sigma is not None else alpha)
        kw.update(q=ck.q, tau=ck.tau, a=ck.a, alpha=ck.alpha, beta=ck.beta, gamma=ck.gamma, sigma=ck.sigma)
        if case_id in ("C1", "C3", "C4", "B7", "B8"):
            kw["R"] = float(R) if R is not None else float(default_R())
        if case_id in ("C2", "C3", "C4", "B7", "B8"):
            kw["r"] = float(r) if r is not None else float(default_r())
        if case_id.startswith("G"):
            m = overrides.get("m")
            n = overrides.get("n")
            if case_id in ("G1", "G3"):
                nn = int(n) if n is not None else math.floor(math.log2(s_hi)) + 1
                mm = int(m) if m is not None else nn - 5
            else:
                mm = int(m) if m is not None else math.floor(math.log2(s_lo))
                nn = int(n) if n is not None else mm + 5
            kw.update(m=mm, n=nn)
    if case_id in ("P3",):
        kw["R"] = float(R) if R is not None else float(default_R())
    if case_id in ("P4",):
        kw["r"] = float(r) if r is not None else float(default_r())
    return InequalityCase(**kw)


# ---------------------------------------------------------------------------
# Hypothesis gates
# ---------------------------------------------------------------------------


def _fail(case_id: str, msg: str):
    raise HypothesisViolation(f"{case_id}: requires {msg}")


def _need_supp_in_ball(case_id, u, R):
    if not u.support.bounded or u.support.radial_bounds[1] > R * (1 + 1e-9):
        _fail(case_id, f"supp u inside the ball of radius {R:g}")


def _need_supp_outside(case_id, u, r):
    if u.support.radial_bounds[0] < r * (1 - 1e-9):
        _fail(case_id, f"supp u outside the ball of radius {r:g}")


def check_hypotheses(case: InequalityCase, u: ScalarField, delta: float) -> None:
    cid, d, p = case.case_id, case.dim, case.p
    if u.dim != d:
        _fail(cid, f"a field in dimension {d}")
    if delta <= 0:
        _fail(cid, "delta > 0")

    if cid in ("H1",):
        if not 1 <= p < d:
            _fail(cid, "1 <= p < d")
        _need_supp_in_ball(cid, u, case.R)
    elif cid == "H2":
        if not p > d:
            _fail(cid, "p > d")
        _need_supp_outside(cid, u, case.r)
    elif cid in ("H3", "H4"):
        if not (p == d and d >= 2):
            _fail(cid, "p = d >= 2")
        if not case.r < case.R:
            _fail(cid, "r < R")
        if cid == "H3":
            _need_supp_in_ball(cid, u, case.R)
        else:
            _need_supp_outside(cid, u, case.r)
    elif cid.startswith("C"):
        if not (d >= 2 and 1 < p < d):
            _fail(cid, "d >= 2 and 1 < p < d")
        ck = case.ckn()
        if ck.a != 1.0:
            _fail(cid, "a = 1")
        gap = case.alpha - case.gamma
        if not -1e-9 <= gap <= 1.0 + 1e-9:
            _fail(cid, "0 <= alpha - gamma <= 1")
        crit = d - p + p * case.alpha
        if cid == "C1":
            if not crit > 1e-9:
                _fail(cid, "d - p + p*alpha > 0")
            _need_supp_in_ball(cid, u, case.R)
        elif cid == "C2":
            if not crit < -1e-9:
                _fail(cid, "d - p + p*alpha < 0")
            _need_supp_outside(cid, u, case.r)
        else:
            if abs(crit) > 1e-9:
                _fail(cid, "d - p + p*alpha = 0")
            if not case.tau > 1:
                _fail(cid, "tau > 1")
            if cid == "C3":
                _need_supp_in_ball(cid, u, case.R)
            else:
                _need_supp_outside(cid, u, case.r)
    elif cid.startswith("G"):
        ck = case.ckn()
        if not ck.sigma_gap_ok:
            _fail(cid, "alpha - sigma <= 1")
        if case.m is None or case.n is None or not case.m < case.n:
            _fail(cid, "m < n")
        hom = ck.homogeneity
        if cid == "G1":
            if not hom > 1e-12:
                _fail(cid, "1/tau + gamma/d > 0")
            _need_supp_in_ball(cid, u, 2.0**case.n)
        elif cid == "G2":
            if not hom < -1e-12:
                _fail(cid, "1/tau + gamma/d < 0")
            _need_supp_outside(cid, u, 2.0**case.m)
        else:
            if abs(hom) > 1e-12:
                _fail(cid, "1/tau + gamma/d = 0")
            if not case.tau > 1:
                _fail(cid, "tau > 1")
            if cid == "G3":
                _need_supp_in_ball(cid, u, 2.0**case.n)
            else:
                _need_supp_outside(cid, u, 2.0**case.m)
    elif cid.startswith("P"):
        if u.grad_fn is None:
            _fail(cid, "a field with an analytic gradient")
        ck = case.ckn()
        hom = ck.homogeneity
        # On the balance line with a-weight equality the gap must close.
        eq_line = abs(hom - (1.0 / p + (case.alpha - 1.0) / d)) <= 1e-12
        if eq_line and case.alpha - case.sigma > 1.0 + 1e-9:
            _fail(cid, "alpha - sigma <= 1 on the equality line")
        if cid == "P1":
            if not hom > 1e-12:
                _fail(cid, "1/tau + gamma/d > 0")
        elif cid == "P2":
            if not hom < -1e-12:
                _fail(cid, "1/tau + gamma/d < 0")
            if not u.support.radial_bounds[0] > 0:
                _fail(cid, "supp u away from the origin")
        else:
            if abs(hom) > 1e-12:
                _fail(cid, "1/tau + gamma/d = 0")
            if not case.tau > 1:
                _fail(cid, "tau > 1")
            if case.alpha - case.sigma > 1.0 + 1e-9:
                _fail(cid, "alpha - sigma <= 1")
            if cid == "P3":
                _need_supp_in_ball(cid, u, case.R)
            else:
                _need_supp_outside(cid, u, case.r)
    elif cid == "S1":
        if not (1 < p < d):
            _fail(cid, "1 < p < d")
        if not u.support.bounded or u.support.radial_bounds[1] >= 1.0:
            _fail(cid, "supp u strictly inside the unit ball")
    elif cid.startswith("B"):
        if cid == "B1":
            if not 1 <= p < d:
                _fail(cid, "1 <= p < d")
        elif cid == "B2":
            if not p > d:
                _fail(cid, "p > d")
            _need_supp_outside(cid, u, case.r)
        elif cid in ("B3", "B4"):
            if not (p == d and d >= 2):
                _fail(cid, "p = d >= 2")
            if not case.r < case.R:
                _fail(cid, "r < R")
            if cid == "B4":
                _need_supp_outside(cid, u, case.r)
        else:
            if not (d >= 2 and 1 < p < d):
                _fail(cid, "d >= 2 and 1 < p < d")
            ck = case.ckn()
            if not ck.sigma_gap_ok:
                _fail(cid, "alpha - sigma <= 1")
            hom = ck.homogeneity
            if cid == "B5" and not hom > 1e-12:
                _fail(cid, "1/tau + gamma/d > 0")
            if cid == "B6":
                if not hom < -1e-12:
                    _fail(cid, "1/tau + gamma/d < 0")
                if not u.support.radial_bounds[0] > 0:
                    _fail(cid, "supp u away from the origin")
            if cid in ("B7", "B8"):
                if abs(hom) > 1e-12:
                    _fail(cid, "1/tau + gamma/d = 0")
                if not case.tau > 1:
                    _fail(cid, "tau > 1")
                if cid == "B8":
                    _need_supp_outside(cid, u, case.r)
        # all bounded-domain cases integrate over the unit ball
        if not u.support.bounded or u.support.radial_bounds[1] > 1.0 + 1e-9:
            _fail(cid, "supp u inside the closed unit ball")
    elif cid in ("L1", "L2"):
        if u.grad_fn is None:
            _fail(cid, "a field with an analytic gradient")
        if cid == "L2" and not p > 1:
            _fail(cid, "p > 1")
    else:  # pragma: no cover
        raise ConfigError(f"unhandled case id {cid!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def recompute_rhs(case_id: str, components: dict, case: InequalityCase) -> float:
    """The documented combination of RHS components for each case."""
    c = components
    p = case.p
    if case_id in ("H1", "H2", "H3", "H4", "C1", "C2", "C3", "C4"):
        return c["i_delta"] + c["penalty"]
    if case_id.startswith("G"):
        a = case.a
        return c["i_delta_sum"] ** (a / p) * c["weighted_q_norm"] ** (1.0 - a)
    if case_id.startswith("P"):
        a = case.a
        return c["grad_term"] ** (a / p) * c["weighted_q_norm"] ** (1.0 - a)
    if case_id == "S1":
        return c["i_delta"] ** (1.0 / p) + c["lp_norm"] + c["delta"]
    if case_id in ("B1", "B2", "B3", "B4"):
        return c["i_delta"] + c["lp_norm_p"] + c["penalty"]
    if case_id in ("B5", "B6", "B7", "B8"):
        a = case.a
        return (c["i_delta"] + c["lp_norm_p"] + c["penalty"]) ** (a / p) * c[
            "weighted_q_norm"
        ] ** (1.0 - a)
    if case_id == "L1":
        return c["grad_term"] * energy_mod.k_constant(case.dim, p)
    if case_id == "L2":
        return c["grad_term"]
    raise ConfigError(f"unhandled case id {case_id!r}")


def _log_weight(case: InequalityCase, interior: bool, power: float) -> WeightSpec:
    if interior:
        return WeightSpec(
            gamma=case.gamma if case.gamma is not None else -1.0,
            tau=case.tau if case.tau is not None else case.p,
            log_kind=energy_mod.LOG_R_OVER_X,
            log_radius=case.R,
            log_power=power,
        )
    return WeightSpec(
        gamma=case.gamma if case.gamma is not None else -1.0,
        tau=case.tau if case.tau is not None else case.p,
        log_kind=energy_mod.LOG_X_OVER_R,
        log_radius=case.r,
        log_power=power,
    )


def evaluate_case(
    case: InequalityCase, u: ScalarField, delta: float, cfg: QuadConfig
) -> InequalityReport:
    """Evaluate LHS, RHS components, and the ratio for one case at one delta."""
    t0 = time.perf_counter()
    check_hypotheses(case, u, delta)
    cid, d, p = case.case_id, case.dim, case.p
    whole = Region.whole_space()
    unit_ball = Region.bounded_domain()
    comps: dict[str, EnergyEstimate] = {}

    if cid in ("H1", "H2", "H3", "H4"):
        if cid == "H1":
            lhs = energy_mod.weighted_norm(u, whole, WeightSpec(gamma=-1.0, tau=p), cfg)
            pen = case.R ** (d - p) * delta**p
        elif cid == "H2":
            lhs = energy_mod.weighted_norm(u, whole, WeightSpec(gamma=-1.0, tau=p), cfg)
            pen = case.r ** (d - p) * delta**p
        elif cid == "H3":
            w = WeightSpec(gamma=-1.0, tau=d, log_kind=energy_mod.LOG_R_OVER_X,
                           log_radius=case.R, log_power=d)
            lhs = energy_mod.weighted_norm(u, Region.complement_of_ball(case.r), w, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**d
        else:
            w = WeightSpec(gamma=-1.0, tau=d, log_kind=energy_mod.LOG_X_OVER_R,
                           log_radius=case.r, log_power=d)
            lhs = energy_mod.weighted_norm(u, Region.ball(case.R), w, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**d
        comps["i_delta"] = energy_mod.i_delta(u, whole, EnergyParams(p, delta, 0.0), cfg)
        comps["penalty"] = EnergyEstimate(pen)

    elif cid in ("C1", "C2", "C3", "C4"):
        tau = case.tau
        if cid == "C1":
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, whole, wspec, cfg)
            pen = case.R ** (d - p + p * case.alpha) * delta**p
        elif cid == "C2":
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, whole, wspec, cfg)
            pen = case.r ** (d - p + p * case.alpha) * delta**p
        elif cid == "C3":
            wspec = _log_weight(case, interior=True, power=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.complement_of_ball(case.r), wspec, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**p
        else:
            wspec = _log_weight(case, interior=False, power=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.ball(case.R), wspec, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**p
        lhs = lhs_int.powered(p / tau)
        comps["i_delta"] = energy_mod.i_delta(u, whole, EnergyParams(p, delta, case.alpha), cfg)
        comps["penalty"] = EnergyEstimate(pen)

    elif cid.startswith("G"):
        ck = case.ckn()
        profile = dyadic_mod.dyadic_profile(u, ck, delta, cfg, m=case.m, n=case.n)
        if 1 < p < d:
            total = profile.i_delta_sum()
            total_std = profile.i_delta_sum_std()
        else:
            total = profile.grad_sum()
            total_std = 0.0
        comps["i_delta_sum"] = EnergyEstimate(total, total_std, 0, 0.0, profile.any_diverged())
        qn = energy_mod.weighted_norm(u, whole, WeightSpec(gamma=case.beta, tau=case.q), cfg)
        comps["weighted_q_norm"] = qn.powered(1.0 / case.q)
        tau = case.tau
        if cid == "G1":
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.complement_of_ball(2.0**case.m), wspec, cfg)
        elif cid == "G2":
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.ball(2.0**case.n), wspec, cfg)
        elif cid == "G3":
            wspec = WeightSpec(gamma=case.gamma, tau=tau, log_kind=energy_mod.LOG_R_OVER_X,
                               log_radius=2.0**case.n, log_power=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.complement_of_ball(2.0**case.m), wspec, cfg)
        else:
            # critical log weight centered on the inner dyadic radius
            wspec = WeightSpec(gamma=case.gamma, tau=tau, log_kind=energy_mod.LOG_X_OVER_R,
                               log_radius=2.0**case.m, log_power=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.ball(2.0**case.n), wspec, cfg)
        lhs = lhs_int.powered(1.0 / tau)

    elif cid.startswith("P"):
        comps["grad_term"] = energy_mod.gradient_energy(u, case.alpha, p, cfg)
        qn = energy_mod.weighted_norm(u, whole, WeightSpec(gamma=case.beta, tau=case.q), cfg)
        comps["weighted_q_norm"] = qn.powered(1.0 / case.q)
        tau = case.tau
        if cid in ("P1", "P2"):
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, whole, wspec, cfg)
        elif cid == "P3":
            wspec = _log_weight(case, interior=True, power=tau)
            lhs_int = energy_mod.weighted_norm(u, whole, wspec, cfg)
        else:
            wspec = _log_weight(case, interior=False, power=tau)
            lhs_int = energy_mod.weighted_norm(u, whole, wspec, cfg)
        lhs = lhs_int.powered(1.0 / tau)

    elif cid == "S1":
        p_star = d * p / (d - p)
        lhs = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=0.0, tau=p_star), cfg).powered(1.0 / p_star)
        comps["i_delta"] = energy_mod.i_delta(u, unit_ball, EnergyParams(p, delta, 0.0), cfg)
        comps["lp_norm"] = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=0.0, tau=p), cfg).powered(1.0 / p)
        comps["delta"] = EnergyEstimate(delta)

    elif cid in ("B1", "B2", "B3", "B4"):
        if cid == "B1":
            lhs = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=-1.0, tau=p), cfg)
            pen = delta**p
        elif cid == "B2":
            lhs = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=-1.0, tau=p), cfg)
            pen = case.r ** (d - p) * delta**p
        elif cid == "B3":
            w = WeightSpec(gamma=-1.0, tau=d, log_kind=energy_mod.LOG_R_OVER_X,
                           log_radius=case.R, log_power=d)
            lhs = energy_mod.weighted_norm(u, Region.annulus(case.r, 1.0), w, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**d
        else:
            w = WeightSpec(gamma=-1.0, tau=d, log_kind=energy_mod.LOG_X_OVER_R,
                           log_radius=case.r, log_power=d)
            lhs = energy_mod.weighted_norm(u, Region.ball(min(case.R, 1.0)), w, cfg)
            pen = math.log(2.0 * case.R / case.r) * delta**d
        comps["i_delta"] = energy_mod.i_delta(u, unit_ball, EnergyParams(p, delta, 0.0), cfg)
        comps["lp_norm_p"] = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=0.0, tau=p), cfg)
        comps["penalty"] = EnergyEstimate(pen)

    elif cid in ("B5", "B6", "B7", "B8"):
        tau = case.tau
        if cid in ("B5", "B6"):
            wspec = WeightSpec(gamma=case.gamma, tau=tau)
            lhs_int = energy_mod.weighted_norm(u, unit_ball, wspec, cfg)
            pen = delta**p
        elif cid == "B7":
            wspec = _log_weight(case, interior=True, power=tau)
            lhs_int = energy_mod.weighted_norm(u, Region.annulus(case.r, 1.0), wspec, cfg)
            pen = delta**p * math.log(2.0 * case.R / case.r)
        else:
            wspec = _log_weight(case, interior=False, power=tau)
            lhs_int = energy_mod.weighted_norm(u, unit_ball, wspec, cfg)
            pen = delta**p * math.log(2.0 * case.R / case.r)
        lhs = lhs_int.powered(1.0 / tau)
        comps["i_delta"] = energy_mod.i_delta(u, unit_ball, EnergyParams(p, delta, case.alpha), cfg)
        comps["lp_norm_p"] = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=0.0, tau=p), cfg)
        comps["penalty"] = EnergyEstimate(pen)
        qn = energy_mod.weighted_norm(u, unit_ball, WeightSpec(gamma=case.beta, tau=case.q), cfg)
        comps["weighted_q_norm"] = qn.powered(1.0 / case.q)

    elif cid in ("L1", "L2"):
        lhs = energy_mod.i_delta(u, whole, EnergyParams(p, delta, 0.0), cfg)
        comps["grad_term"] = energy_mod.gradient_energy(u, 0.0, p, cfg)

    else:  # pragma: no cover
        raise ConfigError(f"unhandled case id {cid!r}")

    comp_vals = {k: v.value for k, v in comps.items()}
    rhs = recompute_rhs(cid, comp_vals, case)
    ratio = 0.0 if lhs.value == 0.0 else (math.inf if rhs == 0.0 else lhs.value / rhs)
    verdict = "suspect" if (lhs.diverged or any(v.diverged for v in comps.values())) else "bounded"
    std_errs = {"lhs": lhs.std_err}
    std_errs.update({k: v.std_err for k, v in comps.items()})
    return InequalityReport(
        case_id=cid,
        family=u.label,
        delta=float(delta),
        lhs=lhs.value,
        rhs=rhs,
        ratio=ratio,
        components=comp_vals,
        std_errs=std_errs,
        verdict=verdict,
        runtime=time.perf_counter() - t0,
        params=case.echo(),
    )


# ---------------------------------------------------------------------------
# Sweeps and constant estimation
# ---------------------------------------------------------------------------


def sweep(spec: SweepSpec, cfg: QuadConfig) -> list[InequalityReport]:
    """One report per (family instance, delta), in deterministic order."""
    reports = []
    for i, fam_params in enumerate(spec.family_grid):
        u = make_family(spec.family, spec.dim, **dict(fam_params))
        case = make_case(spec.case_id, u, **dict(spec.case_params))
        for j, delta in enumerate(spec.delta_grid):
            cfg_ij = cfg.with_(seed=rng.derive_seed(cfg.seed, 21, i, j))
            reports.append(evaluate_case(case, u, float(delta), cfg_ij))
    return reports


def summarize(reports: list[InequalityReport]) -> dict:
    """Max/min ratios overall and per family instance, plus the delta trend."""
    if not reports:
        return {"max_ratio": 0.0, "instances": {}}
    by_family: dict[str, list[InequalityReport]] = {}
    for rep in reports:
        by_family.setdefault(rep.family, []).append(rep)
    instances = {}
    for fam, reps in by_family.items():
        ratios = [r.ratio for r in reps]
        pos = [x for x in ratios if x > 0]
        instances[fam] = {
            "max_ratio": max(ratios),
            "min_positive_ratio": min(pos) if pos else 0.0,
            "ratio_by_delta": {repr(r.delta): r.ratio for r in reps},
            "spread": (max(ratios) / min(pos)) if pos else 0.0,
        }
    return {
        "max_ratio": max(r.ratio for r in reports),
        "any_suspect": any(r.verdict == "suspect" for r in reports),
        "instances": instances,
    }


def estimate_constant(
    case_id: str,
    spec_or_params,
    cfg: QuadConfig,
) -> dict:
    """Supremum of LHS/RHS ratios over a sweep, with the argmax configuration.

    ``case_id = "HOLDER"`` instead estimates the Young-type constant by a
    random search over (c, x) pairs, an independent route to the grid value
    of :func:`nlhardy.dyadic.holder_min_constant`.
    """
    if case_id == "HOLDER":
        lam = float(spec_or_params.get("lam", 2.0))
        tau = float(spec_or_params.get("tau", 2.0))
        n = int(spec_or_params.get("samples", cfg.samples))
        gen = rng.substream(cfg.seed, 31)
        cs = 1.0 + (lam - 1.0) * gen.random(n)
        xs = np.exp(gen.uniform(math.log(1e-3), math.log(1e3), n))
        xs[: n // 50] = 0.0  # include the x = 0 edge
        need = ((xs + 1.0) ** tau - cs * xs**tau) * (cs - 1.0) ** (tau - 1.0)
        k = int(np.argmax(need))
        return {
            "case_id": "HOLDER",
            "sup_ratio": float(need[k]),
            "argmax": {"c": float(cs[k]), "x": float(xs[k])},
        }
    if not isinstance(spec_or_params, SweepSpec):
        raise ConfigError("estimate_constant needs a SweepSpec (or HOLDER parameters)")
    reports = sweep(spec_or_params, cfg)
    best = max(reports, key=lambda r: r.ratio)
    return {
        "case_id": case_id,
        "sup_ratio": best.ratio,
        "argmax": {"family": best.family, "delta": best.delta, "params": best.params},
        "reports": reports,
    }
