"""Integration engines.

Three layers:

* ``integrate_region`` / ``sphere_integral``: single integrals over radial
  regions and over the unit sphere (Monte Carlo, deterministic radial
  reduction, or a midpoint tensor grid).
* ``integrate_pair_singular``: the 2d-dimensional singular pair integral

      iint_{Omega x Omega, |u(x)-u(y)| > delta} delta^p |x|^{p a} / |x-y|^{d+p}

  estimated by geometric-shell importance sampling in |x - y| with an
  analytic (or sampled) far-field tail, or evaluated by a deterministic
  tensor-grid oracle (1-D interval-exact scheme, or a radial reduction of
  the pair integral in d = 2, 3).
* a shared shell engine also used for the Gagliardo-type energy (no
  indicator, kernel exponent d + p*delta).

Sampling x is restricted to a bounded core on which the indicator can fire;
pairs are counted once from the x side with the symmetrization weight
``w(x) + w(y) 1{y outside core}``, which reproduces the full ordered double
integral exactly whenever every point outside the core has |u| <= delta/2
(true for compact supports and for decaying tails via the field's active
radius).  When no such core exists (e.g. the 1-D step) the estimate is
windowed and flagged as divergence-suspect.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _sci_integrate

from . import kernels, rng
from .errors import ConfigError, NonFinite, UnboundedDomain
from .fields import Region, ScalarField, VectorPotential, region_from_bounds

MONTE_CARLO = "monte_carlo"
RADIAL_REDUCTION = "radial_reduction"
TENSOR_GRID = "tensor_grid"

AUTO_LIPSCHITZ = "auto_lipschitz"
EXPLICIT = "explicit"
NONE = "none"


def sphere_area(d: int) -> float:
    """Surface measure of S^{d-1}; the counting measure gives 2 for d = 1."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# Configuration and estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadConfig:
    """Integration settings; ``seed`` pins every random draw."""

    method: str = MONTE_CARLO
    samples: int = 200_000
    seed: int = 0
    shells: int = 40
    rho_min_policy: str = AUTO_LIPSCHITZ
    rho_min: Optional[float] = None
    far_field_cut: Optional[float] = None
    target_rel_err: float = 0.01
    workers: int = 1
    grid: int = 1200

    def __post_init__(self):
        if self.method not in (MONTE_CARLO, RADIAL_REDUCTION, TENSOR_GRID):
            raise ConfigError(f"unknown quadrature method {self.method!r}")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.shells < 1:
            raise ConfigError("shells must be >= 1")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.rho_min_policy not in (AUTO_LIPSCHITZ, EXPLICIT, NONE):
            raise ConfigError(f"unknown rho_min policy {self.rho_min_policy!r}")
        if self.rho_min_policy == EXPLICIT and (self.rho_min is None or self.rho_min <= 0):
            raise ConfigError("explicit rho_min policy needs a positive rho_min")
        if self.far_field_cut is not None and self.far_field_cut <= 0:
            raise ConfigError("far_field_cut must be positive")
        if self.target_rel_err <= 0:
            raise ConfigError("target_rel_err must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.grid < 8:
            raise ConfigError("grid must be >= 8")

    def with_(self, **kw) -> "QuadConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class EnergyEstimate:
    """A numeric value with a statistical or deterministic error estimate.

    ``diverged`` marks the value as a lower bound only: either the geometric
    shell contributions failed to decay toward the diagonal, or the sampling
    window could not be certified to capture the whole energy (a field with
    no decay at infinity estimated under an explicit far-field cut).
    """

    value: float
    std_err: float = 0.0
    n_samples: int = 0
    tail_analytic: float = 0.0
    diverged: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise NonFinite("estimate value is not finite")
        if self.std_err < 0:
            raise ValueError("std_err must be nonnegative")
        if self.tail_analytic < 0 or self.tail_analytic > self.value + 1e-12 * (1.0 + abs(self.value)):
            raise ValueError("tail_analytic must lie in [0, value]")

    # combinators (first-order error propagation) ---------------------------
    def plus(self, other) -> "EnergyEstimate":
        if isinstance(other, EnergyEstimate):
            return EnergyEstimate(
                self.value + other.value,
                math.hypot(self.std_err, other.std_err),
                max(self.n_samples, other.n_samples),
                self.tail_analytic + other.tail_analytic,
                self.diverged or other.diverged,
            )
        return EnergyEstimate(
            self.value + float(other), self.std_err, self.n_samples, self.tail_analytic, self.diverged
        )

    def scaled(self, c: float) -> "EnergyEstimate":
        c = float(c)
        if c < 0:
            raise ValueError("scale factor must be nonnegative")
        return EnergyEstimate(
            c * self.value, c * self.std_err, self.n_samples, c * self.tail_analytic, self.diverged
        )

    def powered(self, e: float) -> "EnergyEstimate":
        """value**e with first-order error propagation (value >= 0)."""
        e = float(e)
        v = max(self.value, 0.0)
        val = v**e
        err = abs(e) * v ** (e - 1.0) * self.std_err if v > 0 else 0.0
        return EnergyEstimate(val, err, self.n_samples, 0.0, self.diverged)

    def times(self, other: "EnergyEstimate") -> "EnergyEstimate":
        val = self.value * other.value
        rel = 0.0
        if self.value > 0:
            rel += (self.std_err / self.value) ** 2
        if other.value > 0:
            rel += (other.std_err / other.value) ** 2
        return EnergyEstimate(
            val,
            val * math.sqrt(rel),
            max(self.n_samples, other.n_samples),
            0.0,
            self.diverged or other.diverged,
        )


def combined_std(a: EnergyEstimate, b: EnergyEstimate) -> float:
    return math.hypot(a.std_err, b.std_err)


def exact_zero() -> EnergyEstimate:
    return EnergyEstimate(0.0, 0.0, 0, 0.0, False)


# ---------------------------------------------------------------------------
# Sampling helpers
# ---------------------------------------------------------------------------


def _unit_vectors(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = gen.standard_normal((n, d))
    nrm = np.linalg.norm(v, axis=1)
    bad = nrm < 1e-300
    while bad.any():
        v[bad] = gen.standard_normal((int(bad.sum()), d))
        nrm = np.linalg.norm(v, axis=1)
        bad = nrm < 1e-300
    return v / nrm[:, None]


def _sample_region(gen: np.random.Generator, region: Region, d: int, n: int) -> np.ndarray:
    lo, hi = region.radial_bounds
    if not math.isfinite(hi):
        raise UnboundedDomain("cannot sample uniformly from an unbounded region")
    u = gen.random(n)
    r = (lo**d + u * (hi**d - lo**d)) ** (1.0 / d)
    sigma = _unit_vectors(gen, n, d)
    return r[:, None] * sigma


def _safe_field_values(
    u: ScalarField, pts: np.ndarray, redraw: Callable[[int, int], np.ndarray]
) -> tuple[np.ndarray, np.ndarray]:
    """Field values with resampling of declared-singular hits.

    ``redraw(k, attempt)`` must return k replacement points.  Points that
    evaluate non-finite away from the declared singular radii raise
    NonFinite; hits on the singular set are probability-zero events kept
    out of the estimate by redrawing.
    """
    vals = u.values(pts)
    bad = ~np.isfinite(vals)
    tries = 0
    while bad.any():
        rho = np.linalg.norm(pts[bad], axis=1)
        on_singular = np.zeros(len(rho), dtype=bool)
        for s in u.singular_radii:
            on_singular |= np.abs(rho - s) <= 1e-12 * (1.0 + rho)
        if not on_singular.all():
            raise NonFinite(f"{u.label} evaluated non-finite away from its singular set")
        if tries >= 64:
            raise NonFinite("resampling of singular hits did not terminate")
        pts = pts.copy()
        pts[bad] = redraw(int(bad.sum()), tries)
        vals = vals.copy()
        vals[bad] = u.values(pts[bad])
        bad = ~np.isfinite(vals)
        tries += 1
    return vals, pts


# ---------------------------------------------------------------------------
# Single integrals
# ---------------------------------------------------------------------------


def integrate_region(
    f: Optional[Callable[[np.ndarray], np.ndarray]],
    region: Region,
    dim: int,
    cfg: QuadConfig,
    *,
    radial: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    kinks: Sequence[float] = (),
    singular_radii: Sequence[float] = (),
) -> EnergyEstimate:
    """Integral of f over a radial region.

    ``radial`` (a profile of |x|) enables the deterministic 1-D reduction
    regardless of region boundedness; Monte Carlo and the tensor grid need a
    bounded region.
    """
    if cfg.method == RADIAL_REDUCTION:
        if radial is None:
            raise ConfigError("radial_reduction requires a radial integrand profile")
        return _integrate_radial(radial, region, dim, kinks)
    if cfg.method == TENSOR_GRID:
        return _integrate_grid(f, region, dim, cfg)
    return _integrate_mc(f, region, dim, cfg, singular_radii)


def _integrate_radial(radial, region: Region, dim: int, kinks: Sequence[float]) -> EnergyEstimate:
    lo, hi = region.radial_bounds
    area = sphere_area(dim)

    def integrand(rho):
        r = np.asarray([rho], dtype=float)
        v = radial(r)[0]
        if not np.isfinite(v):
            return 0.0
        return area * v * rho ** (dim - 1)

    pts = sorted({k for k in kinks if lo < k < hi and math.isfinite(k)})
    diverged = False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _sci_integrate.IntegrationWarning)
        if math.isfinite(hi):
            val, err = _sci_integrate.quad(integrand, lo, hi, points=pts or None, limit=400)
        else:
            mid = max([lo + 1.0] + [k + 1.0 for k in pts])
            v1, e1 = _sci_integrate.quad(integrand, lo, mid, points=pts or None, limit=400)
            v2, e2 = _sci_integrate.quad(integrand, mid, np.inf, limit=400)
            val, err = v1 + v2, e1 + e2
    if not math.isfinite(val):
        diverged = True
        val, err = 0.0, 0.0
    if val > 0 and err > 0.25 * val:
        diverged = True
    return EnergyEstimate(max(val, 0.0), err, 0, 0.0, diverged)


def _integrate_mc(f, region: Region, dim: int, cfg: QuadConfig, singular_radii) -> EnergyEstimate:
    if not region.bounded:
        raise UnboundedDomain("Monte Carlo needs a bounded region; intersect with the support first")
    vol = region.volume(dim)
    sizes = rng.chunk_sizes(cfg.samples)

    def one(i: int):
        gen = rng.substream(cfg.seed, rng.STREAM_REGION, i)
        pts = _sample_region(gen, region, dim, sizes[i])
        vals = f(pts)
        bad = ~np.isfinite(vals)
        tries = 0
        while bad.any():
            rr = np.linalg.norm(pts[bad], axis=1)
            ok = np.zeros(len(rr), dtype=bool)
            for s in singular_radii:
                ok |= np.abs(rr - s) <= 1e-12 * (1.0 + rr)
            if not ok.all():
                raise NonFinite("integrand evaluated non-finite away from its singular set")
            if tries >= 64:
                raise NonFinite("resampling of singular hits did not terminate")
            gen2 = rng.substream(cfg.seed, rng.STREAM_RESAMPLE, i, tries)
            pts[bad] = _sample_region(gen2, region, dim, int(bad.sum()))
            vals[bad] = f(pts[bad])
            bad = ~np.isfinite(vals)
            tries += 1
        return float(vals.sum()), float((vals * vals).sum())

    parts = rng.map_chunks(one, len(sizes), cfg.workers)
    s1 = 0.0
    s2 = 0.0
    for a, b in parts:
        s1 += a
        s2 += b
    n = cfg.samples
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    return EnergyEstimate(vol * mean, vol * math.sqrt(var / n), n, 0.0, False)


def _integrate_grid(f, region: Region, dim: int, cfg: QuadConfig) -> EnergyEstimate:
    if f is None:
        raise ConfigError("tensor grid needs a pointwise integrand")
    if not region.bounded:
        raise UnboundedDomain("tensor grid needs a bounded region")
    if dim > 3:
        raise ConfigError("tensor grid supports dim <= 3")
    hi = region.radial_bounds[1]
    n_axis = max(8, int(round(cfg.samples ** (1.0 / dim))))
    edges = np.linspace(-hi, hi, n_axis + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    h = edges[1] - edges[0]
    grids = np.meshgrid(*([mids] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    mask = region.contains(pts, dim)
    vals = np.zeros(len(pts))
    vals[mask] = f(pts[mask])
    vals[~np.isfinite(vals)] = 0.0
    return EnergyEstimate(float(vals.sum() * h**dim), 0.0, int(mask.sum()), 0.0, False)


def sphere_integral(g: Callable[[np.ndarray], np.ndarray], d: int, cfg: QuadConfig) -> EnergyEstimate:
    """Integral of g over S^{d-1}; exact two-point sum for d = 1."""
    if d < 1:
        raise ConfigError("dimension must be >= 1")
    if d == 1:
        pts = np.array([[1.0], [-1.0]])
        vals = g(pts)
        if not np.all(np.isfinite(vals)):
            raise NonFinite("sphere integrand non-finite on S^0")
        return EnergyEstimate(float(vals.sum()), 0.0, 2, 0.0, False)
    area = sphere_area(d)
    sizes = rng.chunk_sizes(cfg.samples)

    def one(i: int):
        gen = rng.substream(cfg.seed, rng.STREAM_SPHERE, i)
        sig = _unit_vectors(gen, sizes[i], d)
        vals = g(sig)
        if not np.all(np.isfinite(vals)):
            raise NonFinite("sphere integrand evaluated non-finite")
        return float(vals.sum()), float((vals * vals).sum())

    parts = rng.map_chunks(one, len(sizes), cfg.workers)
    s1 = sum(a for a, _ in parts)
    s2 = sum(b for _, b in parts)
    n = cfg.samples
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    return EnergyEstimate(area * mean, area * math.sqrt(var / n), n, 0.0, False)


# ---------------------------------------------------------------------------
# Pair integrals: shell Monte Carlo
# ---------------------------------------------------------------------------

INDICATOR = "indicator"
GAGLIARDO = "gagliardo"


def _inv_power_cdf(lo: float, hi: float, s: float, u: np.ndarray) -> np.ndarray:
    a = lo ** (-s)
    b = hi ** (-s)
    return (a - u * (a - b)) ** (-1.0 / s)


def _shell_mass(lo: float, hi: float, s: float) -> float:
    return (lo ** (-s) - hi ** (-s)) / s


def _active_core(u: ScalarField, region: Region, delta: float, mode: str, cfg: QuadConfig):
    """Bounded x-sampling core and whether the estimate is merely windowed."""
    supp = u.support.as_region()
    if mode == INDICATOR:
        reach = u.active_radius(delta / 2.0)
    else:
        reach = supp.radial_bounds[1]
    if math.isfinite(reach):
        lo = supp.radial_bounds[0]
        core = region_from_bounds(lo, min(reach, supp.radial_bounds[1]) if supp.bounded else reach)
        return core, False
    if region.bounded:
        return region, False
    if cfg.far_field_cut is None:
        raise UnboundedDomain(
            f"{u.label}: support admits no bounded active core; set far_field_cut explicitly"
        )
    return Region.ball(cfg.far_field_cut), True


def _trend_diverged(shell_means: np.ndarray, total: float) -> bool:
    """Flag when the finest shells fail to decay (mass escaping to the diagonal)."""
    m = shell_means[np.isfinite(shell_means)]
    if len(m) < 6:
        return False
    recent = float(m[-3:].sum())
    before = float(m[-6:-3].sum())
    floor = 1e-3 * max(abs(total), 1e-300)
    return recent > 1.02 * before and recent > floor


def pair_shell_mc(
    u: ScalarField,
    region: Region,
    cfg: QuadConfig,
    *,
    p: float,
    delta: float,
    alpha: float = 0.0,
    mode: str = INDICATOR,
    potential: Optional[VectorPotential] = None,
) -> EnergyEstimate:
    """Shell importance-sampling estimator for the singular pair integrals."""
    d = u.dim
    if p < 1:
        raise ConfigError("p must be >= 1")
    if delta <= 0:
        raise ConfigError("delta must be positive")
    if mode == GAGLIARDO:
        if not 0 < delta < 1:
            raise ConfigError("the Gagliardo energy needs 0 < delta < 1")
        if alpha != 0.0:
            raise ConfigError("the Gagliardo energy carries no radial weight")
    area = sphere_area(d)

    # Provably empty indicator: oscillation cannot exceed delta.  A zero
    # Lipschitz constant (constant field) kills the plain modes outright,
    # but not the magnetic one, where the phase still oscillates.
    if u.lipschitz == 0.0 and potential is None:
        return exact_zero()
    if mode == INDICATOR and u.osc_bound is not None and delta >= 2.0 * u.osc_bound:
        return exact_zero()

    core, windowed = _active_core(u, region, delta, mode, cfg)
    x_region = core.intersect(region)
    if x_region is None:
        return exact_zero()
    x_hi = x_region.radial_bounds[1]

    supp = u.support.as_region()
    s_exp = p if mode == INDICATOR else p * delta
    prefactor = delta**p if mode == INDICATOR else (1.0 - delta)

    if region.bounded:
        t_cut = x_hi + region.radial_bounds[1]
        tail = "skip"
    else:
        t_cut = cfg.far_field_cut if cfg.far_field_cut is not None else core.diameter() + 1.0
        if alpha == 0.0 and supp.bounded and t_cut >= x_hi + supp.radial_bounds[1]:
            tail = "closed"
        else:
            tail = "sampled"

    # Geometric shells in |x - y|.
    edges = t_cut * 2.0 ** (-np.arange(cfg.shells + 1, dtype=float))
    rho_min = 0.0
    if cfg.rho_min_policy == EXPLICIT:
        rho_min = cfg.rho_min
    elif cfg.rho_min_policy == AUTO_LIPSCHITZ and mode == INDICATOR and u.lipschitz is not None:
        lip = u.lipschitz
        if potential is not None:
            if u.osc_bound is None:
                lip = None
            else:
                lip = lip + u.osc_bound * potential.bound(x_hi + t_cut / 2.0)
        if lip is not None and lip > 0:
            rho_min = delta / lip
        elif lip == 0.0:
            return exact_zero()
    active = [j for j in range(cfg.shells) if edges[j] > rho_min]
    n_shell = len(active)
    n_cols = n_shell + (1 if tail == "sampled" else 0)

    zc = np.zeros(n_cols)
    for idx, j in enumerate(active):
        zc[idx] = _shell_mass(edges[j + 1], edges[j], s_exp) * area * prefactor
    if tail == "sampled":
        zc[n_shell] = (t_cut ** (-s_exp) / s_exp) * area * prefactor
    closed_tail_coef = 0.0
    if tail == "closed":
        closed_tail_coef = 2.0 * area * (t_cut ** (-s_exp) / s_exp) * prefactor

    delta_sq = delta * delta
    p_alpha = p * alpha
    sizes = rng.chunk_sizes(cfg.samples)
    whole = not region.bounded

    def one(i: int):
        n = sizes[i]
        genx = rng.substream(cfg.seed, rng.STREAM_PAIR_X, i)
        x = _sample_region(genx, x_region, d, n)

        def redraw_x(k, attempt):
            gen = rng.substream(cfg.seed, rng.STREAM_RESAMPLE, i, 0, attempt)
            return _sample_region(gen, x_region, d, k)

        u_x, x = _safe_field_values(u, x, redraw_x)
        w_x = np.linalg.norm(x, axis=1) ** p_alpha if alpha != 0.0 else np.ones(n)

        u_y = np.empty((n, n_cols))
        w_eff = np.empty((n, n_cols))
        cross = np.empty((n, n_cols)) if potential is not None else None

        for idx in range(n_cols):
            if idx < n_shell:
                j = active[idx]
                genj = rng.substream(cfg.seed, rng.STREAM_PAIR_SHELL, i, j)
                sig = _unit_vectors(genj, n, d)
                rr = _inv_power_cdf(edges[j + 1], edges[j], s_exp, genj.random(n))
            else:
                genj = rng.substream(cfg.seed, rng.STREAM_PAIR_TAIL, i)
                sig = _unit_vectors(genj, n, d)
                rr = t_cut * (1.0 - genj.random(n)) ** (-1.0 / s_exp)
            y = x + rr[:, None] * sig

            def redraw_y(k, attempt, idx=idx, bad_mask=None):
                gen = rng.substream(cfg.seed, rng.STREAM_RESAMPLE, i, idx + 1, attempt)
                sig2 = _unit_vectors(gen, k, d)
                if idx < n_shell:
                    jj = active[idx]
                    rr2 = _inv_power_cdf(edges[jj + 1], edges[jj], s_exp, gen.random(k))
                else:
                    rr2 = t_cut * (1.0 - gen.random(k)) ** (-1.0 / s_exp)
                return rr2[:, None] * sig2

            vals = u.values(y)
            bad = ~np.isfinite(vals)
            tries = 0
            while bad.any():
                rho_bad = np.linalg.norm(y[bad], axis=1)
                on_sing = np.zeros(len(rho_bad), dtype=bool)
                for s_r in u.singular_radii:
                    on_sing |= np.abs(rho_bad - s_r) <= 1e-12 * (1.0 + rho_bad)
                if not on_sing.all():
                    raise NonFinite(f"{u.label} evaluated non-finite away from its singular set")
                if tries >= 64:
                    raise NonFinite("resampling of singular hits did not terminate")
                y[bad] = x[bad] + redraw_y(int(bad.sum()), tries)
                vals[bad] = u.values(y[bad])
                bad = ~np.isfinite(vals)
                tries += 1
            u_y[:, idx] = vals
            ok = np.ones(n, dtype=bool) if whole else region.contains(y, d)
            out_core = ~x_region.contains(y, d)
            if mode == INDICATOR and alpha != 0.0:
                w_pair = w_x + np.linalg.norm(y, axis=1) ** p_alpha * out_core
            else:
                w_pair = w_x + 1.0 * out_core
            w_eff[:, idx] = w_pair * ok
            if cross is not None:
                mid = 0.5 * (x + y)
                theta = np.einsum("ij,ij->i", x - y, potential.vectors(mid))
                halfsin = np.sin(0.5 * theta)
                cross[:, idx] = 2.0 * u_x * vals * (2.0 * halfsin * halfsin)

        u_y = np.ascontiguousarray(u_y)
        w_eff = np.ascontiguousarray(w_eff)
        if mode == GAGLIARDO:
            v, shell = kernels.shell_reduce_gagliardo(u_x, u_y, w_eff, zc, p)
        elif cross is not None:
            v, shell = kernels.shell_reduce_magnetic(u_x, u_y, w_eff, zc, delta_sq, np.ascontiguousarray(cross))
        else:
            v, shell = kernels.shell_reduce_indicator(u_x, u_y, w_eff, zc, delta_sq)

        tail_sum = 0.0
        if tail == "closed":
            if mode == INDICATOR:
                t_term = closed_tail_coef * w_x * (u_x * u_x > delta_sq)
            else:
                t_term = closed_tail_coef * np.abs(u_x) ** p
            v = v + t_term
            tail_sum = float(t_term.sum())
        return float(v.sum()), float((v * v).sum()), shell, tail_sum

    parts = rng.map_chunks(one, len(sizes), cfg.workers)
    s1 = 0.0
    s2 = 0.0
    tail_total = 0.0
    shell_totals = np.zeros(n_cols)
    for a, b, sh, ts in parts:
        s1 += a
        s2 += b
        shell_totals += sh
        tail_total += ts

    n = cfg.samples
    vol = x_region.volume(d)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    shell_means = shell_totals[:n_shell] / n
    # With a Lipschitz (or explicit) near-diagonal truncation the fine end
    # is provably empty, so only untruncated runs are trend-checked.
    diverged = windowed or (rho_min == 0.0 and _trend_diverged(shell_means, mean))
    return EnergyEstimate(
        max(vol * mean, 0.0), vol * math.sqrt(var / n), n, vol * tail_total / n, diverged
    )


# ---------------------------------------------------------------------------
# Pair integrals: deterministic oracles (tensor_grid method)
# ---------------------------------------------------------------------------


def pair_oracle_1d(
    u: ScalarField,
    region: Region,
    *,
    p: float,
    delta: float,
    alpha: float = 0.0,
    cfg: QuadConfig,
) -> EnergyEstimate:
    """Deterministic pair-integral oracle in d = 1.

    Dense grid in x; for each x the t-integral of |t|^{-1-p} over the set
    {|u(x+t)-u(x)| > delta} is computed from bisection-refined crossing
    points with the exact antiderivative.  Independent of the shell
    estimator.
    """
    if u.dim != 1:
        raise ConfigError("the 1-D oracle needs a one-dimensional field")
    if alpha != 0.0:
        raise ConfigError("the 1-D oracle supports alpha = 0 only")
    if u.lipschitz is None or u.lipschitz <= 0:
        raise ConfigError("the 1-D oracle needs a Lipschitz field")

    core, windowed = _active_core(u, region, delta, INDICATOR, cfg)
    x_region = core.intersect(region)
    if x_region is None:
        return exact_zero()
    if x_region.radial_bounds[0] > 0:
        raise ConfigError("the 1-D oracle expects an interval core around the origin")
    w_hi = x_region.radial_bounds[1]

    def run(n_x: int, n_t: int) -> tuple[float, float]:
        xs = np.linspace(-w_hi, w_hi, n_x)
        u_xs = u.values(xs[:, None])
        t_cap = 2.0 * w_hi + 1.0
        t_lo = delta / u.lipschitz
        tt = np.geomspace(t_lo, t_cap, n_t)
        total_rows = np.zeros(n_x)
        tail_rows = np.zeros(n_x)
        for side in (+1.0, -1.0):
            ys = xs[:, None] + side * tt[None, :]
            uy = u.values(ys.ravel()[:, None]).reshape(n_x, n_t)
            sgn = (np.abs(uy - u_xs[:, None]) - delta) > 0.0
            crossings = _bisect_crossings(u, xs, u_xs, side, tt, sgn, delta)
            for i in range(n_x):
                total_rows[i] += _row_integral_1d(
                    u, region, x_region, xs[i], u_xs[i], side, tt, crossings.get(i, ()), p, delta
                )
            # analytic far tail: beyond t_cap the field vanishes
            ind0 = np.abs(u_xs) > delta
            tail_rows += ind0 * (2.0 * t_cap ** (-p) / p)
        total = total_rows + tail_rows
        val = float(_sci_integrate.simpson(total, x=xs)) * delta**p
        tail = float(_sci_integrate.simpson(tail_rows, x=xs)) * delta**p
        return val, tail

    n_x = cfg.grid | 1
    n_t = 2 * cfg.grid
    fine, tail = run(n_x, n_t)
    coarse, _ = run((n_x // 2) | 1, n_t // 2)
    err = abs(fine - coarse)
    return EnergyEstimate(max(fine, 0.0), err, n_x * n_t, max(min(tail, fine), 0.0), windowed)


def _bisect_crossings(u, xs, u_xs, side, tt, sgn, delta) -> dict:
    """Indicator-boundary points per row, refined by vectorized bisection."""
    rows, cols = np.nonzero(sgn[:, :-1] != sgn[:, 1:])
    if len(rows) == 0:
        return {}
    lo = tt[cols].copy()
    hi = tt[cols + 1].copy()
    left_pos = sgn[rows, cols]
    base_x = xs[rows]
    base_u = u_xs[rows]
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        val = (np.abs(u.values((base_x + side * mid)[:, None]) - base_u) - delta) > 0.0
        move_lo = val == left_pos
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
    cross = 0.5 * (lo + hi)
    out: dict[int, list] = {}
    for r, c in zip(rows, cross):
        out.setdefault(int(r), []).append(float(c))
    return out


def _row_integral_1d(u, region, x_region, x, ux, side, tt, crossings, p, delta) -> float:
    """Exact integral of w(t) |t|^{-1-p} over the indicator set of one row."""
    cuts = [tt[0], tt[-1]]
    cuts.extend(crossings)
    # breakpoints of the piecewise-constant weight
    w_hi = x_region.radial_bounds[1]
    for b in (w_hi - side * x, w_hi + side * x):
        if tt[0] < b < tt[-1]:
            cuts.append(b)
    if region.bounded:
        r_hi = region.radial_bounds[1]
        for b in (r_hi - side * x, r_hi + side * x):
            if tt[0] < b < tt[-1]:
                cuts.append(b)
    cuts = np.array(sorted(cuts))
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    ymid = x + side * mids
    on = np.abs(u.values(ymid[:, None]) - ux) > delta
    if region.bounded:
        on &= region.contains(ymid[:, None], 1)
    w = 1.0 + (~x_region.contains(ymid[:, None], 1))
    seg = (cuts[:-1] ** (-p) - cuts[1:] ** (-p)) / p
    return float(np.sum(seg * w * on))


def pair_oracle_radial(
    u: ScalarField,
    region: Region,
    *,
    p: float,
    delta: float,
    alpha: float = 0.0,
    cfg: QuadConfig,
) -> EnergyEstimate:
    """Deterministic pair-integral oracle for radial fields in d = 2, 3.

    Reduces the 2d-dimensional integral to the (|x|, |y|) plane: the angular
    kernel integral is exact in d = 3 and Gauss-Legendre in d = 2; the
    indicator depends on the radii only.  Midpoint rule on an N x N grid
    with Richardson error from an N/2 run.
    """
    d = u.dim
    if not u.is_radial:
        raise ConfigError("the radial oracle needs a radial field")
    if d not in (2, 3):
        raise ConfigError("the radial oracle supports d in {2, 3}")
    if u.lipschitz is None or u.lipschitz <= 0:
        raise ConfigError("the radial oracle needs a Lipschitz field")
    supp = u.support.as_region()
    if not supp.bounded:
        raise ConfigError("the radial oracle needs a compactly supported field")
    if not region.bounded and alpha != 0.0:
        raise ConfigError("the radial oracle supports alpha != 0 on bounded regions only")

    core, _ = _active_core(u, region, delta, INDICATOR, cfg)
    x_reg = core.intersect(region)
    if x_reg is None:
        return exact_zero()
    act_hi = x_reg.radial_bounds[1]
    # Full ordered (|x|, |y|) box; both radii range over the region, capped
    # where pairs at separation <= t_cap can no longer reach the support.
    if region.bounded:
        b_lo, b_hi = region.radial_bounds
        t_cap = 2.0 * b_hi
        far = 0.0
    else:
        t_cap = act_hi + supp.radial_bounds[1] + 1.0
        b_lo = region.radial_bounds[0]
        b_hi = supp.radial_bounds[1] + t_cap
        far = _far_tail_radial(u, d, p, delta, t_cap)

    const = sphere_area(d) * sphere_area(d - 1)
    e = 0.5 * (d + p)
    gl_x, gl_w = np.polynomial.legendre.leggauss(48)

    def run(n_grid: int) -> float:
        rx = np.linspace(b_lo, b_hi, n_grid + 1)
        ry = np.linspace(b_lo, b_hi, n_grid + 1)
        mx = 0.5 * (rx[:-1] + rx[1:])
        my = 0.5 * (ry[:-1] + ry[1:])
        hx = rx[1] - rx[0]
        hy = ry[1] - ry[0]
        gx = u.radial_profile(mx)
        gy = u.radial_profile(my)
        px, py = np.meshgrid(mx, my, indexing="ij")
        ind = np.abs(gx[:, None] - gy[None, :]) > delta
        a = px * px + py * py
        b = 2.0 * px * py
        cmin = np.maximum(-1.0, (a - t_cap * t_cap) / np.where(b > 0, b, 1.0))
        mask = ind & (cmin < 1.0)
        if not mask.any():
            return 0.0
        aa = a[mask]
        bb = b[mask]
        cm = cmin[mask]
        if d == 3:
            theta = ((aa - bb) ** (1.0 - e) - (aa - bb * cm) ** (1.0 - e)) / (bb * (e - 1.0))
        else:
            # Polar-angle form: integral over th in [0, acos(cmin)] of
            # (a - b cos th)^{-e} d th; smooth, Gauss-Legendre applies.
            th_max = np.arccos(np.clip(cm, -1.0, 1.0))
            theta = np.zeros(len(aa))
            for k in range(len(gl_x)):
                th = 0.5 * th_max * (1.0 + gl_x[k])
                theta += gl_w[k] * (aa - bb * np.cos(th)) ** (-e)
            theta *= 0.5 * th_max
        w = px[mask] ** (d - 1) * py[mask] ** (d - 1)
        if alpha != 0.0:
            w = w * px[mask] ** (p * alpha)
        return float(np.sum(w * theta) * hx * hy) * const * delta**p

    n_grid = cfg.grid
    fine = run(n_grid)
    coarse = run(max(n_grid // 2, 16))
    err = abs(fine - coarse)
    val = fine + far
    return EnergyEstimate(max(val, 0.0), err, n_grid * n_grid, far, False)


def _far_tail_radial(u: ScalarField, d: int, p: float, delta: float, t_cap: float) -> float:
    """Closed-form mass of ordered pairs with |x - y| > t_cap (u(y) = 0 there)."""
    lo, hi = u.support.radial_bounds

    def active_measure(rho):
        rho = np.asarray(rho, dtype=float)
        g = u.radial_profile(rho)
        return sphere_area(d) * rho ** (d - 1) * (np.abs(g) > delta)

    grid = np.linspace(lo, hi, 20001)
    vals = active_measure(grid)
    meas = float(np.trapezoid(vals, grid))
    return 2.0 * meas * delta**p * sphere_area(d) * t_cap ** (-p) / p


def integrate_pair_singular(
    u: ScalarField,
    region: Region,
    p: float,
    delta: float,
    alpha: float,
    cfg: QuadConfig,
) -> EnergyEstimate:
    """The weighted indicator pair integral over region x region."""
    if cfg.method == MONTE_CARLO:
        return pair_shell_mc(u, region, cfg, p=p, delta=delta, alpha=alpha, mode=INDICATOR)
    if cfg.method == TENSOR_GRID:
        if u.dim == 1:
            return pair_oracle_1d(u, region, p=p, delta=delta, alpha=alpha, cfg=cfg)
        return pair_oracle_radial(u, region, p=p, delta=delta, alpha=alpha, cfg=cfg)
    raise ConfigError("radial_reduction does not apply to pair integrals")
