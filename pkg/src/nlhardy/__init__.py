"""Nonlocal nonconvex energies and empirical verification of improved
Hardy and Caffarelli-Kohn-Nirenberg inequalities."""

from .energy import EnergyParams, WeightSpec, i_delta, i_delta_magnetic, j_delta, k_constant
from .energy import gradient_energy, weighted_norm
from .fields import (
    Region,
    ScalarField,
    SupportInfo,
    VectorPotential,
    make_bump,
    make_constant,
    make_family,
    make_linear_potential,
    make_radial_power,
    make_step_1d,
    make_tent,
)
from .kernels import BACKEND as kernel_backend
from .quad import EnergyEstimate, QuadConfig, integrate_pair_singular, integrate_region, sphere_integral
from .verify import InequalityCase, InequalityReport, SweepSpec, evaluate_case, make_case, sweep

__version__ = "0.1.0"

__all__ = [
    "EnergyEstimate",
    "EnergyParams",
    "InequalityCase",
    "InequalityReport",
    "QuadConfig",
    "Region",
    "ScalarField",
    "SupportInfo",
    "SweepSpec",
    "VectorPotential",
    "WeightSpec",
    "evaluate_case",
    "gradient_energy",
    "i_delta",
    "i_delta_magnetic",
    "integrate_pair_singular",
    "integrate_region",
    "j_delta",
    "k_constant",
    "kernel_backend",
    "make_bump",
    "make_case",
    "make_constant",
    "make_family",
    "make_linear_potential",
    "make_radial_power",
    "make_step_1d",
    "make_tent",
    "sphere_integral",
    "sweep",
    "weighted_norm",
]
