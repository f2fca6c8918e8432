"""Pure-NumPy shell-reduction kernels (fallback backend).

Each function reduces a block of pair samples: row i is an x-sample, column
j a y-sample drawn in shell j around x_i.  ``zc`` carries the per-shell
importance weight including all constant prefactors, ``w_eff`` the per-pair
symmetrization/region weight (already zeroed outside the target region).

The accumulation order over shells is fixed (ascending j) so the compiled
backend produces bit-identical output for p in {1, 2} and ulp-identical
output otherwise.
"""

from __future__ import annotations

import numpy as np


def _pairdist_pow(du: np.ndarray, p: float) -> np.ndarray:
    if p == 2.0:
        return du * du
    if p == 1.0:
        return np.abs(du)
    return np.abs(du) ** p


def shell_reduce_indicator(u_x, u_y, w_eff, zc, delta_sq):
    """V_i = sum_j zc_j * w_eff[i,j] * [(u_x_i - u_y[i,j])^2 > delta_sq].

    Returns (V, per-shell totals).
    """
    n, nj = u_y.shape
    v = np.zeros(n)
    shell = np.zeros(nj)
    for j in range(nj):
        du = u_x - u_y[:, j]
        term = (zc[j] * w_eff[:, j]) * ((du * du) > delta_sq)
        v += term
        shell[j] = term.sum()
    return v, shell


def shell_reduce_magnetic(u_x, u_y, w_eff, zc, delta_sq, cross):
    """Indicator reduction with the magnetic phase term added.

    ``cross[i,j]`` holds 2*u(x_i)*u(y_ij)*(1 - cos(theta_ij)), so the squared
    modulus |Psi_u(x,y) - u(x)|^2 is (u_x - u_y)^2 + cross, which reduces to
    the plain indicator exactly when the phase vanishes.
    """
    n, nj = u_y.shape
    v = np.zeros(n)
    shell = np.zeros(nj)
    for j in range(nj):
        du = u_x - u_y[:, j]
        term = (zc[j] * w_eff[:, j]) * ((du * du + cross[:, j]) > delta_sq)
        v += term
        shell[j] = term.sum()
    return v, shell


def shell_reduce_gagliardo(u_x, u_y, w_eff, zc, p):
    """V_i = sum_j zc_j * w_eff[i,j] * |u_x_i - u_y[i,j]|^p."""
    n, nj = u_y.shape
    v = np.zeros(n)
    shell = np.zeros(nj)
    for j in range(nj):
        du = u_x - u_y[:, j]
        term = (zc[j] * w_eff[:, j]) * _pairdist_pow(du, p)
        v += term
        shell[j] = term.sum()
    return v, shell
