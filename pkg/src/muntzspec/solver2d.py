"""Space-time solver for the 2D fractional diffusion problem.

The spatial basis is rotated into its Fourier-like form: the orthonormal
eigenvectors of the (mass, identity-stiffness) pair turn both 2D spatial
forms into diagonal matrices, so each rotated spatial mode (kx, ky) couples
only through time:

    a_c St u_c + kappa b_c Mt u_c = f_c,   a_c = nu_kx nu_ky,  b_c = nu_kx + nu_ky.

The fast path factors the pencil (St^T, Mt^T) once with a complex QZ
decomposition and then runs one vectorized forward substitution over all
columns; the dense path solves the same block system by a single LU and
serves as the cross-checking oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.linalg import eigh, lu_factor, lu_solve, qz

from .assembly import (
    ManufacturedProblem,
    assemble_forcing_2d,
    assemble_spatial,
    assemble_temporal,
)
from .basis import MuntzBasis, SpatialBasis, muntz_jacobi_table, spatial_table
from .errors import NumericalFailure, ParameterDomainError
from .solver1d import SolverConfig, _residual_norm

__all__ = [
    "DENSE_SIZE_LIMIT",
    "ErrorReport2D",
    "FourierLikeBasis",
    "IMAG_FAIL",
    "IMAG_WARN",
    "Solution2D",
    "error_norms_2d",
    "evaluate_grid_2d",
    "fourier_like_basis",
    "sigma_table",
    "solve_2d",
    "solve_2d_dense",
]

IMAG_WARN = 1.0e-9
IMAG_FAIL = 1.0e-6
DENSE_SIZE_LIMIT = 20000
_QZ_RECONSTRUCT_TOL = 1.0e-11
RESIDUAL_TOL = 1.0e-10


@dataclass(frozen=True)
class FourierLikeBasis:
    """Orthonormal spatial rotation diagonalizing mass and stiffness forms.

    transform holds the eigenvectors columnwise; weights holds the mass
    eigenvalues nu_k, ascending and positive.
    """

    spatial: SpatialBasis
    transform: np.ndarray
    weights: np.ndarray


def fourier_like_basis(m_legendre: int) -> FourierLikeBasis:
    ops = assemble_spatial(m_legendre)
    weights, transform = eigh(ops.mass)
    if weights.min() <= 0.0:
        raise NumericalFailure("spatial mass matrix lost positive definiteness")
    transform = np.ascontiguousarray(transform)
    transform.flags.writeable = False
    weights.flags.writeable = False
    return FourierLikeBasis(ops.basis, transform, weights)


def sigma_table(fb: FourierLikeBasis, x: np.ndarray) -> np.ndarray:
    """Values of the rotated modes at x, one row per mode."""
    return fb.transform.T @ spatial_table(fb.spatial, np.asarray(x, dtype=float))


def _qz_lower(st: np.ndarray, mt: np.ndarray):
    """Complex QZ of the transposed pencil, returned as lower-triangular
    factors: St = conj(Z) La Q^T and Mt = conj(Z) Lb Q^T."""
    aa, bb, q, z = qz(st.T, mt.T, output="complex")
    for name, tri in (("first", aa), ("second", bb)):
        if np.abs(np.tril(tri, -1)).max() > 1e-12 * max(np.abs(tri).max(), 1.0):
            raise NumericalFailure(f"QZ {name} factor is not triangular")
    scale_a = max(np.abs(st).max(), 1.0)
    scale_b = max(np.abs(mt).max(), 1.0)
    if (
        np.abs(q @ aa @ z.conj().T - st.T).max() > _QZ_RECONSTRUCT_TOL * scale_a
        or np.abs(q @ bb @ z.conj().T - mt.T).max() > _QZ_RECONSTRUCT_TOL * scale_b
    ):
        raise NumericalFailure("QZ factors fail to reconstruct the pencil")
    return aa.T, bb.T, q, z


@dataclass(frozen=True)
class Solution2D:
    """Solved rotated-basis coefficients plus solve diagnostics.

    coeffs[n, kx * K + ky] multiplies member_n(t) sigma_kx(x) sigma_ky(y).
    """

    config: SolverConfig
    fourier: FourierLikeBasis
    temporal: MuntzBasis
    coeffs: np.ndarray
    residual: float
    min_pivot: float
    imag_ratio: float


SourceTerm = Union[ManufacturedProblem, Callable[..., np.ndarray]]


def _assemble_2d(config: SolverConfig, source: SourceTerm):
    if config.dimension != 2:
        raise ParameterDomainError("solve_2d needs a dimension-2 configuration")
    fb = fourier_like_basis(config.m_space)
    ops_t = assemble_temporal(
        config.n_time, config.mu, config.lam, alpha=config.alpha, nhat=config.nhat
    )
    st = ops_t.stiffness * config.t_end ** (-config.mu)
    mt = ops_t.mass
    f_plain = assemble_forcing_2d(source, fb.spatial, ops_t.basis, t_end=config.t_end)
    k = fb.weights.size
    f_sigma = np.einsum(
        "nab,ak,bl->nkl", f_plain.reshape(-1, k, k), fb.transform, fb.transform
    ).reshape(-1, k * k)
    a_diag = np.multiply.outer(fb.weights, fb.weights).ravel()
    b_diag = np.add.outer(fb.weights, fb.weights).ravel()
    return fb, ops_t, st, mt, f_sigma, a_diag, b_diag


def _finish(config, fb, ops_t, st, mt, f_sigma, a_diag, b_diag, coeffs, min_pivot, imag_ratio):
    applied = (st @ coeffs) * a_diag[None, :] + config.kappa * (mt @ coeffs) * b_diag[None, :]
    residual = _residual_norm(applied, f_sigma)
    if residual > RESIDUAL_TOL:
        raise NumericalFailure(f"2D solve residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")
    coeffs.flags.writeable = False
    return Solution2D(config, fb, ops_t.basis, coeffs, residual, min_pivot, imag_ratio)


def solve_2d(config: SolverConfig, source: SourceTerm) -> Solution2D:
    """Fast path: one QZ factorization, then triangular solves for all
    rotated spatial columns at once."""
    fb, ops_t, st, mt, f_sigma, a_diag, b_diag = _assemble_2d(config, source)
    la, lb, q, z = _qz_lower(st, mt)
    rhs = z.T @ f_sigma
    n1 = st.shape[0]
    v = np.zeros_like(rhs, dtype=complex)
    diag_a, diag_b = np.diag(la), np.diag(lb)
    pivots = np.abs(
        a_diag[None, :] * diag_a[:, None] + config.kappa * b_diag[None, :] * diag_b[:, None]
    )
    min_pivot = float(pivots.min())
    if min_pivot == 0.0 or not np.isfinite(min_pivot):
        raise NumericalFailure(f"triangular solve hit a zero pivot (min {min_pivot:.3e})")
    for i in range(n1):
        acc = rhs[i]
        if i:
            acc = acc - a_diag * (la[i, :i] @ v[:i]) - config.kappa * b_diag * (
                lb[i, :i] @ v[:i]
            )
        v[i] = acc / (a_diag * la[i, i] + config.kappa * b_diag * lb[i, i])
    coeffs_c = q.conj() @ v
    real_scale = max(np.abs(coeffs_c.real).max(), 1e-300)
    imag_ratio = float(np.abs(coeffs_c.imag).max() / real_scale)
    if imag_ratio > IMAG_FAIL:
        raise NumericalFailure(
            f"imaginary residue {imag_ratio:.3e} exceeds {IMAG_FAIL:.0e}; "
            "the complex rotation failed to cancel"
        )
    if imag_ratio > IMAG_WARN:
        warnings.warn(
            f"imaginary residue {imag_ratio:.3e} above {IMAG_WARN:.0e}",
            RuntimeWarning,
            stacklevel=2,
        )
    coeffs = np.ascontiguousarray(coeffs_c.real)
    return _finish(
        config, fb, ops_t, st, mt, f_sigma, a_diag, b_diag, coeffs, min_pivot, imag_ratio
    )


def solve_2d_dense(config: SolverConfig, source: SourceTerm) -> Solution2D:
    """Oracle path: the same rotated block system solved as one dense LU."""
    n_unknowns = (config.n_time + 1) * (config.m_space - 1) ** 2
    if n_unknowns > DENSE_SIZE_LIMIT:
        raise ParameterDomainError(
            f"dense 2D path limited to {DENSE_SIZE_LIMIT} unknowns, got {n_unknowns}"
        )
    fb, ops_t, st, mt, f_sigma, a_diag, b_diag = _assemble_2d(config, source)
    system = np.kron(np.diag(a_diag), st) + config.kappa * np.kron(np.diag(b_diag), mt)
    lu, piv = lu_factor(system)
    diag = np.abs(np.diag(lu))
    if diag.min() == 0.0 or not np.all(np.isfinite(diag)):
        raise NumericalFailure("dense 2D system is singular")
    vec = lu_solve((lu, piv), f_sigma.ravel(order="F"))
    coeffs = vec.reshape(f_sigma.shape, order="F")
    return _finish(
        config, fb, ops_t, st, mt, f_sigma, a_diag, b_diag, coeffs, float(diag.min()), 0.0
    )


def evaluate_grid_2d(
    solution: Solution2D, x: np.ndarray, y: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """Evaluate on the tensor grid, returning shape (len(t), len(x), len(y))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    t_end = solution.config.t_end
    if np.any(t < 0.0) or np.any(t > t_end):
        raise ParameterDomainError(f"times must lie in [0, {t_end}]")
    temporal = muntz_jacobi_table(solution.temporal, t / t_end)
    sx = sigma_table(solution.fourier, x)
    sy = sigma_table(solution.fourier, y)
    k = solution.fourier.weights.size
    cube = solution.coeffs.reshape(-1, k, k)
    half = np.einsum("nab,by->nay", cube, sy)
    full = np.einsum("nay,ax->nxy", half, sx)
    return np.einsum("nt,nxy->txy", temporal, full)


@dataclass(frozen=True)
class ErrorReport2D:
    """Pointwise and RMS errors on the uniform interior tensor grid."""

    l2: float
    linf: float
    time: float
    n_nodes: int


def error_norms_2d(
    solution: Solution2D,
    exact: Callable[..., np.ndarray],
    time: float | None = None,
    n_nodes: int = 101,
) -> ErrorReport2D:
    """Errors against exact(x, t, y=y) on an n_nodes x n_nodes interior grid."""
    if n_nodes < 1:
        raise ParameterDomainError(f"node count must be positive, got {n_nodes}")
    t_eval = solution.config.t_end if time is None else float(time)
    nodes = np.linspace(-1.0, 1.0, n_nodes + 2)[1:-1]
    approx = evaluate_grid_2d(solution, nodes, nodes, np.array([t_eval]))[0]
    want = np.asarray(exact(nodes[:, None], t_eval, y=nodes[None, :]), dtype=float)
    diff = approx - want
    l2 = float(np.sqrt(np.mean(diff**2)))
    linf = float(np.max(np.abs(diff)))
    return ErrorReport2D(l2, linf, t_eval, n_nodes)
