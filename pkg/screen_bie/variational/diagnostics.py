"""
Discrete continuity and coercivity constants of a Galerkin matrix A measured
against a Hermitian positive definite norm matrix N (the same operator
assembled at k = i):

    |v^H A u| <= C ||u||_N ||v||_N,    |v^H A v| >= c ||v||_N^2.
"""
from typing import Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, cholesky, eigh, solve_triangular, svdvals
from she_logging import logger

ROTATIONS = 16


def _is_same(a: np.ndarray, n: np.ndarray) -> bool:
    return a.shape == n.shape and np.array_equal(a, n)


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def discrete_constants(matrix: np.ndarray, norm_matrix: np.ndarray) -> Tuple[float, float]:
    """
    Returns (C_h, c_h). C_h is the spectral norm of L^-1 A L^-H with N = L L^H.
    c_h is the best lower bound for |v^H A v| / v^H N v over 16 rotations
    e^{i theta} A, each giving the smallest eigenvalue of the Hermitian part.
    """
    if matrix.shape[0] == 0:
        return 1.0, 1.0
    if _is_same(matrix, norm_matrix):
        return 1.0, 1.0

    norm_h = hermitian_part(norm_matrix)
    lower = cholesky(norm_h, lower=True)
    left = solve_triangular(lower, matrix, lower=True)
    scaled = solve_triangular(lower, left.conj().T, lower=True).conj().T
    continuity = float(svdvals(scaled)[0])

    coercivity = -np.inf
    for theta in np.linspace(0.0, 2 * np.pi, ROTATIONS, endpoint=False):
        rotated = hermitian_part(np.exp(1j * theta) * matrix)
        smallest = eigh(rotated, norm_h, eigvals_only=True, subset_by_index=[0, 0])[0]
        coercivity = max(coercivity, float(smallest))

    if coercivity <= 0:
        logger.warning(
            "Discrete coercivity estimate is not positive",
            extra={"coercivity": coercivity},
        )
    return continuity, float(coercivity)


def dual_norm(rhs: np.ndarray, norm_matrix: np.ndarray) -> float:
    """||b||_* = sqrt(b^H N^-1 b)."""
    if rhs.size == 0:
        return 0.0
    factor = cho_factor(hermitian_part(norm_matrix))
    return float(np.sqrt(abs(np.vdot(rhs, cho_solve(factor, rhs)))))
