import warnings
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.sparse import csr_matrix
from she_logging import logger

from screen_bie.bie.assembly import GalerkinSystem, ProblemKind, restrict_system
from screen_bie.discretisation.spaces import FunctionSpace, prolongation
from screen_bie.helpers.errors import DomainError, SingularMatrix
from screen_bie.sobolev.norms import energy_norm
from screen_bie.variational.diagnostics import dual_norm

RESIDUAL_TOLERANCE = 1e-10
# Relative slack on the Cea and Lax-Milgram inequalities.
BOUND_SLACK = 1e-8


@dataclass(frozen=True, eq=False)
class Solution:
    coefficients: np.ndarray
    space: FunctionSpace
    problem: ProblemKind
    energy_norm: float
    system: GalerkinSystem

    @property
    def mean_value(self) -> complex:
        return self.space.mean_value(self.coefficients)

    def lax_milgram(self) -> Dict[str, Any]:
        """
        The a priori bound ||u||_a <= sqrt(C_h) / c_h * ||b||_* with the dual
        norm taken against the k = i reference operator.
        """
        system = self.system
        bound = (
            np.sqrt(system.continuity_est)
            / system.coercivity_est
            * dual_norm(system.rhs, system.norm_matrix)
        )
        return {
            "energy_norm": self.energy_norm,
            "bound": float(bound),
            "holds": bool(self.energy_norm <= bound * (1 + BOUND_SLACK)),
        }


def solve(system: GalerkinSystem) -> Solution:
    n = system.dof_count
    if n < 1:
        raise DomainError("Cannot solve a system without degrees of freedom")

    rhs = system.rhs
    if not np.any(rhs):
        coefficients = np.zeros(n, dtype=complex)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("error", LinAlgWarning)
            try:
                factor = lu_factor(system.matrix)
            except (LinAlgWarning, ValueError) as error:
                raise SingularMatrix(float(np.linalg.cond(system.matrix))) from error
        if np.any(np.diag(factor[0]) == 0):
            raise SingularMatrix(float("inf"))
        coefficients = lu_solve(factor, rhs)
        residual = np.linalg.norm(system.matrix @ coefficients - rhs) / np.linalg.norm(rhs)
        logger.debug("Solved Galerkin system", extra={"dofs": n, "residual": residual})
        if not residual <= RESIDUAL_TOLERANCE:
            raise SingularMatrix(
                float(np.linalg.cond(system.matrix)),
                f"Relative residual {residual:.3g} above {RESIDUAL_TOLERANCE}",
            )

    return Solution(
        coefficients=coefficients,
        space=system.space,
        problem=system.problem,
        energy_norm=energy_norm(system.matrix, coefficients),
        system=system,
    )


def galerkin_orthogonality_check(
    fine: Solution, coarse_space: FunctionSpace, system_fine: GalerkinSystem
) -> float:
    """
    max_e |a(u_fine, P e) - <b, P e>| over coarse basis vectors e, scaled by
    the largest |<b, P e>|.
    """
    prolong = prolongation(coarse_space, fine.space)
    residual = system_fine.matrix @ fine.coefficients - system_fine.rhs
    defect = prolong.T @ residual
    load = prolong.T @ system_fine.rhs
    scale = float(np.max(np.abs(load))) if load.size and np.any(load) else 1.0
    return float(np.max(np.abs(defect), initial=0.0) / scale)


@dataclass(frozen=True)
class CeaRecord:
    lhs: float
    rhs: float
    ratio_constant: float
    holds: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio_constant": self.ratio_constant,
            "holds": self.holds,
        }


def cea_diagnostic(
    coarse: Solution,
    fine: Solution,
    continuity: float,
    coercivity: float,
    prolong: Optional[csr_matrix] = None,
) -> CeaRecord:
    """
    Quasi-optimality: ||u_coarse - u_fine|| against
    (C_h / c_h) ||Pi u_fine - u_fine|| with Pi the orthogonal projection onto
    the coarse space. Both sides use the norm of the fine k = i reference
    matrix, which equals the energy norm when k = i.
    """
    if prolong is None:
        prolong = prolongation(coarse.space, fine.space)
    norm = fine.system.norm_matrix
    p = prolong.toarray()
    lifted = p @ coarse.coefficients
    lhs = energy_norm(norm, lifted - fine.coefficients)

    if p.shape[1]:
        projected = p.T @ norm @ p
        projection = p @ np.linalg.solve(projected, p.T @ (norm @ fine.coefficients))
    else:
        projection = np.zeros_like(fine.coefficients)
    best = energy_norm(norm, projection - fine.coefficients)

    constant = continuity / coercivity
    rhs = constant * best
    holds = lhs <= rhs * (1 + BOUND_SLACK) + 1e-12 * fine.energy_norm
    logger.debug(
        "Cea diagnostic", extra={"lhs": lhs, "rhs": rhs, "constant": constant}
    )
    return CeaRecord(lhs=lhs, rhs=rhs, ratio_constant=constant, holds=bool(holds))


def solve_restricted(fine_system: GalerkinSystem, coarse_space: FunctionSpace) -> Solution:
    """Solve on a nested coarse space through the restriction of the fine form."""
    prolong = prolongation(coarse_space, fine_system.space)
    return solve(restrict_system(fine_system, coarse_space, prolong))
