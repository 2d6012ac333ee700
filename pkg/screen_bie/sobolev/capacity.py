"""
Capacity of a screen through the Dirichlet single-layer problem at k = i
with data f = 1: cap(Gamma) = <1, phi> = a(phi, phi).
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
from she_logging import logger

from screen_bie.bie.assembly import assemble_system
from screen_bie.bie.data import BoundaryData
from screen_bie.bie.kernel import REFERENCE_WAVENUMBER
from screen_bie.bie.quadrature import QuadratureRule
from screen_bie.discretisation.mesh import DEFAULT_ELEMENT_CAP, mesh_panels
from screen_bie.discretisation.spaces import SpaceKind, build_space
from screen_bie.geometry.prefractals import PanelSet
from screen_bie.variational.solver import solve


@dataclass(frozen=True)
class CapacityRecord:
    level: int
    refine: int
    dofs: int
    capacity: float
    energy: float

    @property
    def identity_gap(self) -> float:
        """Relative mismatch between <1, phi_h> and a(phi_h, phi_h)."""
        if self.capacity == 0:
            return abs(self.energy)
        return abs(self.capacity - self.energy) / abs(self.capacity)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "refine": self.refine,
            "dofs": self.dofs,
            "capacity": self.capacity,
            "energy": self.energy,
            "identity_gap": self.identity_gap,
        }


def capacity_report(
    screen: PanelSet,
    refine: int,
    rule: QuadratureRule = QuadratureRule(),
    element_cap: int = DEFAULT_ELEMENT_CAP,
) -> CapacityRecord:
    if not screen.panels:
        return CapacityRecord(screen.level, refine, 0, 0.0, 0.0)

    mesh = mesh_panels(screen, refine, element_cap=element_cap)
    space = build_space(mesh, SpaceKind.P0_JUMP, screen)
    system = assemble_system(
        space, BoundaryData.constant(), REFERENCE_WAVENUMBER, rule, with_constants=False
    )
    solution = solve(system)
    coefficients = solution.coefficients
    record = CapacityRecord(
        level=screen.level,
        refine=refine,
        dofs=space.dof_count,
        capacity=float(solution.mean_value.real),
        energy=float(np.vdot(coefficients, system.matrix @ coefficients).real),
    )
    logger.info(
        "Estimated capacity",
        extra={
            "family": screen.family.value,
            "level": screen.level,
            "refine": refine,
            "capacity": record.capacity,
            "identity_gap": record.identity_gap,
        },
    )
    return record


def capacity_estimate(
    screen: PanelSet,
    refine: int,
    rule: QuadratureRule = QuadratureRule(),
    element_cap: int = DEFAULT_ELEMENT_CAP,
) -> float:
    return capacity_report(screen, refine, rule, element_cap).capacity


def capacity_sweep(
    screen: PanelSet,
    refines: Sequence[int],
    rule: QuadratureRule = QuadratureRule(),
    element_cap: int = DEFAULT_ELEMENT_CAP,
) -> List[CapacityRecord]:
    return [capacity_report(screen, r, rule, element_cap) for r in refines]
