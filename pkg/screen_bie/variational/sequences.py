"""
Nested-space sequences: Dirichlet problems on decreasing prefractal screens
(Cantor dust, Sierpinski gasket) and Neumann problems on the increasing
complements of the Sierpinski gasket.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from she_logging import logger

from screen_bie.bie.assembly import (
    GalerkinSystem,
    ProblemKind,
    assemble_cross_single_layer,
    assemble_system,
)
from screen_bie.bie.data import BoundaryData
from screen_bie.bie.kernel import REFERENCE_WAVENUMBER, WavenumberLike, as_wavenumber
from screen_bie.bie.quadrature import QuadratureRule
from screen_bie.discretisation.mesh import DEFAULT_ELEMENT_CAP, mesh_panels
from screen_bie.discretisation.spaces import (
    FunctionSpace,
    SpaceKind,
    build_space,
    prolongation,
)
from screen_bie.geometry.prefractals import (
    Family,
    PanelSet,
    PrefractalSpec,
    generate_prefractal,
    sierpinski_base_screen,
)
from screen_bie.helpers.errors import CapacityError, DomainError
from screen_bie.sobolev.norms import HsNormSpec, energy_norm, hs_norm
from screen_bie.variational.solver import Solution, solve
from screen_bie.variational.verdict import (
    TrendDiagnostics,
    VerdictRule,
    decide_verdict,
)

DEFAULT_DOF_CAP = 2000
ALIGNMENT_TOLERANCE = 1e-9

SUPERSPACE_NOTE = "differences measured in a common superspace mesh"
SCALAR_NOTE = "no common superspace for this ratio; scalar functionals only"
NESTED_NOTE = "differences measured in the finer level space"
CAPPED_NOTE = "superspace over the element cap; scalar functionals only"


@dataclass(frozen=True)
class SequenceSettings:
    refine: int = 0
    rule: QuadratureRule = QuadratureRule()
    verdict_rule: VerdictRule = VerdictRule()
    dof_cap: int = DEFAULT_DOF_CAP
    element_cap: int = DEFAULT_ELEMENT_CAP
    hs_spec: Optional[HsNormSpec] = None
    with_constants: bool = True


@dataclass
class LevelRecord:
    level: int
    screen_index: int
    panels: int
    dofs: int
    elements: int
    energy_norm: float
    diff_prev: Optional[float]
    capacity: Optional[float]
    functional: complex
    c_h: float
    C_h: float
    lax_milgram_bound: float
    lax_milgram_holds: bool
    hs_diff: Optional[Dict[str, Any]] = None
    note: Optional[str] = None

    def csv_row(self) -> List[Any]:
        return [
            self.level,
            self.dofs,
            self.energy_norm,
            self.diff_prev,
            self.capacity,
            self.c_h,
            self.C_h,
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "j": self.level,
            "screen_index": self.screen_index,
            "panels": self.panels,
            "dofs": self.dofs,
            "elements": self.elements,
            "energy_norm": self.energy_norm,
            "diff_prev": self.diff_prev,
            "capacity": self.capacity,
            "functional": [self.functional.real, self.functional.imag],
            "c_h": _finite_or_none(self.c_h),
            "C_h": _finite_or_none(self.C_h),
            "lax_milgram": {
                "bound": _finite_or_none(self.lax_milgram_bound),
                "holds": self.lax_milgram_holds,
            },
            "hs_diff": self.hs_diff,
            "note": self.note,
        }


@dataclass
class ConvergenceReport:
    family: Family
    problem: ProblemKind
    wavenumber: complex
    refine: int
    alpha: Optional[Fraction]
    metric: str
    note: str
    levels: List[LevelRecord]
    trend: TrendDiagnostics
    full_screen_gap: Optional[float] = None
    extras: Dict[str, Any] = field(default_factory=dict)

    CSV_COLUMNS = ("j", "dofs", "energy_norm", "diff_prev", "capacity", "c_h", "C_h")

    def csv_rows(self) -> List[List[Any]]:
        return [record.csv_row() for record in self.levels]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "problem": self.problem.value,
            "alpha": None if self.alpha is None else str(self.alpha),
            "wavenumber": {"re": self.wavenumber.real, "im": self.wavenumber.imag},
            "refine": self.refine,
            "metric": self.metric,
            "note": self.note,
            "levels": [record.to_dict() for record in self.levels],
            "trend": self.trend.to_dict(),
            "full_screen_gap": self.full_screen_gap,
            **self.extras,
        }


LevelCallback = Callable[[LevelRecord, Solution], None]


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def superspace_factor(family: Family, alpha: Optional[Fraction]) -> Optional[int]:
    """
    Lattice subdivision factor m such that every level-j panel is a union of
    elements of level j-1 meshed m times finer, or None when no such m exists.
    """
    if family is Family.SIERPINSKI_GASKET:
        return 2
    if family is Family.CANTOR_DUST and alpha is not None:
        inverse = 1 / float(alpha)
        m = round(inverse)
        if abs(inverse - m) <= ALIGNMENT_TOLERANCE:
            return int(m)
    return None


def _check_dofs(space: FunctionSpace, cap: int) -> None:
    if space.dof_count > cap:
        raise CapacityError(
            f"Level has {space.dof_count} degrees of freedom, above the cap of {cap}"
        )


def _solve_level(
    screen: PanelSet,
    kind: SpaceKind,
    data: BoundaryData,
    k: WavenumberLike,
    settings: SequenceSettings,
    refine: Optional[int] = None,
) -> Solution:
    mesh = mesh_panels(
        screen,
        settings.refine if refine is None else refine,
        element_cap=settings.element_cap,
    )
    space = build_space(mesh, kind, screen)
    _check_dofs(space, settings.dof_cap)
    system = assemble_system(
        space, data, k, settings.rule, with_constants=settings.with_constants
    )
    return solve(system)


def _record(
    screen: PanelSet,
    solution: Solution,
    capacity_case: bool,
    diff_prev: Optional[float],
    hs_diff: Optional[Dict[str, Any]],
) -> LevelRecord:
    system: GalerkinSystem = solution.system
    functional = complex(solution.mean_value)
    if _has_constants(system):
        bound = solution.lax_milgram()
        lm_bound, lm_holds = bound["bound"], bound["holds"]
    else:
        lm_bound, lm_holds = math.nan, False
    return LevelRecord(
        level=screen.level,
        screen_index=screen.dust_index,
        panels=len(screen),
        dofs=system.dof_count,
        elements=system.space.mesh.n_elements,
        energy_norm=solution.energy_norm,
        diff_prev=diff_prev,
        capacity=functional.real if capacity_case else None,
        functional=functional,
        c_h=system.coercivity_est,
        C_h=system.continuity_est,
        lax_milgram_bound=lm_bound,
        lax_milgram_holds=lm_holds,
        hs_diff=hs_diff,
    )


def _has_constants(system: GalerkinSystem) -> bool:
    return math.isfinite(system.coercivity_est) and system.coercivity_est > 0


def _superspace_difference(
    previous: Solution,
    current: Solution,
    factor: int,
    k: WavenumberLike,
    settings: SequenceSettings,
) -> Dict[str, Any]:
    """
    ||phi_j - phi_{j-1}||_a with both densities on the level j-1 screen
    meshed `factor` times finer, expanded as the quadratic form

        c_{j-1}^H A_{j-1} c_{j-1} - c_{j-1}^H B c_j - c_j^H B^T c_{j-1} + c_j^H A_j c_j

    with B the cross block between the two level spaces.
    """
    coarse_space = previous.space
    fine_space = current.space
    superspace = mesh_panels(
        coarse_space.screen,
        settings.refine,
        element_cap=settings.element_cap,
        subdivisions=factor * 2**settings.refine,
    )
    cross = assemble_cross_single_layer(
        coarse_space, fine_space, superspace, k, settings.rule
    )
    a = previous.coefficients
    b = current.coefficients
    quadratic = (
        np.vdot(a, previous.system.matrix @ a)
        - np.vdot(a, cross @ b)
        - np.vdot(b, cross.T @ a)
        + np.vdot(b, current.system.matrix @ b)
    )
    result: Dict[str, Any] = {"diff": float(np.sqrt(abs(quadratic)))}

    if settings.hs_spec is not None:
        common = build_space(superspace, SpaceKind.P0_JUMP, coarse_space.screen)
        embedded = prolongation(coarse_space, common) @ a - prolongation(
            fine_space, common
        ) @ b
        result["hs"] = hs_norm(common, embedded, settings.hs_spec).to_dict()
    return result


def solve_decreasing_sequence(
    family: Family,
    j_max: int,
    data: BoundaryData,
    k: WavenumberLike,
    alpha: Optional[Fraction] = None,
    settings: SequenceSettings = SequenceSettings(),
    j_min: int = 1,
    on_solution: Optional[LevelCallback] = None,
) -> ConvergenceReport:
    if family not in (Family.CANTOR_DUST, Family.SIERPINSKI_GASKET):
        raise DomainError(f"{family.value} is not a decreasing family")
    if j_max < 2 or j_min < 0 or j_min >= j_max:
        raise DomainError(f"Need at least two levels, got {j_min}..{j_max}")

    wavenumber = as_wavenumber(k)
    capacity_case = (
        wavenumber.k == REFERENCE_WAVENUMBER.k and data.is_unit_constant
    )
    specs = [PrefractalSpec(family, j, alpha) for j in range(j_min, j_max + 1)]
    ratio = specs[0].alpha
    factor = superspace_factor(family, ratio)

    records: List[LevelRecord] = []
    previous: Optional[Solution] = None
    for spec in specs:
        screen = generate_prefractal(spec)
        solution = _solve_level(screen, SpaceKind.P0_JUMP, data, wavenumber, settings)

        diff_prev: Optional[float] = None
        hs_diff: Optional[Dict[str, Any]] = None
        level_note: Optional[str] = None
        if previous is not None and factor is not None:
            try:
                measured = _superspace_difference(
                    previous, solution, factor, wavenumber, settings
                )
            except CapacityError as error:
                logger.warning(
                    "Superspace mesh exceeds the element cap; scalar comparison only",
                    extra={"level": spec.level, "error": str(error)},
                )
                level_note = CAPPED_NOTE
            else:
                diff_prev = measured["diff"]
                hs_diff = measured.get("hs")

        record = _record(screen, solution, capacity_case, diff_prev, hs_diff)
        record.note = level_note
        records.append(record)
        if on_solution is not None:
            on_solution(record, solution)
        logger.info(
            "Solved level",
            extra={
                "family": family.value,
                "level": spec.level,
                "dofs": record.dofs,
                "energy_norm": record.energy_norm,
                "diff_prev": diff_prev,
            },
        )
        previous = solution

    if capacity_case:
        metric = "capacity"
        values = [r.capacity or 0.0 for r in records]
    else:
        metric = "energy_norm"
        values = [r.energy_norm for r in records]
    measured_any = any(r.diff_prev is not None for r in records)
    note = SUPERSPACE_NOTE if measured_any else SCALAR_NOTE
    trend = decide_verdict(values, settings.verdict_rule)
    logger.info(
        "Sequence verdict",
        extra={"family": family.value, "metric": metric, "verdict": trend.verdict.value},
    )
    return ConvergenceReport(
        family=family,
        problem=ProblemKind.DIRICHLET,
        wavenumber=wavenumber.k,
        refine=settings.refine,
        alpha=ratio,
        metric=metric,
        note=note,
        levels=records,
        trend=trend,
    )


def solve_increasing_sequence(
    j_max: int,
    data: BoundaryData,
    k: WavenumberLike,
    settings: SequenceSettings = SequenceSettings(),
    j_min: int = 1,
    full_screen: bool = True,
    on_solution: Optional[LevelCallback] = None,
) -> ConvergenceReport:
    """
    Neumann problems on the complements F_0 minus F_j, j = j_min..j_max. Each
    level screen is a prefix of the next, so with a common refine the P1
    spaces are nested and differences are taken in the finer space. With
    `full_screen` the last level is also compared against the solution on
    int(F_0), meshed j_max + refine times so that it contains every level.
    """
    if j_max < 2 or j_min < 1 or j_min >= j_max:
        raise DomainError(f"Need at least two levels, got {j_min}..{j_max}")
    wavenumber = as_wavenumber(k)

    records: List[LevelRecord] = []
    previous: Optional[Solution] = None
    for j in range(j_min, j_max + 1):
        screen = generate_prefractal(PrefractalSpec(Family.SIERPINSKI_COMPLEMENT, j))
        solution = _solve_level(
            screen, SpaceKind.P1_ZERO_TRACE, data, wavenumber, settings
        )
        diff_prev: Optional[float] = None
        hs_diff: Optional[Dict[str, Any]] = None
        if previous is not None:
            difference = (
                prolongation(previous.space, solution.space) @ previous.coefficients
                - solution.coefficients
            )
            diff_prev = energy_norm(solution.system.matrix, difference)
            if settings.hs_spec is not None:
                hs_diff = hs_norm(solution.space, difference, settings.hs_spec).to_dict()
        record = _record(screen, solution, False, diff_prev, hs_diff)
        records.append(record)
        if on_solution is not None:
            on_solution(record, solution)
        logger.info(
            "Solved level",
            extra={
                "family": Family.SIERPINSKI_COMPLEMENT.value,
                "level": j,
                "dofs": record.dofs,
                "energy_norm": record.energy_norm,
                "diff_prev": diff_prev,
            },
        )
        previous = solution

    gap: Optional[float] = None
    extras: Dict[str, Any] = {}
    if full_screen and previous is not None:
        try:
            gap = full_screen_gap(previous, data, wavenumber, j_max, settings)
        except CapacityError as error:
            logger.warning(
                "Full screen solve exceeds the caps; gap not measured",
                extra={"error": str(error)},
            )
            extras["full_screen_note"] = str(error)

    trend = decide_verdict([r.energy_norm for r in records], settings.verdict_rule)
    logger.info(
        "Sequence verdict",
        extra={
            "family": Family.SIERPINSKI_COMPLEMENT.value,
            "verdict": trend.verdict.value,
            "full_screen_gap": gap,
        },
    )
    return ConvergenceReport(
        family=Family.SIERPINSKI_COMPLEMENT,
        problem=ProblemKind.NEUMANN,
        wavenumber=wavenumber.k,
        refine=settings.refine,
        alpha=None,
        metric="energy_norm",
        note=NESTED_NOTE,
        levels=records,
        trend=trend,
        full_screen_gap=gap,
        extras=extras,
    )


def full_screen_gap(
    last: Solution,
    data: BoundaryData,
    k: WavenumberLike,
    j_max: int,
    settings: SequenceSettings,
) -> float:
    """||E phi_{j_max} - phi*||_a on int(F_0), E the extension by zero."""
    star = _solve_level(
        sierpinski_base_screen(),
        SpaceKind.P1_ZERO_TRACE,
        data,
        k,
        settings,
        refine=j_max + settings.refine,
    )
    extended = prolongation(last.space, star.space) @ last.coefficients
    return energy_norm(star.system.matrix, extended - star.coefficients)
