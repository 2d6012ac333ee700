from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from she_logging import logger

from screen_bie.bie.assembly import assemble_system
from screen_bie.bie.data import BoundaryData
from screen_bie.bie.kernel import REFERENCE_WAVENUMBER, Wavenumber
from screen_bie.bie.quadrature import QuadratureRule
from screen_bie.discretisation.mesh import mesh_panels
from screen_bie.discretisation.spaces import SpaceKind, build_space
from screen_bie.experiments import report
from screen_bie.geometry.dimension import similarity_dimension
from screen_bie.geometry.prefractals import (
    Family,
    PanelSet,
    PrefractalSpec,
    generate_prefractal,
)
from screen_bie.helpers.errors import CapacityError, ConfigError, DomainError
from screen_bie.models.api_spec import ExperimentConfig
from screen_bie.sobolev.capacity import capacity_sweep
from screen_bie.sobolev.norms import HsNormSpec, hs_norm
from screen_bie.variational.sequences import (
    ConvergenceReport,
    LevelRecord,
    SequenceSettings,
    solve_decreasing_sequence,
    solve_increasing_sequence,
)
from screen_bie.variational.solver import Solution, solve
from screen_bie.variational.verdict import Verdict, VerdictRule

DECREASING_FAMILIES = (Family.CANTOR_DUST, Family.SIERPINSKI_GASKET)


@dataclass
class RunResult:
    command: str
    document: Dict[str, Any]
    outputs: List[Path] = field(default_factory=list)
    verdict: Optional[Verdict] = None


def family_of(config: ExperimentConfig.Meta.Dict) -> Family:
    return Family(config["family"])


def wavenumber_of(config: ExperimentConfig.Meta.Dict) -> Wavenumber:
    parts = config["wavenumber"]
    try:
        return Wavenumber.from_parts(parts["re"], parts["im"])
    except DomainError as error:
        raise ConfigError(str(error)) from error


def quadrature_of(config: ExperimentConfig.Meta.Dict) -> QuadratureRule:
    return QuadratureRule(**config["quadrature"])


def data_of(config: ExperimentConfig.Meta.Dict) -> BoundaryData:
    try:
        return BoundaryData.from_dict(dict(config["data"]))
    except DomainError as error:
        raise ConfigError(str(error)) from error


def hs_spec_of(config: ExperimentConfig.Meta.Dict) -> HsNormSpec:
    return HsNormSpec(**config["hs_norm"])


def settings_of(config: ExperimentConfig.Meta.Dict) -> SequenceSettings:
    return SequenceSettings(
        refine=config["refine"],
        rule=quadrature_of(config),
        verdict_rule=VerdictRule(**config["verdict"]),
        dof_cap=config["dof_cap"],
        element_cap=config["element_cap"],
        hs_spec=hs_spec_of(config) if config["hs_diffs"] else None,
    )


def screen_for(config: ExperimentConfig.Meta.Dict, level: int) -> PanelSet:
    family = family_of(config)
    if family is Family.CUSTOM:
        return PanelSet.from_dict(
            {"family": Family.CUSTOM.value, "level": 0, "panels": config["panels"]}
        )
    alpha: Optional[Fraction] = config.get("alpha")
    return generate_prefractal(PrefractalSpec(family, level, alpha))


def _output_dir(config: ExperimentConfig.Meta.Dict) -> Path:
    return Path(config["output_dir"])


def _dumped_config(config: ExperimentConfig.Meta.Dict) -> Dict[str, Any]:
    return ExperimentConfig().dump(config)


def _finish(
    config: ExperimentConfig.Meta.Dict,
    command: str,
    result: Any,
    columns: Optional[List[str]] = None,
    rows: Optional[List[List[Any]]] = None,
    extra_outputs: Optional[List[Path]] = None,
) -> RunResult:
    directory = _output_dir(config)
    name = config["name"]
    document = report.envelope(command, _dumped_config(config), result)
    outputs = list(extra_outputs or [])
    outputs.append(report.write_json(directory / f"{name}.json", document))
    if columns is not None and rows is not None:
        outputs.append(report.write_csv(directory / f"{name}.csv", columns, rows))
    outputs.append(report.write_meta(directory, name, command, outputs))
    return RunResult(command=command, document=document, outputs=outputs)


def generate(config: ExperimentConfig.Meta.Dict) -> RunResult:
    """Geometry and mesh JSON for every requested level."""
    directory = _output_dir(config)
    name = config["name"]
    refine = config["refine"]
    outputs: List[Path] = []
    summary = []
    for level in config["levels"]:
        screen = screen_for(config, level)
        mesh = mesh_panels(screen, refine, element_cap=config["element_cap"])
        stem = f"{name}-j{level}"
        outputs.append(report.write_json(directory / f"{stem}.geometry.json", screen.to_dict()))
        outputs.append(
            report.write_json(directory / f"{stem}-r{refine}.mesh.json", mesh.to_dict())
        )
        summary.append(
            {
                "level": level,
                "panels": len(screen),
                "area": screen.area,
                "elements": mesh.n_elements,
                "vertices": mesh.n_vertices,
            }
        )
        logger.info(
            "Generated screen",
            extra={"family": screen.family.value, "level": level, "panels": len(screen)},
        )
    return _finish(config, "generate", summary, extra_outputs=outputs)


def _check_levels(levels: List[int]) -> None:
    if len(levels) < 2:
        raise ConfigError("A sequence needs at least two levels")
    if levels != list(range(levels[0], levels[-1] + 1)):
        raise ConfigError("Sequence levels must be consecutive")


def solve_sequence(config: ExperimentConfig.Meta.Dict) -> RunResult:
    family = family_of(config)
    levels = list(config["levels"])
    _check_levels(levels)
    k = wavenumber_of(config)
    data = data_of(config)
    settings = settings_of(config)
    directory = _output_dir(config)
    dumped: List[Path] = []

    def dump(record: LevelRecord, solution: Solution) -> None:
        if config["dump_matrices"]:
            stem = f"{config['name']}-j{record.level}-matrix"
            dumped.extend(report.dump_matrix(directory, stem, solution.system))

    sequence: ConvergenceReport
    if config["bc"] == "dirichlet":
        if family not in DECREASING_FAMILIES:
            raise ConfigError(
                f"Dirichlet sequences run on decreasing families, not {family.value}"
            )
        sequence = solve_decreasing_sequence(
            family,
            levels[-1],
            data,
            k,
            alpha=config.get("alpha"),
            settings=settings,
            j_min=levels[0],
            on_solution=dump,
        )
    else:
        if family is not Family.SIERPINSKI_COMPLEMENT:
            raise ConfigError(
                f"Neumann sequences run on sierpinski_complement, not {family.value}"
            )
        sequence = solve_increasing_sequence(
            levels[-1],
            data,
            k,
            settings=settings,
            j_min=levels[0],
            full_screen=config["full_screen"],
            on_solution=dump,
        )

    result = _finish(
        config,
        "solve-sequence",
        sequence.to_dict(),
        columns=list(ConvergenceReport.CSV_COLUMNS),
        rows=sequence.csv_rows(),
        extra_outputs=dumped,
    )
    result.verdict = sequence.trend.verdict
    return result


def capacity(config: ExperimentConfig.Meta.Dict) -> RunResult:
    if config["bc"] != "dirichlet":
        raise ConfigError("Capacity is defined through the Dirichlet problem")
    if wavenumber_of(config).k != REFERENCE_WAVENUMBER.k:
        raise ConfigError("Capacity needs k = i")
    rule = quadrature_of(config)
    refines = list(config["refines"]) or [config["refine"]]

    rows: List[List[Any]] = []
    levels = []
    for level in config["levels"]:
        screen = screen_for(config, level)
        if not screen.panels:
            raise ConfigError(f"Level {level} has no panels")
        # P0 dofs are the elements.
        cap = min(config["element_cap"], config["dof_cap"])
        records = capacity_sweep(screen, refines, rule, cap)
        for record in records:
            rows.append(
                [
                    level,
                    record.refine,
                    record.dofs,
                    record.capacity,
                    record.energy,
                    record.identity_gap,
                ]
            )
        levels.append(
            {
                "level": level,
                "screen_index": screen.dust_index,
                "records": [r.to_dict() for r in records],
            }
        )
    return _finish(
        config,
        "capacity",
        {"levels": levels},
        columns=["j", "refine", "dofs", "capacity", "energy", "identity_gap"],
        rows=rows,
    )


def predict(config: ExperimentConfig.Meta.Dict) -> Dict[str, Any]:
    family = family_of(config)
    level = max(1, config["levels"][0])
    spec = PrefractalSpec(family, level, config.get("alpha"))
    document = similarity_dimension(spec).to_dict()
    document["family"] = family.value
    if config.get("alpha") is not None:
        document["alpha"] = str(config["alpha"])
    return document


def norms(config: ExperimentConfig.Meta.Dict) -> RunResult:
    """
    Energy norm and Fourier H^s norm of the solution on every requested
    level, for the boundary condition in the config.
    """
    k = wavenumber_of(config)
    data = data_of(config)
    rule = quadrature_of(config)
    spec = hs_spec_of(config)
    kind = SpaceKind.P0_JUMP if config["bc"] == "dirichlet" else SpaceKind.P1_ZERO_TRACE

    rows: List[List[Any]] = []
    levels = []
    for level in config["levels"]:
        screen = screen_for(config, level)
        mesh = mesh_panels(screen, config["refine"], element_cap=config["element_cap"])
        space = build_space(mesh, kind, screen)
        if space.dof_count > config["dof_cap"]:
            raise CapacityError(
                f"Level {level} has {space.dof_count} dofs, above the cap of "
                f"{config['dof_cap']}"
            )
        solution = solve(assemble_system(space, data, k, rule, with_constants=False))
        measured = hs_norm(space, solution.coefficients, spec)
        rows.append(
            [
                level,
                space.dof_count,
                solution.energy_norm,
                measured.value,
                measured.tail_bound,
                measured.extrapolated,
            ]
        )
        levels.append(
            {
                "level": level,
                "dofs": space.dof_count,
                "energy_norm": solution.energy_norm,
                "hs_norm": measured.to_dict(),
            }
        )
    return _finish(
        config,
        "norms",
        {"levels": levels},
        columns=["j", "dofs", "energy_norm", "hs_value", "hs_tail", "hs_extrapolated"],
        rows=rows,
    )
