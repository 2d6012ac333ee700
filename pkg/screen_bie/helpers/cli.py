from typing import Any, Callable, Dict, List, Optional, TypeVar

import click
from she_logging import logger

from screen_bie import __version__
from screen_bie.experiments import controller, report
from screen_bie.geometry.prefractals import Family
from screen_bie.helpers.config import load_config
from screen_bie.helpers.error_handler import (
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    handle_error,
)
from screen_bie.models.api_spec import ExperimentConfig
from screen_bie.variational.verdict import Verdict

F = TypeVar("F", bound=Callable[..., Any])


def _int_list(
    ctx: click.Context, param: click.Parameter, value: Optional[str]
) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        if "-" in value and "," not in value:
            first, last = (int(v) for v in value.split("-", 1))
            return list(range(first, last + 1))
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected 1,2,3 or 1-3, got {value!r}")


def experiment_options(function: F) -> F:
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False),
            help="JSON config file; flags override it.",
        ),
        click.option("--name", help="Stem of the output files."),
        click.option("--family", type=click.Choice([f.value for f in Family])),
        click.option("--alpha", help="Cantor dust ratio, e.g. 1/3 or 0.2."),
        click.option("--levels", callback=_int_list, help="Levels as 1,2,3 or 1-4."),
        click.option("--refine", type=int, help="Uniform refinements per panel."),
        click.option("--refines", callback=_int_list, help="Refine sweep."),
        click.option("--k-re", type=float, help="Real part of the wavenumber."),
        click.option("--k-im", type=float, help="Imaginary part of the wavenumber."),
        click.option("--bc", type=click.Choice(["dirichlet", "neumann"])),
        click.option("--data-kind", type=click.Choice(["const", "planewave", "poly"])),
        click.option("--data-value", type=float, help="Real data value."),
        click.option("--s", "hs_s", type=float, help="Sobolev order."),
        click.option("--radius", type=float, help="Fourier truncation radius."),
        click.option("--hs-diffs/--no-hs-diffs", default=None),
        click.option("--full-screen/--no-full-screen", default=None),
        click.option("--output-dir", type=click.Path(file_okay=False)),
        click.option("--dof-cap", type=int),
        click.option("--element-cap", type=int),
        click.option("--dump-matrices/--no-dump-matrices", default=None),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def overrides_from(options: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "name": options.get("name"),
        "family": options.get("family"),
        "alpha": options.get("alpha"),
        "levels": options.get("levels"),
        "refine": options.get("refine"),
        "refines": options.get("refines"),
        "wavenumber": {"re": options.get("k_re"), "im": options.get("k_im")},
        "bc": options.get("bc"),
        "data": {"kind": options.get("data_kind"), "value": options.get("data_value")},
        "hs_norm": {"s": options.get("hs_s"), "radius": options.get("radius")},
        "hs_diffs": options.get("hs_diffs"),
        "full_screen": options.get("full_screen"),
        "output_dir": options.get("output_dir"),
        "dof_cap": options.get("dof_cap"),
        "element_cap": options.get("element_cap"),
        "dump_matrices": options.get("dump_matrices"),
    }


def _configure(command: str, options: Dict[str, Any]) -> ExperimentConfig.Meta.Dict:
    overrides = overrides_from(options)
    overrides["command"] = command
    return load_config(options.get("config_path"), overrides)


def _run(
    command: str,
    options: Dict[str, Any],
    action: Callable[[ExperimentConfig.Meta.Dict], int],
) -> None:
    try:
        code = action(_configure(command, options))
    except Exception as error:
        code = handle_error(error)
    logger.debug("Command finished", extra={"command": command, "exit_code": code})
    raise SystemExit(code)


def _echo(document: Any) -> None:
    click.echo(report.to_json(document), nl=False)


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Galerkin boundary element experiments on prefractal screens."""


@cli.command("generate")
@experiment_options
def generate_command(**options: Any) -> None:
    """Write geometry and mesh JSON for each level."""

    def action(config: ExperimentConfig.Meta.Dict) -> int:
        result = controller.generate(config)
        _echo({"outputs": [str(p) for p in result.outputs]})
        return EXIT_OK

    _run("generate", options, action)


@cli.command("solve-sequence")
@experiment_options
def solve_sequence_command(**options: Any) -> None:
    """Solve a nested sequence of screens and decide the trend."""

    def action(config: ExperimentConfig.Meta.Dict) -> int:
        result = controller.solve_sequence(config)
        verdict = result.verdict or Verdict.INCONCLUSIVE
        _echo(
            {
                "verdict": verdict.value,
                "outputs": [str(p) for p in result.outputs],
            }
        )
        return EXIT_INCONCLUSIVE if verdict is Verdict.INCONCLUSIVE else EXIT_OK

    _run("solve-sequence", options, action)


@cli.command("capacity")
@experiment_options
def capacity_command(**options: Any) -> None:
    """Capacity of each level, optionally over a refine sweep (k = i only)."""

    def action(config: ExperimentConfig.Meta.Dict) -> int:
        result = controller.capacity(config)
        _echo(result.document["result"])
        return EXIT_OK

    _run("capacity", options, action)


@cli.command("predict")
@experiment_options
def predict_command(**options: Any) -> None:
    """Print the similarity dimension and the nullity prediction; no solve."""

    def action(config: ExperimentConfig.Meta.Dict) -> int:
        _echo(controller.predict(config))
        return EXIT_OK

    _run("predict", options, action)


@cli.command("norms")
@experiment_options
def norms_command(**options: Any) -> None:
    """Energy and Fourier Sobolev norms of the solution on each level."""

    def action(config: ExperimentConfig.Meta.Dict) -> int:
        result = controller.norms(config)
        _echo(result.document["result"])
        return EXIT_OK

    _run("norms", options, action)


def main() -> None:
    cli(prog_name="screen-bie")

