from pathlib import Path
from typing import Any, Dict

import pytest
from click.testing import CliRunner
from pytest_mock import MockFixture

from screen_bie.bie.data import BoundaryData
from screen_bie.bie.quadrature import QuadratureRule
from screen_bie.discretisation.mesh import Mesh, mesh_panels
from screen_bie.discretisation.spaces import FunctionSpace, SpaceKind, build_space
from screen_bie.geometry.prefractals import PanelSet, unit_square


def pytest_report_header(config: Any) -> str:
    return "screen-bie: slow acceptance runs are marked 'slow'"


@pytest.fixture
def square() -> PanelSet:
    return unit_square()


@pytest.fixture
def square_mesh(square: PanelSet) -> Mesh:
    return mesh_panels(square, refine=1)


@pytest.fixture
def fine_square_mesh(square: PanelSet) -> Mesh:
    return mesh_panels(square, refine=2)


@pytest.fixture
def p0_space(square: PanelSet, square_mesh: Mesh) -> FunctionSpace:
    return build_space(square_mesh, SpaceKind.P0_JUMP, square)


@pytest.fixture
def p1_space(square: PanelSet, fine_square_mesh: Mesh) -> FunctionSpace:
    return build_space(fine_square_mesh, SpaceKind.P1_ZERO_TRACE, square)


@pytest.fixture
def unit_data() -> BoundaryData:
    return BoundaryData.constant()


@pytest.fixture
def rule() -> QuadratureRule:
    return QuadratureRule()


@pytest.fixture
def output_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    monkeypatch.delenv("SCREEN_BIE_OUTPUT_DIR", raising=False)
    return tmp_path / "output"


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def base_config(output_dir: Path) -> Dict[str, Any]:
    return {
        "name": "unit",
        "family": "cantor_dust",
        "alpha": "1/3",
        "levels": [1, 2],
        "refine": 0,
        "output_dir": str(output_dir),
    }


@pytest.fixture
def quiet_solver(mocker: MockFixture) -> None:
    """Skip the continuity/coercivity eigenproblems in tests that do not need them."""
    mocker.patch(
        "screen_bie.bie.assembly.discrete_constants", return_value=(1.0, 1.0)
    )
