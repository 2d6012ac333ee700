import json
from pathlib import Path
from typing import Any, Dict

import pytest
from click.testing import CliRunner
from pytest_mock import MockFixture

from screen_bie.experiments.controller import RunResult
from screen_bie.helpers.cli import _int_list, cli
from screen_bie.variational.verdict import Verdict


class TestCli:
    @pytest.mark.parametrize(
        ["value", "expected"],
        [("1-4", [1, 2, 3, 4]), ("1,3", [1, 3]), ("2", [2]), (None, None)],
    )
    def test_int_list(self, mocker: MockFixture, value: str, expected: Any) -> None:
        assert _int_list(mocker.Mock(), mocker.Mock(), value) == expected

    def test_predict(self, runner: CliRunner, output_dir: Path) -> None:
        result = runner.invoke(cli, ["predict", "--alpha", "0.2"])
        assert result.exit_code == 0
        document = json.loads(result.stdout)
        assert document["prediction"] == "Null"
        assert document["alpha"] == "1/5"

    @pytest.mark.parametrize(
        "arguments",
        [
            ["predict", "--alpha", "0.6"],
            ["predict", "--levels", "3,2"],
            ["capacity", "--alpha", "1/3", "--bc", "neumann"],
            ["capacity", "--alpha", "1/3", "--k-re", "1.0"],
        ],
    )
    def test_configuration_errors(
        self, runner: CliRunner, output_dir: Path, arguments: list
    ) -> None:
        result = runner.invoke(cli, arguments + ["--output-dir", str(output_dir)])
        assert result.exit_code == 2

    def test_generate(self, runner: CliRunner, output_dir: Path) -> None:
        result = runner.invoke(
            cli,
            [
                "generate",
                "--family",
                "sierpinski_gasket",
                "--levels",
                "0-2",
                "--name",
                "gasket",
                "--output-dir",
                str(output_dir),
            ],
        )
        assert result.exit_code == 0
        geometry = json.loads((output_dir / "gasket-j2.geometry.json").read_text())
        assert len(geometry["panels"]) == 9
        assert (output_dir / "gasket-j0-r0.mesh.json").exists()
        assert (output_dir / "gasket.meta.json").exists()

    def test_element_cap(self, runner: CliRunner, output_dir: Path) -> None:
        result = runner.invoke(
            cli,
            [
                "generate",
                "--alpha",
                "1/3",
                "--levels",
                "2",
                "--element-cap",
                "4",
                "--output-dir",
                str(output_dir),
            ],
        )
        assert result.exit_code == 4

    def test_config_file(
        self, runner: CliRunner, tmp_path: Path, base_config: Dict[str, Any]
    ) -> None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps({**base_config, "data": {"value": 0.0}}))
        result = runner.invoke(cli, ["solve-sequence", "--config", str(path)])
        assert result.exit_code == 0
        document = json.loads((Path(base_config["output_dir"]) / "unit.json").read_text())
        assert document["result"]["trend"]["verdict"] == "ConvergesToZero"
        assert document["config"]["data"]["value"] == 0.0

    @pytest.mark.parametrize(
        ["verdict", "code"],
        [
            (Verdict.CONVERGES_TO_ZERO, 0),
            (Verdict.CONVERGES_TO_NONZERO, 0),
            (Verdict.INCONCLUSIVE, 3),
            (None, 3),
        ],
    )
    def test_solve_sequence_exit_codes(
        self,
        runner: CliRunner,
        mocker: MockFixture,
        output_dir: Path,
        verdict: Verdict,
        code: int,
    ) -> None:
        mock_solve = mocker.patch(
            "screen_bie.experiments.controller.solve_sequence",
            return_value=RunResult("solve-sequence", {}, [], verdict),
        )
        result = runner.invoke(
            cli, ["solve-sequence", "--alpha", "1/3", "--output-dir", str(output_dir)]
        )
        assert result.exit_code == code
        config = mock_solve.call_args[0][0]
        assert config["command"] == "solve-sequence"
        assert config["output_dir"] == str(output_dir)

    def test_unexpected_error(
        self, runner: CliRunner, mocker: MockFixture, output_dir: Path
    ) -> None:
        mocker.patch(
            "screen_bie.experiments.controller.capacity",
            side_effect=RuntimeError("boom"),
        )
        result = runner.invoke(cli, ["capacity", "--alpha", "1/3"])
        assert result.exit_code == 1

    def test_version(self, runner: CliRunner) -> None:
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "1.0.0" in result.output
