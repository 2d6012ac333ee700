import json

import pytest
from marshmallow import ValidationError
from pytest_mock import MockFixture

from screen_bie.helpers.error_handler import error_document, exit_code_for, handle_error
from screen_bie.helpers.errors import (
    CapacityError,
    ConfigError,
    DomainError,
    EmptySpaceError,
    QuadratureFailure,
    SingularEvaluation,
    SingularMatrix,
)


class TestErrorHandler:
    @pytest.mark.parametrize(
        ["error", "code"],
        [
            (ConfigError("bad"), 2),
            (DomainError("bad"), 2),
            (ValidationError("bad"), 2),
            (SingularMatrix(1e17), 4),
            (QuadratureFailure("singular", 1e-3), 4),
            (CapacityError("big"), 4),
            (EmptySpaceError("none"), 4),
            (SingularEvaluation("x = y"), 4),
            (RuntimeError("boom"), 1),
        ],
    )
    def test_exit_codes(self, error: BaseException, code: int) -> None:
        assert exit_code_for(error) == code

    def test_document(self) -> None:
        assert error_document(SingularMatrix(1e17)) == {
            "error": "SingularMatrix",
            "message": "Galerkin matrix is numerically singular (condition 1e+17)",
            "exit_code": 4,
        }

    def test_handle_error(
        self, mocker: MockFixture, capsys: pytest.CaptureFixture
    ) -> None:
        mock_logger = mocker.patch("screen_bie.helpers.error_handler.logger")
        assert handle_error(ConfigError("no alpha")) == 2
        document = json.loads(capsys.readouterr().err)
        assert document["error"] == "ConfigError"
        assert document["message"] == "no alpha"
        mock_logger.warning.assert_called_once()
        assert "message" not in mock_logger.warning.call_args[1]["extra"]

    def test_unexpected_error_is_logged_with_trace(self, mocker: MockFixture) -> None:
        mock_logger = mocker.patch("screen_bie.helpers.error_handler.logger")
        assert handle_error(KeyError("x")) == 1
        mock_logger.exception.assert_called_once()
