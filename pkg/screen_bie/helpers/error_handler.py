import json
import sys
from typing import Dict, Tuple, Type

import click
from marshmallow import ValidationError
from she_logging import logger

from screen_bie.helpers.errors import (
    CapacityError,
    ConfigError,
    DomainError,
    EmptySpaceError,
    QuadratureFailure,
    SingularEvaluation,
    SingularMatrix,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_NUMERIC = 4

EXIT_CODES: Tuple[Tuple[Type[BaseException], int], ...] = (
    (ConfigError, EXIT_CONFIG),
    (DomainError, EXIT_CONFIG),
    (ValidationError, EXIT_CONFIG),
    (SingularMatrix, EXIT_NUMERIC),
    (QuadratureFailure, EXIT_NUMERIC),
    (CapacityError, EXIT_NUMERIC),
    (EmptySpaceError, EXIT_NUMERIC),
    (SingularEvaluation, EXIT_NUMERIC),
)


def exit_code_for(error: BaseException) -> int:
    for error_type, code in EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return EXIT_FAILURE


def error_document(error: BaseException) -> Dict[str, object]:
    return {
        "error": type(error).__name__,
        "message": str(error),
        "exit_code": exit_code_for(error),
    }


def handle_error(error: BaseException) -> int:
    """Report an exception as JSON on stderr and return the exit code for it."""
    code = exit_code_for(error)
    document = error_document(error)
    # "message" is reserved on log records.
    context = {"error": document["error"], "detail": str(error), "exit_code": code}
    if code == EXIT_FAILURE:
        logger.exception("Unexpected error", extra=context)
    else:
        logger.warning("Run failed", extra=context)
    click.echo(json.dumps(document, sort_keys=True), file=sys.stderr)
    return code
