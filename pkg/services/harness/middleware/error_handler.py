"""
Centralized error handling for CLI commands
"""

import functools
import json
import sys
from typing import Any, Callable, Dict

import click
import structlog

from services.errors import EntangleError, ParseError, ValidationError

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_DOMAIN = 2
EXIT_INVALID_INPUT = 3
EXIT_CHECK_FAILED = 4


class ErrorHandler:
    """Maps exceptions to a structured log line, an error record and an exit code"""

    @staticmethod
    def exit_code(exc: BaseException) -> int:
        if isinstance(exc, (ParseError, ValidationError)):
            return EXIT_INVALID_INPUT
        if isinstance(exc, EntangleError):
            return EXIT_DOMAIN
        return EXIT_UNEXPECTED

    @staticmethod
    def to_record(exc: BaseException) -> Dict[str, Any]:
        if isinstance(exc, EntangleError):
            return {"error": exc.to_dict()}
        return {"error": {"code": "internal_error", "message": "An unexpected error occurred",
                          "details": {"type": type(exc).__name__}}}

    @classmethod
    def handle(cls, exc: BaseException, command: str) -> int:
        code = cls.exit_code(exc)
        log = logger.bind(command=command, error_type=type(exc).__name__, exit_code=code)
        if code == EXIT_UNEXPECTED:
            log.exception("command_crashed", error=str(exc))
        else:
            log.error("command_failed", error=str(exc))
        click.echo(json.dumps(cls.to_record(exc), default=str), err=True)
        return code


def handle_errors(func: Callable[..., int]) -> Callable[..., None]:
    """Run a command body that returns an exit code; errors become exit codes too"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            code = func(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException):
            raise
        except Exception as exc:
            code = ErrorHandler.handle(exc, func.__name__)
        sys.exit(code or EXIT_OK)

    return wrapper
