"""Shared plumbing for CLI commands: state, config loading, game sources and output."""

from __future__ import annotations

import functools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, TypeVar

import click
from pydantic import BaseModel, ValidationError

from ..config import LabConfig
from ..errors import LabError
from ..facility import generate_from_spec, read_utility_csv
from ..models import FacilityGeneratorSpec, GameSourceConfig, GameSpec

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=BaseModel)


class UsageFailure(click.ClickException):
    """Bad flags, config or input files; exits with status 2."""

    exit_code = 2


@dataclass
class CliState:
    """Global flags shared by every subcommand."""

    seed: Optional[int]
    out: Optional[Path]
    fmt: Optional[str]
    config_path: Optional[Path]
    lab_config: LabConfig


def handle_errors(fn: Callable) -> Callable:
    """Map library, validation and file errors onto exit status 2."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            raise UsageFailure(f"Invalid configuration:\n{exc}") from exc
        except (LabError, ValueError) as exc:
            raise UsageFailure(str(exc)) from exc
        except OSError as exc:
            raise UsageFailure(f"{exc.strerror or exc}: {exc.filename}") from exc

    return wrapper


def parse_list(text: Optional[str], item: Callable[[str], Any] = str) -> Optional[list]:
    """Split a comma-separated flag value; ``None`` when the flag was not given."""
    if text is None:
        return None
    try:
        return [item(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageFailure(f"Could not parse list {text!r}") from None


def parse_schemes(text: Optional[str]) -> Optional[list[str]]:
    """Split scheme names on ``;`` when any is ``custom:...``, else on commas."""
    if text is None:
        return None
    sep = ";" if "custom:" in text else ","
    return [part.strip() for part in text.split(sep) if part.strip()]


def load_config(state: CliState, model: type[ConfigT], **overrides: Any) -> ConfigT:
    """Build a command config: ``--config`` file, then global flags, then command flags."""
    data: dict[str, Any] = {}
    if state.config_path is not None:
        if not state.config_path.is_file():
            raise UsageFailure(f"Config file not found: {state.config_path}")
        try:
            data = json.loads(state.config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageFailure(f"Config file {state.config_path} is not valid JSON: {exc}") from exc
    flags = {"seed": state.seed, "out": state.out, "format": state.fmt, **overrides}
    data.update({key: value for key, value in flags.items() if value is not None})
    return model.model_validate(data)


def load_game_spec(config: GameSourceConfig) -> GameSpec:
    """Game from ``config.game`` (JSON, or CSV utility matrix) or from the facility generator."""
    if config.game is not None:
        path = Path(config.game)
        if not path.is_file():
            raise UsageFailure(f"Game file not found: {path}")
        if path.suffix.lower() == ".csv":
            return read_utility_csv(path).to_spec()
        return GameSpec.from_file(path)
    generator = config.generator or FacilityGeneratorSpec()
    return generate_from_spec(generator, seed=config.seed).to_spec()


def emit(text: str, out: Optional[Path]) -> None:
    """Write the rendered result to ``out`` or stdout."""
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", out)
