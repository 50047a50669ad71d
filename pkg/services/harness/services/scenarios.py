"""
Scenario file loading
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Union

import pydantic
import structlog

from services.errors import ParseError, ValidationError
from services.harness.schemas.scenario import ScenarioConfig

logger = structlog.get_logger(__name__)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
SCENARIO_SUFFIX = ".scenario"


def bundled_scenario(name: str) -> Path:
    return SCENARIO_DIR / f"{name}{SCENARIO_SUFFIX}"


def parse_scenario(text: str, name: str = "scenario") -> ScenarioConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        # the message carries "(at line L, column C)"
        raise ParseError(f"{name}: {e}", {"source": name})
    data.setdefault("name", name)
    try:
        return ScenarioConfig.model_validate(data)
    except pydantic.ValidationError as e:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]) or "<root>", "message": err["msg"]}
            for err in e.errors()
        ]
        first = errors[0]
        raise ValidationError(f"{name}: {first['field']}: {first['message']}", {"errors": errors})


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read scenario {path}: {e.strerror}", {"path": str(path)})
    config = parse_scenario(text, name=path.stem)
    logger.info("scenario_loaded", name=config.name, fingerprint=config.fingerprint())
    return config
