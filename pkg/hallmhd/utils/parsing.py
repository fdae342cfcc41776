import json
from pathlib import Path
import re

from pydantic import ValidationError

from hallmhd.errors import ConfigError
from hallmhd.models.plan import RunPlan


def parse_float_list(text: str) -> list[float]:
    """Parse a comma- or whitespace-separated list such as "8,12, 16 21" into floats."""
    items = [item for item in re.split(r"[,\s]+", text.strip()) if item]
    try:
        return [float(item) for item in items]
    except ValueError as error:
        raise ConfigError(f"Cannot parse number list {text!r}: {error}") from None


def describe_validation_error(error: ValidationError) -> str:
    """One line per problem, naming the offending key and the violated constraint."""
    lines = []
    for problem in error.errors():
        key = ".".join(str(part) for part in problem["loc"]) or "config"
        lines.append(f"{key}: {problem['msg']}")
    return "; ".join(lines)


def parse_config(path: Path | None = None, overrides: dict | None = None) -> RunPlan:
    """
    Build a RunPlan from a JSON key-value document merged with overrides.

    Overrides (typically CLI flags) win over file keys; None values are
    ignored so unset flags never mask the file.

    Raises:
        ConfigError: if the document cannot be read or the merged plan is invalid
    """
    document = {}
    if path is not None:
        try:
            document = json.loads(Path(path).read_text())
        except json.JSONDecodeError as error:
            raise ConfigError(f"{path}: not a valid JSON document ({error})") from None
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: expected a key-value document at the top level")

    merged = {**document, **{k: v for k, v in (overrides or {}).items() if v is not None}}
    try:
        return RunPlan.model_validate(merged)
    except ValidationError as error:
        raise ConfigError(describe_validation_error(error)) from None
