import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from app.core.exceptions import ConfigValidationError
from app.models.config import ExperimentConfig

# Configure logging
logger = logging.getLogger(__name__)

COMMANDS = ("mse-sweep", "rate-sweep", "optimize")


@dataclass(frozen=True)
class Preset:
    name: str
    command: str
    config: ExperimentConfig

    @property
    def description(self) -> str:
        return self.config.description


def _preset_root():
    return resources.files("app") / "presets"


def _split_command(data: Dict[str, Any], source: str) -> Tuple[Optional[str], Dict[str, Any]]:
    data = dict(data)
    command = data.pop("command", None)
    if command is not None and command not in COMMANDS:
        raise ConfigValidationError(
            f"Unknown command '{command}' in {source} (expected one of: {', '.join(COMMANDS)})",
            key="command",
        )
    return command, data


def _read_json(text: str, source: str) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"{source} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigValidationError(f"{source} must contain a JSON object")
    return data


def preset_names() -> List[str]:
    return sorted(
        entry.name[: -len(".json")]
        for entry in _preset_root().iterdir()
        if entry.name.endswith(".json")
    )


def load_preset(name: str) -> Preset:
    entry = _preset_root() / f"{name}.json"
    if not entry.is_file():
        raise ConfigValidationError(
            f"Unknown preset '{name}' (available: {', '.join(preset_names())})", key="preset"
        )
    command, data = _split_command(_read_json(entry.read_text(encoding="utf-8"), name), name)
    return Preset(name=name, command=command or "", config=ExperimentConfig.from_mapping(data))


def list_presets() -> List[Preset]:
    return [load_preset(name) for name in preset_names()]


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read an experiment config file; a ``command`` key, if present, is ignored."""
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigValidationError(f"Cannot read config file {source}: {e}") from e
    _, data = _split_command(_read_json(text, str(source)), str(source))
    return ExperimentConfig.from_mapping(data)


def resolve_config(
    preset: Optional[str] = None,
    config_path: Optional[Union[str, Path]] = None,
    **overrides: Any,
) -> ExperimentConfig:
    """Preset, then config file, then explicit overrides; ``None`` overrides are skipped."""
    if preset is not None and config_path is not None:
        raise ConfigValidationError("Use either a preset or a config file, not both", key="preset")
    if preset is not None:
        config = load_preset(preset).config
    elif config_path is not None:
        config = load_config(config_path)
    else:
        config = ExperimentConfig()
    updates = {key: value for key, value in overrides.items() if value is not None}
    if updates:
        logger.debug(f"Applying overrides: {updates}")
        config = config.with_updates(**updates)
    return config
