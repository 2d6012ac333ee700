import json
from pathlib import Path
from typing import Any, Dict, Optional

from environs import Env
from marshmallow import ValidationError
from she_logging import logger

from screen_bie.helpers.errors import ConfigError
from screen_bie.models.api_spec import ExperimentConfig

OUTPUT_DIR_VARIABLE = "SCREEN_BIE_OUTPUT_DIR"


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        document = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"Cannot read config file {path}: {error}") from error
    if not isinstance(document, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object")
    return document


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """
    Flags win over the file. Nested objects are merged key by key; None means
    the flag was not given.
    """
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            base_value = merged.get(key)
            nested = merge_overrides(base_value if isinstance(base_value, dict) else {}, value)
            if nested:
                merged[key] = nested
        else:
            merged[key] = value
    return merged


def load_config(
    path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig.Meta.Dict:
    document = merge_overrides(read_config_file(path), overrides or {})
    output_dir: Optional[str] = Env().str(OUTPUT_DIR_VARIABLE, None)
    if output_dir:
        document["output_dir"] = output_dir
    try:
        config: ExperimentConfig.Meta.Dict = ExperimentConfig().load(document)
    except ValidationError as error:
        raise ConfigError(json.dumps(error.messages, sort_keys=True)) from error
    logger.debug("Loaded config", extra={"config": ExperimentConfig().dump(config)})
    return config
