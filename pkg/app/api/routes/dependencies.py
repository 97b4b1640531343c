import math
from typing import Any, Dict

import numpy as np
from fastapi import HTTPException, status

from app.models.config import SystemConfig
from config.settings import settings


def build_config(overrides: Dict[str, Any], **fixed: Any) -> SystemConfig:
    """Default SystemConfig with request overrides; invalid values raise ConfigError (HTTP 422)"""
    data = dict(overrides)
    data.update(fixed)
    return SystemConfig(**data)


def check_drops(drops: int) -> int:
    if drops > settings.max_api_drops:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"drops={drops} exceeds the service limit of {settings.max_api_drops}",
        )
    return drops


def check_trials(trials: int) -> int:
    if trials > settings.max_api_trials:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail=f"trials={trials} exceeds the service limit of {settings.max_api_trials}",
        )
    return trials


def json_safe(value: Any) -> Any:
    """Arrays to lists, non-finite floats to the strings 'inf', '-inf' and 'nan'"""
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value
