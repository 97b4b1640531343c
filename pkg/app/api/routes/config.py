from fastapi import APIRouter

from app.api.routes.dependencies import json_safe
from app.models.config import PAPER_SCALE, SystemConfig

router = APIRouter(prefix="/api/config", tags=["config"])


@router.get("/defaults")
def get_defaults():
    """Default scenario, including the derived rho, rho_t and tau_t"""
    return {
        "config": json_safe(SystemConfig().model_dump()),
        "paper_scale": PAPER_SCALE,
    }
