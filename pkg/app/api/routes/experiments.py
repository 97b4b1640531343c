from typing import Any, Dict

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.routes.dependencies import build_config, check_drops, json_safe
from app.models.models import Scheme
from app.services import harness
from app.utils.logging import monitor_function
from config.settings import settings

router = APIRouter(prefix="/api/experiments", tags=["experiments"])


class ExperimentRequest(BaseModel):
    scheme: Scheme = Scheme.GAP_NPC
    drops: int = Field(default=5, ge=1)
    seed: int = 0
    overrides: Dict[str, Any] = Field(default_factory=dict)


@router.post("/run")
@monitor_function("api.experiments.run")
def run_small_experiment(request: ExperimentRequest):
    check_drops(request.drops)
    config = build_config(request.overrides, seed=request.seed, drops=request.drops)
    result = harness.run_experiment(config, request.scheme, threads=settings.threads)

    return json_safe({
        "summary": harness.summarize(result),
        "cdf": [{"min_se_bits_per_hz": value, "empirical_cdf": p} for value, p in harness.empirical_cdf(result.samples)],
        "drops": [
            {
                "drop": record.drop,
                "min_se": record.min_se,
                "masr": record.masr,
                "feasible": record.feasible,
                "failed": record.failed,
                "com_aps": record.com_aps,
                "error": record.error,
            }
            for record in result.drops
        ],
        "wall_time": result.wall_time,
    })
