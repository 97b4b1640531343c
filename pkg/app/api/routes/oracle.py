from typing import Any, Dict

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.routes.dependencies import build_config, check_trials, json_safe
from app.services.oracle import MIN_TRIALS, random_instance, verify_instance
from app.services.streams import RandomStreams
from app.utils.logging import monitor_function

router = APIRouter(prefix="/api/oracle", tags=["oracle"])


class VerifyRequest(BaseModel):
    seed: int = 0
    drop: int = Field(default=0, ge=0)
    trials: int = Field(default=5000, ge=MIN_TRIALS)
    tolerance: float = Field(default=0.03, gt=0)
    overrides: Dict[str, Any] = Field(default_factory=dict)


@router.post("/verify")
@monitor_function("api.oracle.verify")
def verify(request: VerifyRequest):
    """Closed-form SINR terms and power pattern against Monte Carlo on one mixed-mode drop"""
    check_trials(request.trials)
    config = build_config(request.overrides, seed=request.seed)
    rng = RandomStreams(config.seed).generator("oracle", request.drop)
    net, assignment, allocation = random_instance(config, rng)
    report = verify_instance(net, assignment, allocation, config, request.trials, rng, request.tolerance)
    name, worst = report.worst

    return json_safe({
        "com_aps": assignment.com_indices.tolist(),
        "trials": report.trials,
        "tolerance": report.tolerance,
        "passed": report.passed,
        "worst": {"name": name, "relative_error": worst},
        "relative_errors": report.relative_errors,
    })
