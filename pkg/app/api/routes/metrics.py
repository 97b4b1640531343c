from typing import Any, Dict, List, Literal, Optional

from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, Field

from app.api.routes.dependencies import build_config, json_safe
from app.models.models import ModeAssignment
from app.services import metrics
from app.services.power import alternating_optimization, npc_allocation
from app.services.selection import greedy_select, random_select
from app.services.streams import RandomStreams
from app.services.topology import place_network
from app.utils.logging import monitor_function

router = APIRouter(prefix="/api/metrics", tags=["metrics"])


class EvaluateRequest(BaseModel):
    seed: int = 0
    drop: int = Field(default=0, ge=0)
    overrides: Dict[str, Any] = Field(default_factory=dict)
    selection: Literal["greedy", "random", "explicit"] = "greedy"
    com_aps: Optional[List[int]] = None
    power: Literal["npc", "opc"] = "npc"


@router.post("/evaluate")
@monitor_function("api.metrics.evaluate")
def evaluate_drop(request: EvaluateRequest):
    """Place one drop, select AP modes, allocate power and report SINR, SE, MASR and the audit"""
    config = build_config(request.overrides, seed=request.seed)
    streams = RandomStreams(config.seed)
    net = place_network(
        config,
        streams.generator("placement", request.drop),
        shadow_rng=streams.generator("shadowing", request.drop),
    )

    trace = []
    if request.selection == "explicit":
        if request.com_aps is None:
            raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="explicit selection needs com_aps")
        if any(m < 0 or m >= net.M for m in request.com_aps):
            raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"com_aps must lie in [0, {net.M})")
        assignment = ModeAssignment.from_indices(net.M, request.com_aps)
    elif request.selection == "greedy":
        outcome = greedy_select(net, config)
        assignment = outcome.assignment
        trace = [{"ap": step.ap, "min_sinr": step.min_sinr, "committed": step.committed} for step in outcome.trace]
    else:
        assignment = random_select(net, config, streams.generator("selection", request.drop)).assignment

    power_status = "npc"
    if request.power == "opc" and assignment.com_indices.size:
        result = alternating_optimization(net, assignment, config)
        allocation = result.allocation
        power_status = result.status
    else:
        allocation = npc_allocation(net, assignment, config)

    report = metrics.evaluate(net, assignment, allocation, config)
    audit = metrics.audit_allocation(net, assignment, allocation, config)

    return json_safe({
        "assignment": assignment.a.tolist(),
        "com_aps": assignment.com_indices.tolist(),
        "power_status": power_status,
        "report": report.to_dict(),
        "audit": {
            "ok": audit.ok,
            "masr_slack": audit.masr_slack,
            "violations": list(audit.violations),
        },
        "greedy_trace": trace,
    })
