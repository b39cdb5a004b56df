import logging
from typing import Any

from fastapi import APIRouter
from fastapi import HTTPException
from fastapi import status
from pydantic import BaseModel
from pydantic import Field

from arinc429_core.core.config import FaultPlan
from arinc429_core.core.config import SimulationConfig
from arinc429_core.core.config import TopologyError
from arinc429_core.script import ScriptParseError
from arinc429_core.script import parse_script
from arinc429_core.simulator import SimulationAbortError
from arinc429_core.simulator import run_simulation

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/simulate", tags=["simulate"])


class SimulationRequest(BaseModel):
    config: SimulationConfig
    script: str = ""
    faults: FaultPlan = Field(default_factory=FaultPlan)


# Plain def: runs in the threadpool, each request owns its simulation.
@router.post("")
def simulate(request: SimulationRequest) -> dict[str, Any]:
    try:
        directives = parse_script(request.script)
    except ScriptParseError as e:
        detail = {"line": e.line, "column": e.column, "message": str(e)}
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=detail) from e
    try:
        report = run_simulation(request.config, directives, request.faults)
    except SimulationAbortError as e:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST, detail={"line": e.line, "message": e.reason}
        ) from e
    except TopologyError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from e
    return report.model_dump(mode="json")
