"""A live virtual Core429 driven one bus beat at a time."""

import logging
from typing import Annotated
from typing import Any

from fastapi import APIRouter
from fastapi import HTTPException
from fastapi import Query
from fastapi import status
from pydantic import BaseModel
from pydantic import Field

from arinc429_core.api.deps import CoreDep
from arinc429_core.bus_core import ADDRESS_LIMIT
from arinc429_core.bus_core import AccessKind
from arinc429_core.bus_core import AccessOutcome
from arinc429_core.bus_core import BusTransaction
from arinc429_core.bus_core import UnmappedAddressError
from arinc429_core.core.config import BusConfig
from arinc429_core.core.config import settings
from arinc429_core.word_codec import WORD_MASK

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/core", tags=["core"])


class AccessRequest(BaseModel):
    kind: AccessKind
    address: int = Field(ge=0, lt=ADDRESS_LIMIT)
    data: int = Field(default=0, ge=0, le=WORD_MASK)


class AccessResponse(BaseModel):
    data: int | None
    wait_beats: int
    outcome: AccessOutcome


class StartedSpan(BaseModel):
    duration_ns: int
    level: str


class InterruptLines(BaseModel):
    int_out_rx: bool
    int_out_tx: bool
    int_out: bool


@router.post("/access")
async def access(request: AccessRequest, core: CoreDep) -> AccessResponse:
    """One CPU bus beat. ``wait_beats`` > 0 means the register needs more beats."""
    try:
        result = core.cpu_access(BusTransaction(request.kind, request.address, request.data))
    except UnmappedAddressError as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e)) from e
    return AccessResponse(data=result.data, wait_beats=result.wait_beats, outcome=result.outcome)


@router.post("/tick")
async def tick(now_ns: Annotated[int, Query(ge=0)], core: CoreDep) -> dict[int, StartedSpan]:
    """Advance the transmitters to ``now_ns``; returns the spans that start there, by channel."""
    try:
        started = core.core_tick(now_ns)
    except ValueError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from e
    return {ch: StartedSpan(duration_ns=span.duration_ns, level=span.level.symbol) for ch, span in started.items()}


@router.get("/interrupts")
async def interrupts(core: CoreDep) -> InterruptLines:
    state = core.aggregate_interrupts()
    return InterruptLines(int_out_rx=state.int_out_rx, int_out_tx=state.int_out_tx, int_out=state.int_out)


@router.get("/snapshot")
async def snapshot(core: CoreDep) -> dict[str, Any]:
    return core.snapshot()


@router.post("/reset")
async def reset(core: CoreDep, bus: BusConfig | None = None) -> dict[str, Any]:
    core.reset(bus or settings.default_bus)
    logger.info("virtual core reset: %d channels, %d-bit CPU bus", core.config.num_channels, core.width)
    return core.snapshot()
