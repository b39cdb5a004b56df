from fastapi import APIRouter
from pydantic import BaseModel

from arinc429_core.api.deps import CoreDep
from arinc429_core.core.config import Settings
from arinc429_core.core.config import settings

router = APIRouter(prefix="/debug", tags=["debug"])


class TransferState(BaseModel):
    kind: str
    address: int
    beats: int
    done: int


class CoreState(BaseModel):
    cpu_data_width: int
    num_channels: int
    busy_tx: list[int]
    pending_transfer: TransferState | None


@router.get("/state")
async def get_state(core: CoreDep) -> CoreState:
    """Bus shape, transmitters with a word on the wire and any half-finished access."""
    transfer = core.pending_transfer
    pending = None
    if transfer is not None:
        pending = TransferState(
            kind=transfer.kind.value,
            address=transfer.address,
            beats=transfer.beats,
            done=transfer.done,
        )
    return CoreState(
        cpu_data_width=core.width,
        num_channels=core.config.num_channels,
        busy_tx=[tx.index for tx in core.tx if tx.busy],
        pending_transfer=pending,
    )


@router.get("/settings")
async def get_settings() -> Settings:
    return settings
