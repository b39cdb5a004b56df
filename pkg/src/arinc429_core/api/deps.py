import logging
from functools import lru_cache
from typing import Annotated

from fastapi import Depends

from arinc429_core.bus_core import Core429
from arinc429_core.core.config import settings

logger = logging.getLogger(__name__)


@lru_cache
def get_core() -> Core429:
    """The virtual core shared by all /core requests."""
    logger.info(
        "virtual core: %d channels, %d-bit CPU bus",
        settings.default_bus.num_channels,
        settings.default_bus.cpu_data_width,
    )
    return Core429(settings.default_bus)


CoreDep = Annotated[Core429, Depends(get_core)]
