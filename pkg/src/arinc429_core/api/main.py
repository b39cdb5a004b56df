from fastapi import APIRouter

from arinc429_core.api.routes import codec
from arinc429_core.api.routes import core
from arinc429_core.api.routes import debug
from arinc429_core.api.routes import simulate

api_router = APIRouter()
api_router.include_router(codec.router)
api_router.include_router(core.router)
api_router.include_router(simulate.router)
api_router.include_router(debug.router)
