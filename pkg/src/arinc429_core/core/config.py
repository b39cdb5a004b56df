import logging
from functools import lru_cache
from typing import Annotated
from typing import Literal
from typing import Self

from pydantic import BaseModel
from pydantic import Field
from pydantic import model_validator
from pydantic_settings import BaseSettings
from pydantic_settings import PydanticBaseSettingsSource
from pydantic_settings import SettingsConfigDict
from pydantic_settings import TomlConfigSettingsSource

from arinc429_core.constants import MAX_CHANNELS
from arinc429_core.constants import WORD_BITS

logger = logging.getLogger(__name__)


class TopologyError(ValueError):
    pass


CpuDataWidth = Literal[8, 16, 32]
CPU_DATA_WIDTHS: tuple[CpuDataWidth, ...] = (8, 16, 32)


class BusConfig(BaseModel):
    cpu_data_width: CpuDataWidth = 32
    num_channels: int = Field(default=MAX_CHANNELS, ge=1, le=MAX_CHANNELS)


class _FaultBase(BaseModel):
    wire: int = Field(default=0, ge=0)
    at_ns: int = Field(default=0, ge=0)
    # 0-based count of words dequeued by the wire's transmitter. None targets the
    # first word starting at or after at_ns.
    word_index: int | None = Field(default=None, ge=0)


class FlipBit(_FaultBase):
    kind: Literal["flip_bit"] = "flip_bit"
    bit: int = Field(ge=1, le=WORD_BITS)


class TruncateWord(_FaultBase):
    kind: Literal["truncate_word"] = "truncate_word"
    after_bits: int = Field(ge=0, lt=WORD_BITS)


class GapViolation(_FaultBase):
    kind: Literal["gap_violation"] = "gap_violation"
    shrink_to_bit_times: int = Field(ge=0, le=3)


Fault = Annotated[FlipBit | TruncateWord | GapViolation, Field(discriminator="kind")]


class FaultPlan(BaseModel):
    faults: list[Fault] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_order(self) -> Self:
        times = [fault.at_ns for fault in self.faults]
        if times != sorted(times):
            msg = "fault timestamps must be non-decreasing"
            raise ValueError(msg)
        return self


class WireConfig(BaseModel):
    tx_ref: int = Field(ge=0, lt=MAX_CHANNELS)
    rx_refs: list[int] = Field(default_factory=list)
    # Extra transmitters coupled onto this wire, used to stage collisions.
    crosstalk_refs: list[int] = Field(default_factory=list)


class SimulationConfig(BaseModel):
    bus: BusConfig = Field(default_factory=BusConfig)
    wires: list[WireConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_topology(self) -> Self:
        limit = self.bus.num_channels
        drivers: set[int] = set()
        listeners: set[int] = set()
        for number, wire in enumerate(self.wires):
            refs = [wire.tx_ref, *wire.rx_refs, *wire.crosstalk_refs]
            if any(not 0 <= ref < limit for ref in refs):
                msg = f"wire {number} references a channel outside 0..{limit - 1}"
                raise TopologyError(msg)
            if wire.tx_ref in drivers:
                msg = f"wire {number}: tx{wire.tx_ref} already drives another wire"
                raise TopologyError(msg)
            if wire.tx_ref in wire.crosstalk_refs:
                msg = f"wire {number}: tx{wire.tx_ref} listed as its own crosstalk source"
                raise TopologyError(msg)
            drivers.add(wire.tx_ref)
            for rx in wire.rx_refs:
                if rx in listeners:
                    msg = f"wire {number}: rx{rx} already listens to another wire"
                    raise TopologyError(msg)
                listeners.add(rx)
        return self


class Settings(BaseSettings):
    log_level: str = "INFO"
    # Bus shape of the virtual core served over HTTP.
    default_bus: BusConfig = Field(default_factory=BusConfig)
    selftest_seed: int = 429
    selftest_samples: int = 2000
    report_indent: int = 2

    model_config = SettingsConfigDict(
        toml_file="./config.toml",
        env_prefix="ARINC429_",
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            TomlConfigSettingsSource(settings_cls),
            env_settings,
            dotenv_settings,
            file_secret_settings,
            init_settings,
        )


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
