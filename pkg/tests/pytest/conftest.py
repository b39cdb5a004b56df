from collections.abc import Callable
from collections.abc import Sequence

import pytest

from arinc429_core.bus_core import Core429
from arinc429_core.bus_core import Register
from arinc429_core.bus_core import encode_address
from arinc429_core.constants import BitRate
from arinc429_core.core.config import BusConfig
from arinc429_core.core.config import SimulationConfig
from arinc429_core.core.config import WireConfig

type ScriptBuilder = Callable[..., str]


@pytest.fixture
def core() -> Core429:
    return Core429(BusConfig())


@pytest.fixture
def loopback_config() -> SimulationConfig:
    return SimulationConfig(wires=[WireConfig(tx_ref=0, rx_refs=[0])])


@pytest.fixture
def loopback_script() -> ScriptBuilder:
    """Script that enables an Rx, waits out one Low-rate gap so it is synced, queues words, then enables the Tx."""

    def build(
        words: Sequence[int],
        *,
        tx: int = 0,
        rx: int = 0,
        tx_control: int = 0x01,
        rx_control: int = 0x01,
        extra: Sequence[str] = (),
    ) -> str:
        lines = [
            f"WRITE {encode_address(rx, Register.RX_CONTROL):#05x} {rx_control:#04x}",
            f"WAIT {BitRate.LOW.gap_ns}",
        ]
        lines += [f"WRITE {encode_address(tx, Register.TX_FIFO):#05x} {word:#010x}" for word in words]
        lines.append(f"WRITE {encode_address(tx, Register.TX_CONTROL):#05x} {tx_control:#04x}")
        lines += extra
        return "\n".join(lines) + "\n"

    return build
