"""Core429 top level: channel array behind the CPU register interface.

The 9-bit CPU address splits into ``channel = address[8:5]`` and
``offset = address[4:0]``. Registers wider than the CPU data bus are moved in
little-endian beats; ``wait_beats`` on each access is the number of beats still
owed, which is how ``cpu_wait`` is modelled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from enum import IntEnum
from typing import Any

from arinc429_core.channel import RxChannel
from arinc429_core.channel import TxChannel
from arinc429_core.constants import ADDRESS_BITS
from arinc429_core.core.config import BusConfig
from arinc429_core.fifo import FifoLevelError
from arinc429_core.fifo import FifoOutcome
from arinc429_core.line_coding import Span
from arinc429_core.word_codec import WORD_MASK
from arinc429_core.word_codec import Arinc429Word
from arinc429_core.word_codec import format_label

logger = logging.getLogger(__name__)

OFFSET_BITS = 5
OFFSET_MASK = (1 << OFFSET_BITS) - 1
ADDRESS_LIMIT = 1 << ADDRESS_BITS


class Register(IntEnum):
    TX_CONTROL = 0x00
    TX_STATUS = 0x01
    TX_FIFO = 0x02
    RX_CONTROL = 0x03
    RX_STATUS = 0x04
    RX_FIFO = 0x05
    TX_FIFO_LEVEL = 0x06
    RX_FIFO_LEVEL = 0x07
    LABEL_INDEX = 0x08
    LABEL_ENABLE = 0x09


class Access(Enum):
    RW = "rw"
    RO = "ro"
    WO = "wo"


@dataclass(frozen=True, slots=True)
class RegisterInfo:
    register: Register
    access: Access
    width_bits: int

    @property
    def readable(self) -> bool:
        return self.access is not Access.WO

    @property
    def writable(self) -> bool:
        return self.access is not Access.RO


REGISTER_TABLE: dict[int, RegisterInfo] = {
    info.register: info
    for info in (
        RegisterInfo(Register.TX_CONTROL, Access.RW, 8),
        RegisterInfo(Register.TX_STATUS, Access.RO, 8),
        RegisterInfo(Register.TX_FIFO, Access.WO, 32),
        RegisterInfo(Register.RX_CONTROL, Access.RW, 8),
        RegisterInfo(Register.RX_STATUS, Access.RO, 8),
        RegisterInfo(Register.RX_FIFO, Access.RO, 32),
        RegisterInfo(Register.TX_FIFO_LEVEL, Access.RW, 16),
        RegisterInfo(Register.RX_FIFO_LEVEL, Access.RW, 16),
        RegisterInfo(Register.LABEL_INDEX, Access.RW, 8),
        RegisterInfo(Register.LABEL_ENABLE, Access.RW, 1),
    )
}


class UnmappedAddressError(LookupError):
    def __init__(self, address: int, channel: int, offset: int, reason: str) -> None:
        self.address = address
        self.channel = channel
        self.offset = offset
        super().__init__(f"address {address:#05x} (channel {channel}, offset {offset:#04x}): {reason}")


class AddressRangeError(ValueError):
    pass


def decode_address(address: int) -> tuple[int, int]:
    if not 0 <= address < ADDRESS_LIMIT:
        msg = f"address {address:#x} does not fit cpu_add[8:0]"
        raise AddressRangeError(msg)
    return address >> OFFSET_BITS, address & OFFSET_MASK


def encode_address(channel: int, offset: int) -> int:
    return (channel << OFFSET_BITS) | offset


def register_map(offset: int) -> RegisterInfo:
    try:
        return REGISTER_TABLE[offset]
    except KeyError:
        raise UnmappedAddressError(offset, 0, offset, "no register at this offset") from None


class AccessKind(Enum):
    READ = "read"
    WRITE = "write"


class AccessOutcome(Enum):
    OK = "ok"
    WRITE_ONLY = "write_only"
    READ_ONLY = "read_only"
    UNDERFLOW = "underflow"
    OVERFLOW = "overflow"
    INVALID_VALUE = "invalid_value"
    PROTOCOL_VIOLATION = "protocol_violation"


@dataclass(frozen=True, slots=True)
class BusTransaction:
    kind: AccessKind
    address: int
    data: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.address < ADDRESS_LIMIT:
            msg = f"address {self.address:#x} does not fit cpu_add[8:0]"
            raise AddressRangeError(msg)


@dataclass(frozen=True, slots=True)
class AccessResult:
    data: int | None
    wait_beats: int
    outcome: AccessOutcome = AccessOutcome.OK


@dataclass(frozen=True, slots=True)
class InterruptState:
    int_out_rx: bool = False
    int_out_tx: bool = False

    @property
    def int_out(self) -> bool:
        return self.int_out_rx or self.int_out_tx


@dataclass(slots=True)
class _Transfer:
    """A multi-beat register access in progress."""

    kind: AccessKind
    address: int
    beats: int
    done: int = 0
    value: int = 0


class Core429:
    def __init__(self, config: BusConfig | None = None) -> None:
        self.reset(config)

    def reset(self, config: BusConfig | None = None) -> None:
        """Return to power-on state, optionally with a new bus shape."""
        self.config = config or BusConfig()
        count = self.config.num_channels
        self.tx = [TxChannel(i) for i in range(count)]
        self.rx = [RxChannel(i) for i in range(count)]
        self.label_index = [0] * count
        self._transfer: _Transfer | None = None

    @property
    def width(self) -> int:
        return self.config.cpu_data_width

    @property
    def interrupts(self) -> InterruptState:
        """Interrupt outputs as of now, including words the receivers just stored."""
        return self.aggregate_interrupts()

    @property
    def pending_transfer(self) -> _Transfer | None:
        """The multi-beat access still owed beats, if any."""
        return self._transfer

    def beats_for(self, info: RegisterInfo) -> int:
        return -(-info.width_bits // self.width)

    def _decode(self, address: int) -> tuple[int, RegisterInfo]:
        channel, offset = decode_address(address)
        if offset not in REGISTER_TABLE:
            raise UnmappedAddressError(address, channel, offset, "no register at this offset")
        if channel >= self.config.num_channels:
            reason = f"channel not present (num_channels={self.config.num_channels})"
            raise UnmappedAddressError(address, channel, offset, reason)
        return channel, REGISTER_TABLE[offset]

    def cpu_access(self, txn: BusTransaction) -> AccessResult:
        """Perform one bus beat.

        An access to a different address (or direction) while a multi-beat
        transfer is open abandons that transfer and reports PROTOCOL_VIOLATION.
        """
        channel, info = self._decode(txn.address)
        violation = False
        pending = self._transfer
        if pending is not None and (pending.address != txn.address or pending.kind is not txn.kind):
            logger.warning(
                "abandoning %s of %#05x after %d/%d beats", pending.kind.value, pending.address, pending.done, pending.beats
            )
            self._transfer = None
            violation = True

        result = self._access(channel, info, txn)
        if violation:
            result = replace(result, outcome=AccessOutcome.PROTOCOL_VIOLATION)
        return result

    def _access(self, channel: int, info: RegisterInfo, txn: BusTransaction) -> AccessResult:
        if txn.kind is AccessKind.READ and not info.readable:
            logger.warning("read of write-only %s on channel %d", info.register.name, channel)
            return AccessResult(0, 0, AccessOutcome.WRITE_ONLY)
        if txn.kind is AccessKind.WRITE and not info.writable:
            logger.warning("write to read-only %s on channel %d ignored", info.register.name, channel)
            return AccessResult(None, 0, AccessOutcome.READ_ONLY)

        beat_mask = (1 << self.width) - 1
        beats = self.beats_for(info)
        if beats == 1:
            if txn.kind is AccessKind.READ:
                value, outcome = self._read_register(channel, info.register)
                return AccessResult(value, 0, outcome)
            return AccessResult(None, 0, self._write_register(channel, info.register, txn.data & beat_mask))

        transfer = self._transfer
        if transfer is None:
            transfer = _Transfer(txn.kind, txn.address, beats)
            if txn.kind is AccessKind.READ:
                value, outcome = self._read_register(channel, info.register)
                if outcome is not AccessOutcome.OK:
                    return AccessResult(value, 0, outcome)
                transfer.value = value
            self._transfer = transfer

        shift = self.width * transfer.done
        data: int | None = None
        if txn.kind is AccessKind.READ:
            data = (transfer.value >> shift) & beat_mask
        else:
            transfer.value |= (txn.data & beat_mask) << shift
        transfer.done += 1
        remaining = transfer.beats - transfer.done
        outcome = AccessOutcome.OK
        if remaining == 0:
            self._transfer = None
            if txn.kind is AccessKind.WRITE:
                outcome = self._write_register(channel, info.register, transfer.value)
        return AccessResult(data, remaining, outcome)

    def _read_register(self, channel: int, register: Register) -> tuple[int, AccessOutcome]:
        tx = self.tx[channel]
        rx = self.rx[channel]
        match register:
            case Register.TX_CONTROL:
                return tx.control, AccessOutcome.OK
            case Register.TX_STATUS:
                return tx.read_status(), AccessOutcome.OK
            case Register.RX_CONTROL:
                return rx.control, AccessOutcome.OK
            case Register.RX_STATUS:
                return rx.read_status(), AccessOutcome.OK
            case Register.RX_FIFO:
                word = rx.pop_word()
                if isinstance(word, FifoOutcome):
                    return 0, AccessOutcome.UNDERFLOW
                return word.raw, AccessOutcome.OK
            case Register.TX_FIFO_LEVEL:
                return tx.fifo.level, AccessOutcome.OK
            case Register.RX_FIFO_LEVEL:
                return rx.fifo.level, AccessOutcome.OK
            case Register.LABEL_INDEX:
                return self.label_index[channel], AccessOutcome.OK
            case Register.LABEL_ENABLE:
                return int(rx.label_enabled(self.label_index[channel])), AccessOutcome.OK
            case _:
                return 0, AccessOutcome.WRITE_ONLY

    def _write_register(self, channel: int, register: Register, value: int) -> AccessOutcome:
        tx = self.tx[channel]
        rx = self.rx[channel]
        match register:
            case Register.TX_CONTROL:
                tx.write_control(value & 0xFF)
            case Register.RX_CONTROL:
                rx.write_control(value & 0xFF)
            case Register.TX_FIFO:
                if tx.write_word(Arinc429Word(value & WORD_MASK)) is FifoOutcome.OVERFLOW:
                    return AccessOutcome.OVERFLOW
            case Register.TX_FIFO_LEVEL | Register.RX_FIFO_LEVEL:
                target = tx if register is Register.TX_FIFO_LEVEL else rx
                try:
                    target.set_fifo_level(value)
                except FifoLevelError:
                    logger.warning("ignoring %s=%d on channel %d", register.name, value, channel)
                    return AccessOutcome.INVALID_VALUE
            case Register.LABEL_INDEX:
                self.label_index[channel] = value & 0xFF
            case Register.LABEL_ENABLE:
                rx.set_label(self.label_index[channel], enabled=bool(value & 1))
            case _:
                return AccessOutcome.READ_ONLY
        return AccessOutcome.OK

    def aggregate_interrupts(self) -> InterruptState:
        return InterruptState(
            int_out_rx=any(rx.interrupt for rx in self.rx),
            int_out_tx=any(tx.interrupt for tx in self.tx),
        )

    def core_tick(self, now_ns: int) -> dict[int, Span]:
        """Advance every transmitter to ``now_ns``; return the spans that start now, by channel."""
        started: dict[int, Span] = {}
        for tx in self.tx:
            span = tx.tick(now_ns)
            if span is not None:
                started[tx.index] = span
        return started

    def snapshot(self) -> dict[str, Any]:
        """Every register, label table and FIFO, without side effects."""
        channels = [
            {
                "index": i,
                "tx": {
                    "control": tx.control,
                    "status": tx.status,
                    "fifo_level": tx.fifo.level,
                    "fifo": [word.hex for word in tx.fifo],
                    "words_sent": tx.words_sent,
                },
                "rx": {
                    "control": rx.control,
                    "status": rx.status,
                    "fifo_level": rx.fifo.level,
                    "fifo": [word.hex for word in rx.fifo],
                    "label_index": self.label_index[i],
                    "labels_enabled": [format_label(label) for label, on in enumerate(rx.label_table) if on],
                },
            }
            for i, (tx, rx) in enumerate(zip(self.tx, self.rx, strict=True))
        ]
        interrupts = self.aggregate_interrupts()
        return {
            "cpu_data_width": self.width,
            "num_channels": self.config.num_channels,
            "interrupts": {
                "int_out_rx": interrupts.int_out_rx,
                "int_out_tx": interrupts.int_out_tx,
                "int_out": interrupts.int_out,
            },
            "channels": channels,
        }


@dataclass(frozen=True, slots=True)
class PortResult:
    value: int
    outcome: AccessOutcome
    beats: int


class CpuPort:
    """Whole-register reads and writes, issuing as many beats as cpu_wait asks for."""

    def __init__(self, core: Core429) -> None:
        self.core = core

    def _worst(self, outcomes: list[AccessOutcome]) -> AccessOutcome:
        return next((outcome for outcome in outcomes if outcome is not AccessOutcome.OK), AccessOutcome.OK)

    def write(self, address: int, value: int) -> PortResult:
        width = self.core.width
        mask = (1 << width) - 1
        outcomes: list[AccessOutcome] = []
        beat = 0
        while True:
            data = (value >> (width * beat)) & mask
            result = self.core.cpu_access(BusTransaction(AccessKind.WRITE, address, data))
            outcomes.append(result.outcome)
            beat += 1
            if result.wait_beats == 0:
                break
        return PortResult(value, self._worst(outcomes), beat)

    def read(self, address: int) -> PortResult:
        width = self.core.width
        outcomes: list[AccessOutcome] = []
        value = 0
        beat = 0
        while True:
            result = self.core.cpu_access(BusTransaction(AccessKind.READ, address))
            outcomes.append(result.outcome)
            value |= (result.data or 0) << (width * beat)
            beat += 1
            if result.wait_beats == 0:
                break
        return PortResult(value, self._worst(outcomes), beat)
