"""Transmit and receive channels: control/status registers, FIFO, line glue and interrupts."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from enum import IntFlag

from arinc429_core.constants import BitRate
from arinc429_core.constants import LineLevel
from arinc429_core.fifo import FifoOutcome
from arinc429_core.fifo import WordFifo
from arinc429_core.line_coding import DemodPhase
from arinc429_core.line_coding import DemodState
from arinc429_core.line_coding import RxErrorKind
from arinc429_core.line_coding import RxWord
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import SymbolStream
from arinc429_core.line_coding import demod_step
from arinc429_core.line_coding import modulate_word
from arinc429_core.word_codec import Arinc429Word
from arinc429_core.word_codec import WordFields
from arinc429_core.word_codec import assemble
from arinc429_core.word_codec import check_parity

logger = logging.getLogger(__name__)

LABEL_COUNT = 256


class ControlBits(IntFlag):
    ENABLE = 0x01
    PARITY = 0x02  # Tx: insert, Rx: check
    RATE_LOW = 0x04
    LABEL_FILTER = 0x08  # Rx only
    IRQ_ON_EMPTY = 0x10
    IRQ_ON_HALF_FULL = 0x20
    IRQ_ON_FULL = 0x40


class StatusBits(IntFlag):
    EMPTY = 0x01
    HALF_FULL = 0x02
    FULL = 0x04
    PARITY_ERROR = 0x08  # Rx only, sticky
    OVERFLOW = 0x10  # sticky
    LINE_ERROR = 0x20  # Rx only, sticky
    BUSY = 0x40  # Tx only


STICKY_BITS = StatusBits.PARITY_ERROR | StatusBits.OVERFLOW | StatusBits.LINE_ERROR
FIFO_FLAG_BITS = 0x07
IRQ_ENABLE_SHIFT = 4


class LabelRangeError(ValueError):
    pass


def interrupt_line(status: int, control: int) -> bool:
    """Per-channel interrupt: any FIFO flag whose irq-enable bit is set."""
    return bool(status & (control >> IRQ_ENABLE_SHIFT) & FIFO_FLAG_BITS)


class _Channel:
    control_mask = 0x7F

    def __init__(self, index: int = 0) -> None:
        self.index = index
        self.fifo = WordFifo()
        self._control = ControlBits(0)
        self._sticky = StatusBits(0)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(index={self.index}, control={self.control:#04x}, status={self.status:#04x})"

    @property
    def control(self) -> int:
        return int(self._control)

    @property
    def enabled(self) -> bool:
        return ControlBits.ENABLE in self._control

    @property
    def configured_rate(self) -> BitRate:
        return BitRate.from_select(low=ControlBits.RATE_LOW in self._control)

    def write_control(self, value: int) -> None:
        self._control = ControlBits(value & self.control_mask)

    def _extra_status(self) -> StatusBits:
        return StatusBits(0)

    @property
    def status(self) -> int:
        """Current status without clearing sticky bits."""
        empty, half_full, full = self.fifo.flags()
        flags = StatusBits(0)
        if empty:
            flags |= StatusBits.EMPTY
        if half_full:
            flags |= StatusBits.HALF_FULL
        if full:
            flags |= StatusBits.FULL
        return int(flags | self._sticky | self._extra_status())

    def read_status(self) -> int:
        """Read the status register; sticky bits clear on read."""
        value = self.status
        self._sticky &= ~STICKY_BITS
        return value

    def set_fifo_level(self, level: int) -> None:
        self.fifo.set_level(level)

    @property
    def interrupt(self) -> bool:
        return interrupt_line(self.status, self.control)


# (now_ns, word_index, word, spans) -> spans actually put on the line
type StreamHook = Callable[[int, int, Arinc429Word, SymbolStream], SymbolStream]


class TxChannel(_Channel):
    # Label filtering (bit 3) does not exist on the transmitter.
    control_mask = 0x77

    def __init__(self, index: int = 0) -> None:
        super().__init__(index)
        self.rate = BitRate.HIGH
        self.stream_hook: StreamHook | None = None
        self.words_sent = 0
        self._spans: SymbolStream = []
        self._span_index = 0
        self._span_level = LineLevel.NULL
        self._span_end_ns: int | None = None
        self._last_tick_ns = 0

    @property
    def busy(self) -> bool:
        return self._span_end_ns is not None

    @property
    def next_boundary_ns(self) -> int | None:
        return self._span_end_ns

    def _extra_status(self) -> StatusBits:
        return StatusBits.BUSY if self.busy else StatusBits(0)

    def level_at(self, now_ns: int) -> LineLevel:
        if self._span_end_ns is None or now_ns >= self._span_end_ns:
            return LineLevel.NULL
        return self._span_level

    def write_word(self, value: WordFields | Arinc429Word) -> FifoOutcome:
        """Queue a word; bit 32 is recomputed here when parity insertion is on."""
        parity = ControlBits.PARITY in self._control
        if isinstance(value, WordFields):
            word = assemble(value, parity_enabled=parity)
        else:
            word = value.with_parity() if parity else value
        outcome = self.fifo.push(word)
        if outcome is FifoOutcome.OVERFLOW:
            self._sticky |= StatusBits.OVERFLOW
        return outcome

    def _start_span(self, now_ns: int, span: Span) -> Span:
        self._span_level = span.level
        self._span_end_ns = now_ns + span.duration_ns
        return span

    def tick(self, now_ns: int) -> Span | None:
        """Return the span that starts at ``now_ns``, or None when nothing new starts.

        None while a span is still in progress, and None when idle (the line stays NULL).
        """
        if now_ns < self._last_tick_ns:
            msg = f"tick time went backwards: {now_ns} < {self._last_tick_ns}"
            raise ValueError(msg)
        self._last_tick_ns = now_ns

        if self._span_end_ns is not None and now_ns < self._span_end_ns:
            return None
        if self._span_index < len(self._spans):
            span = self._spans[self._span_index]
            self._span_index += 1
            return self._start_span(now_ns, span)

        self._spans = []
        self._span_index = 0
        self._span_end_ns = None
        self._span_level = LineLevel.NULL
        if not self.enabled:
            return None
        word = self.fifo.pop()
        if isinstance(word, FifoOutcome):
            return None

        # Rate changes only land on word boundaries.
        self.rate = self.configured_rate
        spans = modulate_word(word, self.rate)
        if self.stream_hook is not None:
            spans = self.stream_hook(now_ns, self.words_sent, word, spans)
        self.words_sent += 1
        logger.debug("tx%d sending %s at %d ns (%s)", self.index, word, now_ns, self.rate.name)
        if not spans:
            return None
        self._spans = spans
        self._span_index = 1
        return self._start_span(now_ns, spans[0])


class RxNotificationKind(Enum):
    STORED = "stored"
    FILTERED = "filtered"
    PARITY_ERROR = "parity_error"
    OVERFLOW = "overflow"
    LINE_ERROR = "line_error"


@dataclass(frozen=True, slots=True)
class RxNotification:
    kind: RxNotificationKind
    offset_ns: int
    word: Arinc429Word | None = None
    error: RxErrorKind | None = None


class RxChannel(_Channel):
    def __init__(self, index: int = 0) -> None:
        super().__init__(index)
        self.demod = DemodState()
        self.label_table = [False] * LABEL_COUNT
        # NULL time on the line since the last driven span, watched even while disabled.
        # The line has been idle since before power-on.
        self.line_null_ns = BitRate.LOW.gap_ns

    def write_control(self, value: int) -> None:
        was_enabled = self.enabled
        super().write_control(value)
        if not self.enabled:
            self.demod = self.demod.reset(self.configured_rate)
        elif not was_enabled:
            # Idle time before the enable counts toward the gap that arms sync.
            self.demod = DemodState(current_rate=self.configured_rate, null_run_ns=self.line_null_ns)

    def set_label(self, label: int, *, enabled: bool) -> None:
        if not 0 <= label < LABEL_COUNT:
            msg = f"label {label} out of range 0..{LABEL_COUNT - 1}"
            raise LabelRangeError(msg)
        self.label_table[label] = enabled

    def label_enabled(self, label: int) -> bool:
        if not 0 <= label < LABEL_COUNT:
            msg = f"label {label} out of range 0..{LABEL_COUNT - 1}"
            raise LabelRangeError(msg)
        return self.label_table[label]

    def pop_word(self) -> Arinc429Word | FifoOutcome:
        return self.fifo.pop()

    def _accept(self, word: Arinc429Word, offset_ns: int) -> RxNotification:
        if ControlBits.PARITY in self._control and not check_parity(word):
            self._sticky |= StatusBits.PARITY_ERROR
            return RxNotification(RxNotificationKind.PARITY_ERROR, offset_ns, word)
        # The table is consulted at the instant the word completes.
        if ControlBits.LABEL_FILTER in self._control and not self.label_table[word.label]:
            return RxNotification(RxNotificationKind.FILTERED, offset_ns, word)
        if self.fifo.push(word) is FifoOutcome.OVERFLOW:
            self._sticky |= StatusBits.OVERFLOW
            return RxNotification(RxNotificationKind.OVERFLOW, offset_ns, word)
        return RxNotification(RxNotificationKind.STORED, offset_ns, word)

    def feed(self, level: LineLevel, duration_ns: int) -> list[RxNotification]:
        """Advance the receiver over one constant-level span of the line."""
        self.line_null_ns = self.line_null_ns + duration_ns if level is LineLevel.NULL else 0
        if not self.enabled:
            return []
        rate = self.configured_rate
        if self.demod.current_rate is not rate and self.demod.phase is DemodPhase.IDLE:
            self.demod = replace(self.demod, current_rate=rate)

        self.demod, events = demod_step(self.demod, level, duration_ns)
        notifications: list[RxNotification] = []
        for event in events:
            if isinstance(event, RxWord):
                notifications.append(self._accept(event.word, event.offset_ns))
            else:
                self._sticky |= StatusBits.LINE_ERROR
                notifications.append(
                    RxNotification(RxNotificationKind.LINE_ERROR, event.offset_ns, error=event.kind)
                )
        return notifications


def channel_interrupt(channel: TxChannel | RxChannel) -> bool:
    return channel.interrupt
