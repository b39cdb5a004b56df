"""Bipolar return-to-zero line coding.

Each bit cell is a value half-cell (HI for 1, LO for 0) followed by a NULL
half-cell. Words go out ARINC bit 1 first and are followed by a 4-bit-time NULL
gap, which is also what the receiver uses to find word boundaries.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from dataclasses import replace
from enum import Enum
from typing import NamedTuple

from arinc429_core.constants import GAP_BIT_TIMES
from arinc429_core.constants import HALF_CELL_TOLERANCE_PCT
from arinc429_core.constants import WORD_BITS
from arinc429_core.constants import BitRate
from arinc429_core.constants import LineLevel
from arinc429_core.word_codec import Arinc429Word

logger = logging.getLogger(__name__)


class Span(NamedTuple):
    duration_ns: int
    level: LineLevel


type SymbolStream = list[Span]


def stream_duration(stream: SymbolStream) -> int:
    return sum(span.duration_ns for span in stream)


def modulate_word(word: Arinc429Word, rate: BitRate) -> SymbolStream:
    half = rate.half_period_ns
    stream: SymbolStream = []
    for n in range(1, WORD_BITS + 1):
        stream.append(Span(half, LineLevel.from_bit(word.bit(n))))
        stream.append(Span(half, LineLevel.NULL))
    stream.append(Span(GAP_BIT_TIMES * rate.bit_period_ns, LineLevel.NULL))
    return stream


def combine_levels(levels: list[LineLevel]) -> LineLevel:
    """Resolve several sources driving one wire. NULL is the identity."""
    driven = [level for level in levels if level is not LineLevel.NULL]
    if not driven:
        return LineLevel.NULL
    if len(driven) == 1:
        return driven[0]
    return LineLevel.COLLISION


def mix(streams: list[tuple[int, SymbolStream]]) -> SymbolStream:
    """Combine ``(start_ns, stream)`` pairs on a timeline starting at 0.

    Every span start of a stream that drives the line at some point is kept as a
    boundary. Next to other streams an all-NULL stream only contributes its
    extent; on its own it comes back unchanged. Regions no stream covers are NULL.
    """
    boundaries: set[int] = {0}
    timelines: list[list[tuple[int, int, LineLevel]]] = []
    end = 0
    for start, stream in streams:
        t = start
        timeline: list[tuple[int, int, LineLevel]] = []
        silent = len(streams) > 1 and all(span.level is LineLevel.NULL for span in stream)
        for span in stream:
            if not silent:
                boundaries.add(t)
            timeline.append((t, t + span.duration_ns, span.level))
            t += span.duration_ns
        boundaries.update((start, t))
        end = max(end, t)
        timelines.append(timeline)

    points = sorted(b for b in boundaries if b <= end)
    cursors = [0] * len(timelines)
    mixed: SymbolStream = []
    for seg_start, seg_end in zip(points, points[1:], strict=False):
        levels: list[LineLevel] = []
        for i, timeline in enumerate(timelines):
            while cursors[i] < len(timeline) and timeline[cursors[i]][1] <= seg_start:
                cursors[i] += 1
            if cursors[i] < len(timeline) and timeline[cursors[i]][0] <= seg_start:
                levels.append(timeline[cursors[i]][2])
        mixed.append(Span(seg_end - seg_start, combine_levels(levels)))
    return mixed


def spans_to_csv(stream: SymbolStream, start_ns: int = 0) -> str:
    """Render ``t_start_ns,duration_ns,level`` lines."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    t = start_ns
    for span in stream:
        writer.writerow((t, span.duration_ns, span.level.symbol))
        t += span.duration_ns
    return buffer.getvalue()


class DemodPhase(Enum):
    IDLE = "idle"
    SYNCED = "synced"


class RxErrorKind(Enum):
    RZ_VIOLATION = "rz_violation"
    SHORT_WORD = "short_word"
    LONG_WORD = "long_word"


@dataclass(frozen=True, slots=True)
class RxWord:
    word: Arinc429Word
    offset_ns: int


@dataclass(frozen=True, slots=True)
class RxError:
    kind: RxErrorKind
    offset_ns: int
    bits_collected: int


type RxEvent = RxWord | RxError


@dataclass(frozen=True, slots=True)
class DemodState:
    """Receiver state between line spans.

    ``null_run_ns`` is the NULL time seen since the last value half-cell. In IDLE,
    sync is armed once it reaches the gap length. ``pulse_level``/``pulse_ns``
    describe the value half-cell in progress (NULL when none).
    """

    current_rate: BitRate = BitRate.HIGH
    phase: DemodPhase = DemodPhase.IDLE
    bits_collected: int = 0
    shift_register: int = 0
    null_run_ns: int = 0
    pulse_level: LineLevel = LineLevel.NULL
    pulse_ns: int = 0

    @property
    def armed(self) -> bool:
        return self.phase is DemodPhase.IDLE and self.null_run_ns >= self.current_rate.gap_ns

    def reset(self, rate: BitRate | None = None) -> DemodState:
        return DemodState(current_rate=rate or self.current_rate)


def _half_window(rate: BitRate) -> tuple[int, int]:
    half = rate.half_period_ns
    tolerance = half * HALF_CELL_TOLERANCE_PCT // 100
    return half - tolerance, half + tolerance


def _fail(
    state: DemodState, kind: RxErrorKind, offset: int, events: list[RxEvent], null_run_ns: int = 0
) -> DemodState:
    """Report a line error and drop back to IDLE."""
    logger.debug("demod %s after %d bits", kind.value, state.bits_collected)
    events.append(RxError(kind=kind, offset_ns=offset, bits_collected=state.bits_collected))
    return DemodState(current_rate=state.current_rate, null_run_ns=null_run_ns)


def _close_pulse(state: DemodState, events: list[RxEvent]) -> DemodState:
    """The value half-cell ended with a transition to NULL."""
    low, high = _half_window(state.current_rate)
    if not low <= state.pulse_ns <= high:
        return _fail(state, RxErrorKind.RZ_VIOLATION, 0, events)
    bit = 1 if state.pulse_level is LineLevel.HI else 0
    return replace(
        state,
        shift_register=state.shift_register | (bit << state.bits_collected),
        bits_collected=state.bits_collected + 1,
        pulse_level=LineLevel.NULL,
        pulse_ns=0,
        null_run_ns=0,
    )


def _feed_null(state: DemodState, duration_ns: int, events: list[RxEvent]) -> DemodState:
    rate = state.current_rate
    before = state.null_run_ns
    after = before + duration_ns
    if state.phase is DemodPhase.IDLE:
        return replace(state, null_run_ns=after)

    low, _ = _half_window(rate)
    if state.bits_collected == WORD_BITS:
        if before < low <= after:
            events.append(RxWord(Arinc429Word(state.shift_register), low - before))
        if after >= rate.gap_ns:
            return DemodState(current_rate=rate, null_run_ns=after)
        return replace(state, null_run_ns=after)

    if after >= rate.gap_ns:
        return _fail(state, RxErrorKind.SHORT_WORD, rate.gap_ns - before, events, null_run_ns=after)
    return replace(state, null_run_ns=after)


def _feed_pulse(state: DemodState, level: LineLevel, duration_ns: int, events: list[RxEvent]) -> DemodState:
    rate = state.current_rate
    low, high = _half_window(rate)

    if state.phase is DemodPhase.IDLE:
        if not state.armed or level is LineLevel.COLLISION:
            # Hunting for a gap; anything driven disarms sync.
            return replace(state, null_run_ns=0)
        state = replace(state, phase=DemodPhase.SYNCED, bits_collected=0, shift_register=0, null_run_ns=0)
    elif state.pulse_level is not LineLevel.NULL:
        if level is not state.pulse_level or level is LineLevel.COLLISION:
            return _fail(state, RxErrorKind.RZ_VIOLATION, 0, events)
    elif level is LineLevel.COLLISION:
        return _fail(state, RxErrorKind.RZ_VIOLATION, 0, events)
    elif state.bits_collected == WORD_BITS:
        kind = RxErrorKind.RZ_VIOLATION if state.null_run_ns < low else RxErrorKind.LONG_WORD
        return _fail(state, kind, 0, events)
    elif not low <= state.null_run_ns <= high:
        return _fail(state, RxErrorKind.RZ_VIOLATION, 0, events)

    pulse_ns = state.pulse_ns + duration_ns
    if pulse_ns > high:
        return _fail(state, RxErrorKind.RZ_VIOLATION, duration_ns, events)
    return replace(state, pulse_level=level, pulse_ns=pulse_ns, null_run_ns=0)


def demod_step(state: DemodState, level: LineLevel, duration_ns: int) -> tuple[DemodState, list[RxEvent]]:
    """Consume one constant-level span and return the new state plus any events.

    Spans may be split arbitrarily; consecutive spans of the same level are
    treated as one run.
    """
    if duration_ns <= 0:
        msg = f"span duration must be positive, got {duration_ns}"
        raise ValueError(msg)

    events: list[RxEvent] = []
    if level is LineLevel.NULL:
        if state.pulse_level is not LineLevel.NULL:
            state = _close_pulse(state, events)
        state = _feed_null(state, duration_ns, events)
    else:
        state = _feed_pulse(state, level, duration_ns, events)
    return state, events


def demodulate(stream: SymbolStream, state: DemodState | None = None) -> tuple[DemodState, list[RxEvent]]:
    """Run a whole stream through the demodulator. Event offsets are from the stream start."""
    state = state or DemodState()
    events: list[RxEvent] = []
    t = 0
    for span in stream:
        state, step_events = demod_step(state, span.level, span.duration_ns)
        events.extend(replace(event, offset_ns=event.offset_ns + t) for event in step_events)
        t += span.duration_ns
    return state, events
