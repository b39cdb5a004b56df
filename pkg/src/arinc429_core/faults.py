"""Fault injection on the line: rewrites a transmitter's spans as a word is dequeued."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from arinc429_core.constants import WORD_BITS
from arinc429_core.constants import BitRate
from arinc429_core.constants import LineLevel
from arinc429_core.core.config import Fault
from arinc429_core.core.config import FlipBit
from arinc429_core.core.config import GapViolation
from arinc429_core.core.config import TruncateWord
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import SymbolStream
from arinc429_core.word_codec import Arinc429Word

logger = logging.getLogger(__name__)

# modulate_word layout: value/NULL half-cell pairs, then one gap span.
GAP_SPAN_INDEX = 2 * WORD_BITS

_INVERTED = {LineLevel.HI: LineLevel.LO, LineLevel.LO: LineLevel.HI}


@dataclass(frozen=True, slots=True)
class AppliedFault:
    t_ns: int
    wire: int
    kind: str
    word_index: int
    word: Arinc429Word


def _value_span(n: int) -> int:
    return 2 * (n - 1)


def flip_bit(spans: SymbolStream, bit: int) -> SymbolStream:
    """Invert the value half-cell of ARINC bit ``bit``."""
    out = list(spans)
    i = _value_span(bit)
    duration, level = out[i]
    out[i] = Span(duration, _INVERTED.get(level, level))
    return out


def truncate_word(spans: SymbolStream, after_bits: int) -> SymbolStream:
    """Keep the first ``after_bits`` bits and hold the line NULL for the rest of the word."""
    out = list(spans)
    for n in range(after_bits + 1, WORD_BITS + 1):
        i = _value_span(n)
        out[i] = Span(out[i].duration_ns, LineLevel.NULL)
    return out


def shrink_gap(spans: SymbolStream, bit_times: int, rate: BitRate) -> SymbolStream:
    out = list(spans[:GAP_SPAN_INDEX])
    if bit_times:
        out.append(Span(bit_times * rate.bit_period_ns, LineLevel.NULL))
    return out


def _rate_of(spans: SymbolStream) -> BitRate:
    half = spans[0].duration_ns
    return next(rate for rate in BitRate if rate.half_period_ns == half)


class FaultInjector:
    """Stream hook for one wire's transmitter.

    Each fault fires once, on the word it targets: ``word_index`` when given,
    otherwise the first word whose transmission starts at or after ``at_ns``.
    """

    def __init__(self, wire: int, faults: list[Fault]) -> None:
        self.wire = wire
        self.pending = list(faults)
        self.applied: list[AppliedFault] = []

    def drain(self) -> list[AppliedFault]:
        """Faults applied since the previous call."""
        applied, self.applied = self.applied, []
        return applied

    def _targets(self, fault: Fault, now_ns: int, word_index: int) -> bool:
        if fault.word_index is not None:
            return fault.word_index == word_index
        return now_ns >= fault.at_ns

    def __call__(self, now_ns: int, word_index: int, word: Arinc429Word, spans: SymbolStream) -> SymbolStream:
        remaining: list[Fault] = []
        for fault in self.pending:
            if not self._targets(fault, now_ns, word_index):
                remaining.append(fault)
                continue
            match fault:
                case FlipBit():
                    spans = flip_bit(spans, fault.bit)
                case TruncateWord():
                    spans = truncate_word(spans, fault.after_bits)
                case GapViolation():
                    spans = shrink_gap(spans, fault.shrink_to_bit_times, _rate_of(spans))
            logger.debug("wire %d: %s on word %d (%s) at %d ns", self.wire, fault.kind, word_index, word, now_ns)
            self.applied.append(AppliedFault(now_ns, self.wire, fault.kind, word_index, word))
        self.pending = remaining
        return spans
