"""Per-wire waveform capture for the simulator."""

from __future__ import annotations

from pathlib import Path

from arinc429_core.constants import LineLevel
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import SymbolStream
from arinc429_core.line_coding import spans_to_csv
from arinc429_core.line_coding import stream_duration


class TraceRecorder:
    """Accumulates the mixed level of one wire as contiguous spans from t=0.

    A new row starts when the level changes or when a source on the wire
    begins a new span; otherwise the interval extends the previous row.
    """

    def __init__(self) -> None:
        self.spans: SymbolStream = []
        self.end_ns = 0

    def record(self, start_ns: int, end_ns: int, level: LineLevel, *, boundary: bool) -> None:
        if start_ns != self.end_ns or end_ns <= start_ns:
            msg = f"trace interval [{start_ns}, {end_ns}) does not continue at {self.end_ns}"
            raise ValueError(msg)
        duration = end_ns - start_ns
        if self.spans and not boundary and self.spans[-1].level is level:
            last = self.spans[-1]
            self.spans[-1] = Span(last.duration_ns + duration, level)
        else:
            self.spans.append(Span(duration, level))
        self.end_ns = end_ns

    def to_csv(self) -> str:
        return spans_to_csv(self.spans)


def write_trace(path: Path, spans: SymbolStream) -> int:
    """Write a trace file, returning the covered duration in ns."""
    path.write_text(spans_to_csv(spans), encoding="utf-8")
    return stream_duration(spans)
