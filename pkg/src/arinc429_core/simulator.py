"""Event-driven bus simulation.

Time is an integer count of nanoseconds. At every event time the pending
script directives run first, then the transmitters advance; the level of each
wire is then constant until the next scheduled event, and that span is fed to
the wire's receivers and recorded in its trace.
"""

from __future__ import annotations

import heapq
import json
import logging
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import BaseModel
from pydantic import Field

from arinc429_core.bus_core import AccessOutcome
from arinc429_core.bus_core import Core429
from arinc429_core.bus_core import CpuPort
from arinc429_core.bus_core import InterruptState
from arinc429_core.bus_core import PortResult
from arinc429_core.bus_core import UnmappedAddressError
from arinc429_core.bus_core import decode_address
from arinc429_core.channel import RxNotification
from arinc429_core.channel import RxNotificationKind
from arinc429_core.core.config import FaultPlan
from arinc429_core.core.config import SimulationConfig
from arinc429_core.core.config import TopologyError
from arinc429_core.faults import FaultInjector
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import combine_levels
from arinc429_core.line_coding import spans_to_csv
from arinc429_core.script import Directive
from arinc429_core.script import DirectiveKind
from arinc429_core.trace import TraceRecorder
from arinc429_core.trace import write_trace

logger = logging.getLogger(__name__)

INTERRUPT_LINES = ("int_out_rx", "int_out_tx", "int_out")


class SimulationAbortError(RuntimeError):
    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"script line {line}: {reason}")


class ReceivedWord(BaseModel):
    t_ns: int
    word: str


class SimulationEvent(BaseModel):
    t_ns: int
    kind: str
    channel: int | None = None
    word: str | None = None
    detail: str | None = None
    line: int | None = None


class InterruptEdge(BaseModel):
    t_ns: int
    line: str
    level: int


class ReadRecord(BaseModel):
    t_ns: int
    line: int
    address: int
    value: int
    outcome: str
    expected: int | None = None


class ExpectationFailure(BaseModel):
    t_ns: int
    line: int
    directive: str
    expected: int
    actual: int


class SimulationReport(BaseModel):
    end_ns: int = 0
    received: dict[int, list[ReceivedWord]] = Field(default_factory=dict)
    events: list[SimulationEvent] = Field(default_factory=list)
    interrupt_edges: list[InterruptEdge] = Field(default_factory=list)
    reads: list[ReadRecord] = Field(default_factory=list)
    expectation_failures: list[ExpectationFailure] = Field(default_factory=list)
    transmitted: dict[int, int] = Field(default_factory=dict)
    snapshot: dict[str, Any] = Field(default_factory=dict)
    # One span list per wire; written as CSV, not part of the JSON report.
    traces: list[list[Span]] = Field(default_factory=list, exclude=True)

    @property
    def words_received(self) -> int:
        return sum(len(words) for words in self.received.values())

    def events_of(self, kind: str) -> list[SimulationEvent]:
        return [event for event in self.events if event.kind == kind]

    def to_json(self, indent: int | None = 2) -> str:
        """Stable rendering: sorted keys, so equal reports are byte-identical."""
        return json.dumps(self.model_dump(mode="json"), indent=indent, sort_keys=True) + "\n"


class _Timeline:
    """Pending wake-up times, ordered by time then submission order."""

    def __init__(self) -> None:
        self._queue: list[tuple[int, int]] = []
        self._next_seq = 0

    def schedule(self, t_ns: int) -> None:
        heapq.heappush(self._queue, (t_ns, self._next_seq))
        self._next_seq += 1

    def next_after(self, now_ns: int) -> int | None:
        while self._queue and self._queue[0][0] <= now_ns:
            heapq.heappop(self._queue)
        return self._queue[0][0] if self._queue else None


class _Simulation:
    def __init__(self, config: SimulationConfig, fault_plan: FaultPlan) -> None:
        stray = [fault for fault in fault_plan.faults if fault.wire >= len(config.wires)]
        if stray:
            msg = f"fault targets wire {stray[0].wire}, topology has {len(config.wires)} wires"
            raise TopologyError(msg)

        self.config = config
        self.core = Core429(config.bus)
        self.port = CpuPort(self.core)
        self.timeline = _Timeline()
        self.traces = [TraceRecorder() for _ in config.wires]
        self.sources = [[wire.tx_ref, *wire.crosstalk_refs] for wire in config.wires]
        self.report = SimulationReport(received={rx: [] for wire in config.wires for rx in wire.rx_refs})
        self.irq = InterruptState()
        self.injectors: list[FaultInjector] = []
        for number, wire in enumerate(config.wires):
            injector = FaultInjector(number, [fault for fault in fault_plan.faults if fault.wire == number])
            self.core.tx[wire.tx_ref].stream_hook = injector
            self.injectors.append(injector)

    def run(self, script: Sequence[Directive]) -> SimulationReport:
        logger.info("simulating %d wires with %d directives", len(self.config.wires), len(script))
        now = 0
        pc = 0
        resume_ns = 0
        while True:
            while pc < len(script) and resume_ns <= now:
                directive = script[pc]
                pc += 1
                if directive.kind is DirectiveKind.WAIT:
                    resume_ns = now + (directive.value or 0)
                    self.timeline.schedule(resume_ns)
                else:
                    self._execute(directive, now)

            started = self.core.core_tick(now)
            for span in started.values():
                self.timeline.schedule(now + span.duration_ns)
            self._collect_faults()
            self._note_interrupts(now)

            t_next = self.timeline.next_after(now)
            if t_next is None:
                break
            self._drive_wires(now, t_next, set(started))
            now = t_next

        return self._finish(now)

    def _execute(self, directive: Directive, now: int) -> None:
        address = directive.address or 0
        try:
            match directive.kind:
                case DirectiveKind.WRITE:
                    self._note_access(directive, now, self.port.write(address, directive.value or 0))
                case DirectiveKind.READ:
                    result = self.port.read(address)
                    self._note_access(directive, now, result)
                    self._note_read(directive, now, result)
                case DirectiveKind.EXPECT_IRQ:
                    actual = int(self.core.aggregate_interrupts().int_out)
                    self._check(directive, now, directive.value or 0, actual)
        except UnmappedAddressError as exc:
            logger.error("aborting at script line %d: %s", directive.line, exc)  # noqa: TRY400
            raise SimulationAbortError(directive.line, str(exc)) from exc

    def _note_access(self, directive: Directive, now: int, result: PortResult) -> None:
        if result.outcome is AccessOutcome.OK:
            return
        self.report.events.append(
            SimulationEvent(
                t_ns=now,
                kind="access",
                channel=decode_address(directive.address or 0)[0],
                detail=result.outcome.value,
                line=directive.line,
            )
        )

    def _note_read(self, directive: Directive, now: int, result: PortResult) -> None:
        self.report.reads.append(
            ReadRecord(
                t_ns=now,
                line=directive.line,
                address=directive.address or 0,
                value=result.value,
                outcome=result.outcome.value,
                expected=directive.value,
            )
        )
        if directive.value is not None:
            self._check(directive, now, directive.value, result.value)

    def _check(self, directive: Directive, now: int, expected: int, actual: int) -> None:
        if expected == actual:
            return
        logger.warning(
            "line %d: %s expected %#x, got %#x at %d ns", directive.line, directive.kind.value, expected, actual, now
        )
        self.report.expectation_failures.append(
            ExpectationFailure(
                t_ns=now, line=directive.line, directive=directive.kind.value, expected=expected, actual=actual
            )
        )

    def _collect_faults(self) -> None:
        for injector in self.injectors:
            for fault in injector.drain():
                self.report.events.append(
                    SimulationEvent(
                        t_ns=fault.t_ns,
                        kind="fault_applied",
                        channel=self.config.wires[fault.wire].tx_ref,
                        word=fault.word.hex,
                        detail=f"{fault.kind}#{fault.word_index}",
                    )
                )

    def _note_interrupts(self, t_ns: int) -> None:
        current = self.core.aggregate_interrupts()
        for name in INTERRUPT_LINES:
            level = getattr(current, name)
            if level != getattr(self.irq, name):
                self.report.interrupt_edges.append(InterruptEdge(t_ns=t_ns, line=name, level=int(level)))
        self.irq = current

    def _drive_wires(self, now: int, t_next: int, started: set[int]) -> None:
        duration = t_next - now
        last_event_ns = now
        for number, wire in enumerate(self.config.wires):
            sources = self.sources[number]
            level = combine_levels([self.core.tx[ref].level_at(now) for ref in sources])
            self.traces[number].record(now, t_next, level, boundary=not started.isdisjoint(sources))
            for rx_ref in wire.rx_refs:
                for note in self.core.rx[rx_ref].feed(level, duration):
                    t_ns = now + note.offset_ns
                    self._note_rx(rx_ref, t_ns, note)
                    last_event_ns = max(last_event_ns, t_ns)
        self._note_interrupts(last_event_ns)

    def _note_rx(self, rx_ref: int, t_ns: int, note: RxNotification) -> None:
        word = note.word.hex if note.word is not None else None
        if note.kind is RxNotificationKind.STORED and word is not None:
            self.report.received[rx_ref].append(ReceivedWord(t_ns=t_ns, word=word))
            return
        detail = note.error.value if note.error is not None else None
        self.report.events.append(
            SimulationEvent(t_ns=t_ns, kind=note.kind.value, channel=rx_ref, word=word, detail=detail)
        )

    def _finish(self, now: int) -> SimulationReport:
        report = self.report
        report.end_ns = now
        report.events.sort(key=lambda event: event.t_ns)
        refs = sorted({ref for sources in self.sources for ref in sources})
        report.transmitted = {ref: self.core.tx[ref].words_sent for ref in refs}
        report.snapshot = self.core.snapshot()
        report.traces = [recorder.spans for recorder in self.traces]
        logger.info(
            "simulation finished at %d ns: %d words received, %d events",
            now,
            report.words_received,
            len(report.events),
        )
        return report


def run_simulation(
    config: SimulationConfig, script: Sequence[Directive], fault_plan: FaultPlan | None = None
) -> SimulationReport:
    """Run ``script`` against a fresh core wired as ``config.wires`` describes.

    Raises
    ------
    SimulationAbortError
        A directive addressed an unmapped register.
    TopologyError
        A fault names a wire that does not exist.
    """
    return _Simulation(config, fault_plan or FaultPlan()).run(script)


def emit_trace(report: SimulationReport, wire: int) -> str:
    if not 0 <= wire < len(report.traces):
        msg = f"wire {wire} not in report ({len(report.traces)} wires)"
        raise ValueError(msg)
    return spans_to_csv(report.traces[wire])


def write_outputs(report: SimulationReport, out_dir: Path, indent: int | None = 2) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(report.to_json(indent), encoding="utf-8")
    written = [report_path]
    for number, spans in enumerate(report.traces):
        path = out_dir / f"wire{number}.csv"
        write_trace(path, spans)
        written.append(path)
    logger.info("wrote %d files to %s", len(written), out_dir)
    return written
