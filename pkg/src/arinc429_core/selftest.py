"""Seeded invariant suites run by ``arinc429 selftest``."""

from __future__ import annotations

import logging
import random
import time
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass

from arinc429_core.bus_core import AccessKind
from arinc429_core.bus_core import Core429
from arinc429_core.bus_core import CpuPort
from arinc429_core.bus_core import InterruptState
from arinc429_core.bus_core import Register
from arinc429_core.bus_core import encode_address
from arinc429_core.bus_core import register_map
from arinc429_core.channel import FIFO_FLAG_BITS
from arinc429_core.channel import IRQ_ENABLE_SHIFT
from arinc429_core.channel import LABEL_COUNT
from arinc429_core.channel import ControlBits
from arinc429_core.channel import RxChannel
from arinc429_core.channel import RxNotificationKind
from arinc429_core.channel import interrupt_line
from arinc429_core.constants import FIFO_DEPTH
from arinc429_core.constants import MAX_CHANNELS
from arinc429_core.constants import WORD_BITS
from arinc429_core.constants import BitRate
from arinc429_core.constants import LineLevel
from arinc429_core.core.config import CPU_DATA_WIDTHS
from arinc429_core.core.config import BusConfig
from arinc429_core.core.config import SimulationConfig
from arinc429_core.core.config import WireConfig
from arinc429_core.faults import truncate_word
from arinc429_core.fifo import FifoOutcome
from arinc429_core.fifo import WordFifo
from arinc429_core.line_coding import RxWord
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import SymbolStream
from arinc429_core.line_coding import demodulate
from arinc429_core.line_coding import modulate_word
from arinc429_core.script import Directive
from arinc429_core.script import DirectiveKind
from arinc429_core.simulator import run_simulation
from arinc429_core.word_codec import Arinc429Word
from arinc429_core.word_codec import WordFields
from arinc429_core.word_codec import assemble
from arinc429_core.word_codec import check_parity
from arinc429_core.word_codec import disassemble

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class SuiteResult:
    name: str
    cases: int
    failures: int
    elapsed_s: float

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _random_fields(rng: random.Random) -> WordFields:
    return WordFields(
        label=rng.randrange(256),
        sdi=rng.randrange(4),
        data=rng.randrange(1 << 19),
        ssm=rng.randrange(4),
    )


def codec_round_trip(rng: random.Random, samples: int) -> tuple[int, int]:
    failures = 0
    for _ in range(samples):
        fields = _random_fields(rng)
        back = disassemble(assemble(fields, parity_enabled=False))
        failures += back != fields
    return samples, failures


def parity_suite(rng: random.Random, samples: int) -> tuple[int, int]:
    cases = 0
    failures = 0
    for _ in range(samples):
        word = assemble(_random_fields(rng), parity_enabled=True)
        cases += 1
        failures += not check_parity(word)
        for n in range(WORD_BITS):
            cases += 1
            failures += check_parity(Arinc429Word(word.raw ^ (1 << n)))
    return cases, failures


def _received(stream: SymbolStream) -> list[int]:
    _, events = demodulate(stream)
    return [event.word.raw for event in events if isinstance(event, RxWord)]


def _stretch_half_cell(spans: SymbolStream, index: int) -> SymbolStream:
    out = list(spans)
    duration, level = out[index]
    out[index] = Span(duration + duration // 5, level)
    return out


def loopback_suite(rng: random.Random, samples: int) -> tuple[int, int]:
    """Clean words come back intact; after a damaged word the next clean one still does."""
    cases = 0
    failures = 0
    for rate in BitRate:
        lead = [Span(rate.gap_ns, LineLevel.NULL)]
        for _ in range(samples):
            word = Arinc429Word(rng.getrandbits(WORD_BITS))
            cases += 1
            failures += _received(lead + modulate_word(word, rate)) != [word.raw]

        for i in range(max(1, samples // 10)):
            bad = Arinc429Word(rng.getrandbits(WORD_BITS))
            good = Arinc429Word(rng.getrandbits(WORD_BITS))
            spans = modulate_word(bad, rate)
            if i % 2:
                spans = truncate_word(spans, rng.randrange(1, WORD_BITS))
            else:
                spans = _stretch_half_cell(spans, 2 * rng.randrange(WORD_BITS))
            cases += 1
            failures += _received(lead + spans + modulate_word(good, rate)) != [good.raw]
    return cases, failures


def fifo_oracle(rng: random.Random, samples: int) -> tuple[int, int]:
    fifo = WordFifo()
    reference: deque[Arinc429Word] = deque()
    failures = 0
    for _ in range(samples * 10):
        op = rng.random()
        if op < 0.5:  # noqa: PLR2004
            word = Arinc429Word(rng.getrandbits(WORD_BITS))
            outcome = fifo.push(word)
            expected = FifoOutcome.OVERFLOW if len(reference) == FIFO_DEPTH else FifoOutcome.OK
            if expected is FifoOutcome.OK:
                reference.append(word)
            failures += outcome is not expected
        elif op < 0.95:  # noqa: PLR2004
            popped = fifo.pop()
            failures += popped != (reference.popleft() if reference else FifoOutcome.UNDERFLOW)
        else:
            fifo.set_level(rng.randrange(1, FIFO_DEPTH + 1))
        flags = fifo.flags()
        failures += flags.empty != (not reference)
        failures += flags.half_full != (len(reference) >= fifo.level)
        failures += flags.full != (len(reference) == FIFO_DEPTH)
        failures += list(fifo) != list(reference)
    return samples * 10, failures


def interrupt_algebra(rng: random.Random, samples: int) -> tuple[int, int]:
    cases = 0
    failures = 0
    for rx_line in (False, True):
        for tx_line in (False, True):
            cases += 1
            failures += InterruptState(rx_line, tx_line).int_out != (rx_line or tx_line)

    for status in range(FIFO_FLAG_BITS + 1):
        for enables in range(FIFO_FLAG_BITS + 1):
            cases += 1
            expected = any(status & enables & (1 << i) for i in range(3))
            failures += interrupt_line(status, enables << IRQ_ENABLE_SHIFT) != expected

    core = Core429(BusConfig())
    for _ in range(max(1, samples // 2)):
        core.reset()
        for ch in range(core.config.num_channels):
            core.tx[ch].write_control(rng.randrange(1 << 7) & ~1)
            core.rx[ch].write_control(rng.randrange(1 << 7))
            for _ in range(rng.choice((0, 1, 300, FIFO_DEPTH))):
                core.tx[ch].write_word(Arinc429Word(0))
        state = core.aggregate_interrupts()
        expect_tx = any(interrupt_line(tx.status, tx.control) for tx in core.tx)
        expect_rx = any(interrupt_line(rx.status, rx.control) for rx in core.rx)
        cases += 1
        failures += state != InterruptState(expect_rx, expect_tx)
        failures += state.int_out != (expect_rx or expect_tx)
    return cases, failures


def burst_script(words: int, *, low_rate: bool = False, channel: int = 0) -> list[Directive]:
    """Fill one transmit FIFO, then enable the transmitter."""
    fifo = encode_address(channel, Register.TX_FIFO)
    control = encode_address(channel, Register.TX_CONTROL)
    script = [Directive(DirectiveKind.WRITE, i + 1, fifo, i) for i in range(words)]
    script.append(Directive(DirectiveKind.WRITE, words + 1, control, 0x05 if low_rate else 0x01))
    return script


def timing_law(rng: random.Random, samples: int) -> tuple[int, int]:  # noqa: ARG001
    """A full FIFO burst ends exactly 512 word-times after it starts."""
    config = SimulationConfig(wires=[WireConfig(tx_ref=0, rx_refs=[0])])
    failures = 0
    for rate in BitRate:
        report = run_simulation(config, burst_script(FIFO_DEPTH, low_rate=rate is BitRate.LOW))
        failures += report.end_ns != FIFO_DEPTH * rate.word_ns
    return len(BitRate), failures


def _filter_stream(rng: random.Random, words: int) -> tuple[RxChannel, list[Span | int]]:
    """Random-label words back to back, with label-table toggles dropped between line spans."""
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE | ControlBits.LABEL_FILTER)
    for label in rng.sample(range(LABEL_COUNT), 64):
        rx.set_label(label, enabled=True)
    steps: list[Span | int] = []
    for _ in range(words):
        for span in modulate_word(Arinc429Word(rng.getrandbits(WORD_BITS)), BitRate.HIGH):
            steps.append(span)
            if rng.random() < 0.01:  # noqa: PLR2004
                steps.append(rng.randrange(LABEL_COUNT))
    return rx, steps


def label_filter(rng: random.Random, samples: int) -> tuple[int, int]:
    """Exactly the words whose label is enabled when they complete reach the FIFO."""
    rx, steps = _filter_stream(rng, samples * 5)
    table = list(rx.label_table)
    expected: list[Arinc429Word] = []
    stored: list[Arinc429Word] = []
    completed = 0
    failures = 0
    for step in steps:
        if isinstance(step, int):
            table[step] = not table[step]
            rx.set_label(step, enabled=table[step])
            continue
        for note in rx.feed(step.level, step.duration_ns):
            if note.kind not in {RxNotificationKind.STORED, RxNotificationKind.FILTERED} or note.word is None:
                failures += 1
                continue
            completed += 1
            if table[note.word.label]:
                expected.append(note.word)
        while not isinstance(word := rx.pop_word(), FifoOutcome):
            stored.append(word)
    failures += completed != samples * 5
    failures += stored != expected
    return completed, failures


def _random_access(rng: random.Random) -> tuple[AccessKind, int, int]:
    channel = rng.randrange(MAX_CHANNELS)
    info = register_map(rng.choice(list(Register)))
    if info.register in {Register.TX_FIFO_LEVEL, Register.RX_FIFO_LEVEL}:
        value = rng.randrange(FIFO_DEPTH + 64)
    else:
        value = rng.getrandbits(info.width_bits)
    write = info.writable and (not info.readable or rng.random() < 0.6)  # noqa: PLR2004
    kind = AccessKind.WRITE if write else AccessKind.READ
    return kind, encode_address(channel, info.register), value


def width_independence(rng: random.Random, samples: int) -> tuple[int, int]:
    """A register script leaves the same state and reads the same values at every CPU width."""
    scripts = max(1, samples // 400)
    failures = 0
    for _ in range(scripts):
        script = [_random_access(rng) for _ in range(200)]
        outcomes: list[tuple[object, object]] = []
        for width in CPU_DATA_WIDTHS:
            port = CpuPort(Core429(BusConfig(cpu_data_width=width)))
            results = [
                port.write(address, value) if kind is AccessKind.WRITE else port.read(address)
                for kind, address, value in script
            ]
            state = port.core.snapshot()
            del state["cpu_data_width"]
            outcomes.append(([(r.value, r.outcome) for r in results], state))
        failures += outcomes[0] != outcomes[1] or outcomes[1] != outcomes[2]
    return scripts, failures


def sixteen_channel_script(rng: random.Random, words: int) -> tuple[list[Directive], dict[int, list[int]]]:
    """Every Tx crossed to the Rx of the mirror channel at a random rate; returns the expected words per Rx."""
    lines: list[tuple[int, int]] = []
    expected: dict[int, list[int]] = {}
    for ch in range(MAX_CHANNELS):
        rx = MAX_CHANNELS - 1 - ch
        control = 0x05 if rng.random() < 0.5 else 0x01  # noqa: PLR2004
        payload = [rng.getrandbits(WORD_BITS) for _ in range(words)]
        expected[rx] = payload
        lines.append((encode_address(rx, Register.RX_CONTROL), control))
        lines += [(encode_address(ch, Register.TX_FIFO), word) for word in payload]
        lines.append((encode_address(ch, Register.TX_CONTROL), control))
    script = [Directive(DirectiveKind.WRITE, n + 1, address, value) for n, (address, value) in enumerate(lines)]
    return script, expected


def sixteen_channel_loopback(rng: random.Random, samples: int) -> tuple[int, int]:
    """All channels looped back at mixed rates: every word arrives in order, twice identically."""
    words = min(FIFO_DEPTH, max(1, samples // 20))
    config = SimulationConfig(
        wires=[WireConfig(tx_ref=ch, rx_refs=[MAX_CHANNELS - 1 - ch]) for ch in range(MAX_CHANNELS)]
    )
    script, expected = sixteen_channel_script(rng, words)
    first = run_simulation(config, script)
    second = run_simulation(config, script)
    failures = int(first.to_json() != second.to_json())
    failures += len(first.events)
    for rx, payload in expected.items():
        failures += [int(r.word, 16) for r in first.received[rx]] != payload
    return MAX_CHANNELS * words, failures


SUITES: dict[str, Callable[[random.Random, int], tuple[int, int]]] = {
    "codec_round_trip": codec_round_trip,
    "parity": parity_suite,
    "loopback": loopback_suite,
    "fifo_oracle": fifo_oracle,
    "interrupt_algebra": interrupt_algebra,
    "timing_law": timing_law,
    "label_filter": label_filter,
    "width_independence": width_independence,
    "sixteen_channel_loopback": sixteen_channel_loopback,
}


def run_selftest(seed: int, samples: int, only: list[str] | None = None) -> list[SuiteResult]:
    names = only or list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        msg = f"unknown suite(s) {unknown}; choose from {list(SUITES)}"
        raise ValueError(msg)

    results = []
    for name in names:
        rng = random.Random(f"{seed}:{name}")  # noqa: S311
        started = time.perf_counter()
        cases, failures = SUITES[name](rng, samples)
        result = SuiteResult(name, cases, failures, time.perf_counter() - started)
        logger.info("%s: %d cases, %d failures", name, cases, failures)
        results.append(result)
    return results


def format_results(results: list[SuiteResult]) -> str:
    width = max((len(result.name) for result in results), default=5)
    lines = [f"{'suite':<{width}}  {'cases':>8}  {'failures':>8}  {'seconds':>8}  result"]
    lines.extend(
        f"{r.name:<{width}}  {r.cases:>8}  {r.failures:>8}  {r.elapsed_s:>8.3f}  {'PASS' if r.passed else 'FAIL'}"
        for r in results
    )
    return "\n".join(lines)
