import random

import pytest

from arinc429_core.channel import ControlBits
from arinc429_core.channel import LabelRangeError
from arinc429_core.channel import RxChannel
from arinc429_core.channel import RxNotification
from arinc429_core.channel import RxNotificationKind
from arinc429_core.channel import StatusBits
from arinc429_core.channel import TxChannel
from arinc429_core.channel import interrupt_line
from arinc429_core.constants import BitRate
from arinc429_core.constants import LineLevel
from arinc429_core.fifo import FifoOutcome
from arinc429_core.line_coding import DemodPhase
from arinc429_core.line_coding import Span
from arinc429_core.line_coding import SymbolStream
from arinc429_core.line_coding import modulate_word
from arinc429_core.word_codec import Arinc429Word
from arinc429_core.word_codec import WordFields
from arinc429_core.word_codec import reverse_label


def feed(rx: RxChannel, stream: SymbolStream) -> list[RxNotification]:
    notes: list[RxNotification] = []
    for span in stream:
        notes.extend(rx.feed(span.level, span.duration_ns))
    return notes


def on_line(word: Arinc429Word, rate: BitRate = BitRate.HIGH) -> SymbolStream:
    return [Span(rate.gap_ns, LineLevel.NULL), *modulate_word(word, rate)]


def kinds(notes: list[RxNotification]) -> list[RxNotificationKind]:
    return [note.kind for note in notes]


def test_control_masks() -> None:
    tx = TxChannel()
    rx = RxChannel()
    tx.write_control(0xFF)
    rx.write_control(0xFF)
    assert tx.control == 0x77
    assert rx.control == 0x7F


def test_tx_inserts_parity_when_enabled() -> None:
    tx = TxChannel()
    tx.write_control(ControlBits.PARITY)
    tx.write_word(WordFields(label=0o310))
    tx.write_word(Arinc429Word(0x0000_0003))
    assert [word.hex for word in tx.fifo] == ["0x00000013", "0x80000003"]


def test_tx_passes_bit_32_through_without_parity() -> None:
    tx = TxChannel()
    tx.write_word(Arinc429Word(0x0000_0003))
    assert [word.raw for word in tx.fifo] == [0x0000_0003]


def test_tx_serializes_when_enabled() -> None:
    tx = TxChannel()
    tx.write_word(Arinc429Word(0x0000_0001))
    assert tx.tick(0) is None
    assert tx.status == 0

    tx.write_control(ControlBits.ENABLE)
    assert tx.tick(0) == Span(5_000, LineLevel.HI)
    assert tx.busy
    assert tx.status & StatusBits.BUSY
    assert tx.status & StatusBits.EMPTY
    assert tx.level_at(100) is LineLevel.HI
    assert tx.next_boundary_ns == 5_000
    assert tx.tick(2_500) is None
    assert tx.tick(5_000) == Span(5_000, LineLevel.NULL)
    assert tx.level_at(5_000) is LineLevel.NULL


def test_tx_goes_idle_after_the_gap() -> None:
    tx = TxChannel()
    tx.write_control(ControlBits.ENABLE)
    tx.write_word(Arinc429Word(0))
    now = 0
    spans = []
    while (span := tx.tick(now)) is not None:
        spans.append(span)
        now += span.duration_ns
    assert now == 360_000
    assert len(spans) == 65
    assert not tx.busy
    assert tx.words_sent == 1


def test_tx_rate_changes_land_on_word_boundaries() -> None:
    tx = TxChannel()
    tx.write_control(ControlBits.ENABLE)
    tx.write_word(Arinc429Word(0))
    tx.write_word(Arinc429Word(0))
    first = tx.tick(0)
    tx.write_control(ControlBits.ENABLE | ControlBits.RATE_LOW)
    assert first == Span(5_000, LineLevel.LO)
    assert tx.tick(5_000) == Span(5_000, LineLevel.NULL)
    assert tx.rate is BitRate.HIGH
    now = 10_000
    while (span := tx.tick(now)) is not None and now < 360_000:
        now += span.duration_ns
    assert tx.rate is BitRate.LOW
    assert span == Span(40_000, LineLevel.LO)


def test_tx_time_cannot_go_backwards() -> None:
    tx = TxChannel()
    tx.tick(10)
    with pytest.raises(ValueError, match="backwards"):
        tx.tick(5)


def test_tx_overflow_is_sticky_until_status_read() -> None:
    tx = TxChannel()
    for raw in range(512):
        assert tx.write_word(Arinc429Word(raw)) is FifoOutcome.OK
    assert tx.write_word(Arinc429Word(0)) is FifoOutcome.OVERFLOW
    status = tx.read_status()
    assert status & StatusBits.OVERFLOW
    assert status & StatusBits.FULL
    after = tx.read_status()
    assert not after & StatusBits.OVERFLOW
    assert after & StatusBits.FULL


def test_disabled_rx_ignores_the_line() -> None:
    rx = RxChannel()
    assert feed(rx, on_line(Arinc429Word(0x13))) == []
    assert rx.status & StatusBits.EMPTY


def test_rx_stores_words() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    word = Arinc429Word(0x8000_0013)
    assert kinds(feed(rx, on_line(word))) == [RxNotificationKind.STORED]
    assert rx.pop_word() == word
    assert rx.pop_word() is FifoOutcome.UNDERFLOW


def test_rx_uses_configured_rate() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE | ControlBits.RATE_LOW)
    word = Arinc429Word(0x1234_5678)
    assert kinds(feed(rx, on_line(word, BitRate.LOW))) == [RxNotificationKind.STORED]
    assert kinds(feed(rx, modulate_word(word, BitRate.HIGH))) == [RxNotificationKind.LINE_ERROR]


def test_rx_parity_error_drops_word() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE | ControlBits.PARITY)
    notes = feed(rx, on_line(Arinc429Word(0x0000_0003)))
    assert kinds(notes) == [RxNotificationKind.PARITY_ERROR]
    assert len(rx.fifo) == 0
    assert rx.read_status() & StatusBits.PARITY_ERROR
    assert not rx.read_status() & StatusBits.PARITY_ERROR


def test_rx_without_parity_check_keeps_bad_parity_words() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    assert kinds(feed(rx, on_line(Arinc429Word(0x0000_0003)))) == [RxNotificationKind.STORED]


def test_rx_label_filter() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE | ControlBits.LABEL_FILTER)
    word = Arinc429Word(0x0000_0013)  # label 310
    assert kinds(feed(rx, on_line(word))) == [RxNotificationKind.FILTERED]
    rx.set_label(0o310, enabled=True)
    assert rx.label_enabled(0o310)
    assert kinds(feed(rx, on_line(word))) == [RxNotificationKind.STORED]


def test_label_range() -> None:
    rx = RxChannel()
    with pytest.raises(LabelRangeError):
        rx.set_label(256, enabled=True)
    with pytest.raises(LabelRangeError):
        rx.label_enabled(-1)


def test_rx_overflow() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    for raw in range(512):
        rx.fifo.push(Arinc429Word(raw))
    notes = feed(rx, on_line(Arinc429Word(0x13)))
    assert kinds(notes) == [RxNotificationKind.OVERFLOW]
    assert rx.read_status() & StatusBits.OVERFLOW


def test_rx_line_error_is_sticky() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    stream = on_line(Arinc429Word(0xFFFF_FFFF))
    stream[5] = Span(7_000, LineLevel.HI)
    notes = feed(rx, stream)
    assert kinds(notes) == [RxNotificationKind.LINE_ERROR]
    assert rx.read_status() & StatusBits.LINE_ERROR
    assert not rx.read_status() & StatusBits.LINE_ERROR


def test_disabling_rx_resets_the_demodulator() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    feed(rx, on_line(Arinc429Word(0xFFFF_FFFF))[:10])
    assert rx.demod.phase is DemodPhase.SYNCED
    rx.write_control(0)
    assert rx.demod.phase is DemodPhase.IDLE
    assert rx.demod.null_run_ns == 0


@pytest.mark.parametrize("status", range(8))
@pytest.mark.parametrize("enables", range(8))
def test_interrupt_line(status: int, enables: int) -> None:
    expected = (status & enables) != 0
    assert interrupt_line(status, enables << 4) is expected
    # Sticky and busy bits never raise the line.
    assert interrupt_line(status | 0x78, enables << 4) is expected


def test_channel_interrupt_follows_fifo_flags() -> None:
    tx = TxChannel()
    tx.write_control(ControlBits.IRQ_ON_EMPTY)
    assert tx.interrupt
    tx.write_word(Arinc429Word(0))
    assert not tx.interrupt
    tx.set_fifo_level(1)
    tx.write_control(ControlBits.IRQ_ON_HALF_FULL)
    assert tx.interrupt


def test_rx_enabled_on_a_power_on_idle_line_catches_the_first_word() -> None:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE)
    word = Arinc429Word(0x8000_0013)
    assert kinds(feed(rx, modulate_word(word, BitRate.HIGH))) == [RxNotificationKind.STORED]
    assert rx.pop_word() == word


def test_idle_time_while_disabled_counts_toward_sync() -> None:
    rx = RxChannel()
    feed(rx, on_line(Arinc429Word(0x13)))
    feed(rx, [Span(BitRate.HIGH.gap_ns, LineLevel.NULL)])
    rx.write_control(ControlBits.ENABLE)
    assert kinds(feed(rx, modulate_word(Arinc429Word(0x13), BitRate.HIGH))) == [RxNotificationKind.STORED]


def test_rx_enabled_mid_word_waits_for_the_next_gap() -> None:
    rx = RxChannel()
    first = modulate_word(Arinc429Word(0xFFFF_FFFF), BitRate.HIGH)
    feed(rx, first[:21])
    rx.write_control(ControlBits.ENABLE)
    assert feed(rx, first[21:]) == []
    assert kinds(feed(rx, modulate_word(Arinc429Word(0x13), BitRate.HIGH))) == [RxNotificationKind.STORED]
    assert [word.raw for word in rx.fifo] == [0x13]


def filtering_rx(*labels: int) -> RxChannel:
    rx = RxChannel()
    rx.write_control(ControlBits.ENABLE | ControlBits.LABEL_FILTER)
    for label in labels:
        rx.set_label(label, enabled=True)
    return rx


def test_label_disabled_mid_gap_drops_the_next_word() -> None:
    rx = filtering_rx(0o310)
    feed(rx, [Span(20_000, LineLevel.NULL)])
    rx.set_label(0o310, enabled=False)
    feed(rx, [Span(20_000, LineLevel.NULL)])
    assert kinds(feed(rx, modulate_word(Arinc429Word(0x13), BitRate.HIGH))) == [RxNotificationKind.FILTERED]
    assert len(rx.fifo) == 0


def test_label_toggled_between_words_keeps_only_the_enabled_one() -> None:
    rx = filtering_rx(0o310)
    first, second = Arinc429Word(0x0000_0413), Arinc429Word(0x0000_0813)
    assert kinds(feed(rx, on_line(first))) == [RxNotificationKind.STORED]
    rx.set_label(0o310, enabled=False)
    assert kinds(feed(rx, modulate_word(second, BitRate.HIGH))) == [RxNotificationKind.FILTERED]
    assert list(rx.fifo) == [first]


@pytest.mark.parametrize(("before", "after", "kind"), [(True, False, "filtered"), (False, True, "stored")])
def test_label_table_is_read_when_the_word_completes(before: bool, after: bool, kind: str) -> None:  # noqa: FBT001
    rx = filtering_rx()
    rx.set_label(0o310, enabled=before)
    stream = modulate_word(Arinc429Word(0x13), BitRate.HIGH)
    assert feed(rx, stream[:40]) == []
    rx.set_label(0o310, enabled=after)
    assert kinds(feed(rx, stream[40:])) == [RxNotificationKind(kind)]


# Index of bit 32's NULL half-cell: the span during which a word completes.
COMPLETING_SPAN = 2 * 32 - 1


def test_label_filter_against_event_ordered_oracle() -> None:
    rng = random.Random(9)
    enabled = rng.sample(range(256), 64)
    rx = filtering_rx(*enabled)
    table = [label in enabled for label in range(256)]
    expected: list[Arinc429Word] = []
    stored: list[Arinc429Word] = []
    for _ in range(1_000):
        # Labels drawn mostly from the enabled set so both outcomes are common.
        label = rng.choice(enabled) if rng.random() < 0.5 else rng.randrange(256)
        word = Arinc429Word((rng.getrandbits(24) << 8) | reverse_label(label))
        for index, span in enumerate(modulate_word(word, BitRate.HIGH)):
            if index == COMPLETING_SPAN and table[label]:
                expected.append(word)
            rx.feed(span.level, span.duration_ns)
            if rng.random() < 0.02:
                toggled = rng.choice(enabled)
                table[toggled] = not table[toggled]
                rx.set_label(toggled, enabled=table[toggled])
        while not isinstance(popped := rx.pop_word(), FifoOutcome):
            stored.append(popped)
    assert stored == expected
    assert len(expected) > 100
