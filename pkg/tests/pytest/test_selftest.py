import random

import pytest

from arinc429_core.constants import WORD_BITS
from arinc429_core.script import DirectiveKind
from arinc429_core.selftest import SUITES
from arinc429_core.selftest import SuiteResult
from arinc429_core.selftest import format_results
from arinc429_core.selftest import run_selftest
from arinc429_core.selftest import sixteen_channel_script


@pytest.mark.parametrize(
    "name",
    [
        "codec_round_trip",
        "parity",
        "loopback",
        "fifo_oracle",
        "interrupt_algebra",
        "label_filter",
        "width_independence",
        "sixteen_channel_loopback",
    ],
)
def test_suite_passes(name: str) -> None:
    [result] = run_selftest(429, 20, [name])
    assert result.name == name
    assert result.cases > 0
    assert result.passed


def test_timing_law() -> None:
    [result] = run_selftest(1, 1, ["timing_law"])
    assert (result.cases, result.failures) == (2, 0)


def test_parity_case_count() -> None:
    [result] = run_selftest(7, 10, ["parity"])
    assert result.cases == 10 * (WORD_BITS + 1)


def test_results_are_seeded() -> None:
    first = run_selftest(5, 30, ["fifo_oracle", "codec_round_trip"])
    second = run_selftest(5, 30, ["fifo_oracle", "codec_round_trip"])
    assert [(r.name, r.cases, r.failures) for r in first] == [(r.name, r.cases, r.failures) for r in second]


def test_unknown_suite() -> None:
    with pytest.raises(ValueError, match="unknown suite"):
        run_selftest(0, 1, ["parity", "bogus"])


def test_all_suites_by_default() -> None:
    assert list(SUITES) == [
        "codec_round_trip",
        "parity",
        "loopback",
        "fifo_oracle",
        "interrupt_algebra",
        "timing_law",
        "label_filter",
        "width_independence",
        "sixteen_channel_loopback",
    ]


def test_format_results() -> None:
    table = format_results([SuiteResult("parity", 33, 0, 0.25), SuiteResult("loopback", 4, 1, 1.5)])
    header, passed, failed = table.splitlines()
    assert header.split() == ["suite", "cases", "failures", "seconds", "result"]
    assert passed.split() == ["parity", "33", "0", "0.250", "PASS"]
    assert failed.split() == ["loopback", "4", "1", "1.500", "FAIL"]


def test_label_filter_scales_with_samples() -> None:
    [result] = run_selftest(3, 40, ["label_filter"])
    assert (result.cases, result.failures) == (200, 0)


def test_sixteen_channel_loopback_counts_every_word() -> None:
    [result] = run_selftest(3, 100, ["sixteen_channel_loopback"])
    assert (result.cases, result.failures) == (16 * 5, 0)


def test_sixteen_channel_script_mirrors_channels() -> None:
    script, expected = sixteen_channel_script(random.Random(1), 3)
    assert sorted(expected) == list(range(16))
    assert all(len(words) == 3 for words in expected.values())
    # Rx enable, three words and a Tx enable per channel, all at t=0.
    assert len(script) == 16 * 5
    assert all(directive.kind is DirectiveKind.WRITE for directive in script)
