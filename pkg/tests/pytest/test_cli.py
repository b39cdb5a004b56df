import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from arinc429_core.cli import app
from arinc429_core.cli import cli_main

runner = CliRunner()

CONFIG = {"bus": {"cpu_data_width": 16, "num_channels": 2}, "wires": [{"tx_ref": 0, "rx_refs": [1]}]}
SCRIPT = """\
WRITE 0x023 0x01
WAIT 320000
WRITE 0x002 0x00000013
WRITE 0x000 0x01
WAIT 400000
READ 0x025 0x00000013
"""


@pytest.fixture
def sim_inputs(tmp_path: Path) -> tuple[Path, Path]:
    config = tmp_path / "config.json"
    config.write_text(json.dumps(CONFIG))
    script = tmp_path / "run.script"
    script.write_text(SCRIPT)
    return config, script


def test_encode(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["encode", "--label", "310", "--sdi", "0", "--data", "0", "--ssm", "0", "--parity"]) == 0
    assert capsys.readouterr().out == "0x00000013\n"


def test_encode_without_parity() -> None:
    result = runner.invoke(app, ["encode", "--label", "1", "--data", "0x7FFFF"])
    assert result.exit_code == 0
    assert result.stdout.strip() == "0x1FFFFC80"


def test_encode_rejects_bad_label(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["encode", "--label", "9"]) == 1
    assert "position 1" in capsys.readouterr().err


def test_encode_rejects_out_of_range_field(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["encode", "--label", "1", "--sdi", "4"]) == 1
    assert "sdi=4" in capsys.readouterr().err


def test_decode(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["decode", "0x80000000"]) == 0
    out = capsys.readouterr().out
    assert "label   000" in out
    assert "sdi     0" in out
    assert "data    0" in out
    assert "ssm     0" in out
    assert "parity  1 (valid)" in out


def test_decode_parse_error(capsys: pytest.CaptureFixture[str]) -> None:
    assert cli_main(["decode", "0xZZ"]) == 1
    assert "position 3" in capsys.readouterr().err


def test_usage_errors_exit_1() -> None:
    assert cli_main(["no-such-command"]) == 1
    assert cli_main(["encode"]) == 1


def test_simulate_writes_report_and_traces(tmp_path: Path, sim_inputs: tuple[Path, Path]) -> None:
    config, script = sim_inputs
    out = tmp_path / "out"
    code = cli_main(["simulate", "--config", str(config), "--script", str(script), "--out", str(out), "--strict"])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["received"]["1"][0]["word"] == "0x00000013"
    assert report["expectation_failures"] == []
    assert report["snapshot"]["cpu_data_width"] == 16
    assert (out / "wire0.csv").read_text().startswith("0,320000,0\n")


def test_simulate_is_deterministic(tmp_path: Path, sim_inputs: tuple[Path, Path]) -> None:
    config, script = sim_inputs
    for name in ("a", "b"):
        cli_main(["simulate", "--config", str(config), "--script", str(script), "--out", str(tmp_path / name)])
    for file in ("report.json", "wire0.csv"):
        assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()


def test_simulate_strict_expectation_failure(tmp_path: Path, sim_inputs: tuple[Path, Path]) -> None:
    config, script = sim_inputs
    script.write_text(SCRIPT.replace("READ 0x025 0x00000013", "READ 0x025 0x00000014"))
    args = ["simulate", "--config", str(config), "--script", str(script), "--out", str(tmp_path / "out")]
    assert cli_main(args) == 0
    assert cli_main([*args, "--strict"]) == 2


def test_simulate_abort_exits_2(tmp_path: Path, sim_inputs: tuple[Path, Path], capsys: pytest.CaptureFixture[str]) -> None:
    config, script = sim_inputs
    script.write_text("WAIT 5\nREAD 0x045\n")  # channel 2 does not exist
    code = cli_main(["simulate", "--config", str(config), "--script", str(script), "--out", str(tmp_path)])
    assert code == 2
    assert "script line 2" in capsys.readouterr().err


def test_simulate_with_faults(tmp_path: Path, sim_inputs: tuple[Path, Path]) -> None:
    config, script = sim_inputs
    faults = tmp_path / "faults.json"
    faults.write_text(json.dumps({"faults": [{"kind": "truncate_word", "word_index": 0, "after_bits": 4}]}))
    out = tmp_path / "out"
    args = ["simulate", "--config", str(config), "--script", str(script), "--faults", str(faults), "--out", str(out)]
    assert cli_main(args) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["received"]["1"] == []
    assert [event["kind"] for event in report["events"]] == ["fault_applied", "line_error", "access"]


@pytest.mark.parametrize(
    "document",
    [
        {"wires": [{"tx_ref": 0, "rx_refs": [0]}, {"tx_ref": 0, "rx_refs": [1]}]},
        {"bus": {"cpu_data_width": 12}},
        {"bus": {"num_channels": 2}, "wires": [{"tx_ref": 3}]},
    ],
)
def test_simulate_invalid_config_exits_1(tmp_path: Path, sim_inputs: tuple[Path, Path], document: dict) -> None:  # type: ignore[type-arg]
    config, script = sim_inputs
    config.write_text(json.dumps(document))
    assert cli_main(["simulate", "--config", str(config), "--script", str(script), "--out", str(tmp_path)]) == 1


def test_simulate_script_parse_error(tmp_path: Path, sim_inputs: tuple[Path, Path], capsys: pytest.CaptureFixture[str]) -> None:
    config, script = sim_inputs
    script.write_text("WRITE 0x000\n")
    assert cli_main(["simulate", "--config", str(config), "--script", str(script), "--out", str(tmp_path)]) == 1
    assert "line 1, column 1" in capsys.readouterr().err


def test_example_configs(tmp_path: Path) -> None:
    configs = Path(__file__).parents[2] / "configs"
    args = [
        "simulate",
        "--config",
        str(configs / "loopback_example.json"),
        "--script",
        str(configs / "loopback_example.script"),
    ]
    assert cli_main([*args, "--out", str(tmp_path / "clean"), "--strict"]) == 0
    clean = json.loads((tmp_path / "clean" / "report.json").read_text())
    assert [r["word"] for r in clean["received"]["1"]] == ["0x00000013", "0x0004A8E0"]
    assert [r["word"] for r in clean["received"]["0"]] == ["0xE0000041"]
    assert clean["end_ns"] == 6_120_000

    faulted = tmp_path / "faulted"
    assert cli_main([*args, "--out", str(faulted), "--faults", str(configs / "faults_example.json")]) == 0
    report = json.loads((faulted / "report.json").read_text())
    kinds = [event["kind"] for event in report["events"]]
    assert kinds.count("fault_applied") == 3
    assert kinds.count("parity_error") == 1
    assert kinds.count("line_error") == 1
    assert report["received"]["1"] == []
    assert [f["directive"] for f in report["expectation_failures"]] == ["EXPECT_IRQ", "READ"]


def test_simulate_missing_file(tmp_path: Path) -> None:
    missing = str(tmp_path / "missing.json")
    assert cli_main(["simulate", "--config", missing, "--script", missing, "--out", str(tmp_path)]) == 1


def test_selftest_subset(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli_main(["selftest", "--samples", "20", "--suite", "codec_round_trip", "--suite", "parity"])
    assert code == 0
    out = capsys.readouterr().out
    assert "codec_round_trip" in out
    assert "FAIL" not in out


def test_selftest_unknown_suite() -> None:
    assert cli_main(["selftest", "--suite", "nope"]) == 1


def test_register_map() -> None:
    result = runner.invoke(app, ["register-map", "--width", "8"])
    assert result.exit_code == 0
    assert "TX_FIFO" in result.stdout
    row = next(line for line in result.stdout.splitlines() if "RX_FIFO_LEVEL" in line)
    assert row.split()[-1] == "2"
