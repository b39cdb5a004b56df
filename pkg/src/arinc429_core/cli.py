import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Annotated

import click
import typer
from pydantic import ValidationError

from arinc429_core.bus_core import REGISTER_TABLE
from arinc429_core.core.config import FaultPlan
from arinc429_core.core.config import SimulationConfig
from arinc429_core.core.config import TopologyError
from arinc429_core.core.config import get_settings
from arinc429_core.script import ScriptParseError
from arinc429_core.script import parse_script
from arinc429_core.selftest import SUITES
from arinc429_core.selftest import format_results
from arinc429_core.selftest import run_selftest
from arinc429_core.simulator import SimulationAbortError
from arinc429_core.simulator import run_simulation
from arinc429_core.simulator import write_outputs
from arinc429_core.word_codec import FieldRangeError
from arinc429_core.word_codec import WordFields
from arinc429_core.word_codec import WordParseError
from arinc429_core.word_codec import assemble
from arinc429_core.word_codec import check_parity
from arinc429_core.word_codec import format_label
from arinc429_core.word_codec import parse_label
from arinc429_core.word_codec import parse_word

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2

app = typer.Typer(no_args_is_help=True, help="ARINC 429 word codec and Core429 bus simulator.")


@app.callback()
def configure(
    log_level: Annotated[str | None, typer.Option(help="Logging level, overrides settings.log_level")] = None,
) -> None:
    logging.basicConfig(level=(log_level or get_settings().log_level).upper())


def _fail(message: str, code: int = EXIT_USAGE) -> typer.Exit:
    typer.echo(message, err=True)
    return typer.Exit(code=code)


@app.command()
def encode(
    label: Annotated[str, typer.Option(help="Label in octal, e.g. 310")],
    sdi: Annotated[int, typer.Option(help="Source/destination identifier, 0-3")] = 0,
    data: Annotated[str, typer.Option(help="19-bit data field; 0x/0o/0b prefixes accepted")] = "0",
    ssm: Annotated[int, typer.Option(help="Sign/status matrix, 0-3")] = 0,
    parity: Annotated[bool, typer.Option("--parity/--no-parity", help="Compute odd parity into bit 32")] = False,  # noqa: FBT002
) -> None:
    """Assemble a word from its fields and print it as hex."""
    try:
        fields = WordFields(label=parse_label(label), sdi=sdi, data=int(data, 0), ssm=ssm)
    except (WordParseError, FieldRangeError) as exc:
        raise _fail(f"error: {exc}") from None
    except ValueError:
        raise _fail(f"error: malformed data value {data!r}") from None
    typer.echo(assemble(fields, parity_enabled=parity).hex)


@app.command()
def decode(word: Annotated[str, typer.Argument(help="32-bit word in hex, e.g. 0x80000013")]) -> None:
    """Split a hex word into its fields."""
    try:
        parsed = parse_word(word)
    except WordParseError as exc:
        raise _fail(f"error: {exc}") from None
    fields = parsed.fields()
    valid = "valid" if check_parity(parsed) else "INVALID"
    typer.echo(f"word    {parsed.hex}")
    typer.echo(f"label   {format_label(fields.label)}")
    typer.echo(f"sdi     {fields.sdi}")
    typer.echo(f"data    {fields.data}")
    typer.echo(f"ssm     {fields.ssm}")
    typer.echo(f"parity  {fields.parity_bit} ({valid})")


@app.command()
def simulate(
    config: Annotated[Path, typer.Option(exists=True, dir_okay=False, help="Topology/bus JSON document")],
    script: Annotated[Path, typer.Option(exists=True, dir_okay=False, help="Stimulus script")],
    out: Annotated[Path, typer.Option(file_okay=False, help="Directory for report.json and wire<N>.csv")],
    faults: Annotated[Path | None, typer.Option(exists=True, dir_okay=False, help="Fault plan JSON")] = None,
    strict: Annotated[bool, typer.Option(help="Exit 2 when a READ or EXPECT_IRQ expectation fails")] = False,  # noqa: FBT002
) -> None:
    """Run a stimulus script against a simulated core and write the report and traces."""
    try:
        sim_config = SimulationConfig.model_validate_json(config.read_text(encoding="utf-8"))
        plan = FaultPlan.model_validate_json(faults.read_text(encoding="utf-8")) if faults else FaultPlan()
        directives = parse_script(script.read_text(encoding="utf-8"))
        report = run_simulation(sim_config, directives, plan)
    except (ValidationError, ScriptParseError, TopologyError) as exc:
        raise _fail(f"error: {exc}") from None
    except SimulationAbortError as exc:
        raise _fail(f"aborted: {exc}", EXIT_FAILURE) from None

    write_outputs(report, out, get_settings().report_indent)
    typer.echo(
        f"end_ns={report.end_ns} received={report.words_received} events={len(report.events)} "
        f"expectation_failures={len(report.expectation_failures)}"
    )
    if strict and report.expectation_failures:
        raise typer.Exit(code=EXIT_FAILURE)


@app.command()
def selftest(
    seed: Annotated[int | None, typer.Option(help="Random seed, defaults to settings.selftest_seed")] = None,
    samples: Annotated[int | None, typer.Option(min=1, help="Samples per suite")] = None,
    suite: Annotated[list[str] | None, typer.Option(help=f"Run only these suites: {', '.join(SUITES)}")] = None,
) -> None:
    """Run the seeded invariant suites and print a summary table."""
    current = get_settings()
    try:
        results = run_selftest(
            current.selftest_seed if seed is None else seed,
            samples or current.selftest_samples,
            suite,
        )
    except ValueError as exc:
        raise _fail(f"error: {exc}") from None
    typer.echo(format_results(results))
    if not all(result.passed for result in results):
        raise typer.Exit(code=EXIT_FAILURE)


@app.command("register-map")
def register_map_command(
    width: Annotated[int, typer.Option(help="CPU data width used for the beat count")] = 32,
) -> None:
    """Print the per-channel register map."""
    if width not in {8, 16, 32}:
        raise _fail("error: width must be 8, 16 or 32")
    typer.echo("offset  register        access  bits  beats")
    for offset, info in sorted(REGISTER_TABLE.items()):
        beats = -(-info.width_bits // width)
        typer.echo(f"0x{offset:02X}    {info.register.name:<14}  {info.access.value:<6}  {info.width_bits:>4}  {beats:>5}")


def cli_main(argv: Sequence[str]) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        code = app(args=list(argv), prog_name="arinc429", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except typer.Abort:
        return EXIT_USAGE
    return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
