"""Line-oriented stimulus scripts.

One directive per line, ``#`` starts a comment::

    WRITE 0x000 0x01        # TX_CONTROL of channel 0
    WAIT 400000
    READ 0x005 0x00000013   # optional expected value
    EXPECT_IRQ 1

Numbers accept Python integer literal prefixes (``0x``, ``0o``, ``0b``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from arinc429_core.bus_core import ADDRESS_LIMIT

logger = logging.getLogger(__name__)


class DirectiveKind(Enum):
    WRITE = "WRITE"
    READ = "READ"
    WAIT = "WAIT"
    EXPECT_IRQ = "EXPECT_IRQ"


class ScriptParseError(ValueError):
    def __init__(self, line: int, column: int, reason: str) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {reason}")


@dataclass(frozen=True, slots=True)
class Directive:
    kind: DirectiveKind
    line: int
    address: int | None = None
    # WRITE: data, READ: expected value (optional), WAIT: nanoseconds, EXPECT_IRQ: level
    value: int | None = None


_ARITY = {
    DirectiveKind.WRITE: (2, 2),
    DirectiveKind.READ: (1, 2),
    DirectiveKind.WAIT: (1, 1),
    DirectiveKind.EXPECT_IRQ: (1, 1),
}


def _tokens(text: str) -> list[tuple[int, str]]:
    """Split into (1-based column, token) pairs."""
    tokens: list[tuple[int, str]] = []
    column = 0
    for part in text.split():
        column = text.index(part, column)
        tokens.append((column + 1, part))
        column += len(part)
    return tokens


def _number(line: int, column: int, token: str) -> int:
    try:
        value = int(token, 0)
    except ValueError:
        raise ScriptParseError(line, column, f"malformed number {token!r}") from None
    if value < 0:
        raise ScriptParseError(line, column, f"negative value {token!r}")
    return value


def parse_directive(line_number: int, text: str) -> Directive | None:
    body = text.split("#", 1)[0]
    tokens = _tokens(body)
    if not tokens:
        return None

    column, word = tokens[0]
    try:
        kind = DirectiveKind(word.upper())
    except ValueError:
        raise ScriptParseError(line_number, column, f"unknown directive {word!r}") from None

    args = tokens[1:]
    low, high = _ARITY[kind]
    if not low <= len(args) <= high:
        raise ScriptParseError(line_number, column, f"{kind.value} takes {low}-{high} arguments, got {len(args)}")
    values = [_number(line_number, col, token) for col, token in args]

    match kind:
        case DirectiveKind.WRITE | DirectiveKind.READ:
            if values[0] >= ADDRESS_LIMIT:
                raise ScriptParseError(line_number, args[0][0], f"address {values[0]:#x} exceeds cpu_add[8:0]")
            expected = values[1] if len(values) > 1 else None
            return Directive(kind, line_number, address=values[0], value=expected)
        case DirectiveKind.WAIT:
            if values[0] == 0:
                raise ScriptParseError(line_number, args[0][0], "WAIT needs a positive duration")
            return Directive(kind, line_number, value=values[0])
        case DirectiveKind.EXPECT_IRQ:
            if values[0] not in {0, 1}:
                raise ScriptParseError(line_number, args[0][0], "EXPECT_IRQ level must be 0 or 1")
            return Directive(kind, line_number, value=values[0])


def parse_script(text: str) -> list[Directive]:
    directives = []
    for number, line in enumerate(text.splitlines(), start=1):
        directive = parse_directive(number, line)
        if directive is not None:
            directives.append(directive)
    logger.debug("parsed %d directives", len(directives))
    return directives
