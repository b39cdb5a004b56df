"""Assemble, disassemble and parity-protect 32-bit ARINC 429 words.

ARINC bit ``n`` lives at binary position ``n - 1`` of ``raw``. The label occupies
bits 1-8 and is stored bit-reversed, so ARINC bit 1 carries the label's most
significant digit, which is the order it goes out on the wire.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass

logger = logging.getLogger(__name__)

WORD_MASK = 0xFFFF_FFFF
LABEL_MASK = 0x0000_00FF
SDI_SHIFT = 8
SDI_MASK = 0x0000_0300
DATA_SHIFT = 10
DATA_MASK = 0x1FFF_FC00
SSM_SHIFT = 29
SSM_MASK = 0x6000_0000
PARITY_SHIFT = 31
PARITY_MASK = 0x8000_0000
BITS_1_TO_31_MASK = 0x7FFF_FFFF

FIELD_MASKS = (LABEL_MASK, SDI_MASK, DATA_MASK, SSM_MASK, PARITY_MASK)

_FIELD_LIMITS = {
    "label": 1 << 8,
    "sdi": 1 << 2,
    "data": 1 << 19,
    "ssm": 1 << 2,
    "parity_bit": 1 << 1,
}


class FieldRangeError(ValueError):
    """A word field does not fit its bit width."""

    def __init__(self, field: str, value: int) -> None:
        self.field = field
        self.value = value
        msg = f"{field}={value} out of range 0..{_FIELD_LIMITS[field] - 1}"
        super().__init__(msg)


class WordRangeError(ValueError):
    pass


class WordParseError(ValueError):
    """Text could not be parsed; ``position`` is the 1-based index of the offending character."""

    def __init__(self, text: str, position: int, reason: str) -> None:
        self.text = text
        self.position = position
        super().__init__(f"{reason} at position {position} in {text!r}")


def reverse_label(label: int) -> int:
    """Reverse the 8 bits of ``label``. The operation is its own inverse."""
    return int(f"{label & LABEL_MASK:08b}"[::-1], 2)


def format_label(label: int) -> str:
    return f"{label:03o}"


def format_word(raw: int) -> str:
    return f"0x{raw:08X}"


@dataclass(frozen=True, slots=True)
class WordFields:
    label: int
    sdi: int = 0
    data: int = 0
    ssm: int = 0
    parity_bit: int = 0

    def __post_init__(self) -> None:
        for name, limit in _FIELD_LIMITS.items():
            value = getattr(self, name)
            if not 0 <= value < limit:
                raise FieldRangeError(name, value)


@dataclass(frozen=True, slots=True)
class Arinc429Word:
    raw: int

    def __post_init__(self) -> None:
        if not 0 <= self.raw <= WORD_MASK:
            msg = f"raw word {self.raw:#x} does not fit in 32 bits"
            raise WordRangeError(msg)

    def __str__(self) -> str:
        return self.hex

    @property
    def hex(self) -> str:
        return format_word(self.raw)

    @property
    def label(self) -> int:
        return reverse_label(self.raw & LABEL_MASK)

    @property
    def parity_ok(self) -> bool:
        return check_parity(self)

    def bit(self, n: int) -> int:
        """ARINC bit ``n`` (1-based)."""
        return (self.raw >> (n - 1)) & 1

    def fields(self) -> WordFields:
        return disassemble(self)

    def with_parity(self) -> Arinc429Word:
        """Return this word with bit 32 recomputed for odd parity."""
        bits = self.raw & BITS_1_TO_31_MASK
        return Arinc429Word(bits | (compute_parity(bits) << PARITY_SHIFT))


def compute_parity(bits_1_to_31: int) -> int:
    """Return the bit 32 value that gives the full word odd parity."""
    if not 0 <= bits_1_to_31 <= BITS_1_TO_31_MASK:
        msg = f"{bits_1_to_31:#x} does not fit in 31 bits"
        raise WordRangeError(msg)
    return 1 - (bits_1_to_31.bit_count() & 1)


def assemble(fields: WordFields, *, parity_enabled: bool) -> Arinc429Word:
    raw = (
        reverse_label(fields.label)
        | (fields.sdi << SDI_SHIFT)
        | (fields.data << DATA_SHIFT)
        | (fields.ssm << SSM_SHIFT)
    )
    parity_bit = compute_parity(raw) if parity_enabled else fields.parity_bit
    return Arinc429Word(raw | (parity_bit << PARITY_SHIFT))


def disassemble(word: Arinc429Word) -> WordFields:
    raw = word.raw
    return WordFields(
        label=reverse_label(raw & LABEL_MASK),
        sdi=(raw & SDI_MASK) >> SDI_SHIFT,
        data=(raw & DATA_MASK) >> DATA_SHIFT,
        ssm=(raw & SSM_MASK) >> SSM_SHIFT,
        parity_bit=(raw & PARITY_MASK) >> PARITY_SHIFT,
    )


def check_parity(word: Arinc429Word) -> bool:
    return word.raw.bit_count() & 1 == 1


def _parse_digits(text: str, base: int, digits: str, prefix: str, limit: int) -> int:
    stripped = text.strip()
    offset = len(text) - len(text.lstrip())
    body = stripped
    if stripped.lower().startswith(prefix):
        body = stripped[len(prefix) :]
        offset += len(prefix)
    for index, char in enumerate(body):
        if char not in digits and char != "_":
            raise WordParseError(text, offset + index + 1, f"invalid digit {char!r}")
    if not body.replace("_", ""):
        raise WordParseError(text, offset + 1, "missing digits")
    value = int(body.replace("_", ""), base)
    if value >= limit:
        raise WordParseError(text, 1, f"value {value:#x} too large")
    return value


def parse_word(text: str) -> Arinc429Word:
    """Parse a hex word such as ``0x80000013``; the ``0x`` prefix is optional."""
    return Arinc429Word(_parse_digits(text, 16, string.hexdigits, "0x", WORD_MASK + 1))


def parse_label(text: str) -> int:
    """Parse an octal label such as ``310`` or ``0o310``."""
    return _parse_digits(text, 8, string.octdigits, "0o", 1 << 8)
