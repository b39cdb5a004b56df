from enum import Enum

WORD_BITS = 32
GAP_BIT_TIMES = 4
FIFO_DEPTH = 512
DEFAULT_FIFO_LEVEL = 256
MAX_CHANNELS = 16
ADDRESS_BITS = 9
NS_PER_S = 1_000_000_000

# Half-cell duration tolerance accepted by the receiver, in percent of nominal.
HALF_CELL_TOLERANCE_PCT = 5


class LineLevel(Enum):
    """Tri-state line level. COLLISION only appears where two sources drive one wire."""

    HI = 1
    NULL = 0
    LO = -1
    COLLISION = 2

    @property
    def symbol(self) -> str:
        """Rendering used in trace CSV files."""
        if self is LineLevel.HI:
            return "+1"
        if self is LineLevel.LO:
            return "-1"
        if self is LineLevel.NULL:
            return "0"
        return "X"

    @classmethod
    def from_bit(cls, bit: int) -> "LineLevel":
        return cls.HI if bit else cls.LO


class BitRate(Enum):
    HIGH = 100_000
    LOW = 12_500

    @property
    def bit_period_ns(self) -> int:
        return NS_PER_S // self.value

    @property
    def half_period_ns(self) -> int:
        return self.bit_period_ns // 2

    @property
    def gap_ns(self) -> int:
        return GAP_BIT_TIMES * self.bit_period_ns

    @property
    def word_ns(self) -> int:
        """Duration of one modulated word including its trailing gap."""
        return (WORD_BITS + GAP_BIT_TIMES) * self.bit_period_ns

    @classmethod
    def from_select(cls, *, low: bool) -> "BitRate":
        return cls.LOW if low else cls.HIGH
