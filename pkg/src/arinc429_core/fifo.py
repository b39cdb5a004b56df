import logging
from collections import deque
from collections.abc import Iterator
from enum import Enum
from typing import NamedTuple

from arinc429_core.constants import DEFAULT_FIFO_LEVEL
from arinc429_core.constants import FIFO_DEPTH
from arinc429_core.word_codec import Arinc429Word

logger = logging.getLogger(__name__)


class FifoOutcome(Enum):
    OK = "ok"
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"


class FifoLevelError(ValueError):
    pass


class FifoFlags(NamedTuple):
    empty: bool
    half_full: bool
    full: bool


class WordFifo:
    """Bounded word queue with a programmable half-full watermark.

    A push onto a full FIFO drops the incoming word; stored words are never touched.
    """

    def __init__(self, capacity: int = FIFO_DEPTH, level: int = DEFAULT_FIFO_LEVEL) -> None:
        self.capacity = capacity
        self._storage: deque[Arinc429Word] = deque()
        self._level = capacity
        self.set_level(level)

    def __len__(self) -> int:
        return len(self._storage)

    def __iter__(self) -> Iterator[Arinc429Word]:
        return iter(self._storage)

    @property
    def occupancy(self) -> int:
        return len(self._storage)

    @property
    def level(self) -> int:
        return self._level

    def set_level(self, level: int) -> None:
        if not 1 <= level <= self.capacity:
            msg = f"FIFO level {level} out of range 1..{self.capacity}"
            raise FifoLevelError(msg)
        self._level = level

    def push(self, word: Arinc429Word) -> FifoOutcome:
        if len(self._storage) >= self.capacity:
            logger.debug("FIFO overflow, dropping %s", word)
            return FifoOutcome.OVERFLOW
        self._storage.append(word)
        return FifoOutcome.OK

    def pop(self) -> Arinc429Word | FifoOutcome:
        """Remove and return the oldest word, or ``FifoOutcome.UNDERFLOW`` when empty."""
        if not self._storage:
            return FifoOutcome.UNDERFLOW
        return self._storage.popleft()

    def clear(self) -> None:
        self._storage.clear()

    def flags(self) -> FifoFlags:
        occupancy = len(self._storage)
        return FifoFlags(
            empty=occupancy == 0,
            half_full=occupancy >= self._level,
            full=occupancy >= self.capacity,
        )
