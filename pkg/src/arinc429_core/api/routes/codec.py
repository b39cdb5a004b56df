import logging

from fastapi import APIRouter
from fastapi import HTTPException
from fastapi import status
from pydantic import BaseModel

from arinc429_core.word_codec import Arinc429Word
from arinc429_core.word_codec import FieldRangeError
from arinc429_core.word_codec import WordFields
from arinc429_core.word_codec import WordParseError
from arinc429_core.word_codec import assemble
from arinc429_core.word_codec import check_parity
from arinc429_core.word_codec import format_label
from arinc429_core.word_codec import parse_label
from arinc429_core.word_codec import parse_word

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/codec", tags=["codec"])


class EncodedWord(BaseModel):
    raw: int
    hex: str


class DecodedWord(EncodedWord):
    label: str  # octal
    sdi: int
    data: int
    ssm: int
    parity_bit: int
    parity_valid: bool

    @classmethod
    def from_word(cls, word: Arinc429Word) -> "DecodedWord":
        fields = word.fields()
        return cls(
            raw=word.raw,
            hex=word.hex,
            label=format_label(fields.label),
            sdi=fields.sdi,
            data=fields.data,
            ssm=fields.ssm,
            parity_bit=fields.parity_bit,
            parity_valid=check_parity(word),
        )


@router.get("/encode")
async def encode(label: str, sdi: int = 0, data: int = 0, ssm: int = 0, *, parity: bool = False) -> EncodedWord:
    """Assemble a word; ``label`` is octal text such as ``310``."""
    try:
        fields = WordFields(label=parse_label(label), sdi=sdi, data=data, ssm=ssm)
    except (WordParseError, FieldRangeError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from e
    word = assemble(fields, parity_enabled=parity)
    return EncodedWord(raw=word.raw, hex=word.hex)


@router.get("/decode/{word}")
async def decode(word: str) -> DecodedWord:
    try:
        parsed = parse_word(word)
    except WordParseError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from e
    return DecodedWord.from_word(parsed)
