"""Tape advice model: a bit tape written by an oracle, read sequentially online."""

import logging
from typing import Iterable, List

logger = logging.getLogger(__name__)


class AdviceError(ValueError):
    """Raised on invalid advice fields or tapes that do not fit the instance."""


class TapeUnderrunError(AdviceError):
    """Raised when a read runs past the written end of the tape."""


class AdviceInconsistencyError(AdviceError):
    """Raised when advice contradicts the replayed computation it describes."""


def self_delimited_length(x: int) -> int:
    """Number of bits the self-delimited code spends on ``x``."""
    return 2 * (x + 1).bit_length() - 1


def fixed_width(count: int) -> int:
    """Width of a field able to hold any value in 0..count."""
    return count.bit_length()


class AdviceTape:
    """Append-only bit string with a sequential read cursor.

    ``bits_read`` is the advice complexity charged to the reader. Reads past
    the written end raise ``TapeUnderrunError`` instead of returning zeros.
    """

    def __init__(self, bits: Iterable[int] = ()) -> None:
        self._bits: List[int] = []
        self._cursor = 0
        for bit in bits:
            self.write_bit(bit)

    @property
    def bits_written(self) -> int:
        return len(self._bits)

    @property
    def bits_read(self) -> int:
        return self._cursor

    @property
    def read_cursor(self) -> int:
        return self._cursor

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._cursor

    @property
    def bits(self) -> tuple:
        return tuple(self._bits)

    def copy(self) -> "AdviceTape":
        """Return an unread copy of this tape for a fresh reader."""
        return AdviceTape(self._bits)

    def write_bit(self, bit: int) -> None:
        if bit not in (0, 1):
            raise AdviceError(f"Advice bits must be 0 or 1, got {bit!r}")
        self._bits.append(int(bit))

    def read_bit(self) -> int:
        if self._cursor >= len(self._bits):
            raise TapeUnderrunError(f"Read past end of tape at bit {self._cursor} of {len(self._bits)}")
        bit = self._bits[self._cursor]
        self._cursor += 1
        return bit

    def write_fixed(self, x: int, width: int) -> int:
        """Write ``x`` big-endian in ``width`` bits.

        Returns:
            Number of bits written

        Raises:
            AdviceError: If x does not fit in width bits
        """
        if width < 0 or x < 0 or x >= (1 << width):
            raise AdviceError(f"Value {x} does not fit in a {width}-bit field")
        for shift in range(width - 1, -1, -1):
            self._bits.append((x >> shift) & 1)
        return width

    def read_fixed(self, width: int) -> int:
        if width < 0:
            raise AdviceError(f"Field width must be nonnegative, got {width}")
        value = 0
        for _ in range(width):
            value = (value << 1) | self.read_bit()
        return value

    def write_self_delimited(self, x: int) -> int:
        """Write L-1 zeros then the L-bit binary form of x+1 (2L-1 bits total).

        Raises:
            AdviceError: If x is negative
        """
        if x < 0:
            raise AdviceError(f"Self-delimited values must be nonnegative, got {x}")
        length = (x + 1).bit_length()
        self.write_fixed(0, length - 1)
        self.write_fixed(x + 1, length)
        return 2 * length - 1

    def read_self_delimited(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
        value = 1
        for _ in range(zeros):
            value = (value << 1) | self.read_bit()
        return value - 1

    def to_bitstring(self) -> str:
        return "".join(str(bit) for bit in self._bits)

    def to_hex(self) -> str:
        """Serialize as ``bits=<count>;<hex>``, zero-padded on the right to whole nibbles."""
        count = len(self._bits)
        if count == 0:
            return "bits=0;"
        padded = self._bits + [0] * (-count % 4)
        digits = []
        for offset in range(0, len(padded), 4):
            nibble = int("".join(str(bit) for bit in padded[offset : offset + 4]), 2)
            digits.append(format(nibble, "x"))
        return f"bits={count};{''.join(digits)}"

    @classmethod
    def from_hex(cls, text: str) -> "AdviceTape":
        """Inverse of ``to_hex``.

        Raises:
            AdviceError: If the header or digits are malformed
        """
        header, _, digits = text.strip().partition(";")
        if not header.startswith("bits="):
            raise AdviceError(f"Tape serialization must start with 'bits=', got {text!r}")
        try:
            count = int(header[len("bits="):])
            value_bits = [int(ch, 16) for ch in digits]
        except ValueError:
            raise AdviceError(f"Malformed tape serialization: {text!r}")
        bits: List[int] = []
        for nibble in value_bits:
            bits.extend((nibble >> shift) & 1 for shift in (3, 2, 1, 0))
        if count < 0 or count > len(bits) or len(bits) - count >= 4:
            raise AdviceError(f"Bit count {count} does not match {len(digits)} hex digits")
        return cls(bits[:count])

    def __repr__(self) -> str:
        return f"AdviceTape(written={self.bits_written}, read={self.bits_read})"
