"""Bit-string primitives: XOR combination, inner product mod 2, slicing.

All protocol material (keys, challenges, tags) is carried as
:class:`BitString` values.  Indexing is 1-based throughout the public
API: bit 1 is the leftmost character of the textual form, so
``BitString("0101").bit(1) == 0`` and ``.bit(4) == 1``.  The textual
encoding used in files and logs is the plain ASCII '0'/'1' string.
"""

from __future__ import annotations

from .errors import EmptyInput, LengthMismatch, OutOfRange

_VALID_CHARS = frozenset("01")


class BitString:
    """Immutable fixed-length binary string.

    Backed by a non-negative integer whose most significant bit (within
    ``length``) is bit 1, so that integer XOR realizes bitwise XOR and
    shifts realize slicing.  Values are hashable and compare by content.
    """

    __slots__ = ("_value", "_length")

    def __init__(self, text: str = ""):
        if not _VALID_CHARS.issuperset(text):
            raise ValueError(f"bit string may contain only '0'/'1': {text!r}")
        self._value = int(text, 2) if text else 0
        self._length = len(text)

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitString":
        """Wrap a non-negative integer as a bit string of ``length`` bits."""
        if length < 0:
            raise OutOfRange(f"length must be >= 0, got {length}")
        if value < 0 or value >> length:
            raise OutOfRange(f"value {value} does not fit in {length} bits")
        bs = cls.__new__(cls)
        bs._value = value
        bs._length = length
        return bs

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls.from_int(0, length)

    @classmethod
    def random(cls, length: int, rng) -> "BitString":
        """Uniform random bit string drawn from ``rng.getrandbits``."""
        if length < 0:
            raise OutOfRange(f"length must be >= 0, got {length}")
        return cls.from_int(rng.getrandbits(length) if length else 0, length)

    @property
    def value(self) -> int:
        """Integer value; bit 1 of the string is the most significant bit."""
        return self._value

    @property
    def length(self) -> int:
        return self._length

    def __len__(self) -> int:
        return self._length

    def bit(self, i: int) -> int:
        """Return bit ``i`` (1-based; bit 1 is the leftmost)."""
        if not 1 <= i <= self._length:
            raise OutOfRange(f"bit index {i} outside 1..{self._length}")
        return (self._value >> (self._length - i)) & 1

    def slice(self, a: int, b: int) -> "BitString":
        """Return bits ``a..b`` inclusive (1-based); length is b-a+1."""
        if not 1 <= a or not a <= b or not b <= self._length:
            raise OutOfRange(f"slice {a}..{b} invalid for length {self._length}")
        width = b - a + 1
        return BitString.from_int(
            (self._value >> (self._length - b)) & ((1 << width) - 1), width
        )

    def concat(self, other: "BitString") -> "BitString":
        return BitString.from_int(
            (self._value << other._length) | other._value,
            self._length + other._length,
        )

    def __xor__(self, other: "BitString") -> "BitString":
        if self._length != other._length:
            raise LengthMismatch(
                f"cannot XOR lengths {self._length} and {other._length}"
            )
        return BitString.from_int(self._value ^ other._value, self._length)

    def popcount(self) -> int:
        return self._value.bit_count()

    def is_zero(self) -> bool:
        return self._value == 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._value == other._value and self._length == other._length

    def __hash__(self) -> int:
        return hash((self._value, self._length))

    def __str__(self) -> str:
        return format(self._value, f"0{self._length}b") if self._length else ""

    def __repr__(self) -> str:
        return f"BitString({str(self)!r})"


def xor_combine(shares: list[BitString]) -> BitString:
    """Bitwise XOR of a non-empty list of equal-length bit strings.

    Raises
    ------
    EmptyInput
        If ``shares`` is empty.
    LengthMismatch
        If the shares do not all have the same length.
    """
    if not shares:
        raise EmptyInput("xor_combine requires at least one share")
    length = shares[0].length
    acc = 0
    for s in shares:
        if s.length != length:
            raise LengthMismatch(
                f"share lengths differ: {s.length} != {length}"
            )
        acc ^= s.value
    return BitString.from_int(acc, length)


def inner_product(a: BitString, b: BitString) -> int:
    """Inner product mod 2 of two equal-length bit strings."""
    if a.length != b.length:
        raise LengthMismatch(
            f"inner_product lengths differ: {a.length} != {b.length}"
        )
    return (a.value & b.value).bit_count() & 1


def split_key(k: BitString, s: int) -> tuple[BitString, BitString]:
    """Split ``k`` into its s-bit prefix and the remaining suffix.

    ``prefix.concat(rest)`` reconstructs ``k``.  ``s`` may be 0 or
    ``len(k)``; anything outside ``0..len(k)`` raises :class:`OutOfRange`.
    """
    if not 0 <= s <= k.length:
        raise OutOfRange(f"split point {s} outside 0..{k.length}")
    if s == 0:
        return BitString.zeros(0), k
    if s == k.length:
        return k, BitString.zeros(0)
    return k.slice(1, s), k.slice(s + 1, k.length)
