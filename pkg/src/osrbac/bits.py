"""Fixed-width permission bit vectors.

A vector's width is fixed by the rights registry of its category; one bit
per named right. Vectors are immutable; set operations return new vectors.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BitVector:
    width: int
    mask: int = 0

    def __post_init__(self):
        if self.width < 0:
            raise ValueError("negative width")
        if self.mask < 0 or self.mask >> self.width:
            raise ValueError(f"mask 0x{self.mask:x} out of range for width {self.width}")

    @classmethod
    def zeros(cls, width: int) -> "BitVector":
        return cls(width, 0)

    @classmethod
    def ones(cls, width: int) -> "BitVector":
        return cls(width, (1 << width) - 1)

    @classmethod
    def from_bits(cls, width: int, positions) -> "BitVector":
        mask = 0
        for i in positions:
            if not 0 <= i < width:
                raise ValueError(f"bit {i} out of range for width {width}")
            mask |= 1 << i
        return cls(width, mask)

    @classmethod
    def parse(cls, text: str) -> "BitVector":
        """Parse a 0/1 string; leftmost character is bit 0."""
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        mask = 0
        for i, ch in enumerate(text):
            if ch == "1":
                mask |= 1 << i
        return cls(len(text), mask)

    def dump(self) -> str:
        return "".join("1" if self.get(i) else "0" for i in range(self.width))

    def get(self, i: int) -> bool:
        if not 0 <= i < self.width:
            raise ValueError(f"bit {i} out of range for width {self.width}")
        return bool(self.mask >> i & 1)

    def set(self, i: int, value: bool = True) -> "BitVector":
        if not 0 <= i < self.width:
            raise ValueError(f"bit {i} out of range for width {self.width}")
        mask = self.mask | (1 << i) if value else self.mask & ~(1 << i)
        return BitVector(self.width, mask)

    def _check_peer(self, other: "BitVector") -> None:
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")

    def union(self, other: "BitVector") -> "BitVector":
        self._check_peer(other)
        return BitVector(self.width, self.mask | other.mask)

    def intersection(self, other: "BitVector") -> "BitVector":
        self._check_peer(other)
        return BitVector(self.width, self.mask & other.mask)

    def contains(self, other: "BitVector") -> bool:
        """True iff every bit set in ``other`` is set in ``self``."""
        self._check_peer(other)
        return other.mask & ~self.mask == 0

    def any(self) -> bool:
        return self.mask != 0

    def __or__(self, other: "BitVector") -> "BitVector":
        return self.union(other)

    def __and__(self, other: "BitVector") -> "BitVector":
        return self.intersection(other)

    def __repr__(self):
        return f"BitVector({self.dump()!r})"
