"""Granular rationals and the rounded threshold grids ``{ceil(a^j), floor(a^j)} / gamma``."""

import bisect
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from boxmso.core.errors import OutOfRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class GranularRational:
    """``numerator / granularity`` kept at an explicit granularity."""
    numerator: int
    granularity: int = 1

    def __post_init__(self) -> None:
        if self.granularity < 1:
            raise OutOfRangeError(f"granularity must be positive, got {self.granularity}")

    @classmethod
    def of(cls, value: Fraction | int, granularity: int = 1) -> "GranularRational":
        scaled = Fraction(value) * granularity
        if scaled.denominator != 1:
            raise OutOfRangeError(f"{value} is not a multiple of 1/{granularity}")
        return cls(int(scaled), granularity)

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.granularity)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.granularity}"


class RoundedSet:
    """
    The grid of ``ceil(alpha^j)/gamma`` and ``floor(alpha^j)/gamma`` inside
    ``[0, limit]``, together with ``0`` and ``limit``.

    Members are handled as numerators over ``granularity``. When the grid
    step ``alpha - 1`` is at most ``1/(limit * gamma)`` every numerator is a
    member and nothing is materialized.
    """

    def __init__(self, alpha: Fraction, limit: Fraction | int, granularity: int = 1) -> None:
        alpha, limit = Fraction(alpha), Fraction(limit)
        if alpha <= 1:
            raise OutOfRangeError(f"accuracy must exceed 1, got {alpha}")
        if limit < 0 or granularity < 1:
            raise OutOfRangeError("limit must be nonnegative and granularity positive")
        self.alpha = alpha
        self.limit = limit
        self.granularity = granularity
        top = limit * granularity
        if top.denominator != 1:
            raise OutOfRangeError(f"limit {limit} is not a multiple of 1/{granularity}")
        self.top = int(top)
        self.dense = (alpha - 1) * self.top <= 1
        self._numerators: list[int] = [] if self.dense else _grid(alpha, self.top)

    @property
    def numerators(self) -> list[int]:
        if self.dense:
            return list(range(self.top + 1))
        return list(self._numerators)

    @property
    def values(self) -> list[Fraction]:
        return [Fraction(k, self.granularity) for k in self.numerators]

    def __len__(self) -> int:
        return self.top + 1 if self.dense else len(self._numerators)

    def __contains__(self, value: Fraction | int) -> bool:
        scaled = Fraction(value) * self.granularity
        if scaled.denominator != 1 or not 0 <= scaled <= self.top:
            return False
        if self.dense:
            return True
        i = bisect.bisect_left(self._numerators, int(scaled))
        return i < len(self._numerators) and self._numerators[i] == scaled

    def round_up_numerator(self, numerator: int) -> int:
        """Smallest member numerator that is at least ``numerator``."""
        if not 0 <= numerator <= self.top:
            raise OutOfRangeError(f"{numerator}/{self.granularity} lies outside [0, {self.limit}]")
        if self.dense:
            return numerator
        return self._numerators[bisect.bisect_left(self._numerators, numerator)]

    def round_up(self, value: Fraction | int) -> Fraction:
        """Smallest member ``m~`` with ``m <= m~ <= alpha * m``."""
        numerator = self.round_up_numerator(math.ceil(Fraction(value) * self.granularity))
        return Fraction(numerator, self.granularity)

    def __repr__(self) -> str:
        return (
            f"RoundedSet(alpha={self.alpha}, limit={self.limit}, "
            f"granularity={self.granularity}, size={len(self)})"
        )


_FIXED_BITS = 96


@lru_cache(maxsize=256)
def _grid(alpha: Fraction, top: int) -> list[int]:
    # alpha^j is bracketed in fixed point; exact powers only where the bracket straddles an integer
    p, q = alpha.numerator, alpha.denominator
    members = {0, 1, top}
    lo = hi = 1 << _FIXED_BITS
    j = 0
    while True:
        j += 1
        lo = lo * p // q
        hi = -(-hi * p // q)
        floor_lo, floor_hi = lo >> _FIXED_BITS, hi >> _FIXED_BITS
        if floor_lo > top:
            break
        ceil_lo = -(-lo >> _FIXED_BITS)
        ceil_hi = -(-hi >> _FIXED_BITS)
        if floor_lo == floor_hi and ceil_lo == ceil_hi:
            floor, ceiling = floor_lo, ceil_lo
        else:
            num, den = p**j, q**j
            floor, ceiling = num // den, -(-num // den)
            if floor > top:
                break
        members.add(floor)
        if ceiling <= top:
            members.add(ceiling)
    return sorted(m for m in members if m <= top)


@lru_cache(maxsize=256)
def rounded_set(b: int, limit: Fraction | int, granularity: int = 1) -> RoundedSet:
    """The grid at accuracy ``1 + 1/b``."""
    if b < 1:
        raise OutOfRangeError(f"b must be positive, got {b}")
    return RoundedSet(1 + Fraction(1, b), limit, granularity)

