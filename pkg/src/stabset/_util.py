from fractions import Fraction
from typing import Union

from .errors import InputError

RationalLike = Union[int, str, Fraction]


def parse_fraction(value: RationalLike) -> Fraction:
    """Parse ``3``, ``"3"``, ``"-3/4"`` or a Fraction into a Fraction.

    Floats are rejected on purpose: every value entering the exact modules
    must already be rational.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InputError(f"expected an exact rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse rational {value!r}") from exc
    raise InputError(f"cannot parse rational {value!r}")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rising(n: int, count: int) -> int:
    """(n+1)(n+2)...(n+count); the empty product is 1."""
    out = 1
    for i in range(1, count + 1):
        out *= n + i
    return out
