"""Exact ground fields: arbitrary-precision rationals and prime fields F_p.

Scalars are stored raw (``fractions.Fraction`` for Q, canonical ``int`` in
``[0, p)`` for F_p); a :class:`Field` value carries the tag and implements the
arithmetic. Mixing tags is rejected wherever two fields meet.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24 (we only need < 2^31)."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class FieldMismatch(ValueError):
    """Arithmetic attempted between values of different ground fields."""


@dataclass(frozen=True)
class Field:
    """Ground field tag: ``p is None`` means Q, otherwise F_p with p prime."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not (2 <= self.p < 2**31):
                raise ValueError(f"prime field modulus out of range: {self.p}")
            if not _is_prime(self.p):
                raise ValueError(f"{self.p} is not prime")

    # -- presentation ------------------------------------------------------

    def __str__(self) -> str:
        return "q" if self.p is None else f"f{self.p}"

    @property
    def char(self) -> int:
        return 0 if self.p is None else self.p

    # -- scalar arithmetic on raw values -----------------------------------

    @property
    def zero(self):
        return Fraction(0) if self.p is None else 0

    @property
    def one(self):
        return Fraction(1) if self.p is None else 1

    def coerce(self, v):
        """Coerce an int / Fraction / raw value into this field's raw scalar."""
        if self.p is None:
            return Fraction(v)
        if isinstance(v, Fraction):
            if v.denominator % self.p == 0:
                raise ZeroDivisionError(f"denominator divisible by {self.p}")
            return v.numerator * pow(v.denominator, self.p - 2, self.p) % self.p
        return int(v) % self.p

    def add(self, a, b):
        return a + b if self.p is None else (a + b) % self.p

    def sub(self, a, b):
        return a - b if self.p is None else (a - b) % self.p

    def mul(self, a, b):
        return a * b if self.p is None else (a * b) % self.p

    def neg(self, a):
        return -a if self.p is None else (-a) % self.p

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a if self.p is None else pow(a, self.p - 2, self.p)

    def is_zero(self, a) -> bool:
        return not a

    # -- exchange-format serialization --------------------------------------

    def format_scalar(self, a) -> str:
        """Canonical text form: ``a/b`` (or ``a``) over Q, ``n mod p`` over F_p."""
        if self.p is None:
            return str(a.numerator) if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
        return f"{a} mod {self.p}"

    def parse_scalar(self, text: str):
        text = text.strip()
        if self.p is None:
            return Fraction(text)
        if "mod" in text:
            n, p = (t.strip() for t in text.split("mod"))
            if int(p) != self.p:
                raise FieldMismatch(f"scalar '{text}' has modulus {p}, field is {self}")
            return int(n) % self.p
        return int(text) % self.p


QQ = Field(None)


def GF(p: int) -> Field:
    return Field(p)


def check_same_field(a: Field, b: Field) -> None:
    if a != b:
        raise FieldMismatch(f"field mismatch: {a} vs {b}")
