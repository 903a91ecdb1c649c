"""Exact Gaussian rationals, the coefficient field of every series."""

from __future__ import annotations

from fractions import Fraction

from gmpy2 import mpq, mpz

__all__ = ["GaussQ", "arith", "conj", "is_real", "parse_rational", "format_rational"]


def _q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; pass a rational")
    return mpq(x)


def parse_rational(text: str) -> mpq:
    """Parse "p/q" or an integer string into a reduced rational."""
    if not isinstance(text, str):
        raise TypeError(f"expected a string, got {type(text).__name__}")
    s = text.strip()
    if not s or any(c not in "0123456789-+/" for c in s):
        raise ValueError(f"not an exact rational: {text!r}")
    num, _, den = s.partition("/")
    try:
        p, q = int(num), int(den) if den else 1
    except ValueError as exc:
        raise ValueError(f"not an exact rational: {text!r}") from exc
    if q == 0:
        raise ZeroDivisionError(f"zero denominator in {text!r}")
    return mpq(p, q)


def format_rational(x: mpq) -> str:
    """Canonical string: "p/q" in lowest terms with q > 0, or "p" when q == 1."""
    x = mpq(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class GaussQ:
    """Complex number re + i*im with exact rational parts.

    Values are immutable and always reduced (gmpy2 keeps mpq in lowest terms).
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _q(re))
        object.__setattr__(self, "im", _q(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussQ is immutable")

    @classmethod
    def coerce(cls, x) -> "GaussQ":
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, complex):
            raise TypeError("complex floats are not accepted")
        return cls(x, 0)

    @classmethod
    def parse(cls, re: str, im: str) -> "GaussQ":
        return cls(parse_rational(re), parse_rational(im))

    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        return GaussQ(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b, c, d = self.re, self.im, o.re, o.im
        return GaussQ((a * c + b * d) / n, (b * c - a * d) / n)

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GaussQ(1) / self ** (-n)
        out, base = GaussQ(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def norm(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return not self.re and not self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussQ({format_rational(self.re)!r}, {format_rational(self.im)!r})"

    def __str__(self):
        if not self.im:
            return format_rational(self.re)
        if not self.re:
            return f"{format_rational(self.im)}i"
        sign = "-" if self.im < 0 else "+"
        return f"{format_rational(self.re)}{sign}{format_rational(abs(self.im))}i"


def _coerce_or_none(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Fraction, mpq, mpz)):
        return GaussQ(x, 0)
    return None


ZERO = GaussQ(0)
ONE = GaussQ(1)
I = GaussQ(0, 1)

_OPS = {
    "add": GaussQ.__add__,
    "sub": GaussQ.__sub__,
    "mul": GaussQ.__mul__,
    "div": GaussQ.__truediv__,
}


def arith(a: GaussQ, b: GaussQ, op: str) -> GaussQ:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(GaussQ.coerce(a), GaussQ.coerce(b))


def conj(a: GaussQ) -> GaussQ:
    return GaussQ.coerce(a).conjugate()


def is_real(a: GaussQ) -> bool:
    return not GaussQ.coerce(a).im
