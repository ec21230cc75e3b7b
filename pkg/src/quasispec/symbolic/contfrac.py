"""Exact continued fractions for rotation numbers.

Rotation numbers are never taken from floats: a float has only ~15 meaningful
partial quotients.  Accepted inputs are exact quadratic numbers
``(p + q*sqrt(d)) / r``, explicit (optionally periodic) quotient lists, and the
named constants ``golden`` and ``silver``.  Rationals are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from ..errors import DomainError, SiteRangeError


@dataclass(frozen=True)
class QuadraticNumber:
    """The number ``(a + b*sqrt(d)) / c`` with integer parts, ``c > 0``.

    ``b == 0`` gives a rational; the class is closed under the operations the
    circle map and the continued-fraction expansion need.
    """

    a: int
    b: int
    d: int
    c: int = 1

    def __post_init__(self):
        if self.c == 0:
            raise DomainError("zero denominator")
        if self.d < 0:
            raise DomainError("negative radicand")
        a, b, c = self.a, self.b, self.c
        if c < 0:
            a, b, c = -a, -b, -c
        if b != 0 and math.isqrt(self.d) ** 2 == self.d:
            a, b = a + b * math.isqrt(self.d), 0
        g = math.gcd(math.gcd(a, b), c)
        object.__setattr__(self, "a", a // g)
        object.__setattr__(self, "b", b // g)
        object.__setattr__(self, "c", c // g)

    @classmethod
    def from_rational(cls, x, d: int = 5) -> "QuadraticNumber":
        x = Fraction(x)
        return cls(x.numerator, 0, d, x.denominator)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def _coerce(self, other) -> "QuadraticNumber":
        if isinstance(other, QuadraticNumber):
            if other.b != 0 and self.b != 0 and other.d != self.d:
                raise DomainError("quadratic numbers from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber.from_rational(other, self.d)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self.d if self.b != 0 else o.d
        return QuadraticNumber(self.a * o.c + o.a * self.c,
                               self.b * o.c + o.b * self.c, d, self.c * o.c)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d, self.c)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        if isinstance(k, int):
            return QuadraticNumber(self.a * k, self.b * k, self.d, self.c)
        return NotImplemented

    __rmul__ = __mul__

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa >= 0 and sb >= 0:
            return 1 if (sa or sb) else 0
        if sa <= 0 and sb <= 0:
            return -1
        lhs, rhs = self.a * self.a, self.b * self.b * self.d
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def floor(self) -> int:
        if self.b >= 0:
            t = math.isqrt(self.b * self.b * self.d)
        else:
            t = -math.isqrt(self.b * self.b * self.d) - 1
        return (self.a + t) // self.c

    def reciprocal(self) -> "QuadraticNumber":
        den = self.a * self.a - self.b * self.b * self.d
        if den == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticNumber(self.c * self.a, -self.c * self.b, self.d, den)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self) -> float:
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __str__(self):
        return f"({self.a}+{self.b}*sqrt({self.d}))/{self.c}"


def quadratic_irrational(p: int, q: int, d: int, r: int) -> QuadraticNumber:
    """``(p + q*sqrt(d)) / r``; rejects inputs that are actually rational."""
    x = QuadraticNumber(p, q, d, r)
    if x.is_rational:
        raise DomainError(f"({p}+{q}*sqrt({d}))/{r} is rational; rotation numbers must be irrational")
    return x


GOLDEN = QuadraticNumber(-1, 1, 5, 2)
SILVER = QuadraticNumber(-1, 1, 2, 1)


@dataclass(frozen=True)
class PeriodicQuotients:
    """Quotient list ``prefix`` followed by ``period`` repeated forever."""

    prefix: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        if not self.period:
            raise DomainError("empty period")

    def __iter__(self) -> Iterator[int]:
        yield from self.prefix
        while True:
            yield from self.period


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients ``a_1..a_N`` with convergents ``p_n/q_n``, ``n = 0..N``.

    ``quotients[n-1]`` is ``a_n``; ``numerators[n]`` and ``denominators[n]``
    are ``p_n`` and ``q_n`` (so index 0 holds ``p_0 = 0``, ``q_0 = 1``).
    """

    quotients: tuple[int, ...]
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]
    value: QuadraticNumber | None = None

    @property
    def depth(self) -> int:
        return len(self.quotients)

    def a(self, n: int) -> int:
        if not 1 <= n <= self.depth:
            raise SiteRangeError(f"a_{n} outside depth {self.depth}")
        return self.quotients[n - 1]

    def q(self, n: int) -> int:
        if not 0 <= n <= self.depth:
            raise SiteRangeError(f"q_{n} outside depth {self.depth}")
        return self.denominators[n]

    def p(self, n: int) -> int:
        if not 0 <= n <= self.depth:
            raise SiteRangeError(f"p_{n} outside depth {self.depth}")
        return self.numerators[n]

    def approx(self) -> float:
        """Float value of alpha (exact source if known, else last convergent)."""
        if self.value is not None:
            return float(self.value)
        return self.numerators[-1] / self.denominators[-1]

    @classmethod
    def from_quotients(cls, quotients: Sequence[int], value=None) -> "ContinuedFraction":
        quotients = tuple(int(a) for a in quotients)
        if not quotients:
            raise DomainError("need at least one partial quotient")
        if any(a < 1 for a in quotients):
            raise DomainError("partial quotients must be positive integers")
        p, q = [0, 1], [1, quotients[0]]
        for a in quotients[1:]:
            p.append(a * p[-1] + p[-2])
            q.append(a * q[-1] + q[-2])
        return cls(quotients, tuple(p), tuple(q), value)


AlphaSpec = Union[str, QuadraticNumber, Fraction, PeriodicQuotients, Sequence[int], tuple]


def _expand_quadratic(x: QuadraticNumber, depth: int) -> list[int]:
    if not (0 < x < 1):
        raise DomainError(f"rotation number {x} not in (0, 1)")
    if x.is_rational:
        raise DomainError(f"rotation number {x} is rational")
    out = []
    y = x.reciprocal()
    for _ in range(depth):
        a = y.floor()
        out.append(a)
        y = (y - a).reciprocal()
    return out


def _reject_rational(x: Fraction):
    # expand to show where it terminates; rationals never qualify
    quotients, y = [], Fraction(x)
    while y.numerator:
        y = 1 / y
        a = math.floor(y)
        quotients.append(a)
        y -= a
    raise DomainError(
        f"rotation number {x} is rational (expansion terminates after "
        f"{len(quotients)} quotients {quotients})")


def continued_fraction(alpha_spec: AlphaSpec, depth: int) -> ContinuedFraction:
    """Expand an exact rotation number to ``depth`` partial quotients.

    >>> continued_fraction("golden", 6).denominators[:6]
    (1, 1, 2, 3, 5, 8)
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if isinstance(alpha_spec, str):
        alpha_spec = parse_alpha(alpha_spec)
    if isinstance(alpha_spec, bool) or isinstance(alpha_spec, float):
        raise DomainError("float rotation numbers are rejected; pass an exact spec "
                          "(quadratic irrational, quotient list, 'golden', ...)")
    if isinstance(alpha_spec, QuadraticNumber):
        if alpha_spec.is_rational:
            _reject_rational(Fraction(alpha_spec.a, alpha_spec.c))
        return ContinuedFraction.from_quotients(_expand_quadratic(alpha_spec, depth), alpha_spec)
    if isinstance(alpha_spec, (Fraction, int)):
        _reject_rational(Fraction(alpha_spec))
    if isinstance(alpha_spec, PeriodicQuotients):
        it = iter(alpha_spec)
        return ContinuedFraction.from_quotients([next(it) for _ in range(depth)],
                                                _periodic_value(alpha_spec))
    quotients = list(alpha_spec)
    if any(isinstance(a, float) for a in quotients):
        raise DomainError("partial quotients must be integers")
    if depth > len(quotients):
        raise SiteRangeError(f"explicit quotient list has only {len(quotients)} terms, "
                             f"depth {depth} requested")
    return ContinuedFraction.from_quotients(quotients[:depth])


def _periodic_value(spec: PeriodicQuotients) -> QuadraticNumber | None:
    """Exact value of an eventually periodic expansion [0; prefix, (period)]."""
    # Moebius map y -> (A y + B)/(C y + D) for the tail [a_1; a_2, ..., a_k, y]
    A, B, C, D = 1, 0, 0, 1
    for a in spec.period:
        A, B, C, D = A * a + B, A, C * a + D, C
    # y = (A y + B)/(C y + D)  =>  C y^2 + (D - A) y - B = 0, y > 1
    disc = (D - A) ** 2 + 4 * C * B
    y = QuadraticNumber(A - D, 1, disc, 2 * C)
    # prefix: x = [0; prefix..., y]
    x = y
    for a in reversed(spec.prefix):
        x = x.reciprocal() + a
    return x.reciprocal()


_QUAD_RE = re.compile(r"^quad:\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(\d+)\s*,\s*(-?\d+)\s*$")
_CF_RE = re.compile(r"^cf:\s*([\d,\s]*?)\s*(?:,?\s*\(([\d,\s]+)\))?\s*$")


def parse_alpha(text: str):
    """Parse the alpha grammar: ``golden``, ``silver``, ``quad:p,q,d,r``,
    ``cf:a1,a2,...[,(period)]`` and ``rational:p/q`` (which is rejected).
    """
    t = text.strip().lower()
    if t == "golden":
        return GOLDEN
    if t == "silver":
        return SILVER
    m = _QUAD_RE.match(t)
    if m:
        return quadratic_irrational(*(int(g) for g in m.groups()))
    m = _CF_RE.match(t)
    if m:
        prefix = tuple(int(s) for s in m.group(1).replace(" ", "").split(",") if s)
        if m.group(2):
            period = tuple(int(s) for s in m.group(2).replace(" ", "").split(",") if s)
            return PeriodicQuotients(prefix, period)
        if not prefix:
            raise DomainError(f"empty quotient list in {text!r}")
        return prefix
    if t.startswith("rational:"):
        _reject_rational(Fraction(t.split(":", 1)[1]))
    raise DomainError(f"cannot parse rotation number {text!r}; bare decimals are refused, "
                      "use golden, silver, quad:p,q,d,r or cf:a1,a2,...[,(period)]")
