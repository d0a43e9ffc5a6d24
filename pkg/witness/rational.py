"""
Exact rational helpers: bounded-denominator enumeration, mediants and
denominator expansion, plus exact integer powers used to place the
lattices N^-alpha Z.

All arithmetic is on Python ints and fractions.Fraction, so denominators of
size N^2 and products of size N^4 are exact for any N.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .exceptions import ConstructionInfeasible, EmptyIntervalError, OrderingError

# Rationals are kept in lowest terms by fractions.Fraction.
ReducedRational = Fraction

# Exponents given as floats are snapped to the nearest p/q with q <= this.
EXPONENT_MAX_DENOMINATOR = 1000


@dataclass(frozen=True)
class UnreducedFraction:
    """A representative num/den that is deliberately not reduced (2/4, 4/12)."""

    num: int
    den: int

    def __post_init__(self):
        if self.den < 1:
            raise ValueError(f'denominator must be positive, got {self.den}')

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __lt__(self, other):
        # cross-multiplication keeps the representatives untouched
        return self.num * other.den < other.num * self.den

    def __str__(self):
        return f'{self.num}/{self.den}'


def as_rational(value) -> Fraction:
    if isinstance(value, UnreducedFraction):
        return value.value
    if isinstance(value, (Rational, float, str)):
        return Fraction(value)
    raise TypeError(f'cannot read {value!r} as an exact rational')


def as_exponent(alpha) -> Fraction:
    """Read an exponent such as 1, 0.75, '2/3' or Fraction(1, 3) exactly."""
    if isinstance(alpha, Rational):
        return Fraction(alpha)
    if isinstance(alpha, str):
        return Fraction(alpha.strip()).limit_denominator(EXPONENT_MAX_DENOMINATOR)
    if isinstance(alpha, float):
        if not math.isfinite(alpha):
            raise ValueError(f'exponent must be finite, got {alpha}')
        return Fraction(alpha).limit_denominator(EXPONENT_MAX_DENOMINATOR)
    raise TypeError(f'cannot read {alpha!r} as an exponent')


def _iroot_floor(n: int, k: int) -> int:
    # Newton iteration on integers, returns floor(n ** (1/k))
    if n < 0:
        raise ValueError('root of a negative integer')
    if n < 2 or k == 1:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            return x
        x = y


def integer_root(n: int, k: int):
    """Exact k-th root of n, or None when n is not a perfect k-th power."""
    r = _iroot_floor(n, k)
    return r if r ** k == n else None


def exact_power(N: int, e) -> Fraction | None:
    """N ** e as an exact rational when it is one, else None."""
    e = as_exponent(e)
    root = integer_root(N ** abs(e.numerator), e.denominator)
    if root is None:
        return None
    return Fraction(root) if e >= 0 else Fraction(1, root)


def floor_power(N: int, e) -> int:
    """Exact floor(N ** e) for e >= 0; 4096 ** (1/3) is 16, not 15."""
    e = as_exponent(e)
    if e < 0:
        raise ValueError('floor_power needs a nonnegative exponent')
    return _iroot_floor(N ** e.numerator, e.denominator)


def real_power(N: int, e) -> float:
    exact = exact_power(N, e)
    if exact is not None:
        return float(exact)
    return float(N) ** float(as_exponent(e))


def enumerate_fractions(lo, hi, qmax: int) -> list[Fraction]:
    """
    All distinct rationals r with lo <= r <= hi whose reduced denominator is
    at most qmax, in increasing order. Both endpoints are included.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if lo >= hi:
        raise EmptyIntervalError(f'empty interval [{lo}, {hi}]')
    if qmax < 1:
        raise ValueError(f'qmax must be at least 1, got {qmax}')

    found = []
    for q in range(1, qmax + 1):
        # ceil(lo * q) and floor(hi * q) without leaving the integers
        p_first = -((-lo.numerator * q) // lo.denominator)
        p_last = (hi.numerator * q) // hi.denominator
        for p in range(p_first, p_last + 1):
            if math.gcd(p, q) == 1:
                found.append(Fraction(p, q))
    found.sort()
    return found


def count_fractions(lo, hi, qmax: int) -> int:
    return len(enumerate_fractions(lo, hi, qmax))


def consecutive_gaps(fractions: list[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """(r_{i+1} - r_i, 1/(den_i * den_{i+1})) for each neighbouring pair."""
    return [
        (right - left, Fraction(1, left.denominator * right.denominator))
        for left, right in zip(fractions, fractions[1:])
    ]


def farey_density(x, y) -> float:
    """#{r in [x, 2x] : den(r) <= y} / (x * y^2); tends to a constant ~ 3/pi^2."""
    x = as_rational(x)
    qmax = math.floor(y)
    return count_fractions(x, 2 * x, qmax) / (float(x) * float(y) ** 2)


def mediant(f1: UnreducedFraction, f2: UnreducedFraction) -> UnreducedFraction:
    if not f1 < f2:
        raise OrderingError(f'mediant needs {f1} < {f2}')
    return UnreducedFraction(f1.num + f2.num, f1.den + f2.den)


def expand_to_range(r: Fraction, lo, hi) -> UnreducedFraction:
    """
    Rewrite r with the smallest denominator in [lo, hi] that is a multiple
    of its reduced denominator.
    """
    r = Fraction(r)
    lo, hi = as_rational(lo), as_rational(hi)
    if lo <= 0:
        raise ValueError(f'lower denominator bound must be positive, got {lo}')
    q = r.denominator
    k = max(1, math.ceil(lo / q))
    if k * q > hi:
        raise ConstructionInfeasible(
            f'no multiple of {q} lies in [{float(lo):.6g}, {float(hi):.6g}] (expanding {r})'
        )
    return UnreducedFraction(r.numerator * k, q * k)
