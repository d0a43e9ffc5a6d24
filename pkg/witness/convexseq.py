"""
Convex sequences: the ConvexSequence type, uniform-convexity validation,
counting of values on the lattices N^-alpha Z, and the two constructions
that put many values on such a lattice.

A sequence a_1..a_N is uniformly convex when

    a_{n+1} - a_n in [1/(4N), 4/N]   and   a_{n+2} - 2a_{n+1} + a_n in [theta/(4N^2), 4 theta/N^2]

with theta = 1 for ordinary sequences and theta < 1 for the windows
produced by restrict_rescale.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import interp as interpolation
from .exceptions import (
    ConstructionInfeasible,
    ExactValuesRequired,
    OutOfDomainError,
    SequenceTooShort,
)
from .rational import (
    UnreducedFraction,
    as_exponent,
    enumerate_fractions,
    exact_power,
    expand_to_range,
    floor_power,
    mediant,
    real_power,
)

logger = logging.getLogger(__name__)

# Integer scales tried when normalizing a constructed sequence.
NORMALIZING_SCALES = (1, 2, 3, 4)

# Uniform convexity window: constants in [1/C, C] with C = 4.
UNIFORM_CONSTANT = 4


def _power(N, e):
    # N ** e as an exact Fraction when rational, else a float
    exact = exact_power(N, e)
    return exact if exact is not None else real_power(N, e)


@dataclass(frozen=True)
class HitCertificate:
    """a_n = multiple * N^-alpha, decided by construction rather than by a float."""

    n: int
    alpha: Fraction
    multiple: int

    def exact(self, N: int) -> Fraction | None:
        lattice = exact_power(N, -self.alpha)
        return None if lattice is None else self.multiple * lattice

    def approx(self, N: int) -> float:
        return self.multiple * real_power(N, -self.alpha)

    def to_dict(self, N: int) -> dict:
        value = self.exact(N)
        return {
            'n': self.n,
            'alpha': str(self.alpha),
            'num': None if value is None else value.numerator,
            'den': None if value is None else value.denominator,
            'multiple': self.multiple,
        }


@dataclass(frozen=True, eq=False)
class ConvexSequence:
    N: int
    values: np.ndarray
    exact_values: tuple | None = None
    hits: tuple = ()
    theta: Fraction | float = Fraction(1)
    metadata: dict = field(default_factory=dict)
    # values before any shear, and the accumulated shear coefficient
    base_values: np.ndarray | None = None
    shear_total: Fraction | float = Fraction(0)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or len(values) != self.N:
            raise ValueError(f'expected {self.N} values, got shape {values.shape}')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)
        if self.exact_values is not None:
            if len(self.exact_values) != self.N:
                raise ValueError('exact_values must have one entry per value')
            object.__setattr__(self, 'exact_values', tuple(self.exact_values))
        object.__setattr__(self, 'hits', tuple(sorted(self.hits, key=lambda h: (h.n, h.alpha))))

    def __len__(self):
        return self.N

    @property
    def fully_exact(self) -> bool:
        return self.exact_values is not None and all(v is not None for v in self.exact_values)

    def value(self, n: int) -> float:
        return float(self.values[n - 1])

    def exact(self, n: int) -> Fraction | None:
        if self.exact_values is None:
            return None
        return self.exact_values[n - 1]

    def hits_at(self, alpha) -> list[HitCertificate]:
        alpha = as_exponent(alpha)
        return [hit for hit in self.hits if hit.alpha == alpha]


@dataclass
class ConvexityReport:
    N: int
    theta: float
    first_diff_min: float
    first_diff_max: float
    second_diff_min: float
    second_diff_max: float
    tightest_C: float
    passed: bool

    def to_dict(self) -> dict:
        data = dict(self.__dict__)
        data['pass'] = data.pop('passed')
        # JSON has no infinity
        if math.isinf(self.tightest_C):
            data['tightest_C'] = None
        return data


def _tightest(d1_min, d1_max, d2_min, d2_max) -> float:
    if d1_min <= 0 or d2_min <= 0:
        return math.inf
    return max(d1_max, 1 / d1_min, d2_max, 1 / d2_min, 1.0)


def validate(seq: ConvexSequence, theta=None) -> ConvexityReport:
    """
    Measure first differences in units 1/N and second differences in units
    theta/N^2; tightest_C is the smallest C with both inside [1/C, C].
    """
    N = seq.N
    if N < 3:
        raise SequenceTooShort(f'validation needs N >= 3, got {N}')
    theta = seq.theta if theta is None else theta

    if seq.fully_exact and isinstance(theta, (int, Fraction)):
        a = seq.exact_values
        d1 = [(a[i + 1] - a[i]) * N for i in range(N - 1)]
        d2 = [(d1[i + 1] - d1[i]) * N / theta for i in range(N - 2)]
        d1_min, d1_max, d2_min, d2_max = min(d1), max(d1), min(d2), max(d2)
        C = _tightest(d1_min, d1_max, d2_min, d2_max)
        passed = C <= UNIFORM_CONSTANT
        d1_min, d1_max, d2_min, d2_max = map(float, (d1_min, d1_max, d2_min, d2_max))
        C = float(C)
    else:
        a = seq.values
        d1 = np.diff(a) * N
        d2 = np.diff(a, 2) * (N * N / float(theta))
        d1_min, d1_max = float(d1.min()), float(d1.max())
        d2_min, d2_max = float(d2.min()), float(d2.max())
        C = _tightest(d1_min, d1_max, d2_min, d2_max)
        passed = C <= UNIFORM_CONSTANT

    return ConvexityReport(
        N=N,
        theta=float(theta),
        first_diff_min=d1_min,
        first_diff_max=d1_max,
        second_diff_min=d2_min,
        second_diff_max=d2_max,
        tightest_C=C,
        passed=passed,
    )


def default_tol(N: int, alpha) -> float:
    return 1e-9 * real_power(N, -as_exponent(alpha))


def intersect_count(seq: ConvexSequence, alpha, tol=None) -> tuple[int, list[int]]:
    """
    Count n with a_n within tol of N^-alpha Z. Certified hits count without
    looking at the values; exact values are checked exactly; the rest are
    checked in floating point. tol = 0 asks for exact membership only.
    """
    alpha = as_exponent(alpha)
    if alpha < 0:
        raise OutOfDomainError(f'alpha must be nonnegative, got {alpha}')
    N = seq.N
    if tol is None:
        tol = default_tol(N, alpha)
    if tol < 0:
        raise ValueError(f'tol must be nonnegative, got {tol}')
    if tol == 0 and seq.exact_values is None:
        raise ExactValuesRequired('tol = 0 needs exact values')

    members = {hit.n for hit in seq.hits if hit.alpha == alpha}
    lattice_inverse = exact_power(N, alpha)
    unresolved = []
    for n in range(1, N + 1):
        if n in members:
            continue
        value = seq.exact(n)
        if value is None:
            unresolved.append(n)
            continue
        if lattice_inverse is None:
            # an irrational lattice meets the rationals only at 0
            if value == 0 or (tol > 0 and _float_members([float(value)], N, alpha, tol)[0]):
                members.add(n)
            continue
        scaled = value * lattice_inverse
        distance = abs(scaled - round(scaled)) / lattice_inverse
        if distance <= tol:
            members.add(n)

    if tol > 0 and unresolved:
        index = np.array(unresolved)
        members.update(int(n) for n in index[_float_members(seq.values[index - 1], N, alpha, tol)])

    hit_indices = sorted(members)
    return len(hit_indices), hit_indices


def _float_members(values, N, alpha, tol):
    power = real_power(N, alpha)
    scaled = np.asarray(values, dtype=float) * power
    return np.abs(scaled - np.rint(scaled)) <= tol * power


def check_certificates(seq: ConvexSequence, certificates, tol=None) -> list[int]:
    """
    Indices n whose certificate a_n = multiple * N^-alpha does not hold for
    seq. Exact values are compared exactly when the lattice is rational.
    """
    failed = []
    for hit in certificates:
        if not 1 <= hit.n <= seq.N:
            failed.append(hit.n)
            continue
        expected, value = hit.exact(seq.N), seq.exact(hit.n)
        if expected is not None and value is not None:
            holds = value == expected
        else:
            bound = default_tol(seq.N, hit.alpha) if tol is None else tol
            holds = abs(seq.value(hit.n) - hit.approx(seq.N)) <= bound
        if not holds:
            failed.append(hit.n)
    return failed


def upper_bound_holds(count: int, N: int, alpha) -> bool:
    """The empirical form of the converse bound: count <= 100 max(N^((alpha+1)/3 + 0.1), N^alpha)."""
    a = float(as_exponent(alpha))
    return count <= 100 * max(N ** ((a + 1) / 3 + 0.1), N ** a)


@dataclass
class MediantPair:
    left: UnreducedFraction
    right: UnreducedFraction
    M: int
    k: int


@dataclass
class MediantKnots:
    """Everything the mediant construction derives before interpolating."""

    N: int
    alpha: Fraction
    qmax: int
    fractions: list
    pairs: list
    knots: list
    hit_indices: list
    hit_multiples: list
    trimmed: int = 0


def dirichlet_knots(N: int, alpha) -> MediantKnots:
    """
    Fractions r_i in [N^(alpha-1)/3, 2N^(alpha-1)/3] with denominator at most
    N^((2-alpha)/3); each neighbouring pair is rewritten over denominators in
    [Delta_i, 2 Delta_i] and its mediant gives one chord of M_i/N^alpha over k_i/N.
    """
    alpha = as_exponent(alpha)
    if N < 10:
        raise OutOfDomainError(f'N must be at least 10, got {N}')
    if not Fraction(1, 2) <= alpha <= 2:
        raise OutOfDomainError(f'mediant construction needs alpha in [1/2, 2], got {alpha}')

    window = _power(N, alpha - 1)
    lo, hi = Fraction(window) / 3, 2 * Fraction(window) / 3
    qmax = floor_power(N, (2 - alpha) / 3)
    fractions = enumerate_fractions(lo, hi, qmax)
    if len(fractions) < 2:
        raise ConstructionInfeasible(
            f'only {len(fractions)} fraction(s) in [{float(lo):.6g}, {float(hi):.6g}] '
            f'with denominator <= {qmax}; N={N} is too small for alpha={alpha}'
        )

    stretch = _power(N, 2 - alpha)
    pairs = []
    for left, right in zip(fractions, fractions[1:]):
        delta = stretch * (right - left)
        a_b = expand_to_range(left, delta, 2 * delta)
        c_d = expand_to_range(right, delta, 2 * delta)
        middle = mediant(a_b, c_d)
        pairs.append(MediantPair(a_b, c_d, middle.num, middle.den))

    # the chord over pair i ends at n = k_1 + ... + k_i
    ends = list(np.cumsum([pair.k for pair in pairs]))
    kept = len(pairs)
    while kept and ends[kept - 1] > N:
        kept -= 1
    if kept < 1:
        raise ConstructionInfeasible(f'first chord already ends past n = {N}')
    trimmed = len(pairs) - kept
    if trimmed:
        logger.info('dropped %d trailing chord(s) ending past n=%d', trimmed, N)
    pairs = pairs[:kept]

    lattice = _power(N, -alpha)
    slope_scale = _power(N, 1 - alpha)
    knots = [interpolation.Knot(0.0, 0.0, float(slope_scale * fractions[0]))]
    hit_indices, hit_multiples = [], []
    n_total, m_total = 0, 0
    for i, pair in enumerate(pairs):
        n_total += pair.k
        m_total += pair.M
        knots.append(interpolation.Knot(
            float(Fraction(n_total, N)),
            float(m_total * lattice),
            float(slope_scale * fractions[i + 1]),
        ))
        hit_indices.append(n_total)
        hit_multiples.append(m_total)

    return MediantKnots(
        N=N,
        alpha=alpha,
        qmax=qmax,
        fractions=fractions,
        pairs=pairs,
        knots=knots,
        hit_indices=hit_indices,
        hit_multiples=hit_multiples,
        trimmed=trimmed,
    )


def _sample(knots, N: int) -> tuple[np.ndarray, interpolation.ConvexInterpolant]:
    # C2 interpolant through the knots, padded to x = 1, sampled at n/N
    curve = interpolation.upgrade_c2(interpolation.build_c1(knots))
    curve = curve.extend_to(1.0)
    values, _, _ = curve.eval(np.arange(1, N + 1) / N)
    return values, curve


def _certified_sequence(N, alpha, values, hit_indices, hit_multiples, metadata) -> ConvexSequence:
    """Snap hits to their lattice values, then pick the integer scale with the tightest window."""
    values = np.array(values, dtype=float)
    exact = [None] * N
    for n, multiple in zip(hit_indices, hit_multiples):
        hit = HitCertificate(n, alpha, multiple)
        value = hit.exact(N)
        exact[n - 1] = value
        values[n - 1] = float(value) if value is not None else hit.approx(N)

    best = None
    for scale in NORMALIZING_SCALES:
        trial = ConvexSequence(N=N, values=values * scale)
        C = validate(trial).tightest_C
        if best is None or C < best[1]:
            best = (scale, C)
    scale, C = best
    logger.info('normalized N=%d alpha=%s by scale %d (tightest C %.4g)', N, alpha, scale, C)

    has_exact = any(value is not None for value in exact)
    return ConvexSequence(
        N=N,
        values=values * scale,
        exact_values=tuple(None if v is None else v * scale for v in exact) if has_exact else None,
        hits=tuple(
            HitCertificate(n, alpha, multiple * scale)
            for n, multiple in zip(hit_indices, hit_multiples)
        ),
        metadata={**metadata, 'scale': scale, 'shear': '0'},
    )


def construct_dirichlet_like(N: int, alpha) -> ConvexSequence:
    """
    A uniformly convex sequence with about N^((alpha+1)/3) values on
    N^-alpha Z, for alpha in [1/2, 2].
    """
    built = dirichlet_knots(N, alpha)
    logger.info(
        'mediant construction N=%d alpha=%s: %d fractions (qmax %d), %d knots',
        N, built.alpha, len(built.fractions), built.qmax, len(built.knots),
    )
    values, curve = _sample(built.knots, N)
    return _certified_sequence(
        N, built.alpha, values, built.hit_indices, built.hit_multiples,
        metadata={
            'construction': 'dirichlet_like',
            'alpha': str(built.alpha),
            'fractions': len(built.fractions),
            'qmax': built.qmax,
            'knots': len(built.knots),
            'trimmed': built.trimmed,
            'padded_from': built.knots[-1].x if curve.padded else None,
            'D': curve.D,
        },
    )


# Gaps between consecutive hits shrink by a fixed integer step, so chord
# slopes run from WALK_START_SLOPE up to WALK_SLOPE_RATIO times that.
WALK_START_SLOPE = 0.5
WALK_SLOPE_RATIO = 1.5
WALK_SPAN = 0.9


def small_alpha_knots(N: int, alpha) -> tuple[list, list, list]:
    """
    Walk the lattice levels j N^-alpha from n = 1. The gap to the next level
    starts at m0 = round(N^(1-alpha) / WALK_START_SLOPE) and shrinks by a
    constant step d each time, which keeps the chord increments regular.
    d is sized so the walk covers about WALK_SPAN of [0, 1]. Knot slopes use
    the midpoint gap (m_{j-1} + m_j) / 2, so each slope lies strictly
    between its neighbouring chords. Returns (knots, hit indices, hit multiples).
    """
    alpha = as_exponent(alpha)
    if N < 10:
        raise OutOfDomainError(f'N must be at least 10, got {N}')
    if not 0 <= alpha <= Fraction(1, 2):
        raise OutOfDomainError(f'grid walk needs alpha in [0, 1/2], got {alpha}')

    step = float(_power(N, -alpha))
    rise = N * step
    first_gap = max(1, round(rise / WALK_START_SLOPE))
    shrink = 1 - 1 / WALK_SLOPE_RATIO ** 2
    decrement = max(1, math.ceil(first_gap ** 2 * shrink / (2 * WALK_SPAN * N)))
    min_gap = first_gap / WALK_SLOPE_RATIO

    hits = [1]
    gaps = []
    gap = first_gap
    while gap >= min_gap and gap >= 1 and hits[-1] + gap <= N:
        hits.append(hits[-1] + gap)
        gaps.append(gap)
        gap -= decrement

    multiples = list(range(len(hits)))
    xs = [n / N for n in hits]
    ys = [j * step for j in multiples]

    if len(hits) == 1:
        # one hit: close with a symmetric pair ending at x = 1
        return [
            interpolation.Knot(xs[0], ys[0], WALK_START_SLOPE),
            interpolation.Knot(1.0, ys[0] + (1.0 - xs[0]) * 0.75, 1.0),
        ], hits, multiples

    widths = [first_gap + decrement / 2]
    widths += [(gaps[i - 1] + gaps[i]) / 2 for i in range(1, len(gaps))]
    widths.append(gaps[-1] - decrement / 2)
    knots = [
        interpolation.Knot(x, y, rise / width) for x, y, width in zip(xs, ys, widths)
    ]
    return knots, hits, multiples


def construct_small_alpha(N: int, alpha) -> ConvexSequence:
    """A uniformly convex sequence with about N^alpha values on N^-alpha Z, alpha in [0, 1/2]."""
    alpha = as_exponent(alpha)
    knots, hits, multiples = small_alpha_knots(N, alpha)
    logger.info('grid walk N=%d alpha=%s: %d hits, %d knots', N, alpha, len(hits), len(knots))
    values, curve = _sample(knots, N)
    return _certified_sequence(
        N, alpha, values, hits, multiples,
        metadata={
            'construction': 'small_alpha',
            'alpha': str(alpha),
            'knots': len(knots),
            'padded_from': knots[-1].x if curve.padded else None,
            'D': curve.D,
        },
    )


def construct_for_alpha(N: int, alpha) -> ConvexSequence:
    # the mediant window is empty at alpha = 1/2, so the walk covers it
    alpha = as_exponent(alpha)
    if alpha <= Fraction(1, 2):
        return construct_small_alpha(N, alpha)
    return construct_dirichlet_like(N, alpha)


def shear(seq: ConvexSequence, lam) -> ConvexSequence:
    """
    a_n -> a_n + lam * n. Second differences are unchanged. Certificates
    survive only when lam * n is itself on their lattice.
    """
    if isinstance(lam, (int, Fraction)):
        lam = Fraction(lam)
    if lam == 0:
        return seq

    total = seq.shear_total + lam
    base = seq.base_values if seq.base_values is not None else seq.values
    n = np.arange(1, seq.N + 1)
    values = base if total == 0 else base + float(total) * n

    exact_values = None
    if seq.exact_values is not None and isinstance(lam, Fraction):
        exact_values = tuple(
            None if v is None else v + lam * k for k, v in enumerate(seq.exact_values, start=1)
        )

    hits = []
    if isinstance(lam, Fraction):
        for hit in seq.hits:
            power = exact_power(seq.N, hit.alpha)
            if power is None:
                continue
            extra = lam * hit.n * power
            if extra.denominator == 1:
                hits.append(HitCertificate(hit.n, hit.alpha, hit.multiple + int(extra)))

    metadata = {**seq.metadata, 'shear': str(total)}
    return replace(
        seq,
        values=values,
        exact_values=exact_values,
        hits=tuple(hits),
        metadata=metadata,
        base_values=base,
        shear_total=total,
    )


def restrict_rescale(seq: ConvexSequence, beta, start: int = 1) -> ConvexSequence:
    """
    The window a_start..a_{start+M-1}, M = ceil(N^beta), multiplied by
    N^(1-beta): a generalized Dirichlet sequence of length M with parameter
    theta = N^(beta-1).
    """
    beta = as_exponent(beta)
    if not 0 < beta <= 1:
        raise OutOfDomainError(f'beta must lie in (0, 1], got {beta}')
    N = seq.N
    length = floor_power(N, beta)
    if exact_power(N, beta) is None:
        length += 1
    if length < 3:
        raise SequenceTooShort(f'window of length {length} is too short (N={N}, beta={beta})')
    stop = start + length - 1
    if start < 1 or stop > N:
        raise ValueError(f'window {start}..{stop} does not fit in 1..{N}')
    if beta == 1:
        return seq

    factor = _power(N, 1 - beta)
    theta_step = _power(N, beta - 1)
    window = slice(start - 1, stop)
    values = seq.values[window] * float(factor)

    exact_values = None
    if seq.exact_values is not None and isinstance(factor, Fraction):
        exact_values = tuple(
            None if v is None else v * factor for v in seq.exact_values[window]
        )

    hits = []
    if exact_power(N, beta) is not None:
        for hit in seq.hits:
            new_alpha = (hit.alpha + beta - 1) / beta
            if start <= hit.n <= stop and new_alpha >= 0:
                hits.append(HitCertificate(hit.n - start + 1, new_alpha, hit.multiple))

    theta = seq.theta * theta_step
    logger.info('restricted N=%d to %d terms from n=%d, theta=%s', N, length, start, theta)
    return ConvexSequence(
        N=length,
        values=values,
        exact_values=exact_values,
        hits=tuple(hits),
        theta=theta,
        metadata={
            **seq.metadata,
            'restricted_from': N,
            'beta': str(beta),
            'start': start,
            'theta': str(theta),
        },
    )
