"""
Strictly convex C1 and C2 interpolation through knots (x_i, y_i, p_i).

The interpolant is stored as pieces of its derivative f' plus one anchor
value per knot pair. Each pair (x_1, y_1, p_1), (x_2, y_2, p_2) gets an
internal node (x_0, p_0) and two pieces (x_1, p_1) -> (x_0, p_0) -> (x_2, p_2)
whose total area is y_2 - y_1. In C2 mode every linear piece is swapped for
a sinusoid with the same endpoints and the same area whose second
derivative equals the curvature floor D at both ends.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import bisect

from .exceptions import NonInterpolableError, NotUniformlyConvex, OutOfDomainError

logger = logging.getLogger(__name__)

QUARTER_PI = math.pi / 4
HALF_PI = math.pi / 2

# Knot pairs whose node ratio c leaves this band are rejected as ill-conditioned.
NODE_RATIO_BOUNDS = (1e-6, 1e6)


@dataclass(frozen=True)
class Knot:
    x: float
    y: float
    p: float


class PieceKind(str, enum.Enum):
    LINEAR = 'linear'
    SINUSOID = 'sinusoid'


class Mode(str, enum.Enum):
    C1 = 'C1'
    C2 = 'C2'


@dataclass(frozen=True)
class DerivativePiece:
    """
    One piece of f' on [x_lo, x_hi] rising from p_lo to p_hi.

    A sinusoid piece is f'(x) = mean + amplitude * sin(alpha * (x - center) / half_width).
    """

    kind: PieceKind
    x_lo: float
    x_hi: float
    p_lo: float
    p_hi: float
    alpha: float | None = None

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def slope(self) -> float:
        return (self.p_hi - self.p_lo) / (self.x_hi - self.x_lo)

    @property
    def mean(self) -> float:
        return (self.p_lo + self.p_hi) / 2

    @property
    def amplitude(self) -> float:
        return (self.p_hi - self.p_lo) / (2 * math.sin(self.alpha))

    @property
    def center(self) -> float:
        return (self.x_lo + self.x_hi) / 2

    @property
    def half_width(self) -> float:
        return (self.x_hi - self.x_lo) / 2

    def area(self) -> float:
        # both kinds integrate to the trapezoid over the full piece
        return self.mean * self.width

    def to_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'x_lo': self.x_lo,
            'x_hi': self.x_hi,
            'p_lo': self.p_lo,
            'p_hi': self.p_hi,
            'alpha': self.alpha,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'DerivativePiece':
        return cls(
            kind=PieceKind(data['kind']),
            x_lo=float(data['x_lo']),
            x_hi=float(data['x_hi']),
            p_lo=float(data['p_lo']),
            p_hi=float(data['p_hi']),
            alpha=None if data.get('alpha') is None else float(data['alpha']),
        )


@dataclass(frozen=True, eq=False)
class ConvexInterpolant:
    knots: tuple
    nodes: tuple
    pieces: tuple
    D: float
    mode: Mode
    # per-piece parameter arrays for vectorized evaluation
    _table: dict = field(init=False, repr=False)

    def __post_init__(self):
        n_pair_pieces = 2 * (len(self.knots) - 1)
        anchors = []
        for index, piece in enumerate(self.pieces):
            if index >= n_pair_pieces:
                anchors.append(self.knots[-1].y)
            elif index % 2 == 0:
                anchors.append(self.knots[index // 2].y)
            else:
                anchors.append(anchors[-1] + self.pieces[index - 1].area())

        sinusoid = np.array([piece.kind is PieceKind.SINUSOID for piece in self.pieces])
        alpha = np.array([piece.alpha if piece.alpha is not None else 1.0 for piece in self.pieces])
        table = {
            'x_lo': np.array([piece.x_lo for piece in self.pieces]),
            'x_hi': np.array([piece.x_hi for piece in self.pieces]),
            'p_lo': np.array([piece.p_lo for piece in self.pieces]),
            'p_hi': np.array([piece.p_hi for piece in self.pieces]),
            'alpha': alpha,
            'sinusoid': sinusoid,
            'anchor': np.array(anchors),
        }
        object.__setattr__(self, '_table', table)

    @property
    def x_start(self) -> float:
        return self.knots[0].x

    @property
    def x_end(self) -> float:
        return self.pieces[-1].x_hi

    @property
    def padded(self) -> bool:
        return len(self.pieces) > 2 * (len(self.knots) - 1)

    def eval(self, x):
        """
        (f, f', f'') at x, a scalar or an array. Points outside the knot range
        (and outside the padding, when present) raise OutOfDomainError.
        """
        scalar = np.ndim(x) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if xs.size and (xs.min() < self.x_start or xs.max() > self.x_end):
            raise OutOfDomainError(
                f'x outside [{self.x_start!r}, {self.x_end!r}]; extend the interpolant first'
            )

        index = np.clip(
            np.searchsorted(self._table['x_lo'], xs, side='right') - 1, 0, len(self.pieces) - 1
        )
        f, fp, fpp = self._evaluate(index, xs)
        if scalar:
            return float(f[0]), float(fp[0]), float(fpp[0])
        return f, fp, fpp

    def _evaluate(self, index, xs):
        # closed forms of the pieces selected by index, no domain checks
        t = self._table
        x_lo, x_hi = t['x_lo'][index], t['x_hi'][index]
        p_lo, p_hi = t['p_lo'][index], t['p_hi'][index]
        anchor = t['anchor'][index]
        dx = xs - x_lo

        slope = (p_hi - p_lo) / (x_hi - x_lo)
        lin_fp = p_lo + slope * dx
        lin_f = anchor + p_lo * dx + slope * dx * dx / 2

        alpha = t['alpha'][index]
        half = (x_hi - x_lo) / 2
        mean = (p_lo + p_hi) / 2
        amp = (p_hi - p_lo) / (2 * np.sin(alpha))
        theta = alpha * (xs - (x_lo + half)) / half
        sin_fp = mean + amp * np.sin(theta)
        sin_f = anchor + mean * dx + amp * half / alpha * (np.cos(alpha) - np.cos(theta))
        sin_fpp = amp * alpha / half * np.cos(theta)

        is_sin = t['sinusoid'][index]
        f = np.where(is_sin, sin_f, lin_f)
        fp = np.where(is_sin, sin_fp, lin_fp)
        fpp = np.where(is_sin, sin_fpp, slope)
        return f, fp, fpp

    def extend_to(self, x_end: float) -> 'ConvexInterpolant':
        """Continue past the last knot with constant second derivative D."""
        last = self.knots[-1]
        if x_end <= last.x or (self.padded and x_end <= self.x_end):
            return self
        pieces = self.pieces[: 2 * (len(self.knots) - 1)]
        padding = DerivativePiece(
            kind=PieceKind.LINEAR,
            x_lo=last.x,
            x_hi=float(x_end),
            p_lo=last.p,
            p_hi=last.p + self.D * (x_end - last.x),
        )
        logger.debug('padding interpolant from %.6g to %.6g', last.x, x_end)
        return replace(self, pieces=pieces + (padding,))

    def to_dict(self) -> dict:
        return {
            'mode': self.mode.value,
            'D': self.D,
            'knots': [[knot.x, knot.y, knot.p] for knot in self.knots],
            'nodes': [list(node) for node in self.nodes],
            'pieces': [piece.to_dict() for piece in self.pieces],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ConvexInterpolant':
        return cls(
            knots=tuple(Knot(*map(float, row)) for row in data['knots']),
            nodes=tuple(tuple(map(float, row)) for row in data['nodes']),
            pieces=tuple(DerivativePiece.from_dict(row) for row in data['pieces']),
            D=float(data['D']),
            mode=Mode(data['mode']),
        )


def _check_knots(knots):
    if len(knots) < 2:
        raise NonInterpolableError(0, 'at least two knots are needed')
    for i, (left, right) in enumerate(zip(knots, knots[1:])):
        if not (right.x > left.x and right.y > left.y and right.p > left.p):
            raise NonInterpolableError(i, 'x, y and p must be strictly increasing')


def build_c1(knots) -> ConvexInterpolant:
    """
    Piecewise-linear f' through every knot. Raises NonInterpolableError when a
    pair's secant slope does not lie strictly between its two knot slopes.
    """
    knots = tuple(knots)
    _check_knots(knots)

    nodes = []
    pieces = []
    for i, (k1, k2) in enumerate(zip(knots, knots[1:])):
        dx = k2.x - k1.x
        s = (k2.y - k1.y) / dx
        if not k1.p < s < k2.p:
            raise NonInterpolableError(
                i, f'secant slope {s!r} not strictly between {k1.p!r} and {k2.p!r}'
            )
        c = (s - k1.p) / (k2.p - s)
        if not NODE_RATIO_BOUNDS[0] <= c <= NODE_RATIO_BOUNDS[1]:
            raise NonInterpolableError(i, f'node ratio {c!r} is ill-conditioned')

        # (x2 - x0) / (x0 - x1) = c, p0 on the line through (x1, p2) and (x2, p1)
        x0 = k1.x + dx / (1 + c)
        p0 = k2.p - (k2.p - k1.p) / (1 + c)
        nodes.append((x0, p0))
        pieces.append(DerivativePiece(PieceKind.LINEAR, k1.x, x0, k1.p, p0))
        pieces.append(DerivativePiece(PieceKind.LINEAR, x0, k2.x, p0, k2.p))

    D = QUARTER_PI * min(piece.slope for piece in pieces)
    logger.debug('built C1 interpolant on %d knots, D=%.6g', len(knots), D)
    return ConvexInterpolant(
        knots=knots, nodes=tuple(nodes), pieces=tuple(pieces), D=D, mode=Mode.C1,
    )


def solve_x_cot_x(y: float) -> float:
    """The x in [pi/4, pi/2] with x * cot(x) = y, for y in [0, pi/4]."""
    if not 0 <= y <= QUARTER_PI:
        raise OutOfDomainError(f'x cot x target {y!r} outside [0, pi/4]')
    if y == QUARTER_PI:
        return QUARTER_PI
    if y < 1e-15:
        return HALF_PI
    return bisect(
        lambda x: x * math.cos(x) / math.sin(x) - y,
        QUARTER_PI, HALF_PI, xtol=1e-14, maxiter=200,
    )


def upgrade_c2(interp: ConvexInterpolant) -> ConvexInterpolant:
    if interp.mode is not Mode.C1:
        raise ValueError('upgrade_c2 expects a C1 interpolant')
    if interp.padded:
        raise ValueError('upgrade before padding the interpolant')

    pieces = []
    for index, piece in enumerate(interp.pieces):
        if piece.p_hi <= piece.p_lo:
            raise NonInterpolableError(index // 2, 'flat derivative piece')
        # D / slope <= pi/4 by the choice of D; min() absorbs rounding
        alpha = solve_x_cot_x(min(interp.D / piece.slope, QUARTER_PI))
        pieces.append(replace(piece, kind=PieceKind.SINUSOID, alpha=alpha))
    return replace(interp, pieces=tuple(pieces), mode=Mode.C2)


def knots_from_sequence(seq, max_constant: float = 4) -> list[Knot]:
    """
    Knots (i/N, a_i, (N/2)(a_{i+1} - a_{i-1})) for i = 1..N, with the
    sequence extended by a_0 = 2a_1 - a_2 + 1/N^2 and a_{N+1} = 2a_N - a_{N-1} + 1/N^2.
    """
    from .convexseq import validate

    report = validate(seq)
    if report.tightest_C > max_constant:
        raise NotUniformlyConvex(
            f'sequence is only {report.tightest_C:.4g}-uniformly convex (limit {max_constant})'
        )

    N = seq.N
    a = np.asarray(seq.values, dtype=float)
    bump = 1.0 / N ** 2
    padded = np.concatenate(([2 * a[0] - a[1] + bump], a, [2 * a[-1] - a[-2] + bump]))
    slopes = (N / 2) * (padded[2:] - padded[:-2])
    return [Knot(i / N, float(a[i - 1]), float(slopes[i - 1])) for i in range(1, N + 1)]


@dataclass
class InvariantReport:
    mode: str
    area_residual: float
    knot_value_residual: float
    knot_slope_residual: float
    knot_curvature_residual: float | None
    continuity_residual: float
    curvature_continuity_residual: float | None
    min_second_derivative: float
    x_cot_x_residual: float | None
    collinearity_residual: float
    passed: bool = False
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def invariant_suite(interp: ConvexInterpolant, samples: int = 10_000) -> InvariantReport:
    """
    Checks an interpolant against its defining properties: area per knot pair,
    matching at knots, C1/C2 continuity, strict convexity and the node and
    sinusoid equations.
    """
    knots = interp.knots
    n_pair_pieces = 2 * (len(knots) - 1)
    pair_pieces = interp.pieces[:n_pair_pieces]
    y_scale = max(1.0, max(abs(knot.y) for knot in knots))
    p_scale = max(1.0, max(abs(knot.p) for knot in knots))

    area = max(
        abs(pair_pieces[2 * i].area() + pair_pieces[2 * i + 1].area() - (knots[i + 1].y - knots[i].y))
        for i in range(len(knots) - 1)
    ) / y_scale

    xs = np.array([knot.x for knot in knots])
    f, fp, fpp = interp.eval(xs)
    value = float(np.max(np.abs(f - [knot.y for knot in knots]))) / y_scale
    slope = float(np.max(np.abs(fp - [knot.p for knot in knots]))) / p_scale

    # one-sided limits at every piece boundary
    left = np.arange(len(interp.pieces) - 1)
    boundary = interp._table['x_hi'][left]
    f_l, fp_l, fpp_l = interp._evaluate(left, boundary)
    f_r, fp_r, fpp_r = interp._evaluate(left + 1, boundary)
    continuity = max(
        float(np.max(np.abs(f_l - f_r), initial=0.0)) / y_scale,
        float(np.max(np.abs(fp_l - fp_r), initial=0.0)) / p_scale,
    )

    curvature = None
    curvature_continuity = None
    x_cot_x = None
    if interp.mode is Mode.C2:
        curvature = float(np.max(np.abs(fpp - interp.D))) / interp.D
        curvature_continuity = float(np.max(np.abs(fpp_l - fpp_r), initial=0.0)) / interp.D
        x_cot_x = max(
            abs(piece.alpha / math.tan(piece.alpha) - min(interp.D / piece.slope, QUARTER_PI))
            for piece in pair_pieces
        )

    grid = np.linspace(interp.x_start, interp.x_end, samples)
    _, _, second = interp.eval(grid)
    min_second = float(second.min())

    collinearity = 0.0
    for i, (x0, p0) in enumerate(interp.nodes):
        k1, k2 = knots[i], knots[i + 1]
        lhs = (k2.p - p0) / (p0 - k1.p)
        rhs = (x0 - k1.x) / (k2.x - x0)
        collinearity = max(collinearity, abs(lhs - rhs) / max(1.0, abs(rhs)))

    report = InvariantReport(
        mode=interp.mode.value,
        area_residual=area,
        knot_value_residual=value,
        knot_slope_residual=slope,
        knot_curvature_residual=curvature,
        continuity_residual=continuity,
        curvature_continuity_residual=curvature_continuity,
        min_second_derivative=min_second,
        x_cot_x_residual=x_cot_x,
        collinearity_residual=collinearity,
    )

    checks = [
        ('area', area <= 1e-12),
        ('knot_value', value <= 1e-10),
        ('knot_slope', slope <= 1e-10),
        ('continuity', continuity <= 1e-12),
        ('convexity', min_second > 0),
        ('collinearity', collinearity <= 1e-9),
    ]
    if interp.mode is Mode.C2:
        checks += [
            ('knot_curvature', curvature <= 1e-6),
            ('curvature_continuity', curvature_continuity <= 1e-9),
            ('curvature_floor', min_second >= interp.D * (1 - 1e-9)),
            ('x_cot_x', x_cot_x <= 1e-12),
        ]
    report.failures = [name for name, ok in checks if not ok]
    report.passed = not report.failures
    return report
