"""
Two-parameter exponential sums f(x, t) = sum_n b_n e(x xi_n + t eta_n) with
e(x) = exp(2 pi i x), their maximal functions over a grid and level-set
diagnostics.

Phases are reduced mod 1 before exponentiating: exactly when the point and
the frequencies are rationals, otherwise in extended precision. With the
canonical frequencies xi_n = n/N and the x-grid x_k = kN/Mx (Mx >= N), a
whole t-row is one inverse DFT of the vector b_n e(t eta_n) placed at n mod Mx.
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Integral

import numpy as np
import scipy.fft

from .exceptions import FastPathUnavailable, OutOfDomainError

logger = logging.getLogger(__name__)

FAST_PATH_CHOICES = ('auto', 'on', 'off')
DIRECTIONS = ('t', 'x')

# Refinement points per outer node when the t-grid is capped by the budget.
DEFAULT_REFINE = 16

# Dyadic levels kept below the observed top, and levels tracked below the a priori bound.
REPORTED_LEVELS = 40
TRACKED_LEVELS = 96


def _to_longdouble(exact, approx):
    # extended-precision copy, built from exact rationals where known
    out = np.array(approx, dtype=np.longdouble)
    if exact is not None:
        for i, value in enumerate(exact):
            if value is not None:
                out[i] = np.longdouble(value.numerator) / np.longdouble(value.denominator)
    return out


@dataclass(frozen=True, eq=False)
class ExpSumSpec:
    N: int
    xi: np.ndarray
    eta: np.ndarray
    b: np.ndarray
    xi_exact: tuple | None = None
    eta_exact: tuple | None = None
    canonical_xi: bool = False
    _cache: dict = field(init=False, repr=False)

    def __post_init__(self):
        xi = np.array(self.xi, dtype=float)
        eta = np.array(self.eta, dtype=float)
        b = np.array(self.b, dtype=complex)
        if not len(xi) == len(eta) == len(b) == self.N:
            raise ValueError(
                f'xi, eta and b must all have length N={self.N} '
                f'(got {len(xi)}, {len(eta)}, {len(b)})'
            )
        for name, exact in (('xi_exact', self.xi_exact), ('eta_exact', self.eta_exact)):
            if exact is not None and len(exact) != self.N:
                raise ValueError(f'{name} must have length N={self.N}')
        if not np.any(b != 0):
            raise ValueError('coefficients b must not all vanish')
        for array in (xi, eta, b):
            array.setflags(write=False)
        object.__setattr__(self, 'xi', xi)
        object.__setattr__(self, 'eta', eta)
        object.__setattr__(self, 'b', b)

        support = np.flatnonzero(b)
        object.__setattr__(self, '_cache', {
            'support': support,
            'xi_ld': _to_longdouble(self.xi_exact, xi)[support],
            'eta_ld': _to_longdouble(self.eta_exact, eta)[support],
        })

    @classmethod
    def for_sequence(cls, seq, b, amplitude=1) -> 'ExpSumSpec':
        """xi_n = n/N and eta_n = a_n for a ConvexSequence a."""
        N = seq.N
        n = np.arange(1, N + 1)
        return cls(
            N=N,
            xi=n / N,
            eta=seq.values,
            b=np.asarray(b, dtype=complex) * amplitude,
            xi_exact=tuple(Fraction(k, N) for k in range(1, N + 1)),
            eta_exact=seq.exact_values,
            canonical_xi=True,
        )

    @classmethod
    def with_frequencies(cls, xi, eta, b, xi_exact=None, eta_exact=None) -> 'ExpSumSpec':
        N = len(b)
        canonical = xi_exact is not None and all(
            value == Fraction(k, N) for k, value in enumerate(xi_exact, start=1)
        )
        return cls(
            N=N, xi=xi, eta=eta, b=b, xi_exact=xi_exact, eta_exact=eta_exact,
            canonical_xi=canonical,
        )

    @property
    def support(self) -> np.ndarray:
        return self._cache['support']

    @property
    def l1_norm(self) -> float:
        return math.fsum(np.abs(self.b))

    @property
    def l2_norm(self) -> float:
        return math.sqrt(math.fsum(np.abs(self.b) ** 2))

    def scaled(self, amplitude) -> 'ExpSumSpec':
        return replace(self, b=self.b * amplitude)


@dataclass(frozen=True)
class GridSpec:
    """Uniform half-open grids x_k = x_lo + k (x_hi - x_lo)/Mx, likewise for t."""

    x_lo: float
    x_hi: float
    Mx: int
    t_lo: float
    t_hi: float
    Mt: int
    refine: int = 0

    def __post_init__(self):
        if self.Mx < 1 or self.Mt < 1:
            raise ValueError('grids need at least one point in each direction')
        if not (self.x_hi > self.x_lo and self.t_hi > self.t_lo):
            raise ValueError('grid ranges must be nonempty')
        if self.refine < 0:
            raise ValueError('refine must be nonnegative')

    @classmethod
    def canonical(cls, N: int, budget: int, direction: str = 't', t_hi=None) -> 'GridSpec':
        """
        4N points on [0, N) in x and up to 4N^2 points on [0, t_hi) in t
        (default t_hi = N^2), capped so the grid holds at most budget nodes.
        A capped sweep over t gets refinement points around each running maximum.
        """
        if direction not in DIRECTIONS:
            raise ValueError(f'direction must be one of {DIRECTIONS}')
        Mx = 4 * N
        wanted = 4 * N * N
        Mt = max(1, min(wanted, budget // Mx))
        refine = DEFAULT_REFINE if direction == 't' and Mt < wanted else 0
        return cls(0, N, Mx, 0, N * N if t_hi is None else t_hi, Mt, refine)

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.Mx

    @property
    def dt(self) -> float:
        return (self.t_hi - self.t_lo) / self.Mt

    @property
    def nodes(self) -> int:
        return self.Mx * self.Mt

    def x_nodes(self, dtype=float) -> np.ndarray:
        return _uniform(self.x_lo, self.x_hi, self.Mx, dtype)

    def t_nodes(self, dtype=float) -> np.ndarray:
        return _uniform(self.t_lo, self.t_hi, self.Mt, dtype)

    def to_dict(self) -> dict:
        return {
            'x_lo': self.x_lo, 'x_hi': self.x_hi, 'Mx': self.Mx,
            't_lo': self.t_lo, 't_hi': self.t_hi, 'Mt': self.Mt,
            'refine': self.refine,
        }


def _uniform(lo, hi, count, dtype):
    lo_ld = np.longdouble(lo)
    step = (np.longdouble(hi) - lo_ld) / count
    return (lo_ld + np.arange(count, dtype=np.longdouble) * step).astype(dtype)


def _exact_scalar(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Integral):
        return Fraction(int(value))
    return None


def _point_phases(spec: ExpSumSpec, x, t) -> np.ndarray:
    support = spec.support
    x_exact, t_exact = _exact_scalar(x), _exact_scalar(t)
    if x_exact is not None and t_exact is not None and spec.xi_exact is not None and spec.eta_exact is not None:
        xi = [spec.xi_exact[n] for n in support]
        eta = [spec.eta_exact[n] for n in support]
        if all(v is not None for v in xi) and all(v is not None for v in eta):
            return np.array([float((x_exact * u + t_exact * v) % 1) for u, v in zip(xi, eta)])

    x_ld = np.longdouble(x) if x_exact is None else np.longdouble(x_exact.numerator) / x_exact.denominator
    t_ld = np.longdouble(t) if t_exact is None else np.longdouble(t_exact.numerator) / t_exact.denominator
    phases = np.mod(x_ld * spec._cache['xi_ld'], 1) + np.mod(t_ld * spec._cache['eta_ld'], 1)
    return np.mod(phases, 1).astype(float)


def eval_point(spec: ExpSumSpec, x, t) -> complex:
    """f(x, t), summed over ascending n with compensated summation."""
    terms = spec.b[spec.support] * np.exp(2j * np.pi * _point_phases(spec, x, t))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _x_factors(spec: ExpSumSpec, xs_ld) -> np.ndarray:
    # e(x xi_n) for every x node and support frequency, shape (len(xs), |support|)
    phases = np.mod(np.multiply.outer(xs_ld, spec._cache['xi_ld']), 1).astype(float)
    return np.exp(2j * np.pi * phases)


def _t_weights(spec: ExpSumSpec, ts_ld) -> np.ndarray:
    # b_n e(t eta_n), shape (len(ts), |support|)
    phases = np.mod(np.multiply.outer(ts_ld, spec._cache['eta_ld']), 1).astype(float)
    return spec.b[spec.support] * np.exp(2j * np.pi * phases)


def eval_naive(spec: ExpSumSpec, xs, ts) -> np.ndarray:
    """Direct evaluation on the product of xs and ts, shape (len(ts), len(xs))."""
    xs_ld = np.asarray(xs, dtype=np.longdouble)
    ts_ld = np.asarray(ts, dtype=np.longdouble)
    return _t_weights(spec, np.atleast_1d(ts_ld)) @ _x_factors(spec, np.atleast_1d(xs_ld)).T


def fast_path_compatible(spec: ExpSumSpec, grid: GridSpec) -> bool:
    return (
        spec.canonical_xi
        and grid.x_lo == 0
        and grid.x_hi == spec.N
        and grid.Mx >= spec.N
    )


def _use_fast_path(spec, grid, fast_path) -> bool:
    if fast_path not in FAST_PATH_CHOICES:
        raise ValueError(f'fast_path must be one of {FAST_PATH_CHOICES}, got {fast_path!r}')
    compatible = fast_path_compatible(spec, grid)
    if fast_path == 'on' and not compatible:
        raise FastPathUnavailable(
            'the DFT path needs xi_n = n/N and the x-grid k N/Mx on [0, N) with Mx >= N'
        )
    return fast_path != 'off' and compatible


def iter_row_blocks(spec: ExpSumSpec, grid: GridSpec, fast_path='auto', threads=1, block_nodes=2 ** 20):
    """
    Yield (first_row, block) over the t-rows of the grid in order. Blocks are
    fixed by block_nodes alone and evaluated by up to `threads` workers a wave
    at a time, so the output does not depend on the thread count.
    """
    fast = _use_fast_path(spec, grid, fast_path)
    rows_per_block = max(1, block_nodes // grid.Mx)
    ts_ld = grid.t_nodes(np.longdouble)
    Mx = grid.Mx

    if fast:
        positions = (spec.support + 1) % Mx

        def compute(start):
            weights = _t_weights(spec, ts_ld[start:start + rows_per_block])
            padded = np.zeros((len(weights), Mx), dtype=complex)
            padded[:, positions] = weights
            return scipy.fft.ifft(padded, axis=1, workers=1) * Mx
    else:
        x_factors_t = _x_factors(spec, grid.x_nodes(np.longdouble)).T

        def compute(start):
            return _t_weights(spec, ts_ld[start:start + rows_per_block]) @ x_factors_t

    starts = range(0, grid.Mt, rows_per_block)
    logger.debug(
        'evaluating %d x %d grid on the %s path in %d blocks',
        grid.Mt, grid.Mx, 'DFT' if fast else 'naive', len(starts),
    )
    threads = max(1, int(threads))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        iterator = iter(starts)
        while wave := list(itertools.islice(iterator, threads)):
            yield from zip(wave, pool.map(compute, wave))


def eval_grid(spec: ExpSumSpec, grid: GridSpec, fast_path='auto', threads=1, block_nodes=2 ** 20) -> np.ndarray:
    """The Mt x Mx matrix of f on the grid."""
    blocks = [block for _, block in iter_row_blocks(spec, grid, fast_path, threads, block_nodes)]
    return np.vstack(blocks)


@dataclass
class SupNormResult:
    N: int
    direction: str
    p: float
    value: float
    sup: np.ndarray
    argmax: np.ndarray
    grid: GridSpec
    refined: bool = False

    def to_dict(self) -> dict:
        return {
            'N': self.N,
            'direction': self.direction,
            'p': self.p,
            'value': self.value,
            'grid': self.grid.to_dict(),
        }


def _lp(values, spacing, p) -> float:
    if math.isinf(p):
        return float(np.max(values))
    return (spacing * math.fsum(np.asarray(values, dtype=float) ** p)) ** (1 / p)


def _maximal_function(spec, grid, direction, fast_path, threads, block_nodes):
    # sup of |f| over the inner direction and where it was reached
    if direction == 't':
        sup = np.full(grid.Mx, -1.0)
        arg = np.zeros(grid.Mx, dtype=int)
        for start, block in iter_row_blocks(spec, grid, fast_path, threads, block_nodes):
            magnitude = np.abs(block)
            rows = magnitude.argmax(axis=0)
            best = magnitude[rows, np.arange(grid.Mx)]
            better = best > sup
            sup[better] = best[better]
            arg[better] = start + rows[better]
        return sup, grid.t_nodes()[arg]

    sup = np.empty(grid.Mt)
    arg = np.empty(grid.Mt, dtype=int)
    for start, block in iter_row_blocks(spec, grid, fast_path, threads, block_nodes):
        magnitude = np.abs(block)
        stop = start + len(block)
        arg[start:stop] = magnitude.argmax(axis=1)
        sup[start:stop] = magnitude.max(axis=1)
    return sup, grid.x_nodes()[arg]


def _refine_t(spec, grid, sup, arg_t):
    # extra t points spread over the two coarse cells around each running maximum
    offsets = np.linspace(-grid.dt, grid.dt, grid.refine + 2)[1:-1]
    xs = grid.x_nodes()
    refined_sup = sup.copy()
    refined_arg = arg_t.copy()
    for k, (x, t_best) in enumerate(zip(xs, arg_t)):
        ts = np.clip(t_best + offsets, grid.t_lo, grid.t_hi)
        values = np.abs(eval_naive(spec, [x], ts)[:, 0])
        i = int(values.argmax())
        if values[i] > refined_sup[k]:
            refined_sup[k] = values[i]
            refined_arg[k] = ts[i]
    return refined_sup, refined_arg


def sup_norm_Lp(spec: ExpSumSpec, grid: GridSpec, sup_direction: str = 't', p: float = 4,
                fast_path='auto', threads=1, block_nodes=2 ** 20) -> SupNormResult:
    """
    || sup over the inner direction of |f| ||_{L^p} over the outer direction,
    as a Riemann sum on the outer grid. sup_direction='t' takes the sup over t
    and the norm over x; 'x' the other way round.
    """
    if sup_direction not in DIRECTIONS:
        raise ValueError(f'sup_direction must be one of {DIRECTIONS}')
    if not p >= 1:
        raise OutOfDomainError(f'p must be at least 1, got {p}')

    sup, arg = _maximal_function(spec, grid, sup_direction, fast_path, threads, block_nodes)
    refined = False
    if sup_direction == 't' and grid.refine:
        sup, arg = _refine_t(spec, grid, sup, arg)
        refined = True
        logger.debug('refined sup over t with %d points per x node', grid.refine)

    spacing = grid.dx if sup_direction == 't' else grid.dt
    return SupNormResult(
        N=spec.N,
        direction=sup_direction,
        p=p,
        value=_lp(sup, spacing, p),
        sup=sup,
        argmax=arg,
        grid=grid,
        refined=refined,
    )


def _outer_length(grid, direction):
    return (grid.x_hi - grid.x_lo) if direction == 't' else (grid.t_hi - grid.t_lo)


def level_set_projection(spec: ExpSumSpec, grid: GridSpec, alpha: float, direction: str = 't',
                         fast_path='auto', threads=1, block_nodes=2 ** 20) -> float:
    """
    Measure of the projection of {|f| in [alpha/2, alpha)}: along t onto the
    x-axis for direction 't', along x onto the t-axis for 'x'.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f'direction must be one of {DIRECTIONS}')
    if not alpha > 0:
        raise OutOfDomainError(f'alpha must be positive, got {alpha}')

    outer = grid.Mx if direction == 't' else grid.Mt
    hit = np.zeros(outer, dtype=bool)
    for start, block in iter_row_blocks(spec, grid, fast_path, threads, block_nodes):
        magnitude = np.abs(block)
        inside = (magnitude >= alpha / 2) & (magnitude < alpha)
        if direction == 't':
            hit |= inside.any(axis=0)
        else:
            hit[start:start + len(block)] = inside.any(axis=1)
    return int(hit.sum()) * _outer_length(grid, direction) / outer


@dataclass
class LevelSetReport:
    N: int
    direction: str
    exponent: float
    l2_norm: float
    levels: list
    max_statistic: float
    grid: GridSpec

    def to_dict(self) -> dict:
        return {
            'N': self.N,
            'direction': self.direction,
            'exponent': self.exponent,
            'l2_norm': self.l2_norm,
            'levels': self.levels,
            'max_statistic': self.max_statistic,
            'grid': self.grid.to_dict(),
        }


def dyadic_level_report(spec: ExpSumSpec, grid: GridSpec, direction: str = 't',
                        fast_path='auto', threads=1, block_nodes=2 ** 20) -> LevelSetReport:
    """
    Projected measures of every dyadic level set in one sweep, with the
    statistic alpha^4 |pi U_alpha| / (N^e ||b||^4), e = 7/3 for direction 't'
    and 8/3 for 'x'. The 40 levels below the top observed level are reported.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f'direction must be one of {DIRECTIONS}')

    # |f| <= ||b||_1 bounds the top level: |f| in [2^(k-1), 2^k) has k <= k_max
    k_max = math.floor(math.log2(spec.l1_norm)) + 1
    k_min = k_max - TRACKED_LEVELS + 1
    outer = grid.Mx if direction == 't' else grid.Mt
    flags = np.zeros((TRACKED_LEVELS, outer), dtype=bool)

    for start, block in iter_row_blocks(spec, grid, fast_path, threads, block_nodes):
        magnitude = np.abs(block)
        nonzero = magnitude > 0
        k = np.full(magnitude.shape, k_min - 1)
        k[nonzero] = np.floor(np.log2(magnitude[nonzero])).astype(int) + 1
        k = np.minimum(k, k_max)
        tracked = k >= k_min
        rows, cols = np.nonzero(tracked)
        level = k[rows, cols] - k_min
        position = cols if direction == 't' else start + rows
        flags[level, position] = True

    populated = np.flatnonzero(flags.any(axis=1))
    exponent = 7 / 3 if direction == 't' else 8 / 3
    norm4 = spec.l2_norm ** 4
    cell = _outer_length(grid, direction) / outer
    levels = []
    if populated.size:
        top = int(populated.max())
        for index in range(top, max(top - REPORTED_LEVELS, -1), -1):
            alpha = 2.0 ** (index + k_min)
            measure = int(flags[index].sum()) * cell
            levels.append({
                'alpha': alpha,
                'measure': measure,
                'statistic': alpha ** 4 * measure / (spec.N ** exponent * norm4),
            })

    return LevelSetReport(
        N=spec.N,
        direction=direction,
        exponent=exponent,
        l2_norm=spec.l2_norm,
        levels=levels,
        max_statistic=max((level['statistic'] for level in levels), default=0.0),
        grid=grid,
    )


def dump_grid(matrix: np.ndarray, grid: GridSpec, path, spec: ExpSumSpec | None = None):
    """Row-major little-endian complex128 values in <path>.bin with a <path>.json sidecar."""
    from .storage import atomic_write_bytes, write_json

    matrix = np.ascontiguousarray(matrix, dtype='<c16')
    if matrix.shape != (grid.Mt, grid.Mx):
        raise ValueError(f'matrix shape {matrix.shape} does not match grid {(grid.Mt, grid.Mx)}')
    atomic_write_bytes(f'{path}.bin', matrix.tobytes())
    sidecar = {'dtype': 'complex128', 'order': 'row-major', 'rows': 't', 'columns': 'x',
               'shape': list(matrix.shape), 'grid': grid.to_dict()}
    if spec is not None:
        sidecar['N'] = spec.N
    write_json(f'{path}.json', sidecar)
