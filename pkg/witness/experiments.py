"""
The three witness experiments and the scaling regressions behind them.

Each experiment builds a convex sequence, puts b_n = 1 on its lattice hits,
checks an exact identity f(P_j) = #hits at integer points P_j and measures
an L^4 norm of a maximal function, which is then compared against N^e ||b||_2:

    A  sup over t, norm over x in [0, N],   sheared alpha = 1 sequence,   e = 7/12
    B  sup over x, norm over t in [0, N^2], alpha = 1/2 sequence,         e = 5/8
    C  sup over x in [0, N^2], norm over t, frequencies (n/N - a_n/N, a_n), e = 5/6
"""

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from . import expsum
from .convexseq import (
    construct_dirichlet_like,
    construct_for_alpha,
    intersect_count,
    shear,
    upper_bound_holds,
)
from .exceptions import OutOfDomainError, RegressionError
from .rational import as_exponent, integer_root

logger = logging.getLogger(__name__)

EXPERIMENT_IDS = ('A', 'B', 'C')
PREDICTED_EXPONENTS = {'A': 7 / 12, 'B': 5 / 8, 'C': 5 / 6}
# Sharpness brackets [lower, upper] of the norm exponents; B's upper end is 2/3.
EXPONENT_BRACKETS = {'A': (7 / 12, 7 / 12), 'B': (5 / 8, 2 / 3), 'C': (5 / 6, 5 / 6)}

IDENTITY_SAMPLES = 64
IDENTITY_RTOL = 1e-6
MIN_N = 64


@dataclass
class ExperimentReport:
    id: str
    N: int
    alpha: str
    hit_count: int
    identity: dict
    norm: dict
    ratio: float
    predicted_exponent: float
    seed: int
    ball_min: float
    amplitude: float = 1.0
    level_max_statistic: float | None = None
    sequence: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def exact_identity_pass(self) -> bool:
        return self.identity['pass']

    @property
    def norm_value(self) -> float:
        return self.norm['value']

    def to_dict(self) -> dict:
        # runtime is logged and recorded, never written to reports
        data = dict(self.__dict__)
        data.pop('runtime')
        return data


@dataclass
class RegressionResult:
    points: list
    slope: float
    intercept: float
    residual: float
    label: str | None = None
    target: float | None = None
    upper_bound_ok: bool | None = None
    quantity: str = 'value'

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def regress(points) -> RegressionResult:
    """Least squares of log(value) against log(N) over (N, value) pairs."""
    points = [(float(n), float(value)) for n, value in points]
    if len(points) < 3:
        raise RegressionError(f'need at least 3 points, got {len(points)}')
    if any(n <= 0 or value <= 0 for n, value in points):
        raise RegressionError('N and values must all be positive')
    log_n = np.log([n for n, _ in points])
    log_v = np.log([value for _, value in points])
    if np.ptp(log_n) == 0:
        raise RegressionError('all points share the same N')

    fit = stats.linregress(log_n, log_v)
    residual = float(np.sqrt(np.mean((log_v - (fit.intercept + fit.slope * log_n)) ** 2)))
    return RegressionResult(
        points=[[float(x), float(y)] for x, y in zip(log_n, log_v)],
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        residual=residual,
    )


def _check_N(N):
    if N < MIN_N:
        raise OutOfDomainError(f'experiments need N >= {MIN_N}, got {N}')


def _coefficients(N, hit_indices, amplitude):
    b = np.zeros(N, dtype=complex)
    b[np.asarray(hit_indices, dtype=int) - 1] = amplitude
    return b


def _identity(spec, points, expected) -> dict:
    errors = [abs(expsum.eval_point(spec, x, t) - expected) for x, t in points]
    max_error = max(errors)
    return {
        'checked_j': len(points),
        'max_error': max_error,
        'pass': max_error <= IDENTITY_RTOL * abs(expected),
    }


def _ball_min(spec, points, expected) -> float:
    return min(abs(expsum.eval_point(spec, x, t)) for x, t in points) / abs(expected)


def _sample_j(rng, j_max) -> list[int]:
    count = min(IDENTITY_SAMPLES, j_max)
    return sorted(int(j) + 1 for j in rng.choice(j_max, size=count, replace=False))


def _sequence_summary(seq) -> dict:
    return {key: seq.metadata[key] for key in ('construction', 'scale', 'shear', 'knots') if key in seq.metadata}


def _finish(report, started):
    report.runtime = time.perf_counter() - started
    logger.info(
        'experiment %s N=%d: hits=%d identity=%s norm=%.6g ratio=%.6g (%.2fs)',
        report.id, report.N, report.hit_count, report.identity['pass'],
        report.norm['value'], report.ratio, report.runtime,
    )
    return report


def experiment_A(N: int, grid_budget: int = 2 ** 24, seed: int = 0, amplitude=1,
                 level_sets: bool = False, **evaluator) -> ExperimentReport:
    """
    Sheared alpha = 1 sequence a_n = c_n - n/N^2, with f(j, jN) equal to the hit
    count for every integer j in [1, N].
    """
    _check_N(N)
    started = time.perf_counter()
    c = construct_dirichlet_like(N, 1)
    _, hits = intersect_count(c, 1, tol=0)
    a = shear(c, Fraction(-1, N * N))
    spec = expsum.ExpSumSpec.for_sequence(a, _coefficients(N, hits, amplitude))
    expected = amplitude * len(hits)

    identity = _identity(spec, [(j, j * N) for j in range(1, N + 1)], expected)
    offset = Fraction(1, 128)
    ball = _ball_min(
        spec,
        [(j + sign * offset, j * N) for j in range(1, N + 1) for sign in (-1, 1)],
        expected,
    )

    grid = expsum.GridSpec.canonical(N, grid_budget, 't')
    result = expsum.sup_norm_Lp(spec, grid, 't', 4, **evaluator)
    level_max = None
    if level_sets:
        level_max = expsum.dyadic_level_report(spec, grid, 't', **evaluator).max_statistic

    report = ExperimentReport(
        id='A',
        N=N,
        alpha='1',
        hit_count=len(hits),
        identity=identity,
        norm=result.to_dict(),
        ratio=result.value / (N ** PREDICTED_EXPONENTS['A'] * spec.l2_norm),
        predicted_exponent=PREDICTED_EXPONENTS['A'],
        seed=seed,
        ball_min=ball,
        amplitude=amplitude,
        level_max_statistic=level_max,
        sequence=_sequence_summary(a),
    )
    return _finish(report, started)


def experiment_B(N: int, grid_budget: int = 2 ** 24, seed: int = 0, amplitude=1,
                 level_sets: bool = False, **evaluator) -> ExperimentReport:
    """
    alpha = 1/2 sequence, with f(0, j N^(1/2)) equal to the hit count for
    integer j in [1, N^(3/2)], checked at seeded j.
    """
    _check_N(N)
    started = time.perf_counter()
    alpha = Fraction(1, 2)
    c = construct_for_alpha(N, alpha)
    hits = [hit.n for hit in c.hits_at(alpha)]
    spec = expsum.ExpSumSpec.for_sequence(c, _coefficients(N, hits, amplitude))
    expected = amplitude * len(hits)

    root = integer_root(N, 2)
    step = Fraction(root) if root is not None else math.sqrt(N)
    rng = np.random.default_rng(seed)
    js = _sample_j(rng, math.isqrt(N ** 3))
    identity = _identity(spec, [(0, j * step) for j in js], expected)
    offset = Fraction(1, 100)
    ball = _ball_min(
        spec, [(0, j * step + sign * offset) for j in js for sign in (-1, 1)], expected,
    )

    grid = expsum.GridSpec.canonical(N, grid_budget, 'x')
    result = expsum.sup_norm_Lp(spec, grid, 'x', 4, **evaluator)
    level_max = None
    if level_sets:
        level_max = expsum.dyadic_level_report(spec, grid, 'x', **evaluator).max_statistic

    report = ExperimentReport(
        id='B',
        N=N,
        alpha='1/2',
        hit_count=len(hits),
        identity={**identity, 'j': js},
        norm=result.to_dict(),
        ratio=result.value / (N ** PREDICTED_EXPONENTS['B'] * spec.l2_norm),
        predicted_exponent=PREDICTED_EXPONENTS['B'],
        seed=seed,
        ball_min=ball,
        amplitude=amplitude,
        level_max_statistic=level_max,
        sequence=_sequence_summary(c),
    )
    return _finish(report, started)


def rotated_spec(seq, b) -> expsum.ExpSumSpec:
    """Frequencies (n/N - a_n/N, a_n); they pair with (jN, j) to give jn."""
    N = seq.N
    n = np.arange(1, N + 1)
    xi_exact = None
    if seq.exact_values is not None:
        xi_exact = tuple(
            None if value is None else Fraction(k, N) - value / N
            for k, value in enumerate(seq.exact_values, start=1)
        )
    return expsum.ExpSumSpec.with_frequencies(
        xi=n / N - seq.values / N,
        eta=seq.values,
        b=b,
        xi_exact=xi_exact,
        eta_exact=seq.exact_values,
    )


def experiment_C(N: int, grid_budget: int = 2 ** 24, seed: int = 0, amplitude=1,
                 level_sets: bool = False, **evaluator) -> ExperimentReport:
    """
    alpha = 1 sequence with frequencies (n/N - a_n/N, a_n), f(jN, j) equal to
    the hit count for integer j in [1, N^2], checked at seeded j.
    """
    _check_N(N)
    started = time.perf_counter()
    c = construct_dirichlet_like(N, 1)
    hits = [hit.n for hit in c.hits_at(1)]
    spec = rotated_spec(c, _coefficients(N, hits, amplitude))
    expected = amplitude * len(hits)

    rng = np.random.default_rng(seed)
    js = _sample_j(rng, N * N)
    identity = _identity(spec, [(j * N, j) for j in js], expected)
    offset = Fraction(1, 100)
    ball = _ball_min(
        spec, [(j * N + sign * offset, j) for j in js for sign in (-1, 1)], expected,
    )

    side = max(1, min(4 * N * N, math.isqrt(grid_budget)))
    grid = expsum.GridSpec(0, N * N, side, 0, N * N, side)
    result = expsum.sup_norm_Lp(spec, grid, 'x', 4, **evaluator)
    level_max = None
    if level_sets:
        level_max = expsum.dyadic_level_report(spec, grid, 'x', **evaluator).max_statistic

    report = ExperimentReport(
        id='C',
        N=N,
        alpha='1',
        hit_count=len(hits),
        identity={**identity, 'j': js},
        norm=result.to_dict(),
        ratio=result.value / (N ** PREDICTED_EXPONENTS['C'] * spec.l2_norm),
        predicted_exponent=PREDICTED_EXPONENTS['C'],
        seed=seed,
        ball_min=ball,
        amplitude=amplitude,
        level_max_statistic=level_max,
        sequence=_sequence_summary(c),
    )
    return _finish(report, started)


EXPERIMENTS = {'A': experiment_A, 'B': experiment_B, 'C': experiment_C}


def run_experiment(experiment_id: str, N: int, **options) -> ExperimentReport:
    try:
        runner = EXPERIMENTS[experiment_id]
    except KeyError:
        raise ValueError(f'unknown experiment {experiment_id!r}; choose one of {EXPERIMENT_IDS}')
    return runner(N, **options)


def target_exponent(alpha) -> float:
    alpha = as_exponent(alpha)
    return float(alpha) if alpha <= Fraction(1, 2) else float(alpha + 1) / 3


def intersection_scan(N_list, alpha_list) -> list[RegressionResult]:
    """
    For each alpha, hit counts of the matching construction over N_list and
    the slope of log(count) against log(N).
    """
    results = []
    for alpha in map(as_exponent, alpha_list):
        counts = []
        bounded = True
        for N in N_list:
            _check_N(N)
            seq = construct_for_alpha(N, alpha)
            tol = 0 if seq.exact_values is not None else None
            count, _ = intersect_count(seq, alpha, tol=tol)
            bounded = bounded and upper_bound_holds(count, N, alpha)
            counts.append((N, count))
            logger.info('scan alpha=%s N=%d: %d hits', alpha, N, count)
        fit = regress(counts)
        fit.label = f'alpha={alpha}'
        fit.target = target_exponent(alpha)
        fit.upper_bound_ok = bounded
        results.append(fit)
    return results


def norm_scan(experiment_id: str, N_list, **options) -> tuple[list, RegressionResult]:
    """
    Run one experiment across N_list and regress norm / ||b||_2 against N,
    where ||b||_2 = amplitude * sqrt(hit_count) itself grows with N.
    """
    reports = [run_experiment(experiment_id, N, **options) for N in N_list]
    fit = regress([(report.N, normalized_norm(report)) for report in reports])
    fit.label = f'experiment {experiment_id}'
    fit.target = PREDICTED_EXPONENTS[experiment_id]
    fit.quantity = 'norm / ||b||_2'
    return reports, fit


def normalized_norm(report: ExperimentReport) -> float:
    return report.norm_value / (report.amplitude * math.sqrt(report.hit_count))
