import json
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from witness.exceptions import FastPathUnavailable, OutOfDomainError
from witness.expsum import (
    ExpSumSpec,
    GridSpec,
    dump_grid,
    dyadic_level_report,
    eval_grid,
    eval_naive,
    eval_point,
    fast_path_compatible,
    level_set_projection,
    sup_norm_Lp,
)


def canonical_spec(N, eta, b):
    return ExpSumSpec.with_frequencies(
        xi=np.arange(1, N + 1) / N,
        eta=eta,
        b=b,
        xi_exact=tuple(Fraction(n, N) for n in range(1, N + 1)),
    )


def random_spec(N, seed):
    rng = np.random.default_rng(seed)
    eta = np.sort(rng.uniform(0, 4, N))
    b = rng.normal(size=N) + 1j * rng.normal(size=N)
    return canonical_spec(N, eta, b)


def single_mode(N, amplitude):
    # one term at n = N: |f| is constant
    b = np.zeros(N, dtype=complex)
    b[-1] = amplitude
    return canonical_spec(N, np.zeros(N), b)


class EvalPointTests(SimpleTestCase):
    def test_constant_sum(self):
        spec = ExpSumSpec.with_frequencies(xi=[0.0], eta=[0.0], b=[1.0])
        self.assertEqual(eval_point(spec, 0.37, 123.4), 1)

    def test_exact_phases(self):
        spec = canonical_spec(4, [Fraction(1, 2)] * 4, [1, 1, 1, 1])
        spec = ExpSumSpec.with_frequencies(
            xi=spec.xi, eta=spec.eta, b=spec.b,
            xi_exact=spec.xi_exact, eta_exact=(Fraction(1, 2),) * 4,
        )
        self.assertEqual(eval_point(spec, 4, 2), 4)
        self.assertAlmostEqual(eval_point(spec, 0, Fraction(1)), -4, delta=1e-12)

    def test_triangle_inequality(self):
        spec = random_spec(32, 1)
        xs = np.linspace(0, 32, 17)
        ts = np.linspace(0, 1024, 13)
        values = eval_naive(spec, xs, ts)
        self.assertEqual(values.shape, (13, 17))
        self.assertLessEqual(np.abs(values).max(), spec.l1_norm * (1 + 1e-12))

    @given(st.floats(0, 64), st.floats(0, 4096))
    @settings(max_examples=50, deadline=None)
    def test_periodic_in_x(self, x, t):
        spec = random_spec(64, 2)
        shifted = eval_point(spec, x + 64, t)
        self.assertLessEqual(abs(shifted - eval_point(spec, x, t)), 1e-9 * spec.l1_norm)

    def test_mismatched_lengths(self):
        with self.assertRaises(ValueError):
            ExpSumSpec(N=3, xi=[0, 1, 2], eta=[0, 1], b=[1, 1, 1])
        with self.assertRaises(ValueError):
            ExpSumSpec(N=2, xi=[0, 1], eta=[0, 1], b=[0, 0])


class EvalGridTests(SimpleTestCase):
    def test_geometric_row(self):
        spec = canonical_spec(4, np.zeros(4), np.ones(4))
        grid = GridSpec(0, 4, 4, 0, 1, 1)
        self.assertTrue(fast_path_compatible(spec, grid))
        row = eval_grid(spec, grid, fast_path='on')[0]
        np.testing.assert_allclose(row, [4, 0, 0, 0], atol=1e-12)

    def test_fast_path_matches_oracle(self):
        N = 256
        spec = random_spec(N, 3)
        grid = GridSpec(0, N, 4 * N, 0, N * N, 64)
        fast = eval_grid(spec, grid, fast_path='on')
        naive = eval_grid(spec, grid, fast_path='off')
        self.assertLessEqual(np.abs(fast - naive).max(), 1e-9 * spec.l1_norm)

        rng = np.random.default_rng(4)
        rows = rng.integers(0, grid.Mt, 1000)
        cols = rng.integers(0, grid.Mx, 1000)
        xs, ts = grid.x_nodes(), grid.t_nodes()
        for i, j in zip(rows, cols):
            self.assertLessEqual(abs(fast[i, j] - eval_point(spec, xs[j], ts[i])), 1e-9 * spec.l1_norm)

    def test_grid_parseval(self):
        N = 64
        spec = random_spec(N, 5)
        grid = GridSpec(0, N, 4 * N, 0, N * N, 32)
        power = np.mean(np.abs(eval_grid(spec, grid)) ** 2, axis=1)
        np.testing.assert_allclose(power, spec.l2_norm ** 2, rtol=1e-9)

    def test_fast_path_unavailable(self):
        spec = ExpSumSpec.with_frequencies(xi=[0.1, 0.7], eta=[0.0, 1.0], b=[1, 1])
        grid = GridSpec(0, 2, 8, 0, 4, 4)
        self.assertFalse(fast_path_compatible(spec, grid))
        with self.assertRaises(FastPathUnavailable):
            eval_grid(spec, grid, fast_path='on')
        self.assertEqual(eval_grid(spec, grid).shape, (4, 8))

    def test_independent_of_threads(self):
        spec = random_spec(64, 6)
        grid = GridSpec(0, 64, 256, 0, 4096, 40)
        one = eval_grid(spec, grid, threads=1, block_nodes=1024)
        many = eval_grid(spec, grid, threads=4, block_nodes=1024)
        np.testing.assert_array_equal(one, many)


class CanonicalGridTests(SimpleTestCase):
    def test_uncapped(self):
        grid = GridSpec.canonical(64, 2 ** 24, 't')
        self.assertEqual((grid.Mx, grid.Mt, grid.refine), (256, 16384, 0))
        self.assertEqual((grid.x_hi, grid.t_hi), (64, 4096))

    def test_capped_sweep_refines(self):
        grid = GridSpec.canonical(64, 2 ** 20, 't')
        self.assertEqual((grid.Mt, grid.refine), (4096, 16))
        self.assertEqual(GridSpec.canonical(64, 2 ** 20, 'x').refine, 0)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            GridSpec(0, 1, 0, 0, 1, 1)
        with self.assertRaises(ValueError):
            GridSpec.canonical(64, 2 ** 20, 'y')


class SupNormTests(SimpleTestCase):
    def test_constant_modulus(self):
        N = 16
        result = sup_norm_Lp(single_mode(N, 3), GridSpec.canonical(N, 2 ** 16, 't'), 't', 4)
        self.assertAlmostEqual(result.value, 3 * N ** 0.25, places=9)
        self.assertEqual(result.to_dict()['direction'], 't')

    def test_homogeneous(self):
        spec = random_spec(32, 7)
        grid = GridSpec(0, 32, 128, 0, 1024, 64)
        once = sup_norm_Lp(spec, grid, 'x').value
        twice = sup_norm_Lp(spec.scaled(2), grid, 'x').value
        self.assertAlmostEqual(twice, 2 * once, delta=1e-9 * once)

    def test_refining_inner_grid_never_lowers(self):
        spec = random_spec(32, 8)
        coarse = sup_norm_Lp(spec, GridSpec(0, 32, 128, 0, 1024, 16), 't').value
        fine = sup_norm_Lp(spec, GridSpec(0, 32, 128, 0, 1024, 64), 't').value
        refined = sup_norm_Lp(spec, GridSpec(0, 32, 128, 0, 1024, 16, refine=8), 't').value
        self.assertGreaterEqual(fine, coarse * (1 - 1e-12))
        self.assertGreaterEqual(refined, coarse * (1 - 1e-12))

    def test_p_below_one(self):
        with self.assertRaises(OutOfDomainError):
            sup_norm_Lp(random_spec(8, 0), GridSpec(0, 8, 32, 0, 64, 8), 't', p=0.5)


class LevelSetTests(SimpleTestCase):
    def test_constant_modulus_projection(self):
        N = 16
        spec = single_mode(N, 1.5)
        grid = GridSpec(0, N, 4 * N, 0, N * N, 32)
        self.assertEqual(level_set_projection(spec, grid, 2, 't'), N)
        self.assertEqual(level_set_projection(spec, grid, 0.5, 't'), 0)
        self.assertEqual(level_set_projection(spec, grid, 2, 'x'), N * N)
        with self.assertRaises(OutOfDomainError):
            level_set_projection(spec, grid, 0, 't')

    def test_dyadic_constant(self):
        N = 16
        spec = single_mode(N, 1)
        report = dyadic_level_report(spec, GridSpec(0, N, 4 * N, 0, N * N, 32), 't')
        self.assertTrue(report.levels)
        self.assertLessEqual(report.max_statistic, 16 * N / N ** (7 / 3) * (1 + 1e-12))
        self.assertGreater(report.max_statistic, 0)
        self.assertEqual(report.to_dict()['exponent'], 7 / 3)

    def test_dyadic_levels_cover_observed_range(self):
        spec = random_spec(32, 9)
        grid = GridSpec(0, 32, 128, 0, 1024, 32)
        report = dyadic_level_report(spec, grid, 'x')
        top = np.abs(eval_grid(spec, grid)).max()
        self.assertTrue(report.levels[0]['alpha'] / 2 <= top < report.levels[0]['alpha'])
        for level in report.levels:
            self.assertTrue(0 <= level['measure'] <= 1024)


class DumpGridTests(SimpleTestCase):
    def test_binary_with_sidecar(self):
        spec = random_spec(8, 10)
        grid = GridSpec(0, 8, 32, 0, 64, 4)
        matrix = eval_grid(spec, grid)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'grid'
            dump_grid(matrix, grid, path, spec)
            restored = np.fromfile(f'{path}.bin', dtype='<c16').reshape(grid.Mt, grid.Mx)
            np.testing.assert_array_equal(restored, matrix)
            sidecar = json.loads(Path(f'{path}.json').read_text())
            self.assertEqual(sidecar['shape'], [4, 32])
            self.assertEqual(sidecar['N'], 8)

    def test_shape_checked(self):
        grid = GridSpec(0, 8, 32, 0, 64, 4)
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValueError):
                dump_grid(np.zeros((2, 2), dtype=complex), grid, Path(tmp) / 'grid')
