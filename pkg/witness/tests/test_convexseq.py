from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase, tag
from hypothesis import given, settings
from hypothesis import strategies as st

from witness.convexseq import (
    ConvexSequence,
    HitCertificate,
    check_certificates,
    construct_dirichlet_like,
    construct_for_alpha,
    construct_small_alpha,
    dirichlet_knots,
    intersect_count,
    restrict_rescale,
    shear,
    small_alpha_knots,
    upper_bound_holds,
    validate,
)
from witness.exceptions import (
    ConstructionInfeasible,
    ExactValuesRequired,
    OutOfDomainError,
    SequenceTooShort,
)
from witness.rational import UnreducedFraction


def exact_sequence(N, formula):
    exact = [formula(n) for n in range(1, N + 1)]
    return ConvexSequence(N=N, values=[float(v) for v in exact], exact_values=exact)


def quadratic(N):
    return exact_sequence(N, lambda n: Fraction(n, 2 * N) + Fraction(n * n, 2 * N * N))


def assert_certified(test, seq):
    # every certificate is an exact lattice point of the stored values
    for hit in seq.hits:
        exact = seq.exact(hit.n)
        if exact is not None:
            test.assertEqual(exact, hit.exact(seq.N))
        test.assertAlmostEqual(seq.value(hit.n), hit.approx(seq.N), delta=1e-12 * max(1, abs(hit.approx(seq.N))))


class ValidateTests(SimpleTestCase):
    def test_quadratic_passes_exactly(self):
        report = validate(quadratic(10))
        self.assertTrue(report.passed)
        self.assertEqual(report.second_diff_min, 1.0)
        self.assertEqual(report.second_diff_max, 1.0)
        self.assertEqual(report.to_dict()['pass'], True)

    def test_arithmetic_progression_fails(self):
        report = validate(exact_sequence(10, lambda n: Fraction(n, 10)))
        self.assertFalse(report.passed)
        self.assertEqual(report.second_diff_min, 0.0)
        self.assertIsNone(report.to_dict()['tightest_C'])

    def test_slow_start_fails(self):
        N = 100
        report = validate(ConvexSequence(N=N, values=(np.arange(1, N + 1) / N) ** 2))
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.first_diff_min, 3 / N, places=12)

    def test_too_short(self):
        with self.assertRaises(SequenceTooShort):
            validate(ConvexSequence(N=2, values=[0.0, 1.0]))

    def test_float_and_exact_paths_agree(self):
        seq = quadratic(12)
        exact = validate(seq)
        approx = validate(ConvexSequence(N=12, values=seq.values))
        self.assertAlmostEqual(exact.tightest_C, approx.tightest_C, places=9)

    def test_theta_scales_second_differences(self):
        report = validate(quadratic(10), theta=Fraction(1, 2))
        self.assertEqual(report.second_diff_min, 2.0)


class IntersectCountTests(SimpleTestCase):
    def test_quadratic_hits_only_at_end(self):
        self.assertEqual(intersect_count(quadratic(10), 1, tol=0), (1, [10]))

    def test_no_integers(self):
        seq = exact_sequence(10, lambda n: Fraction(2 * n + 1, 7))
        self.assertEqual(intersect_count(seq, 0, tol=0)[0], 2)
        seq = exact_sequence(10, lambda n: n + Fraction(1, 3))
        self.assertEqual(intersect_count(seq, 0, tol=0), (0, []))

    def test_exact_requires_values(self):
        seq = ConvexSequence(N=10, values=np.linspace(0.1, 1, 10))
        with self.assertRaises(ExactValuesRequired):
            intersect_count(seq, 1, tol=0)

    def test_float_tolerance(self):
        seq = ConvexSequence(N=10, values=quadratic(10).values)
        count, hits = intersect_count(seq, 1)
        self.assertEqual((count, hits), (1, [10]))

    @given(st.integers(-50, 50))
    def test_invariant_under_lattice_translation(self, shift):
        N = 10
        base = quadratic(N)
        moved = exact_sequence(N, lambda n: base.exact(n) + Fraction(shift, N))
        self.assertEqual(intersect_count(moved, 1, tol=0), intersect_count(base, 1, tol=0))

    def test_certificates_count_without_values(self):
        seq = ConvexSequence(
            N=10, values=np.linspace(0.15, 1.05, 10), hits=(HitCertificate(4, Fraction(1), 3),),
        )
        self.assertEqual(intersect_count(seq, 1, tol=1e-30), (1, [4]))

    def test_upper_bound(self):
        self.assertTrue(upper_bound_holds(10, 4096, 1))
        self.assertFalse(upper_bound_holds(10 ** 6, 64, 1))


class CheckCertificatesTests(SimpleTestCase):
    def test_exact_values(self):
        good, wrong, outside = (HitCertificate(n, Fraction(1), m) for n, m in ((10, 10), (9, 9), (11, 11)))
        self.assertEqual(check_certificates(quadratic(10), [good, wrong, outside]), [9, 11])

    def test_float_values(self):
        seq = ConvexSequence(N=10, values=quadratic(10).values)
        self.assertEqual(check_certificates(seq, [HitCertificate(10, Fraction(1), 10)]), [])
        self.assertEqual(check_certificates(seq, [HitCertificate(10, Fraction(1), 9)]), [10])

    def test_construction_certificates_hold(self):
        seq = construct_for_alpha(128, Fraction(1, 2))
        self.assertTrue(seq.hits)
        self.assertEqual(check_certificates(seq, seq.hits), [])


class DirichletKnotsTests(SimpleTestCase):
    def test_walkthrough_at_64(self):
        built = dirichlet_knots(64, 1)
        self.assertEqual(built.qmax, 4)
        self.assertEqual(built.fractions, [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)])
        first = built.pairs[0]
        self.assertEqual((first.left, first.right), (UnreducedFraction(4, 12), UnreducedFraction(6, 12)))
        self.assertEqual((first.M, first.k), (10, 24))
        self.assertEqual(built.knots[1].x, 24 / 64)
        self.assertEqual(built.knots[1].y, 10 / 64)
        self.assertEqual(built.hit_indices, [24, 48])
        self.assertEqual(built.hit_multiples, [10, 24])
        self.assertEqual(built.trimmed, 0)

    def test_domain(self):
        with self.assertRaises(OutOfDomainError):
            dirichlet_knots(64, Fraction(1, 4))
        with self.assertRaises(OutOfDomainError):
            dirichlet_knots(8, 1)

    def test_too_few_fractions(self):
        with self.assertRaises(ConstructionInfeasible):
            dirichlet_knots(10, Fraction(1, 2))


class ConstructionTests(SimpleTestCase):
    def test_dirichlet_like_at_64(self):
        seq = construct_dirichlet_like(64, 1)
        self.assertLessEqual(validate(seq).tightest_C, 8)
        self.assertEqual([hit.n for hit in seq.hits], [24, 48])
        count, hits = intersect_count(seq, 1, tol=0)
        self.assertEqual(hits, [24, 48])
        scale = seq.metadata['scale']
        self.assertEqual(seq.exact(24), Fraction(10 * scale, 64))
        assert_certified(self, seq)

    def test_dirichlet_like_hit_count(self):
        N = 4096
        seq = construct_dirichlet_like(N, 1)
        count, _ = intersect_count(seq, 1, tol=0)
        self.assertGreaterEqual(count, 0.1 * N ** (2 / 3))
        self.assertEqual(len(seq.hits), seq.metadata['knots'] - 1)
        self.assertTrue(upper_bound_holds(count, N, 1))
        self.assertLessEqual(validate(seq).tightest_C, 8)

    def test_integer_fractions_at_alpha_two(self):
        seq = construct_dirichlet_like(4096, 2)
        self.assertEqual(seq.metadata['qmax'], 1)
        self.assertTrue(validate(seq).passed)
        assert_certified(self, seq)

    def test_small_alpha_zero(self):
        seq = construct_small_alpha(64, 0)
        count, hits = intersect_count(seq, 0, tol=0)
        self.assertGreaterEqual(count, 1)
        self.assertIn(1, hits)
        self.assertLessEqual(validate(seq).tightest_C, 8)

    def test_small_alpha_half(self):
        N = 1024
        seq = construct_small_alpha(N, Fraction(1, 2))
        count, _ = intersect_count(seq, Fraction(1, 2), tol=0)
        self.assertGreaterEqual(count, 0.1 * N ** 0.5)
        self.assertTrue(validate(seq).passed)
        assert_certified(self, seq)

    def test_small_alpha_quarter(self):
        N = 1024
        seq = construct_small_alpha(N, Fraction(1, 4))
        count, _ = intersect_count(seq, Fraction(1, 4))
        self.assertGreaterEqual(count, 0.1 * N ** 0.25)
        self.assertLessEqual(validate(seq).tightest_C, 8)

    def test_walk_gaps_shrink(self):
        knots, hits, multiples = small_alpha_knots(1024, Fraction(1, 2))
        gaps = np.diff(hits)
        self.assertTrue(np.all(np.diff(gaps) < 0))
        self.assertEqual(multiples, list(range(len(hits))))
        slopes = [knot.p for knot in knots]
        self.assertEqual(slopes, sorted(slopes))

    def test_walk_domain(self):
        with self.assertRaises(OutOfDomainError):
            small_alpha_knots(1024, Fraction(3, 4))

    def test_dispatch(self):
        self.assertEqual(construct_for_alpha(256, Fraction(1, 2)).metadata['construction'], 'small_alpha')
        self.assertEqual(construct_for_alpha(256, 1).metadata['construction'], 'dirichlet_like')

    @tag('slow')
    def test_upper_bound_on_constructions(self):
        for N in (256, 1024, 4096):
            for alpha in (Fraction(1, 2), Fraction(3, 4), Fraction(1), Fraction(3, 2), Fraction(2)):
                seq = construct_for_alpha(N, alpha)
                count, _ = intersect_count(seq, alpha)
                self.assertTrue(upper_bound_holds(count, N, alpha), (N, alpha, count))


class ShearTests(SimpleTestCase):
    def test_zero_is_identity(self):
        seq = quadratic(10)
        self.assertIs(shear(seq, 0), seq)

    def test_second_differences_unchanged(self):
        seq = construct_dirichlet_like(64, 1)
        sheared = shear(seq, Fraction(-1, 64 ** 2))
        np.testing.assert_allclose(np.diff(sheared.values, 2), np.diff(seq.values, 2), atol=1e-13)
        self.assertEqual(sheared.metadata['shear'], '-1/4096')

    def test_round_trip_is_exact(self):
        seq = construct_dirichlet_like(64, 1)
        lam = Fraction(-1, 64 ** 2)
        back = shear(shear(seq, lam), -lam)
        np.testing.assert_array_equal(back.values, seq.values)
        self.assertEqual(back.exact_values, seq.exact_values)
        self.assertEqual(back.shear_total, 0)

    def test_certificates_follow_lattice_shears(self):
        seq = construct_dirichlet_like(64, 1)
        on_lattice = shear(seq, Fraction(1, 64))
        self.assertEqual([hit.n for hit in on_lattice.hits], [24, 48])
        assert_certified(self, on_lattice)
        off_lattice = shear(seq, Fraction(-1, 64 ** 2))
        self.assertEqual(off_lattice.hits, ())


class RestrictRescaleTests(SimpleTestCase):
    def test_full_window_is_identity(self):
        seq = quadratic(10)
        self.assertIs(restrict_rescale(seq, 1), seq)

    def test_too_short(self):
        with self.assertRaises(SequenceTooShort):
            restrict_rescale(quadratic(10), Fraction(1, 4))

    def test_window_must_fit(self):
        with self.assertRaises(ValueError):
            restrict_rescale(quadratic(16), Fraction(1, 2), start=15)

    def test_generalized_window(self):
        seq = construct_dirichlet_like(4096, 1)
        first_hit = seq.hits[0].n
        window = restrict_rescale(seq, Fraction(1, 2), start=first_hit)
        self.assertEqual(window.N, 64)
        self.assertEqual(window.theta, Fraction(1, 64))
        self.assertLessEqual(validate(window).tightest_C, validate(seq).tightest_C + 1e-6)
        self.assertEqual(window.hits[0].n, 1)
        assert_certified(self, window)
        count, _ = intersect_count(window, 1, tol=0)
        target = float(window.theta) ** (1 / 3) * window.N ** (2 / 3)
        self.assertGreaterEqual(count / target, 0.05)

    def test_inexact_power_rounds_up(self):
        window = restrict_rescale(quadratic(128), Fraction(1, 2))
        self.assertEqual(window.N, 12)
        self.assertEqual(window.hits, ())
