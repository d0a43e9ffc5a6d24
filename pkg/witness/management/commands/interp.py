from rest_framework import serializers

from witness import storage
from witness.convexseq import construct_for_alpha
from witness.interp import Knot, build_c1, invariant_suite, knots_from_sequence, upgrade_c2

from ._base import ValidationFailed, WitnessCommand


class Command(WitnessCommand):
    help = (
        'Build the convex interpolant through knots from a sequence CSV, a knots '
        'JSON file ([[x, y, p], ...]) or a fresh construction, dump it and run the '
        'invariant suite (exit 2 when an invariant fails).'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        source = parser.add_mutually_exclusive_group()
        source.add_argument('--sequence', help='sequence CSV; knots at (n/N, a_n)')
        source.add_argument('--knots', help='JSON array of [x, y, p] knots')
        parser.add_argument('--mode', choices=['C1', 'C2'], default='C2')
        parser.add_argument('--max-constant', type=float, default=8.0,
                            help='largest tightest_C accepted for a sequence')
        parser.add_argument('--samples', type=int, default=10_000)

    def knots(self, config, options):
        if options['knots']:
            rows = storage.read_json(options['knots'])
            try:
                return [Knot(float(x), float(y), float(p)) for x, y, p in rows]
            except (TypeError, ValueError):
                raise serializers.ValidationError({'knots': ['expected a list of [x, y, p] triples']})
        if options['sequence']:
            seq = storage.read_sequence_csv(options['sequence'])
        else:
            seq = construct_for_alpha(self.single(config, 'N'), self.single(config, 'alpha'))
        return knots_from_sequence(seq, max_constant=options['max_constant'])

    def run(self, config, options):
        curve = build_c1(self.knots(config, options))
        if options['mode'] == 'C2':
            curve = upgrade_c2(curve)
        report = invariant_suite(curve, samples=options['samples'])
        payload = {'interpolant': curve.to_dict(), 'invariants': report.to_dict()}
        if not report.passed:
            raise ValidationFailed(f'invariants failed: {", ".join(report.failures)}', payload)
        return payload
