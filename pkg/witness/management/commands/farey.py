import csv
import io

from witness import rational
from witness.storage import atomic_write_text

from ._base import WitnessCommand


class Command(WitnessCommand):
    help = 'List or count the rationals in [lo, hi] with reduced denominator at most qmax.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--lo', required=True, help='lower end, e.g. 1/3')
        parser.add_argument('--hi', required=True, help='upper end, e.g. 2/3')
        parser.add_argument('--qmax', type=int, required=True)
        parser.add_argument('--count-only', action='store_true')

    def run(self, config, options):
        lo, hi = rational.as_rational(options['lo']), rational.as_rational(options['hi'])
        qmax = options['qmax']
        fractions = rational.enumerate_fractions(lo, hi, qmax)
        self.fractions = fractions
        payload = {'lo': lo, 'hi': hi, 'qmax': qmax, 'count': len(fractions)}
        # the counting density is defined on windows [x, 2x]
        if lo > 0 and hi == 2 * lo:
            payload['density'] = rational.farey_density(lo, qmax)
        if not options['count_only']:
            payload['fractions'] = [str(value) for value in fractions]
            payload['gap_bound_holds'] = all(
                gap >= bound for gap, bound in rational.consecutive_gaps(fractions)
            )
        return payload

    def emit(self, config, document):
        if config['format'] == 'json':
            return super().emit(config, document)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(['num', 'den'])
        for value in self.fractions:
            writer.writerow([value.numerator, value.denominator])
        if config['out']:
            atomic_write_text(config['out'], buffer.getvalue())
        else:
            self.stdout.write(buffer.getvalue(), ending='')
