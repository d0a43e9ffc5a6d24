from witness import storage
from witness.convexseq import check_certificates, intersect_count, validate
from witness.rational import as_exponent

from ._base import ValidationFailed, WitnessCommand


class Command(WitnessCommand):
    help = (
        'Check a sequence CSV for uniform convexity; exits 2 when the window [1/4, 4] is missed '
        'or a certificate from --hits does not hold.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('path', help='sequence CSV (n,a_n[,exact_num,exact_den])')
        parser.add_argument('--theta', default=None, help='second-difference parameter, e.g. 1/8')
        parser.add_argument('--hits', default=None, help='hit certificates written by construct (<stem>.hits.json)')

    def run(self, config, options):
        seq = storage.read_sequence_csv(options['path'])
        theta = as_exponent(options['theta']) if options['theta'] else None
        report = validate(seq, theta=theta).to_dict()

        counts = {}
        for alpha in config['alpha']:
            tol = config['tol']
            if tol is None and seq.exact_values is not None:
                tol = 0
            count, indices = intersect_count(seq, alpha, tol=tol)
            counts[str(alpha)] = {'count': count, 'indices': indices}

        payload = {'report': report, 'intersections': counts}
        failed = []
        if options['hits']:
            certificates = storage.read_hits_json(options['hits'])
            failed = check_certificates(seq, certificates, tol=config['tol'])
            payload['certificates'] = {'checked': len(certificates), 'failed': failed}

        if not report['pass']:
            bound = report['tightest_C']
            raise ValidationFailed(
                f'not uniformly convex: tightest C = {"infinite" if bound is None else f"{bound:.4g}"}',
                payload,
            )
        if failed:
            raise ValidationFailed(f'{len(failed)} hit certificate(s) do not hold, first at n={failed[0]}', payload)
        return payload
