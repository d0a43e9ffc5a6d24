from witness.experiments import EXPERIMENT_IDS, intersection_scan, norm_scan

from ._base import WitnessCommand


class Command(WitnessCommand):
    help = (
        'Scaling scans over --N: hit counts for each --alpha (slope against the '
        'target exponent), or with --norm the norm of experiment A, B or C.'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--norm', choices=EXPERIMENT_IDS, default=None)

    def run(self, config, options):
        if options['norm']:
            reports, fit = norm_scan(
                options['norm'],
                config['N'],
                grid_budget=config['grid_budget'],
                seed=config['seed'],
                **self.evaluator(config),
            )
            return {'reports': [report.to_dict() for report in reports], 'regression': fit.to_dict()}

        results = intersection_scan(config['N'], config['alpha'])
        return {'regressions': [result.to_dict() for result in results]}
