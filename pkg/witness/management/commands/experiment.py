from witness.experiments import EXPERIMENT_IDS, run_experiment

from ._base import ValidationFailed, WitnessCommand


class Command(WitnessCommand):
    help = 'Run witness experiment A, B or C; exits 2 when the exact identity fails.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('experiment_id', choices=EXPERIMENT_IDS)
        parser.add_argument('--amplitude', type=float, default=1.0, help='constant factor on b')
        parser.add_argument('--level-sets', action='store_true', help='add the dyadic level-set statistic')

    def run(self, config, options):
        report = run_experiment(
            options['experiment_id'],
            self.single(config, 'N'),
            grid_budget=config['grid_budget'],
            seed=config['seed'],
            amplitude=options['amplitude'],
            level_sets=options['level_sets'],
            **self.evaluator(config),
        )
        payload = report.to_dict()
        if not report.exact_identity_pass:
            raise ValidationFailed(
                f'experiment {report.id}: identity off by {report.identity["max_error"]:.3g}', payload,
            )
        return payload
