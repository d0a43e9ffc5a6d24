from witness import expsum, storage
from witness.serializers import ExpSumSpecSerializer

from ._base import WitnessCommand


class Command(WitnessCommand):
    help = (
        'Maximal-function norm and level-set diagnostics for an exponential-sum '
        'spec file (JSON with N, eta, b and optional xi, p, direction, grid, levels).'
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('spec', help='spec JSON file')
        parser.add_argument('--dyadic', action='store_true', help='add the dyadic level-set report')
        parser.add_argument('--dump', default=None, help='write the grid matrix to <dump>.bin/.json')

    def run(self, config, options):
        serializer = ExpSumSpecSerializer(data=storage.read_json(options['spec']))
        serializer.is_valid(raise_exception=True)
        spec = serializer.build()
        data = serializer.validated_data
        direction = data['direction']

        if 'grid' in data:
            grid = expsum.GridSpec(**data['grid'])
        else:
            grid = expsum.GridSpec.canonical(spec.N, config['grid_budget'], direction)
        evaluator = self.evaluator(config)

        norm = expsum.sup_norm_Lp(spec, grid, direction, data['p'], **evaluator)
        payload = {
            'norm': norm.to_dict(),
            'l1_norm': spec.l1_norm,
            'l2_norm': spec.l2_norm,
            'fast_path': expsum.fast_path_compatible(spec, grid) and config['fast_path'] != 'off',
        }
        if data['levels']:
            payload['level_sets'] = [
                {'alpha': alpha, 'measure': expsum.level_set_projection(spec, grid, alpha, direction, **evaluator)}
                for alpha in data['levels']
            ]
        if options['dyadic']:
            payload['dyadic'] = expsum.dyadic_level_report(spec, grid, direction, **evaluator).to_dict()
        if options['dump']:
            matrix = expsum.eval_grid(spec, grid, **evaluator)
            expsum.dump_grid(matrix, grid, options['dump'], spec)
            payload['dump'] = options['dump']
        return payload
