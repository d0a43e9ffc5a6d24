import logging
from pathlib import Path

from witness import storage
from witness.convexseq import (
    construct_dirichlet_like,
    construct_for_alpha,
    construct_small_alpha,
    validate,
)

from ._base import WitnessCommand

logger = logging.getLogger('witness.commands')

CONSTRUCTIONS = {
    'auto': construct_for_alpha,
    'mediant': construct_dirichlet_like,
    'walk': construct_small_alpha,
}


class Command(WitnessCommand):
    help = (
        'Build a uniformly convex sequence with many values on N^-alpha Z. '
        'CSV output goes to stdout, or with --out to that file plus the hit '
        'certificates (<stem>.hits.json) and a manifest (<stem>.json) next to it.'
    )
    default_format = 'csv'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--construction', choices=sorted(CONSTRUCTIONS), default='auto')

    def run(self, config, options):
        N = self.single(config, 'N')
        alpha = self.single(config, 'alpha')
        seq = CONSTRUCTIONS[options['construction']](N, alpha)
        self.sequence = seq
        return {
            'N': N,
            'alpha': alpha,
            'metadata': seq.metadata,
            'hit_count': len(seq.hits),
            'validation': validate(seq).to_dict(),
        }

    def emit(self, config, document):
        seq = self.sequence
        if config['format'] == 'json':
            document['result']['values'] = seq.values.tolist()
            document['result']['hits'] = storage.hits_payload(seq)
            return super().emit(config, document)

        if not config['out']:
            # no stem to put the certificates and manifest beside
            self.stdout.write(storage.sequence_csv(seq), ending='')
            logger.info('wrote %d rows to stdout; pass --out to keep the hit certificates', seq.N)
            return
        out = Path(config['out'])
        storage.write_sequence_csv(seq, out)
        storage.write_hits_json(seq, out.with_suffix('.hits.json'))
        storage.write_json(out.with_suffix('.json'), document)
        self.stdout.write(f'wrote {seq.N} rows to {out}')
