from witness.models import RunRecord
from witness.serializers import RunRecordSerializer

from ._base import WitnessCommand


class Command(WitnessCommand):
    help = 'List stored run records, newest first.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--limit', type=int, default=20)
        parser.add_argument('--command', dest='filter_command', default=None)

    def run(self, config, options):
        records = RunRecord.objects.all()
        if options['filter_command']:
            records = records.filter(command=options['filter_command'])
        return RunRecordSerializer(records[: options['limit']], many=True).data
