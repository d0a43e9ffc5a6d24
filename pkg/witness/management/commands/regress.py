import csv

from rest_framework import serializers

from witness import storage
from witness.experiments import regress
from witness.serializers import RegressionPointSerializer

from ._base import WitnessCommand


class Command(WitnessCommand):
    help = 'Least-squares slope of log(value) against log(N) for points in a CSV (N,value) or JSON file.'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('path', help='CSV with columns N,value or a JSON list of {N, value}')

    def read_points(self, path):
        if str(path).endswith('.json'):
            rows = storage.read_json(path)
        else:
            with open(path, newline='', encoding='utf-8') as handle:
                rows = list(csv.DictReader(handle))
        serializer = RegressionPointSerializer(data=rows, many=True)
        if not serializer.is_valid():
            errors = serializer.errors
            if isinstance(errors, list):
                errors = {f'row {i + 1}': error for i, error in enumerate(errors) if error}
            raise serializers.ValidationError(errors)
        return [(row['N'], row['value']) for row in serializer.validated_data]

    def run(self, config, options):
        return regress(self.read_points(options['path'])).to_dict()
