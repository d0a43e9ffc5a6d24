import logging
import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError
from rest_framework import serializers

from convexwitness import __version__
from witness import storage
from witness.exceptions import WitnessError
from witness.models import RunRecord
from witness.serializers import RunConfigSerializer

logger = logging.getLogger('witness.commands')


def comma_list(raw):
    # "64,128,256" -> ['64', '128', '256']
    return [item.strip() for item in raw.split(',') if item.strip()]


class ValidationFailed(Exception):
    """The computation ran but a checked property does not hold (exit status 2)."""

    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


class WitnessCommand(BaseCommand):
    """
    Shared flags, run-config validation, output and exit codes.

    Subclasses implement run(config, options) and return the JSON payload, or
    raise ValidationFailed carrying the payload when a checked property fails.
    Exit status: 0 success, 2 validation failure, 1 any other error.
    """

    default_format = 'json'

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # bad flags raise CommandError (exit 1) instead of argparse's exit 2
        parser.called_from_command_line = False
        return parser

    def run_from_argv(self, argv):
        try:
            super().run_from_argv(argv)
        except CommandError as exc:
            self.stderr.write(f'{exc.__class__.__name__}: {exc}')
            raise SystemExit(exc.returncode)

    def add_arguments(self, parser):
        parser.add_argument('--N', type=comma_list, default=[], help='N, or a comma-separated list of N')
        parser.add_argument('--alpha', type=comma_list, default=[], help='exponent(s) such as 1, 0.75 or 2/3')
        parser.add_argument('--grid-budget', type=int, default=None)
        parser.add_argument('--tol', type=float, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--out', default=None, help='output path (default stdout)')
        parser.add_argument('--format', choices=['json', 'csv'], default=None)
        parser.add_argument('--threads', type=int, default=None)
        parser.add_argument('--fast-path', choices=['auto', 'on', 'off'], default=None)
        parser.add_argument('--block-nodes', type=int, default=None)
        parser.add_argument('--record', action='store_true', help='store a RunRecord for this run')

    def handle(self, *args, **options):
        started = time.perf_counter()
        try:
            config = self.build_config(options)
            try:
                payload = self.run(config, options)
                failure = None
            except ValidationFailed as exc:
                payload, failure = exc.payload, str(exc)
            document = self.wrap(config, payload)
            self.emit(config, document)
        except (WitnessError, serializers.ValidationError, OSError, ValueError) as exc:
            raise CommandError(_describe(exc), returncode=1)

        runtime = time.perf_counter() - started
        logger.info('%s finished in %.3fs', self.command_name, runtime)
        if config['record'] or settings.WITNESS_RECORD_RUNS:
            self.record(config, document, runtime)
        if failure:
            raise CommandError(failure, returncode=2)

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def build_config(self, options) -> dict:
        serializer = RunConfigSerializer(data={
            'command': self.command_name,
            'N': options['N'],
            'alpha': options['alpha'],
            'grid_budget': options['grid_budget'] or settings.WITNESS_GRID_BUDGET,
            'tol': options['tol'],
            'seed': settings.WITNESS_SEED if options['seed'] is None else options['seed'],
            'out': options['out'],
            'format': options['format'] or self.default_format,
            'threads': options['threads'] or settings.WITNESS_THREADS,
            'fast_path': options['fast_path'] or settings.WITNESS_FAST_PATH,
            'block_nodes': options['block_nodes'] or settings.WITNESS_BLOCK_NODES,
            'record': options['record'],
        })
        serializer.is_valid(raise_exception=True)
        return dict(serializer.validated_data)

    def run(self, config, options):
        raise NotImplementedError('subclasses of WitnessCommand must provide a run() method')

    def evaluator(self, config) -> dict:
        return {
            'fast_path': config['fast_path'],
            'threads': config['threads'],
            'block_nodes': config['block_nodes'],
        }

    def single(self, config, name):
        values = config[name]
        if len(values) != 1:
            raise serializers.ValidationError({name: [f'expected exactly one value, got {len(values)}']})
        return values[0]

    def wrap(self, config, payload) -> dict:
        # the thread count cannot change results, so it stays out of the document
        embedded = {key: value for key, value in config.items() if key not in ('threads', 'record')}
        return {'config': embedded, 'version': __version__, 'result': payload}

    def emit(self, config, document):
        text = storage.dumps(document)
        if config['out']:
            storage.atomic_write_text(config['out'], text)
        else:
            self.stdout.write(text, ending='')

    def record(self, config, document, runtime):
        try:
            RunRecord.objects.create(
                command=self.command_name,
                config=storage._plain(document['config']),
                report=storage._plain(document['result']),
                version=__version__,
                runtime_seconds=runtime,
            )
        except DatabaseError as exc:
            raise CommandError(f'could not store run record ({exc}); run "manage.py migrate" first', returncode=1)


def _describe(exc):
    if isinstance(exc, serializers.ValidationError):
        detail = exc.detail
        if isinstance(detail, dict):
            return '; '.join(f'{field}: {" ".join(map(str, _flatten(messages)))}' for field, messages in detail.items())
        return ' '.join(map(str, _flatten(detail)))
    return f'{exc.__class__.__name__}: {exc}'


def _flatten(messages):
    if isinstance(messages, dict):
        for field, inner in messages.items():
            for message in _flatten(inner):
                yield f'{field}: {message}'
    elif isinstance(messages, (list, tuple)):
        for inner in messages:
            yield from _flatten(inner)
    else:
        yield messages
