"""
File formats: sequences as CSV, hit certificates and reports as JSON. Every
write goes to a temporary file in the destination directory and is moved
into place with os.replace.
"""

import csv
import io
import json
import math
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from rest_framework import serializers

from .convexseq import ConvexSequence, HitCertificate
from .rational import as_exponent

SEQUENCE_HEADER = ['n', 'a_n', 'exact_num', 'exact_den']


def atomic_write_bytes(path, data: bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str):
    atomic_write_bytes(path, text.encode('utf-8'))


def _plain(value):
    # JSON-safe copy: Fractions as strings, infinities as null
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, 'item') and callable(value.item):
        return _plain(value.item())
    return value


def dumps(data) -> str:
    return json.dumps(_plain(data), sort_keys=True, indent=2, allow_nan=False) + '\n'


def write_json(path, data):
    atomic_write_text(path, dumps(data))


def read_json(path):
    with open(path, encoding='utf-8') as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise serializers.ValidationError({'file': [f'{path}: not valid JSON ({exc.msg})']})


def sequence_csv(seq: ConvexSequence) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(SEQUENCE_HEADER)
    for n in range(1, seq.N + 1):
        exact = seq.exact(n)
        writer.writerow([
            n,
            repr(seq.value(n)),
            '' if exact is None else exact.numerator,
            '' if exact is None else exact.denominator,
        ])
    return buffer.getvalue()


def write_sequence_csv(seq: ConvexSequence, path):
    atomic_write_text(path, sequence_csv(seq))


def read_sequence_csv(path) -> ConvexSequence:
    """
    Read `n,a_n[,exact_num,exact_den]`. Rows must be numbered 1..N in order;
    the exact columns are either both empty or both integers.
    """
    with open(path, newline='', encoding='utf-8') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or reader.fieldnames[:2] != ['n', 'a_n']:
            raise serializers.ValidationError({'header': ['expected columns n,a_n[,exact_num,exact_den]']})
        values, exact = [], []
        for row_number, row in enumerate(reader, start=1):
            try:
                n = int(row['n'])
            except (TypeError, ValueError):
                raise serializers.ValidationError({'n': [f'row {row_number}: not an integer']})
            if n != row_number:
                raise serializers.ValidationError({'n': [f'row {row_number}: expected n={row_number}, got {n}']})
            try:
                value = float(row['a_n'])
            except (TypeError, ValueError):
                raise serializers.ValidationError({'a_n': [f'row {row_number}: not a number']})
            if not math.isfinite(value):
                raise serializers.ValidationError({'a_n': [f'row {row_number}: must be finite']})
            values.append(value)
            exact.append(_exact_cell(row, row_number))

    if not values:
        raise serializers.ValidationError({'n': ['the file holds no rows']})
    has_exact = any(v is not None for v in exact)
    if has_exact:
        # exact entries win over the float column
        values = [float(e) if e is not None else v for v, e in zip(values, exact)]
    return ConvexSequence(
        N=len(values),
        values=values,
        exact_values=tuple(exact) if has_exact else None,
        metadata={'source': str(path)},
    )


def _exact_cell(row, row_number):
    num, den = (row.get('exact_num') or '').strip(), (row.get('exact_den') or '').strip()
    if not num and not den:
        return None
    if not (num and den):
        raise serializers.ValidationError({'exact_den': [f'row {row_number}: exact_num and exact_den go together']})
    try:
        num, den = int(num), int(den)
    except ValueError:
        raise serializers.ValidationError({'exact_num': [f'row {row_number}: not an integer']})
    if den <= 0:
        raise serializers.ValidationError({'exact_den': [f'row {row_number}: must be positive']})
    return Fraction(num, den)


def hits_payload(seq: ConvexSequence) -> list:
    return [hit.to_dict(seq.N) for hit in seq.hits]


def write_hits_json(seq: ConvexSequence, path):
    write_json(path, hits_payload(seq))


def read_hits_json(path) -> list[HitCertificate]:
    rows = read_json(path)
    if not isinstance(rows, list):
        raise serializers.ValidationError({'hits': ['expected a JSON array']})
    try:
        return [HitCertificate(int(row['n']), as_exponent(row['alpha']), int(row['multiple'])) for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise serializers.ValidationError({'hits': [f'malformed certificate: {exc}']})
