from fractions import Fraction

from rest_framework import serializers

from .expsum import DIRECTIONS, FAST_PATH_CHOICES, ExpSumSpec
from .models import RunRecord
from .rational import as_exponent


class ExponentField(serializers.Field):
    # Accepts 1, 0.75, "2/3"; stored as an exact Fraction
    default_error_messages = {'invalid': 'not a valid exponent: {value!r}'}

    def to_internal_value(self, data):
        try:
            return as_exponent(data)
        except (TypeError, ValueError, ZeroDivisionError):
            self.fail('invalid', value=data)

    def to_representation(self, value):
        return str(value)


class RationalField(serializers.Field):
    """A real given as a number or as an exact "p/q" string."""

    default_error_messages = {'invalid': 'not a number or p/q rational: {value!r}'}

    def to_internal_value(self, data):
        if isinstance(data, bool):
            self.fail('invalid', value=data)
        if isinstance(data, int):
            return Fraction(data)
        if isinstance(data, float):
            return data
        if isinstance(data, str):
            try:
                return Fraction(data.strip())
            except (ValueError, ZeroDivisionError):
                pass
        self.fail('invalid', value=data)

    def to_representation(self, value):
        return str(value) if isinstance(value, Fraction) else value


class ComplexField(serializers.Field):
    """A coefficient given as a real number or as a [re, im] pair."""

    default_error_messages = {'invalid': 'expected a number or [re, im]: {value!r}'}

    def to_internal_value(self, data):
        if isinstance(data, (int, float)) and not isinstance(data, bool):
            return complex(data)
        if isinstance(data, (list, tuple)) and len(data) == 2:
            try:
                return complex(float(data[0]), float(data[1]))
            except (TypeError, ValueError):
                pass
        self.fail('invalid', value=data)

    def to_representation(self, value):
        return [value.real, value.imag]


class RunConfigSerializer(serializers.Serializer):
    """The options shared by every command; validated before dispatch and embedded in outputs."""

    command = serializers.CharField()
    N = serializers.ListField(child=serializers.IntegerField(min_value=1), required=False, default=list)
    alpha = serializers.ListField(child=ExponentField(), required=False, default=list)
    grid_budget = serializers.IntegerField(min_value=1)
    tol = serializers.FloatField(min_value=0, required=False, allow_null=True, default=None)
    seed = serializers.IntegerField(min_value=0)
    out = serializers.CharField(required=False, allow_null=True, default=None)
    format = serializers.ChoiceField(choices=['json', 'csv'])
    threads = serializers.IntegerField(min_value=1)
    fast_path = serializers.ChoiceField(choices=list(FAST_PATH_CHOICES))
    block_nodes = serializers.IntegerField(min_value=1)
    record = serializers.BooleanField(default=False)

    def validate_alpha(self, value):
        for alpha in value:
            if not 0 <= alpha <= 2:
                raise serializers.ValidationError(f'alpha {alpha} is outside [0, 2]')
        return value


class GridSerializer(serializers.Serializer):
    x_lo = serializers.FloatField()
    x_hi = serializers.FloatField()
    Mx = serializers.IntegerField(min_value=1)
    t_lo = serializers.FloatField()
    t_hi = serializers.FloatField()
    Mt = serializers.IntegerField(min_value=1)
    refine = serializers.IntegerField(min_value=0, default=0)

    def validate(self, attrs):
        if attrs['x_hi'] <= attrs['x_lo']:
            raise serializers.ValidationError({'x_hi': 'must exceed x_lo'})
        if attrs['t_hi'] <= attrs['t_lo']:
            raise serializers.ValidationError({'t_hi': 'must exceed t_lo'})
        return attrs


class ExpSumSpecSerializer(serializers.Serializer):
    """
    An exponential-sum spec file:

        {"N": 4, "eta": [...], "b": [...], "xi": [...] (default n/N),
         "p": 4, "direction": "t", "grid": {...} (default canonical), "levels": [...]}
    """

    N = serializers.IntegerField(min_value=1)
    xi = serializers.ListField(child=RationalField(), required=False)
    eta = serializers.ListField(child=RationalField())
    b = serializers.ListField(child=ComplexField())
    p = serializers.FloatField(min_value=1, default=4)
    direction = serializers.ChoiceField(choices=list(DIRECTIONS), default='t')
    grid = GridSerializer(required=False)
    levels = serializers.ListField(child=serializers.FloatField(), required=False, default=list)

    def validate(self, attrs):
        N = attrs['N']
        for name in ('xi', 'eta', 'b'):
            if name in attrs and len(attrs[name]) != N:
                raise serializers.ValidationError({name: f'expected {N} entries, got {len(attrs[name])}'})
        if not any(value != 0 for value in attrs['b']):
            raise serializers.ValidationError({'b': 'coefficients must not all vanish'})
        for value in attrs['levels']:
            if value <= 0:
                raise serializers.ValidationError({'levels': 'level values must be positive'})
        return attrs

    def build(self) -> ExpSumSpec:
        data = self.validated_data
        N = data['N']
        xi = data.get('xi') or [Fraction(n, N) for n in range(1, N + 1)]
        return ExpSumSpec.with_frequencies(
            xi=[float(v) for v in xi],
            eta=[float(v) for v in data['eta']],
            b=data['b'],
            xi_exact=_exact_or_none(xi),
            eta_exact=_exact_or_none(data['eta']),
        )


def _exact_or_none(values):
    exact = tuple(v if isinstance(v, Fraction) else None for v in values)
    return exact if any(v is not None for v in exact) else None


class RegressionPointSerializer(serializers.Serializer):
    N = serializers.FloatField()
    value = serializers.FloatField()


class RunRecordSerializer(serializers.ModelSerializer):
    class Meta:
        model = RunRecord
        fields = ['id', 'command', 'config', 'report', 'version', 'runtime_seconds', 'created_at']
