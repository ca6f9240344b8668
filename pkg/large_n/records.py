"""
Run records: the serialized form of a solve.

Every number is carried as a decimal string at full context precision, so a
record read back through :class:`RunRecordSerializer` and written out again is
byte-identical.
"""
import functools
import logging
import re
from dataclasses import dataclass, field

from rest_framework import serializers
from rest_framework.serializers import Serializer

from large_n.errors import LargeNError

logger = logging.getLogger(__name__)

DECIMAL_PATTERN = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass
class BracketRecord:
    low: str
    high: str
    order_low: int
    order_high: int


@dataclass
class AuditRecord:
    agreeing_digits: int


@dataclass
class RunRecord:
    potential: str
    N: int
    l: int
    state: int
    mass: str
    digits: int
    order: int
    rho0: str
    e_minus2: str
    coefficients: list = field(default_factory=list)
    partial_sums: list = field(default_factory=list)
    divergence_order: int | None = None
    bracket: BracketRecord | None = None
    shanks: list | None = None
    audit: AuditRecord | None = None
    residual: str | None = None
    stationarity: str | None = None


class DecimalStringField(serializers.CharField):
    """A decimal number kept verbatim as text."""
    default_error_messages = {
        "not_decimal": "'{value}' is not a decimal number.",
    }

    def __init__(self, **kwargs):
        kwargs.setdefault("trim_whitespace", False)
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not DECIMAL_PATTERN.match(value):
            self.fail("not_decimal", value=value)
        return value


class BracketSerializer(Serializer):
    low = DecimalStringField()
    high = DecimalStringField()
    order_low = serializers.IntegerField(min_value=1)
    order_high = serializers.IntegerField(min_value=1)

    def create(self, validated_data):
        return BracketRecord(**validated_data)


class AuditSerializer(Serializer):
    agreeing_digits = serializers.IntegerField(min_value=0)

    def create(self, validated_data):
        return AuditRecord(**validated_data)


class RunRecordSerializer(Serializer):
    potential = serializers.CharField(trim_whitespace=False)
    N = serializers.IntegerField(min_value=2)
    l = serializers.IntegerField(min_value=0)
    state = serializers.ChoiceField(choices=[0, 1, 2])
    mass = serializers.ChoiceField(choices=["m1", "2m1"])
    digits = serializers.IntegerField(min_value=1)
    order = serializers.IntegerField(min_value=0)
    rho0 = DecimalStringField()
    e_minus2 = DecimalStringField()
    coefficients = serializers.ListField(child=DecimalStringField())
    partial_sums = serializers.ListField(child=DecimalStringField())
    divergence_order = serializers.IntegerField(allow_null=True, required=False)
    bracket = BracketSerializer(allow_null=True, required=False)
    shanks = serializers.ListField(child=DecimalStringField(allow_null=True), allow_null=True, required=False)
    audit = AuditSerializer(allow_null=True, required=False)
    residual = DecimalStringField(allow_null=True, required=False)
    stationarity = DecimalStringField(allow_null=True, required=False)

    def validate(self, attrs):
        if len(attrs["partial_sums"]) > attrs["order"]:
            raise serializers.ValidationError("more partial sums than the order of the run")
        return attrs

    def create(self, validated_data):
        bracket = validated_data.pop("bracket", None)
        audit = validated_data.pop("audit", None)
        return RunRecord(
            **validated_data,
            bracket=BracketRecord(**bracket) if bracket else None,
            audit=AuditRecord(**audit) if audit else None,
        )


class CheckOutcomeSerializer(Serializer):
    kind = serializers.CharField()
    label = serializers.CharField()
    expected = serializers.CharField()
    computed = serializers.CharField(allow_null=True)
    tolerance = serializers.CharField(allow_null=True)
    passed = serializers.BooleanField()


class RowReportSerializer(Serializer):
    row_id = serializers.CharField(source="row.row_id")
    potential = serializers.CharField(source="row.potential_text")
    N = serializers.IntegerField(source="row.N")
    l = serializers.IntegerField(source="row.l")
    state = serializers.IntegerField(source="row.state")
    mass = serializers.CharField(source="row.mass")
    provenance = serializers.CharField(source="row.provenance")
    convention_adjusted = serializers.BooleanField(source="row.convention_adjusted")
    error = serializers.CharField(allow_null=True)
    outcomes = CheckOutcomeSerializer(many=True)


class TableReportSerializer(Serializer):
    table_id = serializers.IntegerField()
    title = serializers.CharField()
    version = serializers.IntegerField()
    digits = serializers.IntegerField()
    passed = serializers.BooleanField()
    rows = RowReportSerializer(many=True)


def record_from_result(result) -> RunRecord:
    """Flatten a :class:`large_n.analysis.SolveResult` into a RunRecord."""
    spec = result.spec
    context = spec.context
    text = context.to_string
    report = result.report
    bracket = report.bracket
    return RunRecord(
        potential=spec.potential_text,
        N=spec.N,
        l=spec.l,
        state=int(spec.state),
        mass=spec.mass_convention.value,
        digits=context.digits,
        order=spec.order,
        rho0=text(result.scaled.rho0),
        e_minus2=text(result.scaled.E_minus2),
        coefficients=[text(c) for c in result.energy.coeffs],
        partial_sums=[text(p) for p in report.partial_sums.values],
        divergence_order=report.divergence_order,
        bracket=BracketRecord(low=text(bracket.low), high=text(bracket.high),
                              order_low=bracket.order_low, order_high=bracket.order_high) if bracket else None,
        shanks=[None if s is None else text(s) for s in report.shanks] if report.shanks is not None else None,
        audit=AuditRecord(agreeing_digits=report.audit) if report.audit is not None else None,
        residual=text(result.residual) if result.residual is not None else None,
        stationarity=text(result.w_table.stationarity),
    )


def load_run_record(data: dict) -> RunRecord:
    serializer = RunRecordSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def drf_serialize_output(serializer_class: type[Serializer]):
    """
    Pass the result of the decorated function through the given DRF serializer
    when it is invoked through :class:`SerializedCall`.

    ```
    @drf_serialize_output(RunRecordSerializer)
    def run(spec):
        return RunRecord(...)
    ```
    """
    def annotator(fn):
        fn.__large_n_drf_serializer = serializer_class
        return fn
    return annotator


class SerializedCall:
    def __init__(self, fn):
        self.fn = fn
        functools.update_wrapper(self, fn)

    def __call__(self, *args, **kwargs):
        try:
            ret = self.fn(*args, **kwargs)
        except LargeNError as e:
            logger.debug(f"{self.fn.__name__} failed with {e.code}: {e}")
            raise
        except Exception:
            logger.exception(f"Error in {self.fn.__name__}")
            raise
        serializer_class = getattr(self.fn, "__large_n_drf_serializer", None)
        if serializer_class is not None:
            ret = serializer_class(ret).data
        return ret
