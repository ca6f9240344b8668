"""
Reference-table harness.

Rows and their expected values come from a versioned JSON data file, so a
changed tolerance is a data edit.  Each row is solved once; its checks are
instances of :class:`Check` subclasses looked up by ``kind`` in
:attr:`CheckMeta.registry`.  Other apps can add kinds from a ``large_n_checks``
module.
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from large_n.analysis import SolveResult, fd_eigensolve, solve
from large_n.arith import PrecisionContext
from large_n.errors import InvalidProblem, LargeNError
from large_n.potential import ProblemSpec, constructed_potential_text, parse_potential

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TableRow:
    table_id: int
    index: int
    row_id: str
    potential_text: str
    N: int = 3
    l: int = 0
    state: int = 0
    mass: str = "m1"
    order: int = 29
    provenance: str = "published-table"
    convention_adjusted: bool = False
    checks: tuple = ()

    def problem(self, context: PrecisionContext) -> ProblemSpec:
        return ProblemSpec.from_text(self.potential_text, N=self.N, l=self.l, state=self.state,
                                     mass_convention=self.mass, order=self.order, context=context)


@dataclass
class CheckOutcome:
    kind: str
    label: str
    expected: str
    computed: str | None
    tolerance: str | None
    passed: bool


@dataclass
class RowReport:
    row: TableRow
    outcomes: list = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(o.passed for o in self.outcomes)


@dataclass
class TableReport:
    table_id: int
    title: str
    version: int
    digits: int
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


class CheckMeta(type):
    registry = {}

    def __init__(cls, name, bases, namespace):
        super().__init__(name, bases, namespace)
        # Skip the abstract base
        if namespace.get("kind"):
            CheckMeta.registry[cls.kind] = cls

    @staticmethod
    def get(kind: str) -> type["Check"]:
        try:
            return CheckMeta.registry[kind]
        except KeyError:
            raise InvalidProblem(f"unknown check kind {kind!r}") from None


class Check(metaclass=CheckMeta):
    """
    One expected value of a table row.

    Subclasses set ``kind`` and implement :meth:`evaluate`.  Checks with
    ``needs_series = False`` do not require the row to be solved.
    """
    kind = None
    needs_series = True

    def __init__(self, params: dict):
        self.params = params

    @property
    def tolerance(self) -> str | None:
        return self.params.get("tolerance")

    def within(self, computed, expected, context: PrecisionContext) -> bool:
        return abs(context.real(computed) - context.real(expected)) <= context.real(self.tolerance)

    def evaluate(self, row: TableRow, result: SolveResult | None, context: PrecisionContext,
                 oracle_options: dict | None = None) -> CheckOutcome:
        raise NotImplementedError


def _short(context: PrecisionContext, x) -> str:
    return context.format_number(x, 12)


class PartialSumCheck(Check):
    kind = "partial_sum"

    def evaluate(self, row, result, context, oracle_options=None):
        order = self.params["order"]
        P = result.report.partial_sums
        computed = P[order] if order <= len(P) else None
        return CheckOutcome(
            kind=self.kind,
            label=f"P_{order}",
            expected=self.params["expected"],
            computed=_short(context, computed) if computed is not None else None,
            tolerance=self.tolerance,
            passed=computed is not None and self.within(computed, self.params["expected"], context),
        )


class BracketCheck(Check):
    """
    Both endpoints within tolerance, compared as an unordered pair; when
    ``orders`` is given the reported orders must agree within ``order_slack``.
    """
    kind = "bracket"

    def evaluate(self, row, result, context, oracle_options=None):
        bracket = result.report.bracket
        expected = sorted(self.params["expected"], key=context.real)
        label = "bracket"
        if bracket is None:
            return CheckOutcome(self.kind, label, " - ".join(expected), None, self.tolerance, False)
        computed = sorted([bracket.low, bracket.high])
        passed = all(self.within(c, e, context) for c, e in zip(computed, expected))
        if "orders" in self.params:
            slack = self.params.get("order_slack", 0)
            paired = zip(sorted([bracket.order_low, bracket.order_high]), sorted(self.params["orders"]))
            passed = passed and all(abs(got - want) <= slack for got, want in paired)
            label = f"bracket@{bracket.order_low}-{bracket.order_high}"
        return CheckOutcome(
            kind=self.kind,
            label=label,
            expected=" - ".join(expected),
            computed=" - ".join(_short(context, c) for c in computed),
            tolerance=self.tolerance,
            passed=passed,
        )


class StraddleCheck(Check):
    kind = "straddle"

    def evaluate(self, row, result, context, oracle_options=None):
        bracket = result.report.bracket
        target = context.real(self.params["target"])
        tolerance = context.real(self.tolerance)
        passed = (bracket is not None
                  and min(bracket.low, bracket.high) <= target + tolerance
                  and max(bracket.low, bracket.high) >= target - tolerance)
        return CheckOutcome(self.kind, "straddles", self.params["target"],
                            "yes" if passed else "no", self.tolerance, passed)


class OnsetCheck(Check):
    kind = "onset"

    def evaluate(self, row, result, context, oracle_options=None):
        onset = result.report.divergence_order
        low, high = self.params["min"], self.params["max"]
        return CheckOutcome(self.kind, "divergence onset", f"{low}..{high}",
                            str(onset) if onset is not None else None, None,
                            onset is not None and low <= onset <= high)


class DivergesCheck(Check):
    kind = "diverges"

    def evaluate(self, row, result, context, oracle_options=None):
        onset = result.report.divergence_order
        return CheckOutcome(self.kind, "diverges", "diverges",
                            f"from order {onset}" if onset is not None else "converges", None,
                            onset is not None)


class OracleCheck(Check):
    kind = "oracle"
    needs_series = False

    def evaluate(self, row, result, context, oracle_options=None):
        level = fd_eigensolve(parse_potential(row.potential_text), row.N, row.l, row.state, row.mass,
                              oracle_options)
        expected = float(self.params["expected"])
        return CheckOutcome(self.kind, "finite differences", self.params["expected"], f"{level:.9g}",
                            self.tolerance, abs(level - expected) <= float(self.tolerance))


def load_table_data(path: Path | str) -> dict:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if "version" not in data or "tables" not in data:
        raise InvalidProblem(f"{path} is not a reference table file")
    return data


def _row_from_data(table_id: int, index: int, item: dict, context: PrecisionContext) -> TableRow:
    item = dict(item)
    construct = item.pop("construct", None)
    if construct is not None:
        item["potential"] = constructed_potential_text(construct["a"], construct["E"], context,
                                                       item.get("mass", "m1"))
    return TableRow(
        table_id=table_id,
        index=index,
        row_id=item.pop("row_id"),
        potential_text=item.pop("potential"),
        checks=tuple(item.pop("checks", ())),
        **item,
    )


def table_rows(data: dict, table_id: int, context: PrecisionContext) -> tuple[str, list[TableRow]]:
    try:
        table = data["tables"][str(table_id)]
    except KeyError:
        raise InvalidProblem(f"no reference table {table_id}") from None
    return table["title"], [_row_from_data(table_id, i, item, context) for i, item in enumerate(table["rows"])]


def run_row(row: TableRow, digits: int, guard_digits: int = 10, solver_options: dict | None = None,
            oracle_options: dict | None = None, divergence_window: int = 3) -> RowReport:
    """Solve one row and evaluate its checks.  Row failures are reported, not raised."""
    context = PrecisionContext(digits, guard_digits)
    report = RowReport(row=row)
    checks = [CheckMeta.get(params["kind"])(params) for params in row.checks]
    try:
        result = None
        if any(c.needs_series for c in checks):
            result = solve(row.problem(context), solver_options=solver_options,
                           divergence_window=divergence_window)
        for check in checks:
            report.outcomes.append(check.evaluate(row, result, context, oracle_options))
    except LargeNError as e:
        logger.debug(f"Row {row.row_id} failed with {e.code}: {e}")
        report.error = e.code
    return report


def _run_row_args(args) -> RowReport:
    return run_row(*args)


def run_table(table_id: int, digits: int = 100, *, guard_digits: int = 10, workers: int = 1,
              data: dict | None = None, data_path: Path | str | None = None, solver_options: dict | None = None,
              oracle_options: dict | None = None, divergence_window: int = 3) -> TableReport:
    """
    Run every row of a reference table.  With ``workers > 1`` rows are solved in
    separate processes; the report keeps the row order of the data file.
    """
    if data is None:
        data = load_table_data(data_path)
    context = PrecisionContext(digits, guard_digits)
    title, rows = table_rows(data, table_id, context)
    logger.debug(f"Table {table_id}: {len(rows)} rows at {digits} digits, {workers} worker(s)")
    jobs = [(row, digits, guard_digits, solver_options, oracle_options, divergence_window) for row in rows]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            reports = list(executor.map(_run_row_args, jobs))
    else:
        reports = [_run_row_args(job) for job in jobs]
    return TableReport(table_id=table_id, title=title, version=data["version"], digits=digits, rows=reports)
