import pytest

from large_n import conf
from large_n.arith import PrecisionContext
from large_n.errors import InvalidProblem
from large_n.potential import parse_potential
from large_n.records import TableReportSerializer
from large_n.renderers import TableReportTextRenderer
from large_n.tables import Check, CheckMeta, CheckOutcome, load_table_data, run_row, run_table, table_rows

OSCILLATOR_ROW = {
    "row_id": "oscillator", "potential": "0.5*r^2", "order": 6,
    "checks": [
        {"kind": "partial_sum", "order": 6, "expected": "1.5", "tolerance": "1e-20"},
        {"kind": "bracket", "expected": ["1.5", "1.5"], "tolerance": "1e-20"},
        {"kind": "straddle", "target": "1.5", "tolerance": "1e-20"},
    ],
}
REPULSIVE_ROW = {
    "row_id": "repulsive", "potential": "1/r", "order": 6,
    "checks": [{"kind": "partial_sum", "order": 1, "expected": "0", "tolerance": "1"}],
}


def synthetic(*rows) -> dict:
    return {"version": 7, "tables": {"1": {"title": "synthetic", "rows": list(rows)}}}


@pytest.fixture(scope="module")
def reference_data():
    return load_table_data(conf.DEFAULT_TABLE_DATA)


def test_builtin_check_kinds_registered():
    assert {"partial_sum", "bracket", "straddle", "onset", "diverges", "oracle"} <= set(CheckMeta.registry)
    assert CheckMeta.get("oracle").needs_series is False


def test_unknown_check_kind():
    with pytest.raises(InvalidProblem):
        CheckMeta.get("no-such-kind")


def test_custom_check_registers():
    class OrderCheck(Check):
        kind = "test_order"

        def evaluate(self, row, result, context, oracle_options=None):
            return CheckOutcome(self.kind, "order", str(row.order), str(len(result.report.partial_sums)),
                                None, row.order == len(result.report.partial_sums))

    assert CheckMeta.get("test_order") is OrderCheck
    report = run_table(1, 30, data=synthetic({"row_id": "x", "potential": "r^2", "order": 5,
                                              "checks": [{"kind": "test_order"}]}))
    assert report.passed


def test_reference_data_shape(reference_data):
    assert reference_data["version"] == 1
    assert sorted(reference_data["tables"], key=int) == [str(i) for i in range(1, 10)]
    assert len(reference_data["tables"]["7"]["rows"]) == 23


def test_every_reference_row_parses(reference_data):
    context = PrecisionContext(30, 10)
    for table_id in range(1, 10):
        _, rows = table_rows(reference_data, table_id, context)
        assert rows
        for row in rows:
            parse_potential(row.potential_text)
            for params in row.checks:
                CheckMeta.get(params["kind"])


def test_constructed_rows_use_heavy_mass(reference_data):
    _, rows = table_rows(reference_data, 7, PrecisionContext(30, 10))
    assert all(row.mass == "2m1" and row.order == 30 for row in rows)


def test_run_table_on_synthetic_data():
    report = run_table(1, 30, data=synthetic(OSCILLATOR_ROW, REPULSIVE_ROW))
    assert report.version == 7 and report.title == "synthetic"
    oscillator, repulsive = report.rows
    assert oscillator.passed and len(oscillator.outcomes) == 3
    assert repulsive.error == "NoMinimum" and not repulsive.passed
    assert not report.passed


def test_run_table_in_worker_processes():
    serial = run_table(1, 30, data=synthetic(OSCILLATOR_ROW, REPULSIVE_ROW))
    parallel = run_table(1, 30, workers=2, data=synthetic(OSCILLATOR_ROW, REPULSIVE_ROW))
    assert [r.row.row_id for r in parallel.rows] == ["oscillator", "repulsive"]
    assert [r.passed for r in parallel.rows] == [r.passed for r in serial.rows]


def test_failed_check_reported():
    row = dict(OSCILLATOR_ROW, checks=[{"kind": "partial_sum", "order": 6, "expected": "1.6", "tolerance": "1e-3"},
                                       {"kind": "partial_sum", "order": 9, "expected": "1.5", "tolerance": "1"}])
    report = run_table(1, 30, data=synthetic(row))
    outcomes = report.rows[0].outcomes
    assert [o.passed for o in outcomes] == [False, False]
    assert outcomes[1].computed is None


def test_unknown_table():
    with pytest.raises(InvalidProblem):
        run_table(4, 30, data=synthetic(OSCILLATOR_ROW))


def test_report_serialization():
    report = run_table(1, 30, data=synthetic(OSCILLATOR_ROW))
    data = TableReportSerializer(report).data
    assert data["passed"] is True
    assert data["rows"][0]["row_id"] == "oscillator"
    text = TableReportTextRenderer().render(data).decode()
    assert text.startswith("Table 1: synthetic (data v7, 30 digits)")
    assert text.rstrip().endswith("all checks passed")


def _row(data, table_id, row_id, digits):
    _, rows = table_rows(data, table_id, PrecisionContext(digits, 10))
    return next(row for row in rows if row.row_id == row_id)


@pytest.mark.slow
@pytest.mark.parametrize("table_id, row_id", [
    (3, "t3-coulomb-l0"),
    (3, "t3-oscillator-l2"),
    (4, "t4-coulomb-l4"),
    (4, "t4-oscillator-l1"),
    (5, "t5-ground"),
    (7, "t7-a1.50"),
])
def test_reference_rows(reference_data, table_id, row_id):
    report = run_row(_row(reference_data, table_id, row_id, 60), 60)
    assert report.passed, [o for o in report.outcomes if not o.passed]


@pytest.mark.slow
@pytest.mark.parametrize("table_id", [1, 9])
def test_reference_tables(reference_data, table_id):
    report = run_table(table_id, 60, data=reference_data)
    assert report.passed, [(r.row.row_id, r.error, [o for o in r.outcomes if not o.passed])
                           for r in report.rows if not r.passed]
