from large_n import conf
from large_n.management.commands._base import LargeNCommand
from large_n.records import TableReportSerializer
from large_n.renderers import RunRecordJSONRenderer, TableReportTextRenderer
from large_n.tables import load_table_data, run_table


class Command(LargeNCommand):
    help = "Recompute one of the reference tables and compare against the expected values."

    def add_arguments(self, parser):
        parser.add_argument("table_id", type=int, choices=range(1, 10))
        parser.add_argument("--digits", type=int, default=None)
        parser.add_argument("--workers", type=int, default=None)
        parser.add_argument("--format", choices=["text", "json"], default="text")

    def handle(self, *args, **options):
        context = conf.precision_context(options["digits"])
        report = run_table(
            options["table_id"],
            context.digits,
            guard_digits=context.guard_digits,
            workers=options["workers"] or conf.workers(),
            data=load_table_data(conf.table_data_path()),
            solver_options=conf.solver_options(),
            oracle_options=conf.oracle_options(),
            divergence_window=conf.divergence_window(),
        )
        data = TableReportSerializer(report).data
        renderer = RunRecordJSONRenderer() if options["format"] == "json" else TableReportTextRenderer()
        self.write_output(renderer.render(data))
