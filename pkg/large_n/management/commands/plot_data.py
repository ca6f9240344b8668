import json
import sys

from rest_framework.exceptions import ValidationError

from large_n.errors import InvalidProblem
from large_n.management.commands._base import LargeNCommand
from large_n.records import RunRecordSerializer, load_run_record
from large_n.renderers import emit_plot_data


class Command(LargeNCommand):
    help = "Turn a run record (JSON from solve_series) into order,partial_sum CSV."

    def add_arguments(self, parser):
        parser.add_argument("record", nargs="?", default="-", help="run record file, '-' for stdin")
        parser.add_argument("--target", default=None, help="exact or target energy for the header line")
        parser.add_argument("--output", default=None)

    def handle(self, *args, **options):
        if options["record"] == "-":
            text = sys.stdin.read()
        else:
            with open(options["record"], encoding="utf-8") as f:
                text = f.read()
        try:
            record = load_run_record(json.loads(text))
        except (json.JSONDecodeError, ValidationError) as e:
            raise InvalidProblem(f"not a run record: {e}")
        self.write_output(emit_plot_data(RunRecordSerializer(record).data, options["target"]), options["output"])
