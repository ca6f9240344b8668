from large_n import conf
from large_n.analysis import solve
from large_n.management.commands._base import LargeNCommand
from large_n.potential import ProblemSpec
from large_n.records import RunRecord, RunRecordSerializer, SerializedCall, drf_serialize_output, record_from_result
from large_n.renderers import select_renderer


@drf_serialize_output(RunRecordSerializer)
def run_solve(spec: ProblemSpec, *, shanks=False, audit=False, residual=False) -> RunRecord:
    result = solve(spec, shanks=shanks, audit=audit, residual=residual,
                   solver_options=conf.solver_options(), divergence_window=conf.divergence_window())
    return record_from_result(result)


class Command(LargeNCommand):
    help = ("Compute the 1/N energy series of one problem. Potentials starting with '-' "
            "must be passed as --potential=-1/r.")

    def add_arguments(self, parser):
        parser.add_argument("--potential", required=True, help="potential in r, e.g. 'r^2 + 0.5/r'")
        parser.add_argument("--N", type=int, default=3, help="number of spatial dimensions")
        parser.add_argument("--l", type=int, default=0, help="angular momentum")
        parser.add_argument("--state", type=int, choices=[0, 1, 2], default=0)
        parser.add_argument("--mass", choices=["m1", "2m1"], default="m1",
                            help="kinetic term -u''/2 (m1) or -u'' (2m1); "
                                 "potentials from construct_potential --mass=2m1 need 2m1")
        parser.add_argument("--order", type=int, default=None)
        parser.add_argument("--digits", type=int, default=None)
        parser.add_argument("--format", choices=["json", "csv", "text"], default="json")
        parser.add_argument("--shanks", action="store_true", help="add Shanks extrapolants")
        parser.add_argument("--audit", action="store_true", help="compare against a run at twice the digits")
        parser.add_argument("--residual", action="store_true", help="report the residual of the recursion")
        parser.add_argument("--output", default=None, help="write to this file instead of stdout")

    def handle(self, *args, **options):
        spec = ProblemSpec.from_text(
            options["potential"],
            N=options["N"],
            l=options["l"],
            state=options["state"],
            mass_convention=options["mass"],
            order=options["order"] or conf.default_order(),
            context=conf.precision_context(options["digits"]),
        )
        record = SerializedCall(run_solve)(spec, shanks=options["shanks"], audit=options["audit"],
                                           residual=options["residual"])
        self.write_output(select_renderer(options["format"]).render(record), options["output"])
