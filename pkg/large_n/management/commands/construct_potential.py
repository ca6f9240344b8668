from large_n import conf
from large_n.errors import InvalidProblem
from large_n.management.commands._base import LargeNCommand
from large_n.potential import constructed_potential_text


class Command(LargeNCommand):
    help = ("Print the potential whose N=3, l=0 ground state is exp(-r^a) with eigenvalue E. "
            "The exp(-r^a) comparison series (Table 7) are in the -u'' convention: pass --mass=2m1 "
            "here and again to solve_series. Under the default m1 some exponents, a=0.85 among "
            "them, give a potential without a minimum.")

    def add_arguments(self, parser):
        parser.add_argument("--a", required=True, help="exponent of the ground state exp(-r^a), positive")
        parser.add_argument("--E", required=True, help="ground-state energy")
        parser.add_argument("--mass", choices=["m1", "2m1"], default="m1",
                            help="kinetic term -u''/2 (m1) or -u'' (2m1); Table 7 uses 2m1")

    def handle(self, *args, **options):
        context = conf.precision_context()
        try:
            a, E = context.real(options["a"]), context.real(options["E"])
        except ValueError:
            raise InvalidProblem(f"--a and --E must be decimal numbers, got {options['a']!r}, {options['E']!r}")
        if a <= 0:
            raise InvalidProblem(f"--a must be positive, got {options['a']}")
        self.stdout.write(constructed_potential_text(a, E, context, options["mass"]))
