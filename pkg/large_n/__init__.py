from .arith import PrecisionContext, PowerSeries
from .potential import (ProblemSpec, State, MassConvention, parse_potential, format_potential,
                        construct_potential)
from .analysis import solve, fd_eigensolve, closed_form_partial_sums
from .errors import LargeNError
