"""
Partial sums of the energy series and what is reported about them.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from large_n.arith import BigReal, PrecisionContext
from large_n.errors import DomainError, GridTooSmall, NoBoundState, TooShort
from large_n.expansion import ScaledProblem, WTable, build_w_table, scale_problem
from large_n.potential import MassConvention, PotentialExpr, ProblemSpec, State, eval_array
from large_n.recursion import CoeffTables, EnergySeries, recurse, residual_check

logger = logging.getLogger(__name__)

DEFAULT_DIVERGENCE_WINDOW = 3
DEFAULT_ORACLE_OPTIONS = {
    "r_min": 1e-10,
    "r_max": 100.0,
    "points": 10000,
}
# Bisection stops on this absolute width; the default scales with the matrix norm.
ORACLE_TOLERANCE = 1e-13


@dataclass(frozen=True)
class PartialSumSequence:
    """P_1..P_order, where P_1 = k E^(-2)."""
    values: tuple
    k: BigReal
    mass_convention: MassConvention
    energy: EnergySeries = field(repr=False)

    @property
    def context(self) -> PrecisionContext:
        return self.energy.context

    def __len__(self):
        return len(self.values)

    def __getitem__(self, order: int) -> BigReal:
        """1-based, as orders are reported."""
        if order < 1:
            raise IndexError(order)
        return self.values[order - 1]


@dataclass(frozen=True)
class Bracket:
    low: BigReal
    high: BigReal
    order_low: int
    order_high: int


@dataclass(frozen=True)
class SeriesReport:
    partial_sums: PartialSumSequence
    divergence_order: int | None = None
    bracket: Bracket | None = None
    shanks: list | None = None
    audit: int | None = None


def assemble_partial_sums(e: EnergySeries) -> PartialSumSequence:
    sums = [e.k * e.E_minus2]
    for j in range(2, e.order + 1):
        sums.append(sums[-1] + e.coeffs[j - 2] / e.k ** (j - 2))
    return PartialSumSequence(values=tuple(sums), k=e.k, mass_convention=e.mass_convention, energy=e)


def _values(P) -> tuple:
    return P.values if isinstance(P, PartialSumSequence) else tuple(P)


def _noise_floor(values, context: PrecisionContext) -> BigReal:
    return context.eps(15) * max([1] + [abs(v) for v in values])


def shanks_transform(P, context: PrecisionContext) -> list:
    """
    S_n = (P_{n+1} P_{n-1} - P_n^2) / (P_{n+1} + P_{n-1} - 2 P_n), aligned with P.
    End points and entries with a vanishing denominator are None.
    """
    values = _values(P)
    shanks = [None] * len(values)
    threshold = context.eps(10)
    for n in range(1, len(values) - 1):
        before, here, after = values[n - 1], values[n], values[n + 1]
        denominator = after + before - 2 * here
        if denominator == 0 or abs(denominator) < threshold * abs(here):
            continue
        shanks[n] = (after * before - here * here) / denominator
    return shanks


def detect_divergence(P, context: PrecisionContext, K: int = DEFAULT_DIVERGENCE_WINDOW) -> int | None:
    """
    Order n of the last partial sum before the increments start growing:
    |P_n - P_{n-1}| < |P_{n+1} - P_n| < ... for K consecutive comparisons.
    Increments below the noise floor count as zero.
    """
    values = _values(P)
    floor = _noise_floor(values, context)
    steps = [abs(b - a) for a, b in zip(values, values[1:])]
    steps = [s if s > floor else 0 for s in steps]
    for start in range(len(steps) - K):
        if all(steps[start + i] < steps[start + i + 1] for i in range(K)):
            # steps[start] is the increment arriving at order start + 2
            return start + 2
    return None


def _turning_points(values, floor: BigReal) -> list[int]:
    """Indices where the sums change direction; increments within the floor are skipped."""
    turns, direction, last = [], 0, 0
    for i in range(1, len(values)):
        step = values[i] - values[i - 1]
        if abs(step) <= floor:
            continue
        sign = 1 if step > 0 else -1
        if direction and sign != direction:
            turns.append(last)
        direction, last = sign, i
    return turns


def oscillation_bracket(P, context: PrecisionContext, divergence_order: int | None = None,
                        K: int = DEFAULT_DIVERGENCE_WINDOW) -> Bracket:
    """
    The reported pair of consecutive partial sums.

    Every swing between two neighbouring turning points has its midpoint as
    centre of oscillation.  The sums from the turning point before the swing
    up to its end are searched for a pair lying strictly on opposite sides of
    that centre, and of all such crossings the one with the least variation
    wins.  Series that never swing (convergent or monotone ones) report their
    flattest pair up to the divergence onset instead.  Ties go to the higher
    order.
    """
    values = _values(P)
    if len(values) < 4:
        raise TooShort(f"need at least 4 partial sums, got {len(values)}")
    floor = _noise_floor(values, context)

    def side(value, center):
        offset = value - center
        return 0 if abs(offset) <= floor else (1 if offset > 0 else -1)

    best = None
    turns = _turning_points(values, floor)
    for index, (a, b) in enumerate(zip(turns, turns[1:])):
        center = (values[a] + values[b]) / 2
        for j in range(turns[index - 1] if index else 0, b):
            if side(values[j], center) * side(values[j + 1], center) < 0:
                width = abs(values[j + 1] - values[j])
                if best is None or width <= best[0]:
                    best = (width, j)

    if best is None:
        if divergence_order is None:
            divergence_order = detect_divergence(values, context, K)
        usable = values[:divergence_order] if divergence_order else values
        for j in range(len(usable) - 1):
            width = abs(usable[j + 1] - usable[j])
            if best is None or width <= best[0]:
                best = (width, j)
        logger.debug(f"No crossing of an oscillation centre; flattest pair at order {best[1] + 1}")
    j = best[1]
    return Bracket(low=values[j], high=values[j + 1], order_low=j + 1, order_high=j + 2)


def _agreeing_digits(a: BigReal, b: BigReal, digits: int, context: PrecisionContext) -> int:
    mp = context.mp
    a, b = context.real(a), context.real(b)
    if a == b:
        return digits
    scale = max(abs(a), abs(b))
    relative = abs(a - b) / scale
    return max(0, min(digits, int(mp.floor(-mp.log10(relative)))))


def precision_audit(spec: ProblemSpec, solver_options: dict | None = None,
                    baseline: PartialSumSequence | None = None) -> int:
    """
    Leading significant digits on which every partial sum agrees between a run
    at the working precision and one at twice that precision.
    """
    if baseline is None:
        baseline = solve(spec, solver_options=solver_options).report.partial_sums
    fine_context = spec.context.doubled()
    fine = solve(spec.with_context(fine_context), solver_options=solver_options).report.partial_sums
    digits = spec.context.digits
    agreeing = min(_agreeing_digits(a, b, digits, fine_context) for a, b in zip(baseline.values, fine.values))
    logger.debug(f"Precision audit at {digits} digits: {agreeing} agreeing digits")
    return agreeing


def _oracle_levels(potential: PotentialExpr, k: int, kappa: float, state: int, points: int,
                   r_min: float, r_max: float) -> tuple[float, np.ndarray, np.ndarray]:
    t = np.linspace(np.log(r_min), np.log(r_max), points + 2)[1:-1]
    h = t[1] - t[0]
    r = np.exp(t)
    with np.errstate(all="ignore"):
        V = eval_array(potential, r)
    if not np.all(np.isfinite(V)):
        raise DomainError("the potential is undefined on part of the oracle grid")
    centrifugal = kappa * (k - 1) * (k - 3) / 4
    diagonal = (2 * kappa / h ** 2 + kappa / 4 + centrifugal) / r ** 2 + V
    off_diagonal = -kappa / (h ** 2 * r[:-1] * r[1:])
    level = eigh_tridiagonal(diagonal, off_diagonal, eigvals_only=True, select="i",
                             select_range=(state, state), tol=ORACLE_TOLERANCE)[0]
    return float(level), r, V + centrifugal / r ** 2


def fd_eigensolve(potential: PotentialExpr, N: int, l: int, state: int,
                  mass_convention: MassConvention = MassConvention.M1, options: dict | None = None) -> float:
    """
    Radial eigenvalue by finite differences on a logarithmic grid.

    With r = e^t and u = e^(t/2) w the radial equation becomes a symmetric
    tridiagonal problem; its eigenvalue is found by bisection on the
    eigenvalue count and Richardson-extrapolated from spacings h and h/2.
    """
    options = {**DEFAULT_ORACLE_OPTIONS, **(options or {})}
    kappa = 1.0 if MassConvention(mass_convention) == MassConvention.TWO_M1 else 0.5
    k = N + 2 * l
    points = int(options["points"])
    coarse, r, effective = _oracle_levels(potential, k, kappa, int(state), points,
                                          options["r_min"], options["r_max"])
    fine, _, _ = _oracle_levels(potential, k, kappa, int(state), 2 * points + 1,
                                options["r_min"], options["r_max"])
    level = (4 * fine - coarse) / 3
    if level >= effective[-1]:
        if effective[-1] > effective[-2]:
            raise GridTooSmall(f"level {level:.6g} reaches the outer wall at r = {options['r_max']}")
        raise NoBoundState(f"level {level:.6g} lies above the potential at r = {options['r_max']}")
    logger.debug(f"Oracle level {state} for k={k}: {level:.12g}")
    return level


def closed_form_partial_sums(family: str, k: int, state: int, order: int, context: PrecisionContext) -> list:
    """
    Exact partial sums for the frozen Coulomb potential -1/r and the
    oscillator r^2/2, both with the -u''/2 kinetic term.
    """
    k = context.real(k)
    if family == "oscillator":
        return [k / 2] + [k / 2 + 2 * int(state)] * (order - 1)
    if family != "coulomb":
        raise ValueError(f"no closed form for {family!r}")
    s = (-1, 1, 3)[int(state)]
    sums, total = [], context.zero
    for i in range(order):
        total += (i + 1) * (-s / k) ** i
        sums.append(-2 / k ** 2 * total)
    return sums


@dataclass
class SolveResult:
    spec: ProblemSpec
    scaled: ScaledProblem
    w_table: WTable
    tables: CoeffTables
    energy: EnergySeries
    report: SeriesReport
    residual: BigReal | None = None


def solve(spec: ProblemSpec, *, shanks: bool = False, audit: bool = False, residual: bool = False,
          solver_options: dict | None = None, divergence_window: int = DEFAULT_DIVERGENCE_WINDOW) -> SolveResult:
    """freeze -> rho0 -> W table -> recursion -> partial sums and report."""
    context = spec.context
    scaled = scale_problem(spec, solver_options)
    W = build_w_table(scaled, spec.order)
    tables, energy = recurse(W, spec.order, State(spec.state))
    P = assemble_partial_sums(energy)
    onset = detect_divergence(P, context, divergence_window)
    bracket = oscillation_bracket(P, context, onset, divergence_window) if len(P) >= 4 else None
    report = SeriesReport(
        partial_sums=P,
        divergence_order=onset,
        bracket=bracket,
        shanks=shanks_transform(P, context) if shanks else None,
        audit=precision_audit(spec, solver_options, baseline=P) if audit else None,
    )
    result = SolveResult(spec=spec, scaled=scaled, w_table=W, tables=tables, energy=energy, report=report)
    if residual:
        result.residual = residual_check(tables, energy, W, spec.order)
    return result
