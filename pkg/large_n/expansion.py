"""
The scaled large-k problem.

The physical potential V̂(r) is frozen at its numeric k into V(ρ) = V̂(√k ρ)/k,
the minimum ρ₀ of 1/(8ρ²) + V(ρ) is located, and the scaled effective
potential W(x) is expanded in x and y = k^(-1/2) around it.
"""
import logging
from dataclasses import dataclass, field

from large_n.arith import BigReal, PowerSeries, PrecisionContext, series_pow_int
from large_n.errors import DomainError, NewtonDiverged, NoMinimum, NotAMinimum, WTwoNonpositive
from large_n.potential import (Add, Const, Div, Ln, MassConvention, Mul, Neg, PotentialExpr, PowConst,
                               ProblemSpec, R, Sub, Var, eval_series)

logger = logging.getLogger(__name__)

DEFAULT_SOLVER_OPTIONS = {
    "scan_min": "1e-3",
    "scan_max": "1e3",
    "scan_points": 601,
    "max_iterations": 200,
}


@dataclass(frozen=True)
class ScaledProblem:
    k: BigReal
    y: BigReal
    frozen_potential: PotentialExpr
    rho0: BigReal
    E_minus2: BigReal
    mass_convention: MassConvention
    context: PrecisionContext = field(repr=False)

    @property
    def effective_potential(self) -> PotentialExpr:
        return effective_potential(self.frozen_potential)


def effective_potential(V: PotentialExpr) -> PotentialExpr:
    """1/(8ρ²) + V(ρ)"""
    return Add(Div(Const("0.125"), PowConst(R, "2")), V)


def _contains_var(e: PotentialExpr) -> bool:
    match e:
        case Var():
            return True
        case Const():
            return False
        case Add(left, right) | Sub(left, right) | Mul(left, right) | Div(left, right):
            return _contains_var(left) or _contains_var(right)
        case Neg(arg) | Ln(arg):
            return _contains_var(arg)
        case PowConst(base, _):
            return _contains_var(base)
    raise TypeError(f"not a potential expression: {e!r}")


def _freeze(e: PotentialExpr, p: BigReal, k: BigReal, context: PrecisionContext) -> PotentialExpr:
    """Tree for k^p · e(√k ρ), with the power of k pushed down to the leaves."""
    mp = context.mp

    def scaled(node, power):
        if power == 0:
            return node
        return Mul(Const(mp.power(k, power)), node)

    match e:
        case Const(value):
            return e if p == 0 else Const(context.real(value) * mp.power(k, p))
        case Var():
            return scaled(e, p + context.real("0.5"))
        case PowConst(Var(), exponent):
            return scaled(e, p + context.real(exponent) / 2)
        case PowConst(base, exponent):
            q = context.real(exponent)
            if q == 0:
                return scaled(PowConst(_freeze(base, context.zero, k, context), exponent), p)
            return PowConst(_freeze(base, p / q, k, context), exponent)
        case Add(left, right):
            return Add(_freeze(left, p, k, context), _freeze(right, p, k, context))
        case Sub(left, right):
            return Sub(_freeze(left, p, k, context), _freeze(right, p, k, context))
        case Neg(arg):
            return Neg(_freeze(arg, p, k, context))
        case Mul(left, right):
            if _contains_var(right) and not _contains_var(left):
                return Mul(_freeze(left, context.zero, k, context), _freeze(right, p, k, context))
            return Mul(_freeze(left, p, k, context), _freeze(right, context.zero, k, context))
        case Div(left, right):
            return Div(_freeze(left, p, k, context), _freeze(right, context.zero, k, context))
        case Ln(arg):
            return scaled(Ln(_freeze(arg, context.zero, k, context)), p)
    raise TypeError(f"not a potential expression: {e!r}")


def freeze_potential(spec: ProblemSpec) -> PotentialExpr:
    """V(ρ) = V̂(√k ρ)/k with k = N + 2l taken at its numeric value."""
    context = spec.context
    return _freeze(spec.potential, -context.one, context.real(spec.k), context)


def _derivatives(f: PotentialExpr, rho: BigReal, context: PrecisionContext):
    s = eval_series(f, rho, 2, context)
    return s[0], s[1], 2 * s[2]


def _newton(f: PotentialExpr, lo: BigReal, hi: BigReal, context: PrecisionContext, max_iterations: int) -> BigReal:
    """
    Safeguarded Newton iteration on f'(ρ) = 0 inside the bracket [lo, hi].

    Converges once the Newton step or the bracket is below ``eps(5)·ρ``;
    steps leaving the bracket fall back to a geometric bisection.
    """
    mp = context.mp
    tolerance = context.eps(5)
    rho = mp.sqrt(lo * hi)
    for iteration in range(max_iterations):
        _, d1, d2 = _derivatives(f, rho, context)
        if d1 == 0:
            return rho
        step = d1 / d2 if d2 > 0 else None
        if step is not None and abs(step) < tolerance * rho:
            logger.debug(f"Newton converged after {iteration + 1} iterations at rho={mp.nstr(rho, 20)}")
            return rho - step
        if d1 < 0:
            lo = rho
        else:
            hi = rho
        candidate = None if step is None else rho - step
        if candidate is None or not lo <= candidate <= hi:
            candidate = mp.sqrt(lo * hi)
        if hi - lo < tolerance * rho or candidate == rho:
            logger.debug(f"Bracket closed after {iteration + 1} iterations at rho={mp.nstr(candidate, 20)}")
            return candidate
        rho = candidate
    raise NewtonDiverged(f"no convergence after {max_iterations} iterations in [{mp.nstr(lo, 10)}, {mp.nstr(hi, 10)}]")


def find_rho0(V: PotentialExpr, context: PrecisionContext, options: dict | None = None) -> tuple[BigReal, BigReal]:
    """
    Minimum of f(ρ) = 1/(8ρ²) + V(ρ).

    f' is scanned on a logarithmic grid; every sign change from negative to
    positive is polished by Newton iteration, and the lowest minimum wins,
    ties going to the larger ρ.
    """
    options = {**DEFAULT_SOLVER_OPTIONS, **(options or {})}
    mp = context.mp
    f = effective_potential(V)
    lo_scan, hi_scan = context.real(options["scan_min"]), context.real(options["scan_max"])
    points = int(options["scan_points"])
    ratio = hi_scan / lo_scan

    grid = []
    for i in range(points):
        rho = lo_scan * mp.power(ratio, context.real(i) / (points - 1))
        try:
            grid.append((rho, _derivatives(f, rho, context)[1]))
        except DomainError:
            logger.debug(f"Skipping scan point rho={mp.nstr(rho, 10)}: potential undefined")

    minima_brackets, maxima = [], 0
    for (rho_a, d_a), (rho_b, d_b) in zip(grid, grid[1:]):
        if d_a < 0 <= d_b:
            minima_brackets.append((rho_a, rho_b))
        elif d_a > 0 >= d_b:
            maxima += 1
    if not minima_brackets:
        if maxima:
            raise NotAMinimum("every stationary point of the effective potential is a maximum")
        raise NoMinimum("the effective potential has no stationary point in the scanned range")

    candidates = []
    for lo, hi in minima_brackets:
        rho = _newton(f, lo, hi, context, int(options["max_iterations"]))
        value, _, curvature = _derivatives(f, rho, context)
        logger.debug(f"Stationary point rho={mp.nstr(rho, 20)} f={mp.nstr(value, 20)} f''={mp.nstr(curvature, 10)}")
        if curvature > 0:
            candidates.append((rho, value))
    if not candidates:
        raise NotAMinimum("f'' is not positive at any stationary point")

    tie = context.eps(10)
    best_rho, best_value = candidates[0]
    for rho, value in candidates[1:]:
        scale = max(1, abs(value), abs(best_value))
        if value < best_value - tie * scale or (abs(value - best_value) <= tie * scale and rho > best_rho):
            best_rho, best_value = rho, value
    return best_rho, best_value


def scale_problem(spec: ProblemSpec, solver_options: dict | None = None) -> ScaledProblem:
    context = spec.context
    k = context.real(spec.k)
    V = freeze_potential(spec)
    rho0, E_minus2 = find_rho0(V, context, solver_options)
    logger.debug(f"k={spec.k} rho0={context.mp.nstr(rho0, 20)} kE(-2)={context.mp.nstr(k * E_minus2, 20)}")
    return ScaledProblem(k=k, y=1 / context.mp.sqrt(k), frozen_potential=V, rho0=rho0, E_minus2=E_minus2,
                         mass_convention=spec.mass_convention, context=context)


@dataclass(frozen=True)
class WTable:
    """
    Taylor coefficients W_m^n of x^m y^n in the scaled effective potential.
    Only n in {m-2, m, m+2} is ever stored.
    """
    order: int
    entries: dict = field(repr=False)
    scaled: ScaledProblem = field(repr=False)
    stationarity: BigReal = field(repr=False)

    @property
    def context(self) -> PrecisionContext:
        return self.scaled.context

    @property
    def max_m(self) -> int:
        return 2 * self.order + 3

    def get(self, m: int, n: int) -> BigReal:
        return self.entries.get((m, n), self.scaled.context.zero)

    def __call__(self, m: int, n: int) -> BigReal:
        return self.get(m, n)


def build_w_table(scaled: ScaledProblem, order: int) -> WTable:
    context = scaled.context
    M = 2 * order + 3
    f = eval_series(scaled.effective_potential, scaled.rho0, M, context)
    g = series_pow_int(PowerSeries.variable(scaled.rho0, M, context), -2)
    factor = context.real("0.5") if scaled.mass_convention == MassConvention.TWO_M1 else context.one

    entries = {}
    for j in range(M + 1):
        if j >= 2:
            entries[(j, j - 2)] = factor * f[j]
        entries[(j, j)] = -factor * g[j] / 2
        entries[(j, j + 2)] = factor * 3 * g[j] / 8

    if entries[(2, 0)] <= 0:
        raise WTwoNonpositive(f"W_2^0 = {context.mp.nstr(entries[(2, 0)], 10)} is not positive")
    logger.debug(f"W table with {len(entries)} entries, max x-power {M}")
    return WTable(order=order, entries=entries, scaled=scaled, stationarity=abs(f[1]))
