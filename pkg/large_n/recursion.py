"""
Order-by-order recursions for the wavefunction logarithm and the energy.

With U'(x) = Σ D_m^n x^(2m-1) y^(2n) + Σ C_m^n x^(2m) y^(2n+1) the ground
state satisfies U'' + U'^2 - 2W + 2E = 0.  Excited states multiply e^U by a
node polynomial; the left-hand side of the ground equation is then no longer
zero but a series T + S, whose coefficients are produced alongside D and C.

For each order n the evaluation order is:

1. node coefficients a_n (first excited), or b_n then c_n (second excited);
2. for m = n+1 .. 1: T_m^n, then D_m^n; then T_0^n;
3. for m = n+1 .. 0: S_m^n, then C_m^n;
4. E^(n-1).

Every entry depends only on lower orders or on entries already produced at
this order.  A read of an entry that has not been produced raises
SchedulingCycle.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass, field

from large_n.arith import BigReal, PrecisionContext
from large_n.errors import DegenerateDenominator, SchedulingCycle, WTwoNonpositive
from large_n.expansion import WTable
from large_n.potential import MassConvention, State

logger = logging.getLogger(__name__)


class Triangle:
    """
    Coefficients X[n][m] for 0 <= n < order and 0 <= m <= n + extra.
    Reads outside that index set are structural zeros.
    """

    def __init__(self, name: str, order: int, extra: int, context: PrecisionContext):
        self.name = name
        self.order = order
        self.extra = extra
        self.zero = context.zero
        self.rows = [[None] * (n + extra + 1) for n in range(order)]

    def __call__(self, n: int, m: int) -> BigReal:
        if n < 0 or m < 0 or m > n + self.extra:
            return self.zero
        if n >= self.order:
            raise SchedulingCycle(f"{self.name}[{n}][{m}] lies beyond order {self.order}")
        value = self.rows[n][m]
        if value is None:
            raise SchedulingCycle(f"{self.name}[{n}][{m}] read before it was computed")
        return value

    def __setitem__(self, key: tuple[int, int], value: BigReal):
        n, m = key
        self.rows[n][m] = value

    def __getitem__(self, n: int) -> list:
        return self.rows[n]

    def __len__(self):
        return self.order


class NodeSeries:
    """Node coefficients x_1, x_2, ... of one of A(y), B(y), C(y)."""

    def __init__(self, name: str, order: int):
        self.name = name
        self.values = [None] * order

    def __call__(self, n: int) -> BigReal:
        value = self.values[n] if 1 <= n < len(self.values) else None
        if value is None:
            raise SchedulingCycle(f"{self.name}_{n} read before it was computed")
        return value

    def __setitem__(self, n: int, value: BigReal):
        self.values[n] = value

    def as_list(self) -> list:
        return self.values[1:]


@dataclass
class CoeffTables:
    state: State
    order: int
    D: Triangle
    C: Triangle
    T: Triangle | None = None
    S: Triangle | None = None
    a: NodeSeries | None = None
    b: NodeSeries | None = None
    c: NodeSeries | None = None

    @classmethod
    def empty(cls, state: State, order: int, context: PrecisionContext) -> "CoeffTables":
        tables = cls(state=state, order=order,
                     D=Triangle("D", order, 1, context), C=Triangle("C", order, 1, context))
        for n in range(order):
            tables.D[n, 0] = context.zero
        if state != State.GROUND:
            tables.T = Triangle("T", order, 0, context)
            tables.S = Triangle("S", order, 0, context)
        if state == State.FIRST:
            tables.a = NodeSeries("a", order)
        elif state == State.SECOND:
            tables.b = NodeSeries("b", order)
            tables.c = NodeSeries("c", order)
        return tables

    @property
    def excited(self) -> bool:
        return self.state != State.GROUND


@dataclass(frozen=True)
class EnergySeries:
    """
    ``coeffs`` are the physical E^(n-1), n = 0..order-1.  Under ``2m1`` they
    are twice the recursion output kept in ``raw_coeffs``.
    """
    E_minus2: BigReal
    coeffs: tuple
    raw_coeffs: tuple = field(repr=False)
    state: State
    k: BigReal
    mass_convention: MassConvention
    context: PrecisionContext = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.coeffs)


class _Recursion:

    def __init__(self, W: WTable, order: int, state: State):
        self.W = W
        self.order = order
        self.context = W.context
        self.mp = W.context.mp
        self.tables = CoeffTables.empty(State(state), order, W.context)
        self.energy = []

    def run(self) -> tuple[CoeffTables, EnergySeries]:
        if self.W(2, 0) <= 0:
            raise WTwoNonpositive("W_2^0 must be positive")
        for n in range(self.order):
            if n:
                self._node_coefficients(n)
            self._d_sweep(n)
            self._c_sweep(n)
            self.energy.append(self._energy(n))
            logger.debug(f"{self.tables.state.name} order {n}: E^({n - 1}) = {self.mp.nstr(self.energy[-1], 15)}")
        return self.tables, self._energy_series()

    def _energy_series(self) -> EnergySeries:
        scaled = self.W.scaled
        factor = 2 if scaled.mass_convention == MassConvention.TWO_M1 else 1
        return EnergySeries(E_minus2=scaled.E_minus2, coeffs=tuple(factor * e for e in self.energy),
                            raw_coeffs=tuple(self.energy), state=self.tables.state, k=scaled.k,
                            mass_convention=scaled.mass_convention, context=self.context)

    def _d_sweep(self, n: int):
        t = self.tables
        for m in range(n + 1, 0, -1):
            if t.excited and m <= n:
                t.T[n, m] = self._t_value(n, m)
            t.D[n, m] = -self.mp.sqrt(2 * self.W(2, 0)) if n == 0 else self._d_value(n, m)
        if t.excited:
            t.T[n, 0] = self._t_value(n, 0)

    def _c_sweep(self, n: int):
        t = self.tables
        for m in range(n + 1, -1, -1):
            if t.excited and m <= n:
                t.S[n, m] = self._s_value(n, m)
            t.C[n, m] = self._c_value(n, m)

    def _d_value(self, n: int, m: int) -> BigReal:
        D, C = self.tables.D, self.tables.C
        pairs = [(D(i, j), D(n - i, m + 1 - j))
                 for i in range(1, n) for j in range(max(1, m - n + i), min(i + 1, m) + 1)]
        pairs += [(C(i, j), C(n - i - 1, m - j))
                  for i in range(n) for j in range(max(0, m - n + i), min(i + 1, m) + 1)]
        total = -2 * self.W(2 * m, 2 * n) + (2 * m + 1) * D(n, m + 1) + self.mp.fdot(pairs)
        if self.tables.excited:
            total -= self.tables.T(n, m)
        return -total / (2 * D(0, 1))

    def _c_value(self, n: int, m: int) -> BigReal:
        D, C = self.tables.D, self.tables.C
        pairs = [(D(i, j), C(n - i, m + 1 - j))
                 for i in range(1, n + 1) for j in range(max(1, m - n + i), min(i + 1, m + 1) + 1)]
        total = -2 * self.W(2 * m + 1, 2 * n + 1) + 2 * (m + 1) * C(n, m + 1) + 2 * self.mp.fdot(pairs)
        if self.tables.excited:
            total -= self.tables.S(n, m)
        return -total / (2 * D(0, 1))

    def _energy(self, n: int) -> BigReal:
        D, C = self.tables.D, self.tables.C
        total = -D(n, 1) + 2 * self.W(0, 2 * n) - self.mp.fdot((C(i, 0), C(n - i - 1, 0)) for i in range(n))
        if self.tables.excited:
            total += self.tables.T(n, 0)
        return total / 2

    def _node_coefficients(self, n: int):
        t = self.tables
        D, C, T, S = t.D, t.C, t.T, t.S
        fdot = self.mp.fdot
        if t.state == State.FIRST:
            a = t.a
            t.a[n] = (2 * C(n - 1, 0) - fdot((a(k), T(n - k, 0)) for k in range(1, n))) / T(0, 0)
        elif t.state == State.SECOND:
            b, c = t.b, t.c
            total = fdot([(2 * c(k), C(n - k - 1, 0)) for k in range(1, n)]
                         + [(b(k), T(n - k, 0)) for k in range(1, n)])
            if n == 1:
                total += 2
            b[n] = -total / T(0, 0)
            denominator = T(0, 0) + 2 * D(0, 1)
            if abs(denominator) < self.context.eps(10):
                raise DegenerateDenominator("T_0^0 + 2 D_1^0 vanishes; the c_n recursion is singular")
            total = fdot([(2 * D(n - k, 1) + T(n - k, 0), c(k)) for k in range(1, n)]
                         + [(b(k), S(n - k, 0)) for k in range(1, n + 1)])
            c[n] = -(total + 4 * C(n - 1, 0)) / denominator

    def _t_value(self, n: int, m: int) -> BigReal:
        t = self.tables
        D, C, T, S = t.D, t.C, t.T, t.S
        fdot = self.mp.fdot
        if t.state == State.FIRST:
            return fdot((t.a(k), S(n - k, m)) for k in range(1, n - m + 1)) - 2 * D(n, m + 1)
        b, c = t.b, t.c
        total = fdot([(2 * c(k), C(n - k, m + 1)) for k in range(1, n - m + 1)]
                     + [(b(k), T(n - k + 1, m + 1)) for k in range(1, n - m + 1)]
                     + [(c(k), S(n - k, m)) for k in range(1, n - m + 1)])
        return -total - 4 * D(n, m + 1)

    def _s_value(self, n: int, m: int) -> BigReal:
        t = self.tables
        D, C, T, S = t.D, t.C, t.T, t.S
        fdot = self.mp.fdot
        if t.state == State.FIRST:
            return fdot((t.a(k), T(n - k + 1, m + 1)) for k in range(1, n - m + 1)) - 2 * C(n, m + 1)
        b, c = t.b, t.c
        total = fdot([(2 * c(k), D(n - k + 1, m + 2)) for k in range(1, n - m + 1)]
                     + [(b(k), S(n - k + 1, m + 1)) for k in range(1, n - m + 1)]
                     + [(c(k), T(n - k + 1, m + 1)) for k in range(1, n - m + 1)])
        return -total - 4 * C(n, m + 1)


def recurse(W: WTable, order: int, state: State) -> tuple[CoeffTables, EnergySeries]:
    return _Recursion(W, order, state).run()


def recurse_ground(W: WTable, order: int) -> tuple[CoeffTables, EnergySeries]:
    return recurse(W, order, State.GROUND)


def recurse_first(W: WTable, order: int) -> tuple[CoeffTables, EnergySeries]:
    return recurse(W, order, State.FIRST)


def recurse_second(W: WTable, order: int) -> tuple[CoeffTables, EnergySeries]:
    return recurse(W, order, State.SECOND)


class _Bivariate:
    """Polynomial in x and y as {(x power, y power): coefficient}, truncated in y."""

    def __init__(self, max_y: int, terms=None):
        self.max_y = max_y
        self.terms = defaultdict(int)
        for key, value in (terms or {}).items():
            if key[1] <= max_y:
                self.terms[key] += value

    def __add__(self, other):
        result = _Bivariate(self.max_y, self.terms)
        for key, value in other.terms.items():
            result.terms[key] += value
        return result

    def scale(self, factor):
        return _Bivariate(self.max_y, {key: factor * value for key, value in self.terms.items()})

    def __mul__(self, other):
        result = _Bivariate(self.max_y)
        for (px, py), u in self.terms.items():
            for (qx, qy), v in other.terms.items():
                if py + qy <= self.max_y:
                    result.terms[(px + qx, py + qy)] += u * v
        return result

    def d_dx(self):
        return _Bivariate(self.max_y, {(px - 1, py): px * value
                                       for (px, py), value in self.terms.items() if px > 0})


def residual_check(tables: CoeffTables, energy: EnergySeries, W: WTable, order: int) -> BigReal:
    """
    Largest coefficient, over y-powers up to 2*order - 1, left after
    substituting the computed series into the differential equation of the state.
    """
    max_y = 2 * order - 1
    D, C = tables.D, tables.C
    up = {}
    for n in range(order):
        for m in range(1, n + 2):
            up[(2 * m - 1, 2 * n)] = D(n, m)
        for m in range(n + 2):
            up[(2 * m, 2 * n + 1)] = C(n, m)
    U1 = _Bivariate(max_y, up)
    R = (U1.d_dx() + U1 * U1 + _Bivariate(max_y, W.entries).scale(-2)
         + _Bivariate(max_y, {(0, 2 * n): 2 * e for n, e in enumerate(energy.raw_coeffs)}))

    if tables.state == State.GROUND:
        residual = R
    elif tables.state == State.FIRST:
        node = _Bivariate(max_y, {(1, 1): 1, **{(0, 2 * n): -a for n, a in enumerate(tables.a.values) if n}})
        residual = node * R + _Bivariate(max_y, {(0, 1): 2}) * U1
    else:
        c_series = {(0, 2 * n): c for n, c in enumerate(tables.c.values) if n}
        node = _Bivariate(max_y, {(2, 2): 1,
                                  **{(1, py + 1): c for (_, py), c in c_series.items()},
                                  **{(0, 2 * n): b for n, b in enumerate(tables.b.values) if n}})
        factor = _Bivariate(max_y, {(1, 2): 4, **{(0, py + 1): 2 * c for (_, py), c in c_series.items()}})
        residual = node * R + _Bivariate(max_y, {(0, 2): 2}) + factor * U1
    return max((abs(v) for v in residual.terms.values()), default=W.context.zero)
