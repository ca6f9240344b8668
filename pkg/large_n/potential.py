"""
Radial potentials: grammar, AST, evaluation and constructed potentials.

The expression language is::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | atom ('^' exponent)?
    atom   := number | 'r' | 'ln' '(' expr ')' | '(' expr ')'

Exponents are constants; a signed exponent is written ``r^(-0.2)``.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Union

import numpy as np
from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken, VisitError

from large_n.arith import (BigReal, PowerSeries, PrecisionContext, exact_decimal, series_ln,
                           series_pow_int, series_pow_real)
from large_n.errors import DomainError, InvalidProblem, PotentialSyntaxError, UnknownSymbol

logger = logging.getLogger(__name__)

Number = Union[str, BigReal]

# Integer exponents up to this size go through repeated multiplication.
MAX_INTEGER_POWER = 64


@dataclass(frozen=True)
class Const:
    value: Number


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Add:
    left: "PotentialExpr"
    right: "PotentialExpr"


@dataclass(frozen=True)
class Sub:
    left: "PotentialExpr"
    right: "PotentialExpr"


@dataclass(frozen=True)
class Mul:
    left: "PotentialExpr"
    right: "PotentialExpr"


@dataclass(frozen=True)
class Div:
    left: "PotentialExpr"
    right: "PotentialExpr"


@dataclass(frozen=True)
class PowConst:
    base: "PotentialExpr"
    exponent: Number


@dataclass(frozen=True)
class Ln:
    arg: "PotentialExpr"


@dataclass(frozen=True)
class Neg:
    arg: "PotentialExpr"


PotentialExpr = Union[Const, Var, Add, Sub, Mul, Div, PowConst, Ln, Neg]

R = Var()


POTENTIAL_GRAMMAR = r"""
    ?start: expr

    ?expr: term
        | expr "+" term          -> add
        | expr "-" term          -> sub

    ?term: factor
        | term "*" factor        -> mul
        | term "/" factor        -> div

    ?factor: "-" factor          -> neg
        | atom
        | atom "^" exponent      -> pow

    exponent: NUMBER             -> exponent
        | "-" NUMBER             -> negative_exponent
        | "(" NUMBER ")"         -> exponent
        | "(" "+" NUMBER ")"     -> exponent
        | "(" "-" NUMBER ")"     -> negative_exponent

    ?atom: NUMBER                -> number
        | NAME                   -> name
        | NAME "(" expr ")"      -> call
        | "(" expr ")"

    NAME: /[A-Za-z_][A-Za-z_0-9]*/

    %import common.NUMBER
    %import common.WS
    %ignore WS
"""


@v_args(inline=True)
class _AstBuilder(Transformer):

    def add(self, left, right):
        return Add(left, right)

    def sub(self, left, right):
        return Sub(left, right)

    def mul(self, left, right):
        return Mul(left, right)

    def div(self, left, right):
        return Div(left, right)

    def neg(self, arg):
        return Neg(arg)

    def number(self, token):
        return Const(str(token))

    def exponent(self, token):
        return str(token)

    def negative_exponent(self, token):
        return "-" + str(token)

    def pow(self, base, exponent):
        return PowConst(base, exponent)

    def name(self, token):
        if token == "r":
            return R
        raise UnknownSymbol(f"unknown symbol {str(token)!r}", token.start_pos)

    def call(self, token, arg):
        if token == "ln":
            return Ln(arg)
        raise UnknownSymbol(f"unknown function {str(token)!r}", token.start_pos)


_parser = Lark(POTENTIAL_GRAMMAR, parser="lalr")


def parse_potential(text: str) -> PotentialExpr:
    try:
        tree = _parser.parse(text)
    except UnexpectedCharacters as e:
        raise PotentialSyntaxError(f"unexpected character {text[e.pos_in_stream]!r}", e.pos_in_stream) from None
    except UnexpectedToken as e:
        if e.token.type == "$END":
            raise PotentialSyntaxError("unexpected end of input", len(text)) from None
        raise PotentialSyntaxError(f"unexpected {str(e.token)!r}", e.token.start_pos) from None
    except UnexpectedEOF:
        raise PotentialSyntaxError("unexpected end of input", len(text)) from None
    except UnexpectedInput as e:
        raise PotentialSyntaxError(str(e), getattr(e, "pos_in_stream", None)) from None
    try:
        return _AstBuilder().transform(tree)
    except VisitError as e:
        raise e.orig_exc from None


def _format_number(value: Number) -> str:
    if isinstance(value, str):
        return value
    return exact_decimal(value)


def _format_atom_number(value: Number) -> str:
    text = _format_number(value)
    return f"({text})" if text.startswith("-") else text


def format_potential(e: PotentialExpr) -> str:
    """Fully parenthesised text that parses back to an equivalent tree."""
    match e:
        case Const(value):
            return _format_atom_number(value)
        case Var():
            return "r"
        case Add(left, right):
            return f"({format_potential(left)} + {format_potential(right)})"
        case Sub(left, right):
            return f"({format_potential(left)} - {format_potential(right)})"
        case Mul(left, right):
            return f"({format_potential(left)} * {format_potential(right)})"
        case Div(left, right):
            return f"({format_potential(left)} / {format_potential(right)})"
        case Neg(arg):
            return f"(-{format_potential(arg)})"
        case Ln(arg):
            return f"ln({format_potential(arg)})"
        case PowConst(base, exponent):
            base_text = format_potential(base)
            if isinstance(base, Const) and not base_text.startswith("("):
                base_text = f"({base_text})"
            return f"{base_text}^({_format_number(exponent)})"
    raise TypeError(f"not a potential expression: {e!r}")


def integer_exponent(exponent: Number, context: PrecisionContext) -> int | None:
    p = context.real(exponent)
    if context.mp.isint(p) and abs(p) <= MAX_INTEGER_POWER:
        return int(p)
    return None


def eval_point(e: PotentialExpr, r, context: PrecisionContext) -> BigReal:
    mp = context.mp
    match e:
        case Const(value):
            return context.real(value)
        case Var():
            return context.real(r)
        case Add(left, right):
            return eval_point(left, r, context) + eval_point(right, r, context)
        case Sub(left, right):
            return eval_point(left, r, context) - eval_point(right, r, context)
        case Mul(left, right):
            return eval_point(left, r, context) * eval_point(right, r, context)
        case Div(left, right):
            denominator = eval_point(right, r, context)
            if denominator == 0:
                raise DomainError(f"division by zero at r = {context.format_number(r, 10)}")
            return eval_point(left, r, context) / denominator
        case Neg(arg):
            return -eval_point(arg, r, context)
        case Ln(arg):
            value = eval_point(arg, r, context)
            if value <= 0:
                raise DomainError(f"ln of non-positive value at r = {context.format_number(r, 10)}")
            return mp.ln(value)
        case PowConst(base, exponent):
            value = eval_point(base, r, context)
            n = integer_exponent(exponent, context)
            if value == 0 and context.real(exponent) < 0:
                raise DomainError("zero raised to a negative power")
            if n is not None:
                return value ** n
            if value < 0:
                raise DomainError("negative base raised to a non-integer power")
            return mp.power(value, context.real(exponent))
    raise TypeError(f"not a potential expression: {e!r}")


def _series(e: PotentialExpr, u: PowerSeries) -> PowerSeries:
    context = u.context
    match e:
        case Const(value):
            return PowerSeries.constant(value, u.trunc_order, context)
        case Var():
            return u
        case Add(left, right):
            return _series(left, u) + _series(right, u)
        case Sub(left, right):
            return _series(left, u) - _series(right, u)
        case Mul(left, right):
            return _series(left, u) * _series(right, u)
        case Div(left, right):
            return _series(left, u) / _series(right, u)
        case Neg(arg):
            return -_series(arg, u)
        case Ln(arg):
            return series_ln(_series(arg, u))
        case PowConst(base, exponent):
            n = integer_exponent(exponent, context)
            if n is not None:
                return series_pow_int(_series(base, u), n)
            return series_pow_real(_series(base, u), context.real(exponent))
    raise TypeError(f"not a potential expression: {e!r}")


def eval_series(e: PotentialExpr, center, M: int, context: PrecisionContext) -> PowerSeries:
    """Taylor coefficients of ``e(center + u)`` through ``u^M``."""
    return _series(e, PowerSeries.variable(center, M, context))


def eval_array(e: PotentialExpr, r: np.ndarray) -> np.ndarray:
    """Double-precision evaluation on a grid, for the finite-difference oracle."""
    match e:
        case Const(value):
            return np.full_like(r, float(value))
        case Var():
            return r
        case Add(left, right):
            return eval_array(left, r) + eval_array(right, r)
        case Sub(left, right):
            return eval_array(left, r) - eval_array(right, r)
        case Mul(left, right):
            return eval_array(left, r) * eval_array(right, r)
        case Div(left, right):
            return eval_array(left, r) / eval_array(right, r)
        case Neg(arg):
            return -eval_array(arg, r)
        case Ln(arg):
            return np.log(eval_array(arg, r))
        case PowConst(base, exponent):
            return np.power(eval_array(base, r), float(exponent))
    raise TypeError(f"not a potential expression: {e!r}")


def _format_term(coefficient: BigReal, exponent: BigReal, context: PrecisionContext) -> str:
    magnitude = abs(coefficient)
    unit = magnitude == 1
    number = context.format_number(magnitude)
    if exponent == 0:
        return number
    if exponent == -1:
        return f"{number}/r"
    if exponent == 1:
        power = "r"
    elif exponent < 0:
        power = f"r^({context.format_number(exponent)})"
    else:
        power = f"r^{context.format_number(exponent)}"
    return power if unit else f"{number}*{power}"


def constructed_potential_text(a, E, context: PrecisionContext, mass_convention: str = "m1") -> str:
    """
    Canonical text of the N=3, l=0 potential whose ground state is exp(-r^a)
    with eigenvalue E.  Under ``2m1`` the kinetic term is -u'' instead of -u''/2.
    """
    a = context.real(a)
    E = context.real(E)
    if a <= 0:
        raise DomainError("the exponent a must be positive")
    factor = 1 if mass_convention == "2m1" else context.real("0.5")
    terms: dict = {}
    for exponent, coefficient in ((context.zero, E),
                                  (2 * a - 2, factor * a * a),
                                  (a - 2, -factor * a * (a + 1))):
        terms[exponent] = terms.get(exponent, context.zero) + coefficient
    parts = []
    for exponent in sorted(terms, reverse=True):
        coefficient = terms[exponent]
        if coefficient == 0:
            continue
        text = _format_term(coefficient, exponent, context)
        if not parts:
            parts.append(f"-{text}" if coefficient < 0 else text)
        else:
            parts.append(f"{'-' if coefficient < 0 else '+'} {text}")
    return " ".join(parts) or "0"


def construct_potential(a, E, context: PrecisionContext, mass_convention: str = "m1") -> PotentialExpr:
    text = constructed_potential_text(a, E, context, mass_convention)
    logger.debug(f"Constructed potential for a={a}, E={E}: {text}")
    return parse_potential(text)


class State(IntEnum):
    GROUND = 0
    FIRST = 1
    SECOND = 2


class MassConvention(str, Enum):
    """``m1`` is the -u''/2 kinetic term, ``2m1`` the -u'' one."""
    M1 = "m1"
    TWO_M1 = "2m1"


@dataclass(frozen=True)
class ProblemSpec:
    potential: PotentialExpr
    N: int = 3
    l: int = 0
    state: State = State.GROUND
    mass_convention: MassConvention = MassConvention.M1
    order: int = 29
    context: PrecisionContext = field(default_factory=PrecisionContext)
    potential_text: str | None = None

    def __post_init__(self):
        if self.N < 2:
            raise InvalidProblem(f"N must be at least 2, got {self.N}")
        if self.l < 0:
            raise InvalidProblem(f"l must be non-negative, got {self.l}")
        if self.order < 1:
            raise InvalidProblem(f"order must be at least 1, got {self.order}")
        try:
            object.__setattr__(self, "state", State(self.state))
            object.__setattr__(self, "mass_convention", MassConvention(self.mass_convention))
        except ValueError as e:
            raise InvalidProblem(str(e)) from None
        if self.potential_text is None:
            object.__setattr__(self, "potential_text", format_potential(self.potential))

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "ProblemSpec":
        return cls(potential=parse_potential(text), potential_text=text, **kwargs)

    @property
    def k(self) -> int:
        return self.N + 2 * self.l

    def with_context(self, context: PrecisionContext) -> "ProblemSpec":
        return replace(self, context=context)
