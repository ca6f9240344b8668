import random

import numpy as np
import pytest

from large_n.errors import DomainError, InvalidProblem, PotentialSyntaxError, UnknownSymbol
from large_n.potential import (Const, Div, Ln, MassConvention, Neg, PowConst, ProblemSpec, R, State,
                               constructed_potential_text, eval_array, eval_point, eval_series,
                               format_potential, parse_potential)


@pytest.mark.parametrize("text, r, expected", [
    ("-1/r", 2, -0.5),
    ("r^2 + 0.5/r", 1, 1.5),
    ("-2^1.7*r^-0.2", 1, -(2 ** 1.7)),
    ("r^(-0.5)", 4, 0.5),
    ("(r^2 - 16)^2/128", 4, 0.0),
    ("ln(r) + 2*r", 1, 2.0),
    ("r - -r", 3, 6.0),
])
def test_parse_and_evaluate(context, text, r, expected):
    e = parse_potential(text)
    assert float(eval_point(e, r, context)) == pytest.approx(expected)


def test_tree_shape():
    assert parse_potential("r^2") == PowConst(R, "2")
    assert parse_potential("ln(r)") == Ln(R)
    assert parse_potential("-1/r") == Div(Neg(Const("1")), R)


@pytest.mark.parametrize("text", ["-1/r", "r^2 + 0.1*r^2/(1 + 0.1*r^2)", "-2^0.8*r^-0.8", "ln(r)*r^(+2)"])
def test_format_reparses_to_the_same_tree(text):
    e = parse_potential(text)
    assert parse_potential(format_potential(e)) == e


def test_syntax_errors_carry_position():
    with pytest.raises(PotentialSyntaxError) as info:
        parse_potential("r^^2")
    assert info.value.position == 2
    with pytest.raises(PotentialSyntaxError):
        parse_potential("r +")
    with pytest.raises(PotentialSyntaxError):
        parse_potential("r^r")


def test_unknown_symbols():
    with pytest.raises(UnknownSymbol):
        parse_potential("x^2")
    with pytest.raises(UnknownSymbol) as info:
        parse_potential("r + sin(r)")
    assert info.value.position == 4


def test_domain_errors(context):
    with pytest.raises(DomainError):
        eval_point(parse_potential("1/r"), 0, context)
    with pytest.raises(DomainError):
        eval_point(parse_potential("ln(r - 2)"), 1, context)
    with pytest.raises(DomainError):
        eval_point(parse_potential("(r - 2)^0.5"), 1, context)


def test_series_of_power(context):
    s = eval_series(parse_potential("r^3"), 2, 4, context)
    assert [float(c) for c in s] == pytest.approx([8, 12, 6, 1, 0])
    s = eval_series(parse_potential("1/r"), 1, 3, context)
    assert [float(c) for c in s] == pytest.approx([1, -1, 1, -1])


def test_eval_array_matches_point_evaluation(context):
    e = parse_potential("r/2.34^2 - 0.52/r")
    r = np.array([0.5, 1.0, 3.0])
    expected = [float(eval_point(e, x, context)) for x in r]
    assert eval_array(e, r) == pytest.approx(expected)


@pytest.mark.parametrize("a, E, mass, expected", [
    ("1", "1", "m1", "1.5 - 1/r"),
    ("2", "1", "m1", "2*r^2 - 2"),
    ("1", "1", "2m1", "2 - 2/r"),
])
def test_constructed_potential_text(context, a, E, mass, expected):
    assert constructed_potential_text(a, E, context, mass) == expected


def test_constructed_potential_has_prescribed_ground_state(context):
    # -u''/2 + V u = E u for u = r exp(-r^a)
    mp = context.mp
    a, E = context.real("0.85"), context.one
    V = parse_potential(constructed_potential_text(a, E, context))
    for r in (context.real("0.5"), context.real(2)):
        u = lambda x: x * mp.exp(-mp.power(x, a))
        lhs = -mp.diff(u, r, 2) / 2 + eval_point(V, r, context) * u(r)
        assert abs(lhs - E * u(r)) < context.eps(25)


def test_problem_spec_validation():
    spec = ProblemSpec.from_text("-1/r", N=3, l=1, state=1, mass_convention="2m1")
    assert spec.k == 5
    assert spec.state is State.FIRST
    assert spec.mass_convention is MassConvention.TWO_M1
    assert spec.potential_text == "-1/r"
    with pytest.raises(InvalidProblem):
        ProblemSpec.from_text("r", state=3)
    with pytest.raises(InvalidProblem):
        ProblemSpec.from_text("r", mass_convention="m2")
    with pytest.raises(InvalidProblem):
        ProblemSpec.from_text("r", N=1)


@pytest.mark.parametrize("text", ["-2^0.8*r^-0.8", "ln(r) + r^0.5", "(r^2 - 16)^2/128", "r^2 + 0.1*r^2/(1 + 0.1*r^2)"])
def test_series_slope_matches_numerical_derivative(context, text):
    e = parse_potential(text)
    for r in ("0.7", "1.7", "3.2"):
        r = context.real(r)
        slope = eval_series(e, r, 3, context)[1]
        numerical = context.mp.diff(lambda x: eval_point(e, x, context), r)
        assert abs(slope - numerical) <= context.real("1e-20") * max(1, abs(numerical))


@pytest.mark.parametrize("text", ["-1/r", "r^2 + 0.1*r^2/(1 + 0.1*r^2)", "-2^0.8*r^-0.8", "ln(r)*r^(+2)",
                                  "6.8698*r^0.1 - 8.064", "r - -r/3"])
def test_formatted_potential_evaluates_the_same(context, text):
    rng = random.Random(3)
    e = parse_potential(text)
    again = parse_potential(format_potential(e))
    for _ in range(10):
        r = context.real(rng.uniform(0.1, 10))
        expected = eval_point(e, r, context)
        assert abs(eval_point(again, r, context) - expected) <= context.eps(5) * max(1, abs(expected))
