import random

import pytest

from large_n.analysis import (detect_divergence, fd_eigensolve, oscillation_bracket, precision_audit,
                              shanks_transform, solve)
from large_n.arith import PrecisionContext
from large_n.errors import GridTooSmall, NoBoundState, TooShort
from large_n.potential import ProblemSpec, construct_potential, parse_potential


def cumulative(steps, context):
    total, sums = context.zero, []
    for s in steps:
        total += context.real(s)
        sums.append(total)
    return sums


@pytest.fixture(scope="module")
def coulomb():
    return solve(ProblemSpec.from_text("-1/r", context=PrecisionContext(50)))


@pytest.fixture(scope="module")
def linear():
    return solve(ProblemSpec.from_text("2^3.5*r", context=PrecisionContext(50)), shanks=True)


@pytest.mark.parametrize("order, expected", [
    (1, "-0.22222222222"),
    (5, "-0.49108367627"),
    (10, "-0.49993508216"),
    (15, "-0.49999961670"),
    (29, "-0.50000000000"),
])
def test_coulomb_partial_sums(coulomb, order, expected):
    assert float(coulomb.report.partial_sums[order]) == pytest.approx(float(expected), abs=5e-11)


def test_coulomb_converges_without_divergence(coulomb):
    report = coulomb.report
    assert report.divergence_order is None
    assert (report.bracket.order_low, report.bracket.order_high) == (28, 29)
    assert float(report.bracket.low) == pytest.approx(-0.5, abs=1e-9)
    assert float(report.bracket.high) == pytest.approx(-0.5, abs=1e-9)


def test_shanks_is_exact_on_geometric_sequences(context):
    rng = random.Random(7)
    for q in [0.5] + [rng.choice([-1, 1]) * rng.uniform(0.1, 0.95) for _ in range(19)]:
        q = context.real(q)
        P = [(1 - q ** (n + 1)) / (1 - q) for n in range(12)]
        S = shanks_transform(P, context)
        assert S[0] is None and S[-1] is None
        for s in S[1:-1]:
            if s is not None:
                assert abs(s - 1 / (1 - q)) <= context.eps(15)
        assert S[1] is not None


def test_shanks_of_constant_sequence_is_undefined(context):
    assert shanks_transform([context.one] * 5, context) == [None] * 5


def test_shanks_accelerates_linear_ground_state(linear):
    report = linear.report
    target = 9.35243
    assert abs(float(report.shanks[14]) - target) <= abs(float(report.partial_sums[15]) - target)


def test_linear_potential_sums_and_onset(linear):
    report = linear.report
    assert float(report.partial_sums[10]) == pytest.approx(9.35240, abs=5e-4)
    assert 22 <= report.divergence_order <= 28


def test_divergence_onset_on_synthetic_increments(context):
    assert detect_divergence(cumulative([1, 8, 4, 2, 1, 2, 4, 8, 16], context), context) == 5
    assert detect_divergence(cumulative([1, -2, 4, -8, 16], context), context) == 2
    assert detect_divergence(cumulative([1, 0.5, 0.25, 0.125, 0.0625], context), context) is None


def test_increments_below_noise_are_zero(context):
    tiny = context.eps(5)
    P = cumulative([1, tiny, 2 * tiny, 3 * tiny, 4 * tiny, 5 * tiny], context)
    assert detect_divergence(P, context) is None


def test_bracket_picks_smallest_crossing_of_termwise_oscillation(context):
    amplitudes = ["0.5", "0.3", "0.2", "0.1", "0.05", "0.02", "0.04", "0.08", "0.16", "0.32"]
    P = [1 + (-1) ** j * context.real(a) for j, a in enumerate(amplitudes, start=1)]
    assert detect_divergence(P, context) == 7
    bracket = oscillation_bracket(P, context)
    assert (bracket.order_low, bracket.order_high) == (6, 7)
    assert bracket.low == P[5] and bracket.high == P[6]


def test_monotone_approach_is_not_a_crossing(context):
    P = [context.real(v) for v in ["1.5", "1.3", "1.2", "1.15", "1.12", "1.10", "1.09", "0.96", "0.90",
                                   "1.04", "1.10", "0.7", "0.5"]]
    # one swing 0.90 -> 1.10 centred on 1; the descent crosses it between orders 7 and 8
    bracket = oscillation_bracket(P, context)
    assert (bracket.order_low, bracket.order_high) == (7, 8)
    assert bracket.low > 1 > bracket.high


def test_single_turning_point_reports_flattest_pair(context):
    P = [context.real(v) for v in ["0.5", "0.49", "0.485", "0.4835", "0.4832", "0.48318", "0.483185",
                                   "0.4832", "0.48322"]]
    assert detect_divergence(P, context) is None
    bracket = oscillation_bracket(P, context)
    assert (bracket.order_low, bracket.order_high) == (6, 7)


def test_runs_of_two_bracket_across_centre(context):
    # two sums above, two below, with the swing shrinking and then growing again
    offsets = ["0.4", "0.3", "-0.2", "-0.3", "0.1", "0.08", "-0.05", "-0.06", "0.2", "0.3", "-0.5", "-0.7"]
    P = [2 + context.real(o) for o in offsets]
    bracket = oscillation_bracket(P, context)
    assert (bracket.order_low, bracket.order_high) == (6, 7)
    assert bracket.low > 2 > bracket.high


def test_bracket_needs_four_sums(context):
    with pytest.raises(TooShort):
        oscillation_bracket([context.one] * 3, context)


def test_monotone_sums_bracket_is_last_pair(context):
    P = cumulative(["1", "0.5", "0.25", "0.125", "0.0625", "0.03125"], context)
    bracket = oscillation_bracket(P, context)
    assert (bracket.order_low, bracket.order_high) == (5, 6)


@pytest.mark.slow
def test_r_half_bracket():
    report = solve(ProblemSpec.from_text("r^0.5", mass_convention="2m1", context=PrecisionContext(60))).report
    bracket = report.bracket
    low, high = sorted([float(bracket.low), float(bracket.high)])
    assert low == pytest.approx(1.83287, abs=2e-4)
    assert high == pytest.approx(1.83361, abs=2e-4)
    assert abs(bracket.order_low - 13) <= 2


@pytest.mark.slow
def test_r5_diverges_quickly():
    report = solve(ProblemSpec.from_text("r^5", mass_convention="2m1", context=PrecisionContext(60))).report
    assert report.divergence_order is not None and report.divergence_order <= 9


def test_precision_audit_of_oscillator():
    spec = ProblemSpec.from_text("0.5*r^2", state=1, order=12, context=PrecisionContext(40))
    assert precision_audit(spec) >= 30


@pytest.mark.slow
def test_precision_audit_of_linear_potential():
    spec = ProblemSpec.from_text("2^3.5*r", context=PrecisionContext(100))
    assert precision_audit(spec) >= 40


def test_audit_through_solve(context):
    spec = ProblemSpec.from_text("-1/r", order=10, context=context)
    assert solve(spec, audit=True).report.audit >= 25


def test_oracle_hydrogen():
    assert fd_eigensolve(parse_potential("-1/r"), 3, 0, 0) == pytest.approx(-0.5, abs=2e-7)
    assert fd_eigensolve(parse_potential("-1/r"), 3, 1, 1) == pytest.approx(-1 / 18, abs=1e-6)


def test_oracle_oscillator_in_both_conventions():
    assert fd_eigensolve(parse_potential("0.5*r^2"), 3, 0, 2) == pytest.approx(5.5, abs=1e-5)
    assert fd_eigensolve(parse_potential("r^2"), 3, 0, 0, "2m1") == pytest.approx(3.0, abs=1e-5)


@pytest.mark.slow
def test_oracle_linear_and_double_well():
    assert fd_eigensolve(parse_potential("2^3.5*r"), 3, 0, 0) == pytest.approx(9.35243, abs=1e-4)
    assert fd_eigensolve(parse_potential("(r^2 - 16)^2/128"), 3, 0, 0) == pytest.approx(0.483148, abs=1e-5)


def test_oracle_boundaries():
    with pytest.raises(NoBoundState):
        fd_eigensolve(parse_potential("1/r^3"), 3, 0, 0)
    with pytest.raises(GridTooSmall):
        fd_eigensolve(parse_potential("0.0001*r^2"), 3, 0, 0, options={"r_max": 5.0, "points": 2000})


def test_oracle_inner_cutoff_bias_is_small():
    # an l = 0 state feels the inner wall linearly in r_min
    hydrogen = parse_potential("-1/r")
    near = fd_eigensolve(hydrogen, 3, 0, 0, options={"r_min": 1e-6})
    default = fd_eigensolve(hydrogen, 3, 0, 0)
    assert near - default > 5e-7
    assert abs(default + 0.5) < abs(near + 0.5)


def test_audit_does_not_drop_with_more_digits():
    agreeing = [precision_audit(ProblemSpec.from_text("-1/r", order=10, context=PrecisionContext(digits)))
                for digits in (40, 80)]
    assert agreeing[0] >= 30
    assert agreeing[1] >= agreeing[0]


@pytest.mark.slow
@pytest.mark.parametrize("a", ["0.8", "1.0", "1.5", "2.0"])
def test_oracle_recovers_constructed_ground_state(a):
    potential = construct_potential(a, 1, PrecisionContext(30), "2m1")
    assert fd_eigensolve(potential, 3, 0, 0, "2m1") == pytest.approx(1.0, abs=1e-4)
