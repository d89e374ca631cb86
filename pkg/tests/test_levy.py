import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import beta as B

from regcomp import levy
from regcomp.levy import (
    BetaStick,
    Drift,
    GammaHarmonic,
    Hook,
    StructuralLaw,
    TwoParameter,
    binomial_moment,
    check_completely_alternating,
    kill_deform,
    laplace_exponent,
    phi_from_moments,
    phi_iterated_differences,
    q32_from_moments,
    sliced_transform,
)

NAMED = [
    levy.ewens(F(1, 2)),
    levy.ewens(1),
    levy.ewens(2),
    TwoParameter(F(1, 2), 0),
    TwoParameter(F(1, 2), F(1, 2)),
    TwoParameter(F(3, 10), F(7, 10)),
    BetaStick(2, 3),
    Hook(1),
    GammaHarmonic(1),
]


def test_ewens_exponent_normalized():
    assert laplace_exponent(levy.ewens(1), 2, normalized=True) == F(4, 3)


def test_stable_exponent_at_half():
    assert laplace_exponent(TwoParameter(F(1, 2), 0), 0.5) == pytest.approx(math.pi / 2, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_hook_exponent(n):
    assert laplace_exponent(Hook(1), n) == n + 1
    assert laplace_exponent(Hook(F(1, 3)), n) == F(n, 3) + 1


def test_hook_binomial_moments():
    h = Hook(1)
    assert binomial_moment(h, 2, 1) == 2
    assert binomial_moment(h, 2, 2) == 1


@pytest.mark.parametrize("model", NAMED, ids=repr)
def test_moments_sum_to_exponent(model):
    for n in range(1, 9):
        total = sum(binomial_moment(model, n, m) for m in range(1, n + 1))
        assert total == pytest.approx(float(laplace_exponent(model, n)), rel=1e-12)


def test_two_param_moments_match_beta_integrals():
    a, t = 0.3, 0.7
    model = TwoParameter(F(3, 10), F(7, 10))
    for n in range(1, 7):
        for m in range(1, n + 1):
            want = math.comb(n, m) * (a * B(m - a, n - m + 1 + t) + t * B(m + 1 - a, n - m + t))
            assert float(binomial_moment(model, n, m)) == pytest.approx(want, rel=1e-10)


def test_beta_stick_matches_two_parameter_beta_law():
    # W ~ beta(1, theta) is Ewens(theta)
    for theta in (F(1, 2), 1, 3):
        b, e = BetaStick(1, theta), levy.ewens(theta)
        for n in range(1, 8):
            for m in range(1, n + 1):
                assert b.q(n, m) == e.q(n, m)


@pytest.mark.parametrize("model", NAMED, ids=repr)
def test_named_families_completely_alternating(model):
    ok, witness = check_completely_alternating(model.phi_sequence(10), tol=1e-12)
    assert ok, witness


def test_completely_alternating_examples():
    ok, _ = check_completely_alternating([0, 1, 3, 4])
    direct = [phi_iterated_differences([0, 1, 3, 4], n, m) for n in (1, 2, 3) for m in range(1, n + 1)]
    assert ok == all(v >= 0 for v in direct)
    assert check_completely_alternating([0, 1, 2.5, 3]) == (False, (2, 2, -0.5))


def test_iterated_differences_examples():
    phi = levy.ewens(1).phi_sequence(6)
    for n in range(1, 7):
        assert phi_iterated_differences(phi, n, 1) == n * (phi[n] - phi[n - 1])
    assert [phi_iterated_differences(phi, 3, m) / phi[3] for m in (1, 2, 3)] == [F(1, 3)] * 3
    linear = list(range(8))
    assert phi_iterated_differences(linear, 5, 1) == 5
    assert all(phi_iterated_differences(linear, 5, m) == 0 for m in range(2, 6))


def test_phi_from_moments_examples():
    e = levy.ewens(1)
    phi = phi_from_moments(StructuralLaw.from_model(e), 6)
    assert phi[2] == F(4, 3)
    assert phi == e.phi_sequence(6)
    assert phi_from_moments([1] * 7, 7) == [0] + [1] * 7
    with pytest.raises(ValueError):
        phi_from_moments([F(1, 2), F(1, 3)], 2)


def test_q32_identity_ewens():
    assert q32_from_moments(F(1, 2), F(1, 3)) == F(1, 3)


@pytest.mark.parametrize("model", NAMED, ids=repr)
def test_q32_identity_named(model):
    got = q32_from_moments(model.q(2, 2), model.q(3, 3))
    assert got == pytest.approx(float(model.q(3, 2)), rel=1e-12)


def test_sliced_stable_is_two_parameter():
    a = F(1, 2)
    for theta in (F(1, 2), 1, F(3, 2)):
        s, t = sliced_transform(TwoParameter(a, 0), theta), TwoParameter(a, theta)
        assert s.phi_sequence(12) == t.phi_sequence(12)


def test_sliced_ewens_composes():
    s = sliced_transform(levy.ewens(1), 2)
    assert s.phi_sequence(8) == levy.ewens(3).phi_sequence(8)


def test_slice_zero_is_identity():
    base = BetaStick(2, 3)
    assert sliced_transform(base, 0).phi_sequence(8) == base.phi_sequence(8)


def test_kill_examples():
    base = levy.ewens(1)
    assert kill_deform(base, 0).phi_sequence(6) == base.phi_sequence(6)
    # pure drift killed at rate 1 is the hook
    for d in (F(1, 2), 1, 2):
        k, h = kill_deform(Drift(d), 1), Hook(d)
        assert [[k.q(n, m) for m in range(1, n + 1)] for n in range(1, 7)] == \
               [[h.q(n, m) for m in range(1, n + 1)] for n in range(1, 7)]
    big = kill_deform(base, 10 ** 9)
    assert all(float(big.q(n, n)) > 1 - 1e-8 for n in range(1, 6))


def test_invalid_parameters():
    with pytest.raises(ValueError):
        TwoParameter(1, 0)
    with pytest.raises(ValueError):
        TwoParameter(F(1, 2), -1)
    with pytest.raises(ValueError):
        BetaStick(0, 1)
    with pytest.raises(ValueError):
        laplace_exponent(levy.ewens(1), 0)


def test_structural_law_two_param_is_beta():
    law = StructuralLaw.two_param(F(1, 2), F(1, 2))
    model = TwoParameter(F(1, 2), F(1, 2))
    for n in range(1, 9):
        assert law.p(n) == model.q(n, n)
    assert law.is_completely_monotone(8)


rationals = st.fractions(min_value=0, max_value=F(11, 12), max_denominator=12)


@settings(max_examples=40, deadline=None)
@given(rationals, st.fractions(min_value=0, max_value=4, max_denominator=12))
def test_two_param_round_trip_through_moments(alpha, theta):
    if alpha + theta == 0:
        theta = F(1)
    model = TwoParameter(alpha, theta)
    phi = phi_from_moments(StructuralLaw.from_model(model), 7)
    assert phi == model.phi_sequence(7)
    ok, _ = check_completely_alternating(phi)
    assert ok
