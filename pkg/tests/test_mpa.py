from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strip6v.exact import move_kernel, stationary_exact, transition_matrix
from strip6v.lattice import all_paths, apply_local_move, applicable_moves, build_path, parse_path
from strip6v.mpa import (DEHPTransfer, NormalOrdering, SingularCaseError, asep_measure, bernoulli_special,
                         compatibility_residuals, dehp_value, mean_density_mpa, mpa_measure, parity_bernoulli,
                         partition_mpa, product_measure, qvolume_measure)
from strip6v.params import ParameterError, StripParams, derive_params, kappa, rates_from_boundary

from .support import RUNNING, paths, theorem_params

ASEP = (0.4, 0.8, 0.6, 0.4, 0.64)
WORDS = st.lists(st.sampled_from("DE"), max_size=8)


def test_running_example_derived_values():
    dp = derive_params(RUNNING)
    assert (dp.q, dp.r) == pytest.approx((0.4, 0.625))
    assert (dp.alpha, dp.beta, dp.gamma, dp.delta) == pytest.approx((0.8, 0.6, 0.4, 0.64))
    assert dp.A == pytest.approx(1.6957, abs=1e-4)
    assert dp.C == pytest.approx(0.84307, abs=1e-5)


@given(st.floats(0.05, 2), st.floats(0, 2), st.floats(0, 0.9))
def test_kappa_roots(u, v, q):
    for sign in (1, -1):
        k = kappa(u, v, q, sign)
        assert u * k * k - (1 - q - u + v) * k - v == pytest.approx(0, abs=1e-9)


def test_kappa_zero_v():
    q, u = 0.3, 0.4
    assert kappa(u, 0, q, 1) == pytest.approx((1 - q - u) / u)
    assert kappa(u, 0, q, -1) == 0


def test_boundary_roundtrip():
    dp = derive_params(RUNNING)
    back = rates_from_boundary(dp.A, dp.B, dp.C, dp.D, dp.q)
    assert back == pytest.approx((dp.alpha, dp.beta, dp.gamma, dp.delta), rel=1e-12)


def test_empty_word_and_one_site():
    assert dehp_value([], ASEP) == 1
    d, e = dehp_value(["D"], ASEP), dehp_value(["E"], ASEP)
    assert d / (d + e) == pytest.approx(1.44 / 2.44, abs=1e-6)


def test_exact_mode_returns_fractions():
    rates = tuple(Fraction(x) for x in ("2/5", "4/5", "3/5", "2/5", "16/25"))
    v = dehp_value(list("DED"), rates, mode="exact")
    assert isinstance(v, Fraction)
    assert v == dehp_value(list("DED"), rates, method="transfer", mode="exact")


@settings(max_examples=40, deadline=None)
@given(WORDS)
def test_normal_ordering_agrees_with_transfer(word):
    a = dehp_value(word, ASEP, method="normal", mode="mpmath")
    b = dehp_value(word, ASEP, method="transfer", mode="mpmath")
    assert abs(a - b) <= 1e-30 * max(1, abs(b))
    assert b > 0


def test_relation_de_qed():
    T = DEHPTransfer(*ASEP)
    q = ASEP[0]
    for pre in ([], ["D"], ["E", "D"]):
        lhs = T.evaluate(pre + ["D", "E"]) - q * T.evaluate(pre + ["E", "D"])
        rhs = T.evaluate(pre + ["D"]) + T.evaluate(pre + ["E"])
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_boundary_relations():
    T = DEHPTransfer(*ASEP)
    q, al, be, ga, de = ASEP
    for suf in ([], ["D"], ["E", "E"]):
        assert al * T.evaluate(["E"] + suf) - ga * T.evaluate(["D"] + suf) == pytest.approx(T.evaluate(suf))
        assert be * T.evaluate(suf + ["D"]) - de * T.evaluate(suf + ["E"]) == pytest.approx(T.evaluate(suf))


def test_singular_case_rejected():
    # alpha beta = gamma delta
    with pytest.raises(SingularCaseError):
        DEHPTransfer(0.4, 0.5, 0.4, 0.5, 0.4)
    with pytest.raises(SingularCaseError):
        NormalOrdering(0.5, 0.5, 0.2, 0.4, 0.5)


def test_equal_bulk_weights_rejected():
    with pytest.raises(ParameterError):
        mpa_measure(build_path(2), StripParams(0.5, 0.3, 0.4, 0.2, 0.5, 0.5))


@pytest.mark.parametrize("labels", ["UU", "RU", "UR", "URU", "RRUU"])
def test_ansatz_is_stationary(labels):
    path = parse_path(labels)
    mu = mpa_measure(path, RUNNING)
    pi = stationary_exact(transition_matrix(path, RUNNING))
    assert np.abs(mu - pi).max() < 1e-12


@settings(max_examples=15, deadline=None)
@given(paths(max_n=4), theorem_params())
def test_ansatz_pushforward_under_local_moves(path, p):
    mu = mpa_measure(path, p)
    for mv in applicable_moves(path):
        nxt = mpa_measure(apply_local_move(path, mv), p)
        assert np.abs(mu @ move_kernel(path.N, mv, p) - nxt).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(theorem_params(), st.lists(st.sampled_from(["Du", "Eu", "Dr", "Er"]), max_size=3),
       st.lists(st.sampled_from(["Du", "Eu", "Dr", "Er"]), max_size=3))
def test_compatibility_relations(p, prefix, suffix):
    res = compatibility_residuals(p, prefix, suffix, method="transfer")
    assert len(res) == 8
    scale = max(1.0, abs(dehp_value(prefix + suffix, p, method="transfer")))
    for v in res.values():
        assert abs(v) < 1e-9 * scale


def test_exact_measure_is_rational():
    p = StripParams(*(Fraction(x) for x in ("1/2", "3/10", "2/5", "1/5", "1/5", "1/2")))
    path = parse_path("UR")
    mu = mpa_measure(path, p, mode="exact")
    assert sum(mu) == 1
    pi = stationary_exact(transition_matrix(path, p))
    assert list(mu) == list(pi)


def test_asep_measure_matches_generator():
    from strip6v.exact import asep_generator
    pi = stationary_exact(asep_generator(3, ASEP[1:] + (ASEP[0], 1)))
    assert np.abs(asep_measure(3, ASEP) - pi).max() < 1e-10


def test_partition_and_density():
    path = build_path(4)
    pi = stationary_exact(transition_matrix(path, RUNNING))
    occ = np.array([bin(i).count("1") for i in range(16)])
    assert mean_density_mpa(4, RUNNING) == pytest.approx(pi @ occ / 4, abs=1e-12)
    assert mean_density_mpa(4, RUNNING, mode="float") == pytest.approx(pi @ occ / 4, abs=1e-12)
    logz, _ = partition_mpa(4, 1.0, RUNNING, derivative=True)
    assert np.exp(logz) == pytest.approx(partition_mpa(4, 1.0, RUNNING), rel=1e-12)


def test_bernoulli_special_values():
    a, b, c, d = RUNNING.a, RUNNING.b, RUNNING.c, RUNNING.d
    theta1, p_up, p_right = bernoulli_special(a, b, c, d, 0.5)
    assert theta1 == pytest.approx(0.328165, abs=1e-6)
    assert p_up == pytest.approx(0.45 / 0.95)
    assert p_right == pytest.approx(0.52 / 0.95)


@pytest.mark.parametrize("labels", ["UU", "RU", "URU", "RURU"])
def test_bernoulli_special_is_stationary(labels):
    a, b, c, d = 0.5, 0.3, 0.4, 0.2
    theta1, p_up, p_right = bernoulli_special(a, b, c, d, 0.5)
    p = StripParams(a, b, c, d, theta1, 0.5)
    path = parse_path(labels)
    mu = product_measure(path, p_up, p_right)
    assert np.abs(mu @ transition_matrix(path, p) - mu).max() < 1e-12


def test_bernoulli_special_no_solution():
    with pytest.raises(ParameterError):
        bernoulli_special(0.9, 0.05, 0.05, 0.05, 0.1)


def test_parity_measures():
    p_up, p_right, even, odd = parity_bernoulli(0.2, 0.5, 3)
    assert p_up == pytest.approx(0.4415184401, abs=1e-9)
    assert p_up + p_right == pytest.approx(1)
    K = transition_matrix(build_path(3), StripParams(1, 1, 1, 1, 0.2, 0.5))
    par = np.array([bin(i).count("1") % 2 for i in range(8)])
    # the kernel preserves parity
    assert not K[np.ix_(par == 0, par == 1)].any()
    assert not K[np.ix_(par == 1, par == 0)].any()
    assert np.abs(even @ K - even).max() < 1e-12
    assert np.abs(odd @ K - odd).max() < 1e-12


def test_parity_on_mixed_path():
    path = parse_path("RUR")
    _, _, even, odd = parity_bernoulli(0.3, 0.6, 3, path)
    K = transition_matrix(path, StripParams(1, 1, 1, 1, 0.3, 0.6))
    assert np.abs(even @ K - even).max() < 1e-12
    assert np.abs(odd @ K - odd).max() < 1e-12


def test_qvolume_values():
    q = 0.4
    mu = qvolume_measure(2, 1, q)
    # states 01 (site 1) and 10 (site 2): weights q^-1 and q^-2
    assert mu[1] == pytest.approx(q / (1 + q))
    assert qvolume_measure(3, 0, q)[0] == 1
    assert qvolume_measure(3, 3, q)[7] == 1
    assert qvolume_measure(2, 1, Fraction(2, 5))[1] == Fraction(2, 7)
    with pytest.raises(ParameterError):
        qvolume_measure(2, 3, q)


@pytest.mark.parametrize("k", range(4))
def test_qvolume_is_stationary_for_reflecting_chain(k):
    p = StripParams(0, 0, 0, 0, 0.2, 0.5)
    mu = qvolume_measure(3, k, p.theta1 / p.theta2)
    assert np.abs(mu @ transition_matrix(build_path(3), p) - mu).max() < 1e-12


def test_mpa_matches_stationary_all_small_paths():
    for path in all_paths(3):
        mu = mpa_measure(path, RUNNING)
        pi = stationary_exact(transition_matrix(path, RUNNING))
        assert np.abs(mu - pi).max() < 1e-12
