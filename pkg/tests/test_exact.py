import io
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from strip6v.exact import (ReducibleChainError, asep_generator, colored_projection_error,
                           colored_transition_matrix, duality_error, dump_json, move_kernel,
                           scaling_limit_check, stationary_exact, stationary_residual, transition_matrix,
                           verify_tilting, write_distribution_csv)
from strip6v.lattice import all_paths, build_path, decompose_translation, parse_path
from strip6v.params import ParameterError, StripParams

from .support import RUNNING, paths, random_theorem_params, strip_params, theorem_params

RATES = (0.8, 0.6, 0.4, 0.64, 0.4, 1.0)


@settings(max_examples=30, deadline=None)
@given(paths(max_n=4), strip_params())
def test_kernel_is_stochastic(path, p):
    K = transition_matrix(path, p)
    assert (K >= 0).all()
    assert np.abs(K.sum(axis=1) - 1).max() < 1e-12


@pytest.mark.parametrize("N", range(1, 5))
def test_composition_equals_direct(N):
    for path in all_paths(N):
        K = transition_matrix(path, RUNNING)
        assert np.abs(K - transition_matrix(path, RUNNING, method="direct")).max() < 1e-12
        prod = np.eye(2 ** N)
        for mv in decompose_translation(path):
            prod = prod @ move_kernel(N, mv, RUNNING)
        assert np.abs(K - prod).max() < 1e-12


def test_direct_kernel_for_general_target():
    path = parse_path("URUR")
    target = path.translate(2)
    K1 = transition_matrix(path, RUNNING, target=target)
    K2 = transition_matrix(path, RUNNING, target=target, method="direct")
    assert np.abs(K1 - K2).max() < 1e-12


def test_single_site_kernel_entries():
    a, b, c, d = RUNNING.a, RUNNING.b, RUNNING.c, RUNNING.d
    K = transition_matrix(build_path(1), RUNNING)
    assert K[0, 1] == pytest.approx(a * (1 - b) + (1 - a) * d, abs=1e-15)
    assert K[1, 1] == pytest.approx((1 - c) * (1 - b) + c * d, abs=1e-15)


def test_cap_enforced():
    with pytest.raises(ValueError, match="cap"):
        transition_matrix(build_path(5), RUNNING, cap=4)


def test_two_state_stationary():
    p, s = 0.3, 0.2
    pi = stationary_exact(np.array([[1 - p, p], [s, 1 - s]]))
    assert np.allclose(pi, [s / (p + s), p / (p + s)], atol=1e-15)


def test_one_site_asep():
    pi = stationary_exact(asep_generator(1, RATES))
    assert pi[1] == pytest.approx(1.44 / 2.44, abs=1e-12)


def test_generator_entries():
    al, be, ga, de, L, R = RATES
    Q = asep_generator(2, RATES)
    # index = tau_1 + 2 tau_2
    assert Q[0, 1] == al and Q[0, 2] == de
    assert Q[1, 2] == R and Q[2, 1] == L
    assert np.abs(Q.sum(axis=1)).max() < 1e-15


def test_generator_rejects_bad_rates():
    with pytest.raises(ParameterError):
        asep_generator(2, (0.0, 0.6, 0.4, 0.64, 0.4, 1.0))


def test_reflecting_chain_is_reducible():
    K = transition_matrix(build_path(2), StripParams(0, 0, 0, 0, 0.2, 0.5))
    with pytest.raises(ReducibleChainError) as exc:
        stationary_exact(K)
    assert exc.value.n_classes == 3


def test_stationary_residual_small():
    K = transition_matrix(build_path(6), RUNNING)
    assert stationary_residual(K, stationary_exact(K)) < 1e-12


def test_exact_rational_stationary():
    p = StripParams(*(Fraction(x) for x in ("1/2", "3/10", "2/5", "1/5", "1/5", "1/2")))
    mu = stationary_exact(transition_matrix(build_path(1), p))
    assert mu[1] == Fraction(9, 19)


def test_running_example_tilting():
    rep = verify_tilting(RUNNING, 1)
    assert rep["r"] == pytest.approx(0.625)
    assert rep["mu"][1] == pytest.approx(0.9 / 1.9, abs=1e-12)
    assert rep["max_abs_error"] < 1e-12


@settings(max_examples=10, deadline=None)
@given(theorem_params())
def test_tilting_random(p):
    assert verify_tilting(p, 3)["max_abs_error"] < 1e-10


def test_tilting_rejects_singular():
    # ab = cd is the l = 0 singular point
    with pytest.raises(ParameterError, match="singular"):
        verify_tilting(StripParams(0.4, 0.3, 0.4, 0.3, 0.2, 0.5), 2)


def test_translation_invariance_of_stationary():
    path = parse_path("RUU")
    mu = stationary_exact(transition_matrix(path, RUNNING))
    K2 = transition_matrix(path.translate(1), RUNNING)
    assert np.abs(mu @ K2 - mu).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(paths(max_n=3), strip_params())
def test_particle_hole_duality(path, p):
    assert duality_error(path, p) < 1e-12


def test_scaling_limit_first_order():
    rep = scaling_limit_check(RATES, 2, [1e-2, 1e-3, 1e-4])
    assert rep["errors"][0] > rep["errors"][1] > rep["errors"][2]
    assert all(8 <= x <= 12 for x in rep["ratios"])


def test_scaling_limit_infeasible():
    with pytest.raises(ParameterError, match="infeasible"):
        scaling_limit_check(RATES, 2, [0.5, 2.0])


def test_colored_kernel_rows_sum_to_one():
    p2 = StripParams(0.55, 0.2, 0.3, 0.25, 0.2, 0.5)
    K3 = colored_transition_matrix(parse_path("URU"), RUNNING, p2)
    assert np.abs(K3.sum(axis=1) - 1).max() < 1e-12
    assert (K3 >= -1e-15).all()


def test_colored_projection():
    p2 = StripParams(0.55, 0.2, 0.3, 0.25, 0.2, 0.5)
    for N in (1, 2, 3):
        for path in all_paths(N):
            assert colored_projection_error(path, RUNNING, p2) < 1e-12


def test_distribution_csv_and_json():
    buf = io.StringIO()
    write_distribution_csv(buf, [0.25, 0.75], 1)
    assert buf.getvalue().splitlines() == ["state,probability", "0,0.25", "1,0.75"]
    buf = io.StringIO()
    dump_json({"x": 0.1, "n": 3, "v": [1.0 / 3]}, buf)
    text = buf.getvalue()
    assert "0.10000000000000001" in text and "0.33333333333333331" in text
    assert json.loads(text)["n"] == 3


def test_random_params_helper_is_theorem_mode():
    rng = np.random.default_rng(0)
    for _ in range(10):
        random_theorem_params(rng).check_theorem_mode()
