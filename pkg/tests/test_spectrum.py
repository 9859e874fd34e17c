import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetpca.errors import DomainError
from hetpca.spectrum import (
    TOL_RESIDUAL,
    NoiseProfile,
    SpectrumParams,
    eval_A,
    eval_B,
    eval_B_prime,
    solve_alpha,
    solve_beta,
)

from oracles import scan_alpha, scan_beta

# frozen from the grid-scan oracle in oracles.py (step 1e-6, then bisection in the last cell)
ALPHA_TWO_LEVEL = 8.881721640370625  # c=10, v={0.1, 3.25}, p={0.7, 0.3}
BETA_CLEAN_MINORITY = 11.000901565316937  # c=10, theta^2=1, v={1.01, 0.01}, p={0.99, 0.01}
BETA_TWO_LEVEL = 11.277241301800675  # c=10, theta^2=1, v={0.1, 3.25}, p={0.7, 0.3}

CLEAN_MINORITY = NoiseProfile([1.01, 0.01], [0.99, 0.01])
TWO_LEVEL = NoiseProfile([0.1, 3.25], [0.7, 0.3])


@st.composite
def profiles(draw, max_levels=4, min_var=0.0):
    L = draw(st.integers(1, max_levels))
    v = draw(st.lists(st.floats(min_var, 10.0, allow_subnormal=False), min_size=L, max_size=L))
    w = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=L, max_size=L)))
    p = w / w.sum()
    p[-1] = 1.0 - p[:-1].sum()
    return NoiseProfile(v, p)


# --- NoiseProfile -----------------------------------------------------------

def test_profile_validation():
    with pytest.raises(DomainError):
        NoiseProfile([1.0, 2.0], [0.5])
    with pytest.raises(DomainError):
        NoiseProfile([1.0], [0.9])
    with pytest.raises(DomainError):
        NoiseProfile([-1.0], [1.0])
    with pytest.raises(DomainError):
        NoiseProfile([1.0, 2.0], [1.0, 0.0])
    with pytest.raises(DomainError):
        NoiseProfile([], [])
    with pytest.raises(DomainError):
        NoiseProfile([math.inf], [1.0])


def test_profile_averages():
    assert TWO_LEVEL.mean_variance == pytest.approx(0.7 * 0.1 + 0.3 * 3.25, abs=1e-15)
    assert TWO_LEVEL.mean_inverse_variance == pytest.approx(0.7 / 0.1 + 0.3 / 3.25, abs=1e-13)
    with pytest.raises(DomainError):
        NoiseProfile([0.0, 1.0], [0.5, 0.5]).mean_inverse_variance


def test_merged_combines_equal_variances():
    m = NoiseProfile([1.0, 2.0, 1.0], [0.2, 0.5, 0.3]).merged()
    assert m.variances == (1.0, 2.0)
    assert m.proportions == pytest.approx((0.5, 0.5))


# --- evaluation -------------------------------------------------------------

def test_eval_B_prime_example():
    params = SpectrumParams(10.0, 1.0, TWO_LEVEL)
    expected = 10 * (0.7 / 3.9**2 + 0.3 / 0.75**2)
    assert eval_B_prime(4.0, params) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(5.793556870479948, rel=1e-15)


def test_eval_at_or_below_pole_is_domain_error():
    params = SpectrumParams(10.0, 1.0, TWO_LEVEL)
    for f in (lambda x: eval_A(x, 10.0, TWO_LEVEL), lambda x: eval_B(x, params), lambda x: eval_B_prime(x, params)):
        with pytest.raises(DomainError):
            f(3.25)
        with pytest.raises(DomainError):
            f(1.0)


def test_params_validation():
    with pytest.raises(DomainError):
        SpectrumParams(0.0, 1.0, TWO_LEVEL)
    with pytest.raises(DomainError):
        SpectrumParams(1.0, -1.0, TWO_LEVEL)
    with pytest.raises(DomainError):
        SpectrumParams(math.nan, 1.0, TWO_LEVEL)


# --- roots ------------------------------------------------------------------

def test_alpha_homoscedastic_closed_form():
    assert solve_alpha(10.0, NoiseProfile([1.0])) == pytest.approx(1 + math.sqrt(10), rel=1e-15)
    assert solve_alpha(0.1, NoiseProfile([2.0])) == pytest.approx(2 * (1 + math.sqrt(0.1)), rel=1e-15)


def test_alpha_noiseless_is_zero():
    assert solve_alpha(3.0, NoiseProfile([0.0])) == 0.0


def test_alpha_frozen_oracle():
    assert solve_alpha(10.0, TWO_LEVEL) == pytest.approx(ALPHA_TWO_LEVEL, rel=1e-10)


def test_beta_homoscedastic_closed_form():
    assert solve_beta(SpectrumParams(10.0, 1.0, NoiseProfile([1.0]))) == 11.0
    assert solve_beta(SpectrumParams(0.1, 1.0, NoiseProfile([0.01]))) == pytest.approx(0.11, rel=1e-15)


@pytest.mark.parametrize("noise, expected", [(CLEAN_MINORITY, BETA_CLEAN_MINORITY), (TWO_LEVEL, BETA_TWO_LEVEL)])
def test_beta_frozen_oracle(noise, expected):
    assert solve_beta(SpectrumParams(10.0, 1.0, noise)) == pytest.approx(expected, rel=1e-10)


def test_duplicate_levels_match_merged():
    split = NoiseProfile([1.01, 0.01, 1.01], [0.5, 0.01, 0.49])
    assert solve_beta(SpectrumParams(10.0, 1.0, split)) == pytest.approx(BETA_CLEAN_MINORITY, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(c=st.floats(0.05, 50.0), t2=st.floats(0.05, 10.0), noise=profiles(min_var=0.01))
def test_roots_match_scan_oracle(c, t2, noise):
    v, p = noise.variances, noise.proportions
    step = 1e-5 * max(v) * (1 + c)
    a = solve_alpha(c, noise)
    b = solve_beta(SpectrumParams(c, t2, noise))
    assert a == pytest.approx(scan_alpha(c, v, p, step), rel=1e-7, abs=1e-9)
    assert b == pytest.approx(scan_beta(c, t2, v, p, step), rel=1e-7, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(c=st.floats(1e-3, 1e3), t2=st.floats(1e-3, 1e2), noise=profiles())
def test_roots_are_bracketed_and_have_small_residual(c, t2, noise):
    m = noise.max_variance
    params = SpectrumParams(c, t2, noise)
    b = solve_beta(params)
    assert m < b <= m + c * t2
    assert abs(eval_B(b, params)) <= TOL_RESIDUAL or np.nextafter(b, -np.inf) <= m
    if not noise.is_noiseless:
        a = solve_alpha(c, noise)
        assert m < a <= m * (1 + math.sqrt(c)) * (1 + 1e-15)
        assert abs(eval_A(a, c, noise)) <= TOL_RESIDUAL


@settings(max_examples=100, deadline=None)
@given(c=st.floats(0.1, 100.0), t2=st.floats(0.1, 10.0), noise=profiles(min_var=0.01))
def test_secular_functions_increase_past_the_pole(c, t2, noise):
    params = SpectrumParams(c, t2, noise)
    m = noise.max_variance
    xs = m + np.geomspace(1e-3, 1e3, 40) * max(m, 1.0)
    a_vals = [eval_A(x, c, noise) for x in xs]
    b_vals = [eval_B(x, params) for x in xs]
    assert np.all(np.diff(a_vals) >= -1e-12)
    assert np.all(np.diff(b_vals) >= -1e-12)
