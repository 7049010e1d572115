import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentlab.gronwall import (
    GronwallError,
    GronwallProblem,
    build_partition,
    certify,
    fixed_point_by_bisection,
    implicit_root_bound,
    verify_bound,
    weight_integral,
)


def _problem(alphas=(1.0,), betas=(0.5,), C=1.0, H_times=(), H_values=(),
             tail_bound=0.0, F0_bound=1.0):
    return GronwallProblem(alphas=alphas, betas=betas, C=C, H_times=H_times,
                           H_values=H_values, tail_bound=tail_bound,
                           F0_bound=F0_bound)


def test_problem_validation():
    with pytest.raises(GronwallError):
        _problem(alphas=(-1.0,))
    with pytest.raises(GronwallError):
        _problem(betas=(1.0,))  # beta must be < 1
    with pytest.raises(GronwallError):
        _problem(C=0.0)
    with pytest.raises(GronwallError):
        _problem(alphas=(1.0, 2.0))  # length mismatch with betas
    with pytest.raises(GronwallError):
        _problem(H_times=(1.0, 0.5), H_values=(1.0, 1.0))  # not increasing


def test_weight_integral_closed_forms():
    # alpha = 0: plain length
    assert weight_integral(0.0, 2.0, 5.0) == pytest.approx(3.0, rel=1e-12)
    # alpha = 2: int (1 + tau^2) dtau
    expected = 3.0 + (125.0 - 8.0) / 3.0
    assert weight_integral(2.0, 2.0, 5.0) == pytest.approx(expected, rel=1e-10)


def test_implicit_root_bound_single_term():
    # C' = 2, R = 3, beta = 1/2: (2 + 2*3)^(1/(1-1/2)) = 8^2 = 64
    assert implicit_root_bound(2.0, [3.0], [0.5]) == pytest.approx(64.0)


def test_implicit_root_bound_dominates_fixed_point():
    rng = np.random.default_rng(99)
    for _ in range(300):
        m = int(rng.integers(1, 4))
        c = float(rng.uniform(0.05, 20.0))
        r = rng.uniform(0.05, 20.0, m)
        b = rng.uniform(0.0, 0.97, m)
        root = fixed_point_by_bisection(c, r, b)
        assert root <= implicit_root_bound(c, r, b) * (1 + 1e-12)


def test_partition_cells_small():
    problem = _problem(alphas=(1.0,), betas=(0.5,), C=1.0,
                       H_times=(0.0, 5.0, 10.0), H_values=(1.0, 1.0, 1.0),
                       tail_bound=0.0)
    pts = build_partition(problem)
    assert pts[0] >= 1.0  # t0 >= 1
    assert all(b > a for a, b in zip(pts[1:], pts))  # strictly decreasing
    assert pts[-1] == 0.0
    for top, bottom in zip(pts, pts[1:]):
        assert problem.H_integral(bottom, top) < 0.5
        assert all(
            weight_integral(a, bottom, top) < 1.0 for a in problem.alphas
        )


def test_certificate_beta_zero_exponent():
    for alpha in (0.0, 1.0, 2.5):
        cert = certify(_problem(alphas=(alpha,), betas=(0.0,)))
        assert cert.exponents == (alpha + 1.0,)


def test_certificate_bounds_linear_saturator():
    # F' = 1, F(0) = 1 solves the beta = 0, alpha = 0 equality case
    cert = certify(_problem(alphas=(0.0,), betas=(0.0,)))
    for t in (0.0, 1.0, 10.0, 100.0):
        assert cert.bound(t) >= 1.0 + t


def test_certificate_bounds_sqrt_saturator():
    # F' = sqrt(F), F(0) = 1 gives F(t) = (1 + t/2)^2
    cert = certify(_problem(alphas=(0.0,), betas=(0.5,)))
    for t in np.linspace(0.0, 100.0, 101):
        assert cert.bound(t) >= (1.0 + t / 2.0) ** 2


def test_certificate_monotone_in_C():
    weak = certify(_problem(C=1.0))
    strong = certify(_problem(C=5.0))
    for t in (0.0, 10.0, 50.0):
        assert strong.log_bound(t) >= weak.log_bound(t) - 1e-9


def test_large_H_gives_many_cells_and_log_form():
    ts = tuple(np.linspace(0.0, 20.0, 201))
    problem = _problem(H_times=ts, H_values=tuple(0.5 for _ in ts))
    cert = certify(problem)
    # int H = 10 forces at least 20 cells of integral < 1/2
    assert cert.trace["cells"] >= 20
    assert math.isfinite(cert.log_bound(50.0))


def test_verify_bound_accepts_saturator():
    problem = _problem(alphas=(0.0,), betas=(0.5,))
    cert = certify(problem)
    samples = [(t, (1.0 + t / 2.0) ** 2) for t in np.linspace(0.0, 50.0, 500)]
    result = verify_bound(samples, problem, cert)
    assert result.hypothesis_ok
    assert result.bound_ok
    assert result.checked == 500


def test_verify_bound_flags_hypothesis_violation():
    problem = _problem(alphas=(0.0,), betas=(0.0,), C=1.0)
    cert = certify(problem)
    # e^(5t) grows far faster than F' <= C(1 + F) allows
    samples = [(t, math.exp(5.0 * t)) for t in np.linspace(0.0, 4.0, 200)]
    result = verify_bound(samples, problem, cert)
    assert not result.hypothesis_ok
    assert result.first_hypothesis_violation is not None


@settings(max_examples=50, deadline=None)
@given(
    c=st.floats(min_value=0.1, max_value=10.0),
    r=st.floats(min_value=0.1, max_value=10.0),
    beta=st.floats(min_value=0.0, max_value=0.9),
)
def test_root_bound_dominance_property(c, r, beta):
    root = fixed_point_by_bisection(c, [r], [beta])
    assert root <= implicit_root_bound(c, [r], [beta]) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(
    alpha=st.floats(min_value=0.0, max_value=3.0),
    beta=st.floats(min_value=0.0, max_value=0.9),
    t=st.floats(min_value=0.0, max_value=200.0),
)
def test_certificate_bound_dominates_F0(alpha, beta, t):
    problem = _problem(alphas=(alpha,), betas=(beta,), F0_bound=2.0)
    cert = certify(problem)
    # any valid bound must sit above the initial value
    assert cert.log_bound(t) >= math.log(2.0) - 1e-9
