"""Constructive bound certificates for the nonlinear Gronwall inequality

    |F'(t)| <= C * sum_i <t>^(alpha_i) F(t)^(beta_i) + H(t) F(t)

with alpha_i > 0, beta_i in [0, 1), C > 0 and integrable H.  The certifier
produces an explicit constant K such that

    F(t) <= max_i (K + K m <t>^(alpha_i + 1))^(1 / (1 - beta_i))

by the same constant chain as the underlying argument: a time partition on
which both int H < 1/2 and int <tau>^alpha < 1 per cell, per-cell implicit
fixed-point bounds, a backward recursion to time zero, and one final
fixed-point absorption of the tail inequality.  The recursion is carried in
log space since the constants grow doubly exponentially in the cell count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate

#: per-cell integral targets; strictly below the 1/2 and 1 thresholds
H_CELL_TARGET = 0.45
WEIGHT_CELL_TARGET = 0.9
#: largest K representable as a float; beyond this only log10 is reported
LOG_K_OVERFLOW = 300.0 * math.log(10.0)


class GronwallError(ValueError):
    """Invalid certificate problem."""


@dataclass(frozen=True)
class GronwallProblem:
    """Data of the differential inequality plus sampled H and its tail.

    ``tail_bound`` must dominate the integral of H beyond the last sample;
    numeric data cannot certify integrability, so the caller owns that claim.
    ``F0_bound`` dominates F(0).
    """

    alphas: tuple
    betas: tuple
    C: float
    H_times: tuple
    H_values: tuple
    tail_bound: float
    F0_bound: float

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        betas = tuple(float(b) for b in self.betas)
        if not alphas or len(alphas) != len(betas):
            raise GronwallError("alphas and betas must be non-empty, same length")
        # alpha = 0 is admitted: <t>^0 = 1 degenerates gracefully and the
        # linear-growth test cases rely on it
        if any(a < 0 for a in alphas):
            raise GronwallError("all alpha_i must be >= 0")
        if any(not (0 <= b < 1) for b in betas):
            raise GronwallError("all beta_i must lie in [0, 1)")
        if self.C <= 0:
            raise GronwallError("C must be > 0")
        times = tuple(float(t) for t in self.H_times)
        values = tuple(float(v) for v in self.H_values)
        if len(times) != len(values):
            raise GronwallError("H_times and H_values lengths differ")
        if list(times) != sorted(times):
            raise GronwallError("H_times must be increasing")
        if any(v < 0 for v in values):
            raise GronwallError("H samples must be non-negative")
        if not (self.tail_bound >= 0) or not math.isfinite(self.tail_bound):
            raise GronwallError("tail_bound must be finite and non-negative")
        if self.F0_bound < 0:
            raise GronwallError("F0_bound must be non-negative")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "H_times", times)
        object.__setattr__(self, "H_values", values)

    @property
    def m(self) -> int:
        return len(self.alphas)

    @property
    def horizon(self) -> float:
        return self.H_times[-1] if self.H_times else 0.0

    def H_at(self, t) -> np.ndarray:
        """Piecewise-linear H from the samples; zero outside their range."""
        t = np.asarray(t, dtype=float)
        if not self.H_times:
            return np.zeros_like(t)
        return np.interp(t, self.H_times, self.H_values, left=0.0, right=0.0)

    def H_integral(self, a: float, b: float) -> float:
        """Trapezoid integral of the sampled H over [a, b] (samples only)."""
        if b <= a or not self.H_times:
            return 0.0
        lo, hi = max(a, self.H_times[0]), min(b, self.horizon)
        if hi <= lo:
            return 0.0
        inner = [t for t in self.H_times if lo < t < hi]
        pts = np.array([lo, *inner, hi])
        return float(np.trapezoid(self.H_at(pts), pts))


def weight_integral(alpha: float, a: float, b: float) -> float:
    """int_a^b (1 + tau^2)^(alpha/2) dtau by adaptive quadrature."""
    if b <= a:
        return 0.0
    val, _ = scipy.integrate.quad(lambda t: (1.0 + t * t) ** (alpha / 2.0), a, b)
    return float(val)


def implicit_root_bound(C_prime: float, R, betas) -> float:
    """Explicit dominator of the implicit inequality G <= C' + C' sum R_i G^b_i.

    Returns z0 = max_i (max(1, C') + max(1, C') m R_i)^(1/(1-beta_i)); any
    non-negative G satisfying the inequality satisfies G <= z0.
    """
    R = [float(r) for r in np.atleast_1d(R)]
    betas = [float(b) for b in np.atleast_1d(betas)]
    if C_prime <= 0:
        raise GronwallError("C_prime must be > 0")
    if len(R) != len(betas) or not R:
        raise GronwallError("R and betas must be non-empty, same length")
    if any(r <= 0 for r in R) or any(not (0 <= b < 1) for b in betas):
        raise GronwallError("need R_i > 0 and beta_i in [0, 1)")
    m = len(R)
    c = max(1.0, C_prime)
    return max((c + c * m * r) ** (1.0 / (1.0 - b)) for r, b in zip(R, betas))


def build_partition(problem: GronwallProblem) -> list:
    """Descending partition t_0 > t_1 > ... > t_k = 0 from the proof recipe.

    t_0 is chosen (at least 1) so that the remaining integral of H past it,
    including the user tail bound, stays under 1/2; below t_0 every cell
    keeps int H < 1/2 and int <tau>^(alpha_i) < 1 for every branch.
    """
    if problem.tail_bound >= H_CELL_TARGET:
        raise GronwallError(
            f"tail_bound {problem.tail_bound} leaves no room under the 1/2 "
            "rule; H is not certified integrable"
        )
    horizon = problem.horizon

    def tail_from(t):
        return problem.tail_bound + problem.H_integral(t, horizon)

    t0 = 1.0
    if tail_from(t0) >= H_CELL_TARGET:
        lo, hi = t0, horizon
        if tail_from(hi) >= H_CELL_TARGET:
            raise GronwallError("H integral past the samples exceeds the 1/2 rule")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if tail_from(mid) < H_CELL_TARGET:
                hi = mid
            else:
                lo = mid
        t0 = hi

    partition = [t0]
    top = t0
    while top > 0.0:
        lo, hi = 0.0, top  # candidate lower endpoints

        def cell_ok(b):
            if problem.H_integral(b, top) >= H_CELL_TARGET:
                return False
            return all(
                weight_integral(a, b, top) < WEIGHT_CELL_TARGET
                for a in problem.alphas
            )

        if cell_ok(0.0):
            partition.append(0.0)
            break
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if cell_ok(mid):
                hi = mid
            else:
                lo = mid
        if hi >= top:  # pragma: no cover - constraints always allow progress
            raise GronwallError("partition construction failed to advance")
        partition.append(hi)
        top = hi
    return partition


@dataclass(frozen=True)
class BoundCertificate:
    """Explicit constant K with the per-branch exponents (a_i+1)/(1-b_i).

    ``log_K`` is always valid; ``K`` is +inf when it exceeds float range,
    in which case only the log form is meaningful.
    """

    K: float
    log_K: float
    alphas: tuple
    betas: tuple
    m: int
    partition: tuple
    trace: dict

    @property
    def exponents(self) -> tuple:
        return tuple((a + 1.0) / (1.0 - b) for a, b in zip(self.alphas, self.betas))

    def log_bound(self, t: float) -> float:
        """log of B(t) = max_i (K + K m <t>^(alpha_i+1))^(1/(1-beta_i))."""
        bracket = math.sqrt(1.0 + t * t)
        best = -math.inf
        for a, b in zip(self.alphas, self.betas):
            inner = self.log_K + math.log1p(self.m * bracket ** (a + 1.0))
            best = max(best, inner / (1.0 - b))
        return best

    def bound(self, t: float) -> float:
        lb = self.log_bound(t)
        return math.exp(lb) if lb < LOG_K_OVERFLOW else math.inf


def certify(problem: GronwallProblem) -> BoundCertificate:
    """Explicit bound constant K via the proof's constant chain.

    Per cell of the partition, the inequality localizes to
    sup F <= 2 F(cell bottom) + 2C sum_i (sup F)^(beta_i); the implicit
    bound turns that into an explicit one, and a backward recursion from
    F(0) <= F0_bound walks the bounds up to t_0.  The remaining inequality
    for sup F over all t is absorbed by one more implicit bound with
    R_i = <t>^(alpha_i + 1).
    """
    partition = build_partition(problem)
    k = max(1, len(partition) - 1)  # number of cells in [0, t_0]
    betas = problem.betas
    inv_gap = max(1.0 / (1.0 - b) for b in betas)
    m = problem.m

    # backward recursion in log space: bound at each partition point,
    # starting from F(t_k) = F(0) <= F0_bound
    log_2C = math.log(2.0 * problem.C)
    log_F = math.log(problem.F0_bound) if problem.F0_bound > 0 else -math.inf
    point_logs = [log_F]
    for _ in range(k):
        log_M = max(0.0, math.log(2.0) + log_F, log_2C)
        log_F = (log_M + math.log1p(m)) * inv_gap
        point_logs.append(log_F)
    log_C3 = max(point_logs)

    # global inequality: sup F <= 2k max_j F(t_j)
    #                    + 2Ck sum_i (1 + sqrt2^a_i/(a_i+1)) <t>^(a_i+1) F^b_i
    weight_const = max(
        1.0 + (math.sqrt(2.0) ** a) / (a + 1.0) for a in problem.alphas
    )
    log_C2 = max(
        math.log(2.0 * k) + log_C3,
        math.log(2.0 * problem.C * k * weight_const),
    )
    log_K = max(0.0, log_C2)
    K = math.exp(log_K) if log_K < LOG_K_OVERFLOW else math.inf

    return BoundCertificate(
        K=K,
        log_K=log_K,
        alphas=problem.alphas,
        betas=problem.betas,
        m=m,
        partition=tuple(partition),
        trace={
            "t0": partition[0],
            "cells": k,
            "point_log_bounds": tuple(point_logs),
            "log_C3": log_C3,
            "log_C2": log_C2,
            "overflow": not math.isfinite(K),
        },
    )


@dataclass(frozen=True)
class BoundVerification:
    """Outcome of checking sampled data against a certificate."""

    hypothesis_ok: bool
    bound_ok: bool
    first_hypothesis_violation: float | None
    first_bound_violation: float | None
    checked: int


def verify_bound(F_samples, problem: GronwallProblem,
                 certificate: BoundCertificate) -> BoundVerification:
    """Check sampled F against (a) the hypothesis inequality and (b) B(t).

    The derivative is estimated by centered differences; the hypothesis
    check is one-sided with slack 10 * dt * (local Lipschitz estimate), so
    sampling noise cannot produce false violations.  If the hypothesis
    fails, the bound check is skipped.
    """
    pts = sorted((float(t), float(v)) for t, v in F_samples)
    if len(pts) < 3:
        raise GronwallError("verification needs at least 3 samples")
    ts = np.array([p[0] for p in pts])
    Fs = np.array([p[1] for p in pts])

    hyp_ok, first_hyp = True, None
    for i in range(1, len(ts) - 1):
        dt = ts[i + 1] - ts[i - 1]
        dF = (Fs[i + 1] - Fs[i - 1]) / dt
        lipschitz = max(
            abs(Fs[i + 1] - Fs[i]) / (ts[i + 1] - ts[i]),
            abs(Fs[i] - Fs[i - 1]) / (ts[i] - ts[i - 1]),
        )
        slack = 10.0 * dt * lipschitz
        bracket = math.sqrt(1.0 + ts[i] ** 2)
        rhs = problem.C * sum(
            bracket**a * max(Fs[i], 0.0) ** b
            for a, b in zip(problem.alphas, problem.betas)
        ) + float(problem.H_at(ts[i])) * Fs[i]
        if abs(dF) > rhs + slack:
            hyp_ok, first_hyp = False, float(ts[i])
            break

    bound_ok, first_bound = True, None
    if hyp_ok:
        for t, v in pts:
            if v > 0 and math.log(v) > certificate.log_bound(t):
                bound_ok, first_bound = False, float(t)
                break
    else:
        bound_ok = False

    return BoundVerification(
        hypothesis_ok=hyp_ok,
        bound_ok=bound_ok,
        first_hypothesis_violation=first_hyp,
        first_bound_violation=first_bound,
        checked=len(pts),
    )


def fixed_point_by_bisection(C_prime: float, R, betas, max_iter: int = 200) -> float:
    """Root of y = C' + C' sum R_i y^(beta_i), the independent oracle that
    :func:`implicit_root_bound` must dominate."""
    R = [float(r) for r in np.atleast_1d(R)]
    betas = [float(b) for b in np.atleast_1d(betas)]

    def g(y):
        return y - C_prime - C_prime * sum(r * y**b for r, b in zip(R, betas))

    lo = 0.0
    hi = max(1.0, 2.0 * C_prime)
    while g(hi) <= 0:
        hi *= 2.0
        if hi > 1e300:  # pragma: no cover
            raise GronwallError("fixed point out of float range")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return hi
