import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentlab.grid import (
    WaveField,
    forward_fourier,
    gaussian,
    l2_norm,
    make_grid,
)
from momentlab.propagation import free_evolve
from momentlab.scattering import (
    ScatteringError,
    classical_sobolev_energy,
    cone_moment,
    extract_scattering_state,
    extrapolate_limit,
    free_profile,
    scaled_moment,
    spectrum_at,
    verify_moment_theorem,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(8192, 800.0)


@pytest.fixture(scope="module")
def datum(grid):
    return gaussian(grid)


def test_spectrum_at_matches_fft_nodes(grid, datum):
    spec = forward_fourier(datum)
    # evaluate the interpolant at a run of actual grid frequencies
    order = np.argsort(spec.grid.frequencies)
    targets = spec.grid.frequencies[order][4000:4100]
    vals = spectrum_at(datum, targets)
    assert np.max(np.abs(vals - spec.values[order][4000:4100])) < 1e-10


def test_spectrum_at_single_point(datum):
    val = spectrum_at(datum, np.array([0.0]))
    assert val[0] == pytest.approx(np.pi ** (-0.25), rel=1e-10)


def test_spectrum_at_rejects_uneven_targets(datum):
    with pytest.raises(ScatteringError):
        spectrum_at(datum, np.array([0.0, 0.1, 0.3]))


def test_profile_isometry(grid, datum):
    base = l2_norm(datum)
    for t in (1.0, 4.0, 16.0):
        assert l2_norm(free_profile(datum, t)) == pytest.approx(base, abs=1e-9)


def test_profile_error_decreases(grid, datum):
    errs = []
    for t in (4.0, 8.0, 16.0, 32.0, 64.0):
        diff = free_evolve(datum, t).values - free_profile(datum, t).values
        errs.append(l2_norm(WaveField(grid, diff, t)))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.05


def test_profile_requires_positive_time(datum):
    with pytest.raises(ScatteringError):
        free_profile(datum, 0.0)
    with pytest.raises(ScatteringError):
        free_profile(datum, -2.0)


def test_extraction_recovers_free_datum(grid, datum):
    # free flow scatters to itself: candidates equal the datum exactly
    extract = extract_scattering_state(
        lambda t: free_evolve(datum, t), (5.0, 10.0, 20.0), s=1
    )
    assert extract.accepted
    assert max(extract.hs_increments) < 1e-12
    assert np.max(np.abs(extract.f_plus.values - datum.values)) < 1e-12


def test_extraction_rejects_bad_times(datum):
    field_at = lambda t: free_evolve(datum, t)
    with pytest.raises(ScatteringError):
        extract_scattering_state(field_at, (5.0,), s=1)
    with pytest.raises(ScatteringError):
        extract_scattering_state(field_at, (10.0, 5.0), s=1)


def test_cone_moment_partition(grid, datum):
    u = free_evolve(datum, 20.0)
    total = scaled_moment(u, 1)
    inside = cone_moment(u, 20.0, 1, 2.0, "inside")
    outside = cone_moment(u, 20.0, 1, 2.0, "outside")
    assert inside + outside == pytest.approx(total, rel=1e-12)


def test_cone_tail_shrinks_with_R(grid, datum):
    u = free_evolve(datum, 20.0)
    shares = [cone_moment(u, 20.0, 1, R, "outside") for R in (1.0, 2.0, 4.0, 8.0)]
    assert all(b <= a for a, b in zip(shares, shares[1:]))
    assert shares[-1] < 1e-6 * scaled_moment(u, 1)


def test_cone_moment_validation(grid, datum):
    u = free_evolve(datum, 20.0)
    with pytest.raises(ScatteringError):
        cone_moment(u, 20.0, 1, -1.0, "outside")
    with pytest.raises(ScatteringError):
        cone_moment(u, 20.0, 1, 1.0, "everywhere")


def test_extrapolate_exact_model():
    ts = [10.0, 20.0, 30.0, 40.0, 60.0, 80.0]
    est = extrapolate_limit([(t, 3.0 + 7.0 / t) for t in ts])
    assert est.limit == pytest.approx(3.0, abs=1e-12)
    assert est.slope == pytest.approx(7.0, abs=1e-9)
    assert est.residual < 1e-12


def test_extrapolate_reports_residual():
    rng = np.random.default_rng(3)
    ts = np.linspace(10.0, 100.0, 12)
    vals = 2.0 + 5.0 / ts + rng.normal(0.0, 1e-3, ts.size)
    est = extrapolate_limit(list(zip(ts, vals)))
    assert est.limit == pytest.approx(2.0, abs=5e-3)
    assert est.residual > 0.0


def test_extrapolate_validation():
    with pytest.raises(ScatteringError):
        extrapolate_limit([(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)])  # too few
    with pytest.raises(ScatteringError):
        # span less than a factor 4
        extrapolate_limit([(10.0, 1.0), (12.0, 1.0), (14.0, 1.0), (16.0, 1.0)])


def test_scaled_moment_free_gaussian(grid, datum):
    # moment/t^2 = (1 + 4t^2) / (2 t^2) -> 2
    u = free_evolve(datum, 50.0)
    assert scaled_moment(u, 1) == pytest.approx((1 + 4 * 50.0**2) / 2 / 50.0**2,
                                                rel=1e-10)


def test_classical_sobolev_energy(datum):
    assert classical_sobolev_energy(datum, 1) == pytest.approx(0.5, rel=1e-10)
    assert classical_sobolev_energy(datum, 2) == pytest.approx(0.75, rel=1e-10)


def test_verify_moment_theorem_free_flow(grid, datum):
    report = verify_moment_theorem(
        lambda t: free_evolve(datum, t),
        datum,
        s=1,
        sample_times=[12.5, 25.0, 37.5, 50.0, 62.5, 75.0, 87.5, 100.0],
        extraction_times=[20.0, 40.0, 80.0],
    )
    # true limit 2^2 ||d f||^2 = 2 for the unit Gaussian
    assert report["lhs_limit"] == pytest.approx(2.0, rel=1e-3)
    assert report["rhs_scatter"] == pytest.approx(2.0, rel=1e-10)
    assert report["scatter_discrepancy"] < 1e-3
    assert report["extraction"].accepted


@settings(max_examples=10, deadline=None)
@given(a=st.floats(min_value=0.5, max_value=2.0), b=st.floats(-10.0, 10.0))
def test_extrapolation_recovers_linear_model(a, b):
    ts = [8.0, 16.0, 24.0, 40.0, 64.0]
    est = extrapolate_limit([(t, a + b / t) for t in ts])
    assert est.limit == pytest.approx(a, abs=1e-9)


@settings(max_examples=10, deadline=None)
@given(t=st.floats(min_value=2.0, max_value=40.0))
def test_profile_isometry_property(t):
    g = make_grid(2048, 400.0)
    f = gaussian(g, a=1.5)
    assert l2_norm(free_profile(f, t)) == pytest.approx(l2_norm(f), abs=1e-8)
