"""Time evolution: exact free flow, exact discretized linear flow, and
Strang split-step integration of the defocusing NLS, with monitor rows
recorded at sample times.

Sign convention, fixed once: the flow e^{it(d^2/dx^2 + V)} equals e^{-itH}
with H = -d^2/dx^2 - V, so the free flow multiplies the spectrum by
e^{-it xi^2}.  The V = 0 agreement test in the suite asserts this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    GridError,
    GridSpec,
    WaveField,
    l2_norm,
    mass_fraction_outside,
    spectral_derivative,
    weighted_moment,
)
from .operators import (
    HamiltonianDecomposition,
    Potential,
    norm_hs,
    norm_hsv,
    norm_sigma,
)

#: trajectories whose outer-mass fraction exceeds this are flagged invalid
CONTAINMENT_LIMIT = 1e-8
#: containment measures mass beyond this fraction of the half length
CONTAINMENT_RADIUS = 0.8


class PropagationError(ValueError):
    """Invalid evolution setup."""


def free_evolve(f: WaveField, t: float) -> WaveField:
    """Free Schrodinger flow: multiply the spectrum by e^{-it xi^2}.

    Exact (to round-off) for the discrete system; satisfies the group law
    free_evolve(free_evolve(f, a), b) = free_evolve(f, a + b).
    """
    if t == 0.0:
        return f
    g = f.grid
    vals = np.fft.ifft(np.exp(-1j * t * g.frequencies**2) * np.fft.fft(f.values))
    return WaveField(g, vals, f.time + t)


def linear_evolve(H: HamiltonianDecomposition, f: WaveField, t: float) -> WaveField:
    """Exact discretized linear flow e^{it(d^2/dx^2 + V)} = e^{-itH}."""
    if f.grid != H.grid:
        raise PropagationError("field and Hamiltonian grids do not match")
    coeffs = H.coefficients(f) * np.exp(-1j * t * H.eigenvalues)
    return H.synthesize(coeffs, f.time + t)


@dataclass(frozen=True)
class NLSConfig:
    """Integration parameters for the defocusing NLS run.

    lam is the nonlinearity coefficient (<= 0, defocusing or linear) and k
    the nonlinearity half-exponent (>= 2), for the term lam |u|^(2k) u.
    """

    lam: float
    k: int
    dt: float
    t_final: float
    sample_times: tuple

    def __post_init__(self):
        if self.lam > 0:
            raise PropagationError(f"lambda must be <= 0, got {self.lam}")
        if self.k < 2:
            raise PropagationError(f"k must be >= 2, got {self.k}")
        if self.dt <= 0 or self.t_final <= 0:
            raise PropagationError("dt and t_final must be positive")
        times = tuple(float(t) for t in self.sample_times)
        if list(times) != sorted(times):
            raise PropagationError("sample_times must be sorted")
        if times and (times[0] < 0 or times[-1] > self.t_final + 1e-12):
            raise PropagationError("sample_times must lie in [0, t_final]")
        prev = 0.0
        for t in times:
            gap = t - prev
            if gap > 0:
                steps = round(gap / self.dt)
                if steps == 0 or abs(gap - steps * self.dt) > 1e-12 * max(1.0, gap):
                    raise PropagationError(
                        f"dt={self.dt} does not divide the sample interval "
                        f"({prev}, {t})"
                    )
            prev = t
        object.__setattr__(self, "sample_times", times)


@dataclass
class MonitorSeries:
    """Per-sample monitor values; all arrays share the length of ``times``."""

    s_orders: tuple
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    hs_norms: dict = None
    hsv_norms: dict = None
    sigma_norms: dict = None
    moments: dict = None
    decay_functional: list = field(default_factory=list)
    pseudoconformal: list = field(default_factory=list)
    containment: list = field(default_factory=list)

    def __post_init__(self):
        self.hs_norms = {s: [] for s in self.s_orders}
        self.hsv_norms = {s: [] for s in self.s_orders}
        self.sigma_norms = {s: [] for s in self.s_orders}
        self.moments = {s: [] for s in self.s_orders}

    def append(self, row: dict):
        self.times.append(row["time"])
        self.mass.append(row["mass"])
        self.energy.append(row["energy"])
        self.decay_functional.append(row["decay_functional"])
        self.pseudoconformal.append(row["pseudoconformal"])
        self.containment.append(row["containment"])
        for s in self.s_orders:
            self.hs_norms[s].append(row["hs_norms"][s])
            self.hsv_norms[s].append(row["hsv_norms"].get(s, float("nan")))
            self.sigma_norms[s].append(row["sigma_norms"][s])
            self.moments[s].append(row["moments"][s])


def energy_functional(u: WaveField, V: Potential | None, lam: float, k: int) -> float:
    """E(u) = int(|du|^2 - V|u|^2 - (lam/(k+1)) |u|^(2k+2)) dx."""
    dens = np.abs(u.values) ** 2
    du = spectral_derivative(u, 1)
    e = np.sum(np.abs(du.values) ** 2)
    if V is not None:
        e -= np.sum(V.values * dens)
    if lam != 0.0:
        e -= (lam / (k + 1)) * np.sum(dens ** (k + 1))
    return float(u.grid.dx * e)


def compute_monitors(
    u: WaveField,
    s_max: int,
    V: Potential | None = None,
    H: HamiltonianDecomposition | None = None,
    lam: float = 0.0,
    k: int = 2,
) -> dict:
    """One monitor row for the field u at its own time stamp."""
    if s_max > 4:
        raise PropagationError("s_max capped at 4")
    t = u.time
    x = u.grid.nodes
    du = spectral_derivative(u, 1)
    j_field = WaveField(u.grid, x * u.values + 2j * t * du.values, t)
    row = {
        "time": t,
        "mass": l2_norm(u) ** 2,
        "energy": energy_functional(u, V, lam, k),
        "decay_functional": float(
            (1.0 + t * t) ** 0.25 * np.max(np.abs(u.values))
        ),
        "pseudoconformal": l2_norm(j_field),
        "containment": mass_fraction_outside(u, CONTAINMENT_RADIUS),
        "hs_norms": {},
        "hsv_norms": {},
        "sigma_norms": {},
        "moments": {},
    }
    for s in range(1, s_max + 1):
        row["hs_norms"][s] = norm_hs(u, s)
        row["sigma_norms"][s] = norm_sigma(u, s)
        row["moments"][s] = weighted_moment(u, s)
        if H is not None:
            row["hsv_norms"][s] = norm_hsv(u, s, H)
    return row


@dataclass
class Trajectory:
    """Sampled fields plus monitor series for one evolution."""

    config: NLSConfig
    fields: list  # WaveField at each sample time
    monitors: MonitorSeries
    valid: bool
    invalid_reasons: list

    def field_at(self, t: float) -> WaveField:
        for f in self.fields:
            if abs(f.time - t) <= 1e-9 * max(1.0, abs(t)):
                return f
        raise KeyError(f"no sampled field at t={t}")


def nls_evolve(
    config: NLSConfig,
    V: Potential,
    f: WaveField,
    H: HamiltonianDecomposition | None = None,
    s_max: int = 2,
) -> Trajectory:
    """Strang split-step integration of i u_t + u_xx + V u + lam |u|^(2k) u = 0.

    Half-step pointwise phase exp(i (dt/2)(V + lam |u|^(2k))), full kinetic
    step e^{-i dt xi^2}, half-step phase again.  Both substeps preserve the
    pointwise modulus or are unitary, so mass is conserved to round-off;
    energy drift is O(dt^2).
    """
    if f.grid != V.grid:
        raise PropagationError("datum and potential grids do not match")
    g = f.grid
    ksq = g.frequencies**2
    lam, k = config.lam, config.k

    monitors = MonitorSeries(s_orders=tuple(range(1, s_max + 1)))
    fields: list[WaveField] = []
    reasons: list[str] = []
    valid = True

    def record(u_vals: np.ndarray, t: float) -> bool:
        nonlocal valid
        if not np.all(np.isfinite(u_vals.view(float))):
            reasons.append(f"non-finite field at t={t}")
            valid = False
            return False
        u = WaveField(g, u_vals, t)
        row = compute_monitors(u, s_max, V=V, H=H, lam=lam, k=k)
        monitors.append(row)
        fields.append(u)
        if row["containment"] > CONTAINMENT_LIMIT:
            reasons.append(
                f"containment breach at t={t}: outer mass fraction "
                f"{row['containment']:.3e}"
            )
            valid = False
        return True

    u = f.values.copy()
    t = 0.0
    sample_iter = list(config.sample_times)
    if sample_iter and sample_iter[0] == 0.0:
        record(u, 0.0)
        sample_iter = sample_iter[1:]

    def phase(u_vals, step):
        arg = V.values if lam == 0.0 else V.values + lam * np.abs(u_vals) ** (2 * k)
        return u_vals * np.exp(1j * step * arg)

    kinetic_mult = None
    dt_cached = None
    for target in sample_iter:
        gap = target - t
        if gap <= 0:
            record(u, t)
            continue
        steps = round(gap / config.dt)
        dt = gap / steps
        if dt != dt_cached:
            kinetic_mult = np.exp(-1j * dt * ksq)
            dt_cached = dt
        u = phase(u, dt / 2.0)
        for j in range(steps):
            u = np.fft.ifft(kinetic_mult * np.fft.fft(u))
            u = phase(u, dt if j < steps - 1 else dt / 2.0)
        t = target
        if not record(u, t):
            break

    return Trajectory(config, fields, monitors, valid, reasons)
