"""Periodic spectral grid with a unitary Fourier transform.

Functions on the line are represented by samples on a large truncated
periodic grid [-L, L).  The Fourier transform uses the unitary convention
with a 1/sqrt(2*pi) prefactor, and the discrete transform carries the
quadrature weight dx and the node phases so that it agrees with the
continuum transform on band-limited, grid-supported functions.  All other
modules consume this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT_2PI = np.sqrt(2.0 * np.pi)

#: spectral derivatives above this order amplify round-off past usable levels
MAX_DERIVATIVE_ORDER = 8
#: x^(2s) quadrature on a truncated domain is only trustworthy up to here
MAX_MOMENT_ORDER = 4


class GridError(ValueError):
    """Invalid grid construction or mismatched grids."""


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [-L, L) with matched FFT frequencies.

    Attributes:
        n_points: number of samples, a power of two >= 16.
        half_length: L, so the domain is [-L, L).
        dx: spacing, 2L / n_points exactly.
        nodes: x_j = -L + j*dx.
        frequencies: xi_k in standard FFT ordering, integer multiples of pi/L.
    """

    n_points: int
    half_length: float
    dx: float
    nodes: np.ndarray
    frequencies: np.ndarray

    @property
    def dxi(self) -> float:
        """Frequency spacing pi/L."""
        return np.pi / self.half_length

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSpec):
            return NotImplemented
        return (
            self.n_points == other.n_points
            and self.half_length == other.half_length
        )


def make_grid(n_points: int, half_length: float) -> GridSpec:
    """Build a GridSpec; rejects non-power-of-two sizes and bad lengths."""
    if not isinstance(n_points, (int, np.integer)):
        raise GridError(f"n_points must be an integer, got {n_points!r}")
    if n_points < 16 or not _is_power_of_two(int(n_points)):
        raise GridError(
            f"n_points must be a power of two >= 16, got {n_points}"
        )
    if not (half_length > 0):
        raise GridError(f"half_length must be positive, got {half_length}")
    n = int(n_points)
    L = float(half_length)
    dx = 2.0 * L / n
    nodes = -L + dx * np.arange(n)
    frequencies = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    nodes.flags.writeable = False
    frequencies.flags.writeable = False
    return GridSpec(n, L, dx, nodes, frequencies)


@dataclass(frozen=True, eq=False)
class WaveField:
    """Complex samples of u(t, .) on a grid, stamped with its time."""

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise GridError(
                f"field length {values.shape} does not match grid "
                f"n_points={self.grid.n_points}"
            )
        if not np.all(np.isfinite(values.view(float))):
            raise GridError("field contains non-finite entries")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier-side samples, indexed by frequency in FFT ordering."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise GridError("spectrum length does not match grid")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def _node_phases(grid: GridSpec) -> np.ndarray:
    # exp(i*xi_k*L) = (-1)^k for xi_k = pi*k/L, any FFT index k
    signs = np.ones(grid.n_points)
    signs[1::2] = -1.0
    return signs


def forward_fourier(f: WaveField) -> Spectrum:
    """Discrete approximation of f_hat(xi) = (2pi)^(-1/2) int e^(-ix xi) f dx."""
    g = f.grid
    vals = (g.dx / SQRT_2PI) * _node_phases(g) * np.fft.fft(f.values)
    return Spectrum(g, vals)


def inverse_fourier(spec: Spectrum, time: float = 0.0) -> WaveField:
    """Exact inverse of :func:`forward_fourier`."""
    g = spec.grid
    vals = np.fft.ifft(_node_phases(g) * spec.values) * (SQRT_2PI / g.dx)
    return WaveField(g, vals, time)


def spectral_derivative(f: WaveField, order: int) -> WaveField:
    """Derivative of given order via multiplication by (i*xi)^order."""
    if order < 0 or order > MAX_DERIVATIVE_ORDER:
        raise GridError(
            f"derivative order must be in [0, {MAX_DERIVATIVE_ORDER}], "
            f"got {order}"
        )
    if order == 0:
        return f
    g = f.grid
    mult = (1j * g.frequencies) ** order
    vals = np.fft.ifft(mult * np.fft.fft(f.values))
    return WaveField(g, vals, f.time)


def l2_norm(f: WaveField) -> float:
    """sqrt(dx * sum |f_j|^2)."""
    return float(np.sqrt(f.grid.dx * np.sum(np.abs(f.values) ** 2)))


def spectrum_l2_norm(spec: Spectrum) -> float:
    """sqrt(dxi * sum |f_hat_k|^2); equals l2_norm of the field (Plancherel)."""
    return float(np.sqrt(spec.grid.dxi * np.sum(np.abs(spec.values) ** 2)))


def weighted_moment(f: WaveField, s: int) -> float:
    """Order-s moment dx * sum x_j^(2s) |f_j|^2."""
    if not (1 <= s <= MAX_MOMENT_ORDER):
        raise GridError(f"moment order must be in [1, {MAX_MOMENT_ORDER}], got {s}")
    g = f.grid
    return float(g.dx * np.sum(g.nodes ** (2 * s) * np.abs(f.values) ** 2))


def mass_fraction_outside(f: WaveField, fraction_of_l: float = 0.8) -> float:
    """Mass fraction carried by nodes with |x| > fraction_of_l * L."""
    g = f.grid
    dens = np.abs(f.values) ** 2
    total = np.sum(dens)
    if total == 0.0:
        return 0.0
    outer = np.sum(dens[np.abs(g.nodes) > fraction_of_l * g.half_length])
    return float(outer / total)


def gaussian(grid: GridSpec, a: float = 1.0, x0: float = 0.0,
             velocity: float = 0.0) -> WaveField:
    """Normalized Gaussian packet pi^(-1/4) a^(1/4) e^(-a(x-x0)^2/2) e^(ivx).

    With a=1, x0=v=0 this is the self-dual Gaussian: unit L2 norm,
    order-1 moment 1/2, and its transform is pi^(-1/4) e^(-xi^2/2).
    """
    if a <= 0:
        raise GridError(f"gaussian width parameter must be positive, got {a}")
    x = grid.nodes
    vals = (np.pi ** -0.25) * (a ** 0.25) * np.exp(-a * (x - x0) ** 2 / 2.0)
    if velocity != 0.0:
        vals = vals * np.exp(1j * velocity * x)
    return WaveField(grid, vals, 0.0)
