"""Norm, dipole and acceleration time series, HHG spectra, density snapshots.

The spectrum convention: for M uniform samples s(t_k) the reported power at
harmonic order ``2*pi*m / (M*dt*omega)`` is ``|DFT[s*w]_m / M|^2`` per
component (w the window), one-sided with no symmetry doubling, summed over
the x and y components for the total.  Order 0 therefore carries the squared
windowed mean of the signal.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Wavefunction

SPECTRUM_SOURCES = ("dipole", "acceleration")
SPECTRUM_WINDOWS = ("none", "hann")


@dataclass
class ObservableSeries:
    """Per-step samples recorded during a propagation (all atomic units)."""

    times: np.ndarray
    norm2: np.ndarray
    dip_x: np.ndarray
    dip_y: np.ndarray
    acc_x: np.ndarray
    acc_y: np.ndarray
    field_x: np.ndarray
    field_y: np.ndarray
    dt: float
    omega: float

    def __len__(self):
        return len(self.times)

    _COLUMNS = ("times", "norm2", "dip_x", "dip_y", "acc_x", "acc_y", "field_x", "field_y")

    def columns(self):
        return {name: getattr(self, name) for name in self._COLUMNS}


@dataclass
class Spectrum:
    """One-sided power spectrum on a harmonic-order axis."""

    harmonic_order: np.ndarray
    power: np.ndarray
    power_x: np.ndarray
    power_y: np.ndarray
    window: str
    source: str
    rescaled: bool
    omega: float


@dataclass
class DensitySnapshot:
    """|psi|^2 on the grid at one instant, with the metadata needed to rebuild axes."""

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float
    y0: float
    t: float
    density: np.ndarray


def dipole_expectation(psi):
    """(<x>, <y>) over the surviving density; rejects zero-norm states."""
    g = psi.grid
    den = psi.density()
    raw = float(den.sum())
    if raw <= 0.0:
        raise ValueError("dipole expectation of a zero-norm state")
    x_mean = float(den.sum(axis=0) @ g.x) / raw
    y_mean = float(den.sum(axis=1) @ g.y) / raw
    return x_mean, y_mean


def dipole_acceleration(psi, pot, pulse, t):
    """Ehrenfest dipole acceleration a = -<grad V> - E(t).

    The potential gradient is evaluated analytically pointwise; with
    ``pot=None`` this reduces to -E(t) exactly.
    """
    den = psi.density()
    raw = float(den.sum())
    if raw <= 0.0:
        raise ValueError("dipole acceleration of a zero-norm state")
    ex, ey = pulse.field_at(t)
    if pot is None:
        return -ex, -ey
    X, Y = psi.grid.meshes()
    wx, wy = pot.gradient(X, Y)
    gx = float(np.einsum("ij,ij->", wx, den)) / raw
    gy = float(np.einsum("ij,ij->", wy, den)) / raw
    return -gx - ex, -gy - ey


def _check_uniform(times, dt):
    steps = np.diff(times)
    if steps.size and np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise ValueError("spectrum requires uniform time sampling")


def hhg_spectrum(series, source="acceleration", window="hann", rescale=False):
    """Polarization-summed power spectrum of the dipole or its acceleration.

    With ``rescale=True`` every power array is divided by the peak total
    power in the fundamental band (order in [0.5, 1.5]), putting the
    fundamental at one.
    """
    if source not in SPECTRUM_SOURCES:
        raise ValueError(f"unknown spectrum source {source!r}")
    if window not in SPECTRUM_WINDOWS:
        raise ValueError(f"unknown spectrum window {window!r}")
    _check_uniform(series.times, series.dt)
    if source == "acceleration":
        sx, sy = series.acc_x, series.acc_y
    else:
        sx, sy = series.dip_x, series.dip_y
    m = len(sx)
    w = np.hanning(m) if window == "hann" else np.ones(m)
    fx = np.fft.rfft(sx * w) / m
    fy = np.fft.rfft(sy * w) / m
    order = 2.0 * np.pi * np.fft.rfftfreq(m, series.dt) / series.omega
    power_x = np.abs(fx) ** 2
    power_y = np.abs(fy) ** 2
    power = power_x + power_y
    rescaled = False
    if rescale:
        band = (order >= 0.5) & (order <= 1.5)
        peak = power[band].max() if band.any() else 0.0
        if peak > 0.0:
            power = power / peak
            power_x = power_x / peak
            power_y = power_y / peak
            rescaled = True
    return Spectrum(
        harmonic_order=order,
        power=power,
        power_x=power_x,
        power_y=power_y,
        window=window,
        source=source,
        rescaled=rescaled,
        omega=series.omega,
    )


def harmonic_peak_power(spec, n, half_width=1.0 / 3.0):
    """Maximum total power within ``half_width`` orders of harmonic n."""
    band = np.abs(spec.harmonic_order - n) <= half_width
    if not band.any():
        return 0.0
    return float(spec.power[band].max())


def harmonic_floor_power(spec, n, inner=1.0 / 3.0, outer=2.0 / 3.0):
    """Median power in the valleys flanking harmonic n (the local noise floor)."""
    d = np.abs(spec.harmonic_order - n)
    valleys = (d > inner) & (d <= outer)
    if not valleys.any():
        return 0.0
    return float(np.median(spec.power[valleys]))


def harmonic_contrast_db(spec, n):
    """Peak-over-floor contrast of harmonic n in dB; -inf when nothing is there."""
    peak = harmonic_peak_power(spec, n)
    floor = harmonic_floor_power(spec, n)
    if peak <= 0.0:
        return -np.inf
    if floor <= 0.0:
        return np.inf
    return 10.0 * np.log10(peak / floor)


def is_harmonic_visible(spec, n, threshold_db=10.0):
    return harmonic_contrast_db(spec, n) >= threshold_db


def max_visible_harmonic(spec, threshold_db=10.0, orders=None):
    """Highest harmonic order clearing the contrast threshold (0 when none)."""
    if orders is None:
        top = int(spec.harmonic_order[-1] - 1.0)
        orders = range(1, max(top, 1) + 1)
    best = 0
    for n in orders:
        if is_harmonic_visible(spec, n, threshold_db):
            best = n
    return best


def density_snapshot(psi, t):
    """Freeze |psi|^2 with grid metadata; values are non-negative by construction."""
    g = psi.grid
    return DensitySnapshot(
        nx=g.nx,
        ny=g.ny,
        dx=g.dx,
        dy=g.dy,
        x0=g.x0,
        y0=g.y0,
        t=float(t),
        density=psi.density(),
    )


def snapshot_moments(snap):
    """(<x^2>, <y^2>) of the snapshot density; anisotropy diagnostic for wavepackets."""
    x = snap.x0 + snap.dx * np.arange(snap.nx)
    y = snap.y0 + snap.dy * np.arange(snap.ny)
    raw = float(snap.density.sum())
    if raw <= 0.0:
        raise ValueError("snapshot has zero density")
    x2 = float(snap.density.sum(axis=0) @ (x**2)) / raw
    y2 = float(snap.density.sum(axis=1) @ (y**2)) / raw
    return x2, y2


class SnapshotRecorder:
    """Propagation hook capturing density snapshots at the steps nearest the requested times.

    Requested times outside [0, duration] are rejected up front.
    """

    def __init__(self, times, duration, dt):
        self.requested = [float(t) for t in times]
        nsteps = int(round(duration / dt))
        self._targets = {}
        for t in self.requested:
            if t < 0.0 or t > duration * (1.0 + 1e-12):
                raise ValueError(f"snapshot time {t} outside the propagation window [0, {duration}]")
            self._targets.setdefault(min(int(round(t / dt)), nsteps), []).append(t)
        self.snapshots = []

    def __call__(self, step, t, psi):
        if step in self._targets:
            for _ in self._targets[step]:
                self.snapshots.append(density_snapshot(psi, t))
