"""Soft-core Coulomb potential and the elliptically polarized trapezoidal pulse.

The electric field is

    Ex(t) = Ebar * sin(w t) * f(t)
    Ey(t) = eps * Ebar * cos(w t) * f(t)

with f(t) a trapezoidal envelope (linear ramp up, flat plateau, linear ramp
down) and eps the ellipticity (0 = linear along x, 1 = circular).  Under the
``fixed_Ex`` convention Ebar equals the configured peak amplitude E0; under
``fixed_mean_intensity`` the field is rescaled by 1/sqrt(1+eps^2) so the
cycle-averaged intensity stays constant as eps varies.

The vector potential A(t) = -integral_0^t E dt' is evaluated in closed form
(segment-wise antiderivatives of linear-envelope sinusoids), never by
quadrature, so it is exact and continuous across envelope breakpoints.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# 1 a.u. of intensity expressed in W/cm^2 (rounding chosen so that
# 3.51e14 W/cm^2 maps exactly to 0.01 a.u.).
INTENSITY_AU_WCM2 = 3.51e16
BOHR_RADIUS_NM = 0.0529177
SPEED_OF_LIGHT_AU = 137.036

DEFAULT_OMEGA_AU = 0.0867  # 526 nm doubled Nd:YAG
DEFAULT_SOFTENING = 0.8

INTENSITY_CONVENTIONS = ("fixed_Ex", "fixed_mean_intensity")


def intensity_to_field(value, unit="au"):
    """Peak field amplitude E0 (a.u.) from intensity in 'au' or 'Wcm2'."""
    if unit == "au":
        i_au = float(value)
    elif unit == "Wcm2":
        i_au = float(value) / INTENSITY_AU_WCM2
    else:
        raise ConfigError(f"unknown intensity unit {unit!r} (expected 'au' or 'Wcm2')")
    if i_au < 0:
        raise ConfigError(f"intensity must be non-negative, got {value} {unit}")
    return float(np.sqrt(i_au))


def field_to_intensity(e0):
    """Inverse of :func:`intensity_to_field`, in a.u."""
    return float(e0) ** 2


def wavelength_to_omega(lambda_nm):
    """Angular frequency (a.u.) of light with vacuum wavelength in nm."""
    if lambda_nm <= 0:
        raise ConfigError(f"wavelength must be positive, got {lambda_nm}")
    return 2.0 * np.pi * SPEED_OF_LIGHT_AU / (lambda_nm / BOHR_RADIUS_NM)


@dataclass(frozen=True)
class SoftCorePotential:
    """V(x, y) = -1 / sqrt(a^2 + x^2 + y^2); a > 0 removes the singularity."""

    a: float = DEFAULT_SOFTENING

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError(f"softening length must be positive, got {self.a}")

    def __call__(self, x, y):
        return -1.0 / np.sqrt(self.a**2 + np.asarray(x) ** 2 + np.asarray(y) ** 2)

    def gradient(self, x, y):
        """(dV/dx, dV/dy); analytic, used for the dipole acceleration."""
        x = np.asarray(x)
        y = np.asarray(y)
        s = (self.a**2 + x**2 + y**2) ** -1.5
        return x * s, y * s

    def on_grid(self, grid):
        X, Y = grid.meshes()
        return self(X, Y)


def potential_at(pot, x, y):
    """Soft-core potential value at (x, y); module-level spelling of ``pot(x, y)``."""
    return pot(x, y)


@dataclass(frozen=True)
class LaserPulse:
    """Trapezoidal elliptically polarized pulse.

    ``ramp_cycles`` optical cycles of linear turn-on, ``plateau_cycles`` of
    constant envelope, then ``ramp_cycles`` of linear turn-off.
    """

    e0: float
    omega: float = DEFAULT_OMEGA_AU
    epsilon: float = 0.0
    ramp_cycles: float = 2.0
    plateau_cycles: float = 2.0
    intensity_convention: str = "fixed_Ex"

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"ellipticity must be in [0, 1], got {self.epsilon}")
        if self.e0 < 0:
            raise ConfigError(f"field amplitude must be non-negative, got {self.e0}")
        if self.omega <= 0:
            raise ConfigError(f"angular frequency must be positive, got {self.omega}")
        if self.ramp_cycles < 0 or self.plateau_cycles < 0:
            raise ConfigError("cycle counts must be non-negative")
        if self.intensity_convention not in INTENSITY_CONVENTIONS:
            raise ConfigError(
                f"unknown intensity convention {self.intensity_convention!r}; "
                f"expected one of {INTENSITY_CONVENTIONS}"
            )
        if self.duration <= 0:
            raise ConfigError("pulse must have a positive duration")

    @property
    def period(self):
        """One optical cycle, 2*pi/omega."""
        return 2.0 * np.pi / self.omega

    @property
    def duration(self):
        return (2.0 * self.ramp_cycles + self.plateau_cycles) * self.period

    @property
    def amplitude(self):
        """Ebar: the field amplitude after the intensity-convention rescaling."""
        if self.intensity_convention == "fixed_mean_intensity":
            return self.e0 / np.sqrt(1.0 + self.epsilon**2)
        return self.e0

    def _segments(self):
        """Envelope pieces as (t_start, t_end, a, b) with f(t) = a + b*t."""
        t1 = self.ramp_cycles * self.period
        t2 = t1 + self.plateau_cycles * self.period
        t3 = self.duration
        segs = []
        if t1 > 0:
            segs.append((0.0, t1, 0.0, 1.0 / t1))
        if t2 > t1:
            segs.append((t1, t2, 1.0, 0.0))
        if t3 > t2:
            segs.append((t2, t3, t3 / (t3 - t2), -1.0 / (t3 - t2)))
        return segs

    def envelope_at(self, t):
        """Trapezoid in [0, 1]; 0 outside [0, duration]."""
        t = np.asarray(t, dtype=float)
        f = np.zeros_like(t)
        for (s0, s1, a, b) in self._segments():
            f = np.where((t >= s0) & (t <= s1), a + b * t, f)
        f = np.where((t < 0) | (t > self.duration), 0.0, f)
        return float(f) if f.ndim == 0 else f

    def field_at(self, t):
        """(Ex, Ey) at time t; zero before 0 and after the pulse ends."""
        t_arr = np.asarray(t, dtype=float)
        f = self.envelope_at(t_arr)
        ebar = self.amplitude
        ex = ebar * np.sin(self.omega * t_arr) * f
        ey = self.epsilon * ebar * np.cos(self.omega * t_arr) * f
        if t_arr.ndim == 0:
            return float(ex), float(ey)
        return ex, ey

    def vector_potential_at(self, t):
        """(Ax, Ay) = -integral_0^t E dt', in closed form.

        Beyond the pulse end the integrals are complete; for the whole-cycle
        ramps used here they sum to zero, so a free electron acquires no
        drift momentum.
        """
        t = np.asarray(t, dtype=float)
        w = self.omega
        ix = np.zeros_like(t)
        iy = np.zeros_like(t)
        for (s0, s1, a, b) in self._segments():
            # antiderivatives of (a + b*s) sin(ws) and (a + b*s) cos(ws)
            def int_sin(s):
                return -(a + b * s) * np.cos(w * s) / w + b * np.sin(w * s) / w**2

            def int_cos(s):
                return (a + b * s) * np.sin(w * s) / w + b * np.cos(w * s) / w**2

            sc = np.clip(t, s0, s1)
            ix += int_sin(sc) - int_sin(s0)
            iy += int_cos(sc) - int_cos(s0)
        ax = -self.amplitude * ix
        ay = -self.epsilon * self.amplitude * iy
        ax = np.where(t < 0, 0.0, ax)
        ay = np.where(t < 0, 0.0, ay)
        if t.ndim == 0:
            return float(ax), float(ay)
        return ax, ay


def envelope_at(pulse, t):
    return pulse.envelope_at(t)


def field_at(pulse, t):
    return pulse.field_at(t)


def vector_potential_at(pulse, t):
    return pulse.vector_potential_at(t)


def quiver_amplitude(pulse):
    """Classical excursion Ebar/omega^2; sets the minimum sensible box size."""
    return pulse.amplitude / pulse.omega**2


def ponderomotive_energy(pulse):
    """Up = Ebar^2 / (4 omega^2)."""
    return pulse.amplitude**2 / (4.0 * pulse.omega**2)
