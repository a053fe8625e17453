import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

import tdse2d as t
from tdse2d.errors import ConfigError

OMEGA = 0.0867


def paper_pulse(eps=0.0, convention="fixed_Ex"):
    return t.LaserPulse(e0=0.1, omega=OMEGA, epsilon=eps, intensity_convention=convention)


def test_potential_at_origin():
    pot = t.SoftCorePotential(a=0.8)
    assert pot(0.0, 0.0) == pytest.approx(-1.25, rel=1e-15)


def test_potential_unit_radius():
    pot = t.SoftCorePotential(a=0.8)
    assert pot(0.6, 0.0) == pytest.approx(-1.0, rel=1e-14)


def test_potential_coulomb_tail():
    pot = t.SoftCorePotential(a=0.8)
    assert pot(100.0, 0.0) == pytest.approx(-1.0 / 100.0, abs=4e-5)
    assert pot(100.0, 0.0) < 0


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(-100, 100, allow_nan=False),
    y=st.floats(-100, 100, allow_nan=False),
)
def test_potential_symmetries(x, y):
    pot = t.SoftCorePotential(a=0.8)
    v = pot(x, y)
    assert v < 0
    assert pot(-x, y) == pytest.approx(v, rel=1e-15)
    assert pot(x, -y) == pytest.approx(v, rel=1e-15)
    assert pot(-x, -y) == pytest.approx(v, rel=1e-15)
    assert pot(y, x) == pytest.approx(v, rel=1e-15)


def test_potential_gradient_is_analytic_derivative():
    pot = t.SoftCorePotential(a=0.8)
    x, y, h = 1.3, -0.7, 1e-6
    gx, gy = pot.gradient(x, y)
    assert gx == pytest.approx((pot(x + h, y) - pot(x - h, y)) / (2 * h), abs=1e-9)
    assert gy == pytest.approx((pot(x, y + h) - pot(x, y - h)) / (2 * h), abs=1e-9)


def test_field_linear_polarization_has_no_y():
    pulse = paper_pulse(eps=0.0)
    for tt in np.linspace(0.0, pulse.duration, 57):
        assert pulse.field_at(tt)[1] == 0.0


def test_field_zero_at_start():
    pulse = paper_pulse(eps=0.7)
    assert pulse.field_at(0.0) == (0.0, 0.0)


def test_field_circular_constant_magnitude_on_plateau():
    pulse = paper_pulse(eps=1.0, convention="fixed_Ex")
    for tt in np.linspace(2.2 * pulse.period, 3.8 * pulse.period, 41):
        ex, ey = pulse.field_at(tt)
        assert ex**2 + ey**2 == pytest.approx(0.1**2, rel=1e-12)


def test_fixed_mean_intensity_rescaling():
    pulse = paper_pulse(eps=1.0, convention="fixed_mean_intensity")
    assert pulse.amplitude == pytest.approx(0.1 / np.sqrt(2.0), rel=1e-15)


def test_envelope_breakpoints():
    pulse = paper_pulse()
    tc = pulse.period
    assert pulse.envelope_at(0.0) == 0.0
    assert pulse.envelope_at(2 * tc) == pytest.approx(1.0, abs=1e-14)
    assert pulse.envelope_at(4 * tc) == pytest.approx(1.0, abs=1e-14)
    assert pulse.envelope_at(6 * tc) == pytest.approx(0.0, abs=1e-14)
    assert pulse.envelope_at(1 * tc) == pytest.approx(0.5, rel=1e-12)
    assert pulse.envelope_at(6.001 * tc) == 0.0


@pytest.mark.parametrize("breakpoint_cycles", [2.0, 4.0, 6.0])
def test_envelope_continuity_at_breakpoints(breakpoint_cycles):
    pulse = paper_pulse()
    tb = breakpoint_cycles * pulse.period
    left = pulse.envelope_at(tb - 1e-9)
    right = pulse.envelope_at(tb + 1e-9)
    assert left == pytest.approx(right, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(u=st.floats(0.0, 1.0, allow_nan=False))
def test_envelope_bounded(u):
    pulse = paper_pulse()
    f = pulse.envelope_at(u * pulse.duration)
    assert 0.0 <= f <= 1.0


def test_vector_potential_zero_at_start_and_for_linear_y():
    pulse = paper_pulse(eps=0.0)
    assert pulse.vector_potential_at(0.0) == (0.0, 0.0)
    for tt in np.linspace(0.0, pulse.duration, 23):
        assert pulse.vector_potential_at(tt)[1] == 0.0


def test_vector_potential_matches_adaptive_quadrature():
    # Independent oracle: high-order adaptive quadrature of -E(t), split at
    # the envelope breakpoints.  Closed form must agree to 1e-10.
    pulse = paper_pulse(eps=0.6)
    tc = pulse.period
    breaks = [2 * tc, 4 * tc]
    for t_end in [0.7 * tc, 2.5 * tc, 4.3 * tc, pulse.duration]:
        pts = [b for b in breaks if b < t_end]
        ox = -quad(lambda s: pulse.field_at(s)[0], 0.0, t_end, points=pts,
                   limit=300, epsabs=1e-13, epsrel=1e-13)[0]
        oy = -quad(lambda s: pulse.field_at(s)[1], 0.0, t_end, points=pts,
                   limit=300, epsabs=1e-13, epsrel=1e-13)[0]
        ax, ay = pulse.vector_potential_at(t_end)
        assert ax == pytest.approx(ox, abs=1e-10)
        assert ay == pytest.approx(oy, abs=1e-10)


def test_vector_potential_vanishes_after_whole_cycle_pulse():
    # whole-cycle trapezoid => no residual drift momentum
    for eps in (0.0, 0.5, 1.0):
        pulse = paper_pulse(eps=eps)
        ax, ay = pulse.vector_potential_at(pulse.duration)
        assert abs(ax) < 1e-12
        assert abs(ay) < 1e-12
        ax2, ay2 = pulse.vector_potential_at(1.7 * pulse.duration)
        assert abs(ax2) < 1e-12 and abs(ay2) < 1e-12


def test_vector_potential_derivative_reproduces_field():
    # -dA/dt = E away from the envelope breakpoints, to O(h^2)
    pulse = paper_pulse(eps=0.8)
    h = 1e-4
    for tt in [0.9 * pulse.period, 3.1 * pulse.period, 5.2 * pulse.period]:
        axp, ayp = pulse.vector_potential_at(tt + h)
        axm, aym = pulse.vector_potential_at(tt - h)
        ex, ey = pulse.field_at(tt)
        assert -(axp - axm) / (2 * h) == pytest.approx(ex, abs=1e-7)
        assert -(ayp - aym) / (2 * h) == pytest.approx(ey, abs=1e-7)


def test_vector_potential_continuous_at_breakpoints():
    pulse = paper_pulse(eps=1.0)
    for b in (2.0, 4.0, 6.0):
        tb = b * pulse.period
        am = pulse.vector_potential_at(tb - 1e-10)
        ap = pulse.vector_potential_at(tb + 1e-10)
        assert am[0] == pytest.approx(ap[0], abs=1e-11)
        assert am[1] == pytest.approx(ap[1], abs=1e-11)


def test_intensity_conversion_paper_value():
    assert t.intensity_to_field(3.51e14, "Wcm2") == pytest.approx(0.1, rel=1e-12)
    assert t.intensity_to_field(0.01, "au") == pytest.approx(0.1, rel=1e-15)


def test_intensity_conversion_edge_values():
    assert t.intensity_to_field(0.0, "au") == 0.0
    assert t.intensity_to_field(3.51e16, "Wcm2") == pytest.approx(1.0, rel=1e-12)
    assert t.field_to_intensity(t.intensity_to_field(0.037, "au")) == pytest.approx(0.037, rel=1e-12)


def test_negative_intensity_rejected():
    with pytest.raises(ConfigError):
        t.intensity_to_field(-1.0, "au")


def test_wavelength_526nm_gives_paper_omega():
    assert t.wavelength_to_omega(526.0) == pytest.approx(0.0867, abs=0.0005)


def test_pulse_validation():
    with pytest.raises(ConfigError):
        t.LaserPulse(e0=0.1, epsilon=1.5)
    with pytest.raises(ConfigError):
        t.LaserPulse(e0=-0.1)
    with pytest.raises(ConfigError):
        t.LaserPulse(e0=0.1, omega=0.0)
    with pytest.raises(ConfigError):
        t.LaserPulse(e0=0.1, intensity_convention="nonsense")


def test_pulse_duration_and_quiver():
    pulse = paper_pulse()
    assert pulse.duration == pytest.approx(6 * 2 * np.pi / OMEGA, rel=1e-15)
    assert t.quiver_amplitude(pulse) == pytest.approx(0.1 / OMEGA**2, rel=1e-15)
    assert t.ponderomotive_energy(pulse) == pytest.approx(0.01 / (4 * OMEGA**2), rel=1e-15)
