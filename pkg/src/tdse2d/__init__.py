"""tdse2d: split-operator spectral solver for a 2D soft-core atom in strong laser fields.

The package propagates the two-dimensional time-dependent Schroedinger
equation for a single-active-electron model atom in an elliptically polarized
trapezoidal laser pulse, and extracts ionization yields, high-harmonic
spectra and probability-density snapshots.  All quantities are in atomic
units.
"""

from .config import RunConfig, load_config, manifest_text, parse_config, point_config
from .errors import (
    ConfigError,
    ConvergenceError,
    NumericalBlowupError,
    PartialScanError,
)
from .grid import (
    Grid2D,
    Wavefunction,
    build_grid,
    forward_fft,
    gaussian_wavepacket,
    inner_product,
    inverse_fft,
    momentum_amplitudes,
    norm,
)
from .observables import (
    DensitySnapshot,
    ObservableSeries,
    SnapshotRecorder,
    Spectrum,
    density_snapshot,
    dipole_acceleration,
    dipole_expectation,
    harmonic_contrast_db,
    hhg_spectrum,
    is_harmonic_visible,
    max_visible_harmonic,
    snapshot_moments,
)
from .outputs import (
    load_wavefunction,
    read_snapshot,
    read_timeseries,
    save_wavefunction,
    write_snapshot,
    write_spectrum,
    write_timeseries,
)
from .physics import (
    LaserPulse,
    SoftCorePotential,
    envelope_at,
    field_at,
    field_to_intensity,
    intensity_to_field,
    ponderomotive_energy,
    potential_at,
    quiver_amplitude,
    vector_potential_at,
    wavelength_to_omega,
)
from .propagator import (
    GroundStateResult,
    Propagator,
    PropagatorConfig,
    absorber_mask,
    apply_absorber,
    energy_expectation,
    imaginary_time_ground_state,
    propagate_pulse,
    split_step,
)
from .runner import (
    RunResult,
    ScanResult,
    convergence_check,
    relax_ground_state,
    run_ellipticity_scan,
    run_intensity_scan,
    run_scan,
    run_single,
)

__version__ = "0.1.0"
