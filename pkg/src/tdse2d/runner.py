"""Single runs, parameter scans and their file outputs.

Every run directory receives a ``manifest.cfg`` (a fully resolved, re-runnable
config), ``timeseries.csv``, ``spectrum.csv`` and any requested density
snapshots.  Scans add a top-level table CSV; each scan point is an independent
job and failed points are recorded without aborting the rest.

Nothing here depends on wall-clock time or iteration order of dictionaries,
so identical configs produce bit-identical outputs, serial or parallel.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .config import manifest_text, point_config
from .errors import NumericalBlowupError, PartialScanError
from .grid import Grid2D
from .observables import hhg_spectrum, max_visible_harmonic, SnapshotRecorder
from .outputs import (
    fmt_float,
    atomic_write_text,
    load_wavefunction,
    save_wavefunction,
    write_scan_table,
    write_snapshot,
    write_spectrum,
    write_timeseries,
)
from .physics import LaserPulse, SoftCorePotential, intensity_to_field
from .propagator import (
    GroundStateResult,
    PropagatorConfig,
    imaginary_time_ground_state,
    propagate_pulse,
)

VISIBILITY_THRESHOLD_DB = 10.0
VISIBILITY_MAX_ORDER = 25


def build_objects(cfg):
    """(grid, potential, pulse, propagator config) from a RunConfig."""
    grid = Grid2D(cfg.nx, cfg.ny, cfg.dx, cfg.dy)
    pot = SoftCorePotential(a=cfg.softening)
    pulse = LaserPulse(
        e0=intensity_to_field(cfg.intensity_au, "au"),
        omega=cfg.omega_au,
        epsilon=cfg.ellipticity,
        ramp_cycles=cfg.ramp_cycles,
        plateau_cycles=cfg.plateau_cycles,
        intensity_convention=cfg.intensity_convention,
    )
    pcfg = PropagatorConfig(
        dt=cfg.dt,
        gauge=cfg.gauge,
        absorber_width=cfg.absorber_width_au,
        absorber_exponent=cfg.absorber_exponent,
        imaginary_time_tol=cfg.imaginary_time_tol,
        dt_imag=cfg.dt_imag,
        fft_workers=cfg.fft_workers,
    )
    return grid, pot, pulse, pcfg


def relax_ground_state(cfg, seed=None):
    grid, pot, _, pcfg = build_objects(cfg)
    return imaginary_time_ground_state(pot, grid, pcfg, seed=seed)


def _load_seed(path, grid):
    wf, extras = load_wavefunction(path)
    if wf.grid != grid:
        raise ValueError(
            f"seed state grid {wf.grid!r} does not match configured grid {grid!r}"
        )
    return wf


@dataclass
class RunResult:
    config: object
    out_dir: str | None
    ground_energy: float
    relax_iterations: int
    final_norm2: float
    ionization_yield: float
    series: object
    spectrum: object
    snapshots: list
    dt_effective: float
    nsteps: int


def _manifest_comments(cfg, pulse, extra=()):
    lines = [
        f"field amplitude E0 = {fmt_float(pulse.e0)} au "
        f"(Ebar after convention '{cfg.intensity_convention}': {fmt_float(pulse.amplitude)} au)",
        f"pulse duration = {fmt_float(pulse.duration)} au "
        f"({fmt_float(2 * cfg.ramp_cycles + cfg.plateau_cycles)} cycles)",
    ]
    lines.extend(extra)
    return lines


def run_single(cfg, out_dir=None, ground_state=None, seed_state=None):
    """Relax (or reuse) the ground state, propagate, analyze, write outputs."""
    cfg.validate()
    grid, pot, pulse, pcfg = build_objects(cfg)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    if ground_state is None:
        seed = _load_seed(seed_state, grid) if seed_state else None
        ground_state = imaginary_time_ground_state(pot, grid, pcfg, seed=seed)

    recorder = None
    hooks = ()
    tail = cfg.tail_cycles * pulse.period
    total = pulse.duration + tail
    nsteps = int(round(total / cfg.dt))
    dt_eff = total / nsteps
    if cfg.snapshot_times_cycles:
        times = [c * pulse.period for c in cfg.snapshot_times_cycles]
        recorder = SnapshotRecorder(times, total, dt_eff)
        hooks = (recorder,)

    try:
        final_wf, series = propagate_pulse(
            ground_state.psi0, pulse, pot, pcfg, hooks=hooks, tail=tail
        )
    except NumericalBlowupError as err:
        if out_dir is not None:
            comments = _manifest_comments(
                cfg, pulse, [f"status = blowup at step {err.step}"]
            )
            atomic_write_text(
                os.path.join(out_dir, "manifest.cfg"), manifest_text(cfg, comments)
            )
        raise

    spectrum = hhg_spectrum(
        series,
        source=cfg.spectrum_source,
        window=cfg.spectrum_window,
        rescale=cfg.rescale_spectrum,
    )
    final_norm2 = float(series.norm2[-1])
    result = RunResult(
        config=cfg,
        out_dir=None if out_dir is None else os.fspath(out_dir),
        ground_energy=ground_state.energy,
        relax_iterations=ground_state.iterations,
        final_norm2=final_norm2,
        ionization_yield=1.0 - final_norm2,
        series=series,
        spectrum=spectrum,
        snapshots=list(recorder.snapshots) if recorder else [],
        dt_effective=series.dt,
        nsteps=len(series) - 1,
    )

    if out_dir is not None:
        comments = _manifest_comments(cfg, pulse, [
            f"effective dt = {fmt_float(series.dt)} au over {result.nsteps} steps",
            f"ground state energy = {fmt_float(ground_state.energy)} au "
            f"({ground_state.iterations} relaxation iterations)",
            f"final norm^2 = {fmt_float(final_norm2)}",
            f"ionization yield = {fmt_float(result.ionization_yield)}",
            "status = ok",
        ])
        atomic_write_text(os.path.join(out_dir, "manifest.cfg"), manifest_text(cfg, comments))
        meta = {
            "intensity_convention": cfg.intensity_convention,
            "gauge": cfg.gauge,
            "ellipticity": fmt_float(cfg.ellipticity),
            "intensity_au": fmt_float(cfg.intensity_au),
        }
        write_timeseries(os.path.join(out_dir, "timeseries.csv"), series, meta)
        write_spectrum(os.path.join(out_dir, "spectrum.csv"), spectrum, meta)
        for idx, snap in enumerate(result.snapshots):
            write_snapshot(os.path.join(out_dir, f"snapshot_{idx:02d}.bin"), snap)
    return result


def relax_to_file(cfg, out_dir, seed_state=None):
    """Ground-state relaxation only; saves the state and a manifest."""
    cfg.validate()
    grid, pot, pulse, pcfg = build_objects(cfg)
    os.makedirs(out_dir, exist_ok=True)
    seed = _load_seed(seed_state, grid) if seed_state else None
    gs = imaginary_time_ground_state(pot, grid, pcfg, seed=seed)
    path = os.path.join(out_dir, "ground_state.npz")
    save_wavefunction(path, gs.psi0, energy=gs.energy, iterations=gs.iterations)
    comments = _manifest_comments(cfg, pulse, [
        f"ground state energy = {fmt_float(gs.energy)} au ({gs.iterations} relaxation iterations)",
        "status = ok (relax only)",
    ])
    atomic_write_text(os.path.join(out_dir, "manifest.cfg"), manifest_text(cfg, comments))
    return gs, path


@dataclass
class ScanResult:
    out_dir: str
    table_path: str
    columns: tuple
    rows: list
    failures: list


def _scan_point(payload):
    """Worker for one scan point; returns a light summary (pool-friendly)."""
    cfg = payload["cfg"]
    out_dir = payload["out_dir"]
    gs = GroundStateResult(
        psi0=payload["psi0"], energy=payload["energy"], iterations=payload["iterations"]
    )
    try:
        res = run_single(cfg, out_dir=out_dir, ground_state=gs)
    except NumericalBlowupError as err:
        return {"status": f"blowup at step {err.step}"}
    except Exception as err:  # per-point failures recorded, scan continues
        return {"status": f"error: {err}"}
    return {
        "status": "ok",
        "final_norm2": res.final_norm2,
        "ionization_yield": res.ionization_yield,
        "max_visible_harmonic": max_visible_harmonic(
            res.spectrum, VISIBILITY_THRESHOLD_DB, orders=range(1, VISIBILITY_MAX_ORDER + 1)
        ),
    }


def _run_points(payloads, jobs):
    if jobs <= 1:
        return [_scan_point(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_scan_point, payloads))


def run_ellipticity_scan(cfg, out_dir, jobs=1, seed_state=None):
    """One propagation per ellipticity; table rescaled so the eps=0 point maps to 1."""
    cfg.validate(for_scan=True)
    if cfg.scan_variable != "ellipticity":
        raise PartialScanError("config does not define an ellipticity scan")
    os.makedirs(out_dir, exist_ok=True)
    grid, pot, pulse, pcfg = build_objects(cfg)
    seed = _load_seed(seed_state, grid) if seed_state else None
    gs = imaginary_time_ground_state(pot, grid, pcfg, seed=seed)

    payloads = []
    for i, eps in enumerate(cfg.scan_values):
        pc = point_config(cfg, ellipticity=eps)
        payloads.append({
            "cfg": pc,
            "out_dir": os.path.join(out_dir, f"point_{i:03d}_eps_{eps:g}"),
            "psi0": gs.psi0,
            "energy": gs.energy,
            "iterations": gs.iterations,
        })
    summaries = _run_points(payloads, jobs)

    # rescale against the eps=0 point when present, else the first surviving point
    ok_points = [(eps, s) for eps, s in zip(cfg.scan_values, summaries) if s["status"] == "ok"]
    ref = next((s for eps, s in ok_points if eps == 0.0), ok_points[0][1] if ok_points else None)
    ref_yield = ref["ionization_yield"] if ref else None
    ref_norm2 = ref["final_norm2"] if ref else None

    columns = (
        "ellipticity", "final_norm2", "ionization_yield",
        "rescaled_yield", "rescaled_norm2", "max_visible_harmonic", "status",
    )
    rows = []
    failures = []
    for eps, s in zip(cfg.scan_values, summaries):
        if s["status"] != "ok":
            rows.append((eps, float("nan"), float("nan"), float("nan"), float("nan"),
                         float("nan"), s["status"]))
            failures.append((f"eps={eps:g}", s["status"]))
            continue
        ry = s["ionization_yield"] / ref_yield if ref_yield else float("nan")
        rn = s["final_norm2"] / ref_norm2 if ref_norm2 else float("nan")
        rows.append((
            eps, s["final_norm2"], s["ionization_yield"], ry, rn,
            float(s["max_visible_harmonic"]), "ok",
        ))

    meta = {
        "scan_variable": "ellipticity",
        "intensity_au": fmt_float(cfg.intensity_au),
        "omega_au": fmt_float(cfg.omega_au),
        "intensity_convention": cfg.intensity_convention,
        "gauge": cfg.gauge,
        "rescaling_reference": "ellipticity = 0" if ref_yield is not None else "none",
        "visibility_criterion": f"peak >= {VISIBILITY_THRESHOLD_DB} dB above local floor",
    }
    table_path = os.path.join(out_dir, "scan_ellipticity.csv")
    write_scan_table(table_path, columns, rows, meta)
    atomic_write_text(
        os.path.join(out_dir, "manifest.cfg"),
        manifest_text(cfg, _manifest_comments(cfg, pulse, ["scan = ellipticity"])),
    )
    return ScanResult(os.fspath(out_dir), table_path, columns, rows, failures)


def run_intensity_scan(cfg, out_dir, jobs=1, seed_state=None):
    """Propagations on an intensity grid for each requested ellipticity."""
    cfg.validate(for_scan=True)
    if cfg.scan_variable != "intensity":
        raise PartialScanError("config does not define an intensity scan")
    os.makedirs(out_dir, exist_ok=True)
    grid, pot, pulse, pcfg = build_objects(cfg)
    seed = _load_seed(seed_state, grid) if seed_state else None
    gs = imaginary_time_ground_state(pot, grid, pcfg, seed=seed)

    eps_list = tuple(cfg.scan_ellipticities)
    payloads = []
    for i, intensity in enumerate(cfg.scan_values):
        for eps in eps_list:
            pc = point_config(cfg, intensity_au=intensity, ellipticity=eps)
            payloads.append({
                "cfg": pc,
                "out_dir": os.path.join(out_dir, f"point_{i:03d}_I_{intensity:.6g}_eps_{eps:g}"),
                "psi0": gs.psi0,
                "energy": gs.energy,
                "iterations": gs.iterations,
            })
    summaries = _run_points(payloads, jobs)

    columns = ["intensity_au"]
    for eps in eps_list:
        columns += [f"norm2_eps{eps:g}", f"yield_eps{eps:g}", f"status_eps{eps:g}"]
    rows = []
    failures = []
    k = 0
    for intensity in cfg.scan_values:
        row = [intensity]
        for eps in eps_list:
            s = summaries[k]
            k += 1
            if s["status"] != "ok":
                row += [float("nan"), float("nan"), s["status"]]
                failures.append((f"I={intensity:g}, eps={eps:g}", s["status"]))
            else:
                row += [s["final_norm2"], s["ionization_yield"], "ok"]
        rows.append(tuple(row))

    meta = {
        "scan_variable": "intensity",
        "ellipticities": ", ".join(f"{e:g}" for e in eps_list),
        "omega_au": fmt_float(cfg.omega_au),
        "intensity_convention": cfg.intensity_convention,
        "gauge": cfg.gauge,
    }
    table_path = os.path.join(out_dir, "scan_intensity.csv")
    write_scan_table(table_path, tuple(columns), rows, meta)
    atomic_write_text(
        os.path.join(out_dir, "manifest.cfg"),
        manifest_text(cfg, _manifest_comments(cfg, pulse, ["scan = intensity"])),
    )
    return ScanResult(os.fspath(out_dir), table_path, tuple(columns), rows, failures)


def run_scan(cfg, out_dir, jobs=1, seed_state=None):
    cfg.validate(for_scan=True)
    if cfg.scan_variable == "ellipticity":
        return run_ellipticity_scan(cfg, out_dir, jobs=jobs, seed_state=seed_state)
    return run_intensity_scan(cfg, out_dir, jobs=jobs, seed_state=seed_state)


def convergence_check(cfg, out_dir, seed_state=None):
    """Run base config, then doubled resolution (dx/2, dt/2, same box); report deltas."""
    os.makedirs(out_dir, exist_ok=True)
    base = run_single(cfg, os.path.join(out_dir, "base"), seed_state=seed_state)
    fine_cfg = replace(
        cfg,
        nx=cfg.nx * 2, ny=cfg.ny * 2,
        dx=cfg.dx / 2.0, dy=cfg.dy / 2.0,
        dt=cfg.dt / 2.0,
        absorber_width_au=cfg.resolved_absorber_width(),
    )
    fine = run_single(fine_cfg, os.path.join(out_dir, "refined"))
    report = {
        "ground_energy_base": base.ground_energy,
        "ground_energy_refined": fine.ground_energy,
        "ground_energy_delta": fine.ground_energy - base.ground_energy,
        "final_norm2_base": base.final_norm2,
        "final_norm2_refined": fine.final_norm2,
        "final_norm2_delta": fine.final_norm2 - base.final_norm2,
        "yield_base": base.ionization_yield,
        "yield_refined": fine.ionization_yield,
        "yield_rel_change": (
            abs(fine.ionization_yield - base.ionization_yield) / base.ionization_yield
            if base.ionization_yield
            else float("nan")
        ),
    }
    lines = [f"{k} = {fmt_float(v)}" for k, v in report.items()]
    atomic_write_text(os.path.join(out_dir, "convergence.txt"), "\n".join(lines) + "\n")
    return report
