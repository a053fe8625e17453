"""File formats: CSV tables, the binary snapshot format, saved wavefunctions.

All text output is UTF-8 with LF newlines and floats printed with 17
significant digits (lossless round-trip for doubles), so identical runs
produce bit-identical files.  Files are written atomically (temp + rename).

Snapshot binary layout (little-endian):

    magic  8 bytes  b"TDSE2Dv1"
    u32    nx
    u32    ny
    f64    dx, dy, x0, y0, t
    f64[nx*ny] density, row-major with x fastest
"""

import os
import struct
import tempfile

import numpy as np

from .errors import ConfigError
from .grid import Grid2D, Wavefunction
from .observables import DensitySnapshot, ObservableSeries

SNAPSHOT_MAGIC = b"TDSE2Dv1"
_HEADER = struct.Struct("<IIddddd")

TIMESERIES_COLUMNS = (
    "t_au", "norm2", "dip_x_au", "dip_y_au", "acc_x_au", "acc_y_au", "field_x_au", "field_y_au",
)


def fmt_float(v):
    return f"{float(v):.17g}"


def atomic_write_bytes(path, data):
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def _meta_lines(meta):
    return [f"# {k} = {v}" for k, v in meta.items()]


def write_timeseries(path, series, meta=None):
    """One CSV row per recorded step; '#' comment lines carry run metadata."""
    meta = dict(meta or {})
    meta.setdefault("dt_au", fmt_float(series.dt))
    meta.setdefault("omega_au", fmt_float(series.omega))
    lines = _meta_lines(meta)
    lines.append(",".join(TIMESERIES_COLUMNS))
    cols = (
        series.times, series.norm2, series.dip_x, series.dip_y,
        series.acc_x, series.acc_y, series.field_x, series.field_y,
    )
    for row in zip(*cols):
        lines.append(",".join(fmt_float(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_timeseries(path):
    """Inverse of :func:`write_timeseries`; needs the dt/omega metadata lines."""
    meta = {}
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = (s.strip() for s in body.split("=", 1))
                    meta[k] = v
                continue
            if header is None:
                header = line.split(",")
                if tuple(header) != TIMESERIES_COLUMNS:
                    raise ConfigError(
                        f"unexpected time-series columns in {path}: {header}"
                    )
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise ConfigError(f"no time-series data in {path}")
    if "dt_au" not in meta or "omega_au" not in meta:
        raise ConfigError(f"time-series file {path} lacks dt_au/omega_au metadata")
    arr = np.array(rows)
    return ObservableSeries(
        times=arr[:, 0], norm2=arr[:, 1], dip_x=arr[:, 2], dip_y=arr[:, 3],
        acc_x=arr[:, 4], acc_y=arr[:, 5], field_x=arr[:, 6], field_y=arr[:, 7],
        dt=float(meta["dt_au"]), omega=float(meta["omega_au"]),
    ), meta


def write_spectrum(path, spec, meta=None):
    meta = dict(meta or {})
    meta.setdefault("source", spec.source)
    meta.setdefault("window", spec.window)
    meta.setdefault("rescaled_to_fundamental", "true" if spec.rescaled else "false")
    meta.setdefault("omega_au", fmt_float(spec.omega))
    lines = _meta_lines(meta)
    lines.append("harmonic_order,power,power_x,power_y")
    for row in zip(spec.harmonic_order, spec.power, spec.power_x, spec.power_y):
        lines.append(",".join(fmt_float(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_scan_table(path, columns, rows, meta=None):
    """Generic scan table: `columns` names, `rows` as sequences of cells."""
    lines = _meta_lines(dict(meta or {}))
    lines.append(",".join(columns))
    for row in rows:
        cells = [c if isinstance(c, str) else fmt_float(c) for c in row]
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_snapshot(path, snap):
    header = _HEADER.pack(
        snap.nx, snap.ny, snap.dx, snap.dy, snap.x0, snap.y0, snap.t
    )
    density = np.ascontiguousarray(snap.density, dtype="<f8")
    if density.shape != (snap.ny, snap.nx):
        raise ValueError(f"density shape {density.shape} does not match ({snap.ny}, {snap.nx})")
    atomic_write_bytes(path, SNAPSHOT_MAGIC + header + density.tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise ConfigError(f"{path} is not a TDSE2Dv1 snapshot file")
    off = len(SNAPSHOT_MAGIC)
    nx, ny, dx, dy, x0, y0, t = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    expected = nx * ny * 8
    if len(data) - off != expected:
        raise ConfigError(
            f"{path}: payload size {len(data) - off} does not match nx*ny*8 = {expected}"
        )
    density = np.frombuffer(data, dtype="<f8", offset=off).reshape(ny, nx).copy()
    return DensitySnapshot(nx=nx, ny=ny, dx=dx, dy=dy, x0=x0, y0=y0, t=t, density=density)


def snapshot_info_text(path):
    snap = read_snapshot(path)
    den = snap.density
    return "\n".join([
        f"file: {os.fspath(path)}",
        "format: TDSE2Dv1",
        f"nx = {snap.nx}",
        f"ny = {snap.ny}",
        f"dx = {fmt_float(snap.dx)} au",
        f"dy = {fmt_float(snap.dy)} au",
        f"x0 = {fmt_float(snap.x0)} au",
        f"y0 = {fmt_float(snap.y0)} au",
        f"t = {fmt_float(snap.t)} au",
        f"integrated probability = {fmt_float(den.sum() * snap.dx * snap.dy)}",
        f"max density = {fmt_float(den.max())}",
    ])


def save_wavefunction(path, wf, **scalars):
    """NPZ with the amplitude and grid metadata; extra scalars are stored verbatim."""
    g = wf.grid
    np.savez(
        path,
        amp=wf.amp,
        nx=g.nx, ny=g.ny, dx=g.dx, dy=g.dy,
        **scalars,
    )


def load_wavefunction(path):
    with np.load(path) as data:
        grid = Grid2D(int(data["nx"]), int(data["ny"]), float(data["dx"]), float(data["dy"]))
        wf = Wavefunction(grid, data["amp"])
        extras = {
            k: data[k].item() if data[k].ndim == 0 else data[k]
            for k in data.files
            if k not in ("amp", "nx", "ny", "dx", "dy")
        }
    return wf, extras
