"""Line-oriented run configuration: parsing, validation, manifest rendering.

Grammar::

    # comment
    [pulse]
    intensity = 0.01 au          # or 3.51e14 Wcm2
    wavelength = 526 nm          # or omega = 0.0867 au
    ellipticity = 0.3

Five sections are recognized: [grid] [pulse] [propagator] [observables]
[scan].  Dimensioned scalars carry an explicit unit suffix (au | Wcm2 | nm);
dimensionless ones are bare.  List values are comma separated and may use
``logspace(start, stop, n)``.  Unknown sections or keys are rejected with
line-precise diagnostics.

A manifest is the same format with every parameter resolved (defaults
included, units normalized to a.u.), so re-parsing a manifest reproduces the
run exactly.
"""

import math
import re
from dataclasses import dataclass, replace

from .errors import ConfigError
from .physics import (
    DEFAULT_OMEGA_AU,
    INTENSITY_CONVENTIONS,
    intensity_to_field,
    wavelength_to_omega,
)

SECTIONS = ("grid", "pulse", "propagator", "observables", "scan")
SCAN_VARIABLES = ("ellipticity", "intensity")


@dataclass
class RunConfig:
    """Fully resolved parameters of a single run or scan (atomic units)."""

    # grid
    nx: int = 512
    ny: int = 512
    dx: float = 0.4
    dy: float = 0.4
    # pulse
    intensity_au: float = None  # required
    omega_au: float = DEFAULT_OMEGA_AU
    ellipticity: float = 0.0
    ramp_cycles: float = 2.0
    plateau_cycles: float = 2.0
    intensity_convention: str = "fixed_Ex"
    softening: float = 0.8
    # propagator
    dt: float = 0.05
    gauge: str = "velocity"
    absorber_width_au: float | None = None
    absorber_exponent: float = 0.125
    dt_imag: float = 0.02
    imaginary_time_tol: float = 1e-10
    tail_cycles: float = 0.0
    fft_workers: int = 1
    # observables
    spectrum_source: str = "acceleration"
    spectrum_window: str = "hann"
    rescale_spectrum: bool = False
    snapshot_times_cycles: tuple = ()
    # scan
    scan_variable: str | None = None
    scan_values: tuple = ()
    scan_ellipticities: tuple = (0.0, 1.0)

    def resolved_absorber_width(self):
        if self.absorber_width_au is None:
            return min(self.nx * self.dx, self.ny * self.dy) / 8.0
        return self.absorber_width_au

    def validate(self, for_scan=False):
        if self.intensity_au is None:
            raise ConfigError("missing required key 'intensity' in section [pulse]")
        if self.intensity_au < 0:
            raise ConfigError(f"intensity = {self.intensity_au} must be non-negative")
        if not 0.0 <= self.ellipticity <= 1.0:
            raise ConfigError(f"ellipticity = {self.ellipticity} outside [0, 1]")
        if self.omega_au <= 0:
            raise ConfigError(f"omega = {self.omega_au} must be positive")
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if n < 16 or (n & (n - 1)) != 0:
                raise ConfigError(f"{name} = {n} must be a power of two >= 16")
        for name, v in (("dx", self.dx), ("dy", self.dy), ("dt", self.dt),
                        ("dt_imag", self.dt_imag), ("imaginary_time_tol", self.imaginary_time_tol),
                        ("softening", self.softening), ("absorber_exponent", self.absorber_exponent)):
            if v <= 0:
                raise ConfigError(f"{name} = {v} must be positive")
        if self.ramp_cycles < 0 or self.plateau_cycles < 0:
            raise ConfigError("cycle counts must be non-negative")
        if 2 * self.ramp_cycles + self.plateau_cycles <= 0:
            raise ConfigError("pulse must have a positive duration")
        if self.tail_cycles < 0:
            raise ConfigError(f"tail_cycles = {self.tail_cycles} must be non-negative")
        if self.fft_workers < 1:
            raise ConfigError(f"fft_workers = {self.fft_workers} must be at least 1")
        if any(t < 0 for t in self.snapshot_times_cycles):
            raise ConfigError("snapshot times must be non-negative")
        if for_scan or self.scan_variable is not None:
            if self.scan_variable is None:
                raise ConfigError("scan requested but no 'variable' given in section [scan]")
            if not self.scan_values:
                raise ConfigError("scan requested but no 'values' given in section [scan]")
            if self.scan_variable == "ellipticity":
                bad = [v for v in self.scan_values if not 0.0 <= v <= 1.0]
                if bad:
                    raise ConfigError(f"scan values outside [0, 1]: ellipticity = {bad[0]}")
            else:
                bad = [v for v in self.scan_values if v <= 0]
                if bad:
                    raise ConfigError(f"scan intensities must be positive: intensity = {bad[0]}")
                for e in self.scan_ellipticities:
                    if not 0.0 <= e <= 1.0:
                        raise ConfigError(f"scan ellipticities outside [0, 1]: {e}")
        return self


def _parse_float(token, line_no):
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"line {line_no}: expected a number, got {token!r}") from None


def _parse_int(tokens, line_no, key):
    if len(tokens) != 1:
        raise ConfigError(f"line {line_no}: key '{key}' takes a single integer")
    try:
        return int(tokens[0])
    except ValueError:
        raise ConfigError(f"line {line_no}: key '{key}' expects an integer, got {tokens[0]!r}") from None


def _parse_bare(tokens, line_no, key):
    if len(tokens) != 1:
        raise ConfigError(f"line {line_no}: key '{key}' takes a single dimensionless number")
    return _parse_float(tokens[0], line_no)


def _parse_au(tokens, line_no, key):
    if len(tokens) != 2 or tokens[1] != "au":
        raise ConfigError(f"line {line_no}: key '{key}' requires an explicit 'au' unit suffix")
    return _parse_float(tokens[0], line_no)


def _parse_enum(allowed):
    def parse(tokens, line_no, key):
        if len(tokens) != 1 or tokens[0] not in allowed:
            raise ConfigError(
                f"line {line_no}: key '{key}' must be one of {', '.join(allowed)}"
            )
        return tokens[0]

    return parse


def _parse_bool(tokens, line_no, key):
    if len(tokens) == 1 and tokens[0].lower() in ("true", "false"):
        return tokens[0].lower() == "true"
    raise ConfigError(f"line {line_no}: key '{key}' must be true or false")


_LOGSPACE_RE = re.compile(r"^logspace\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*,\s*(\d+)\s*\)$")


def _parse_value_list(text, line_no, key, unit_choices=()):
    """Comma list of floats, or logspace(a, b, n); optional trailing unit token."""
    text = text.strip()
    unit = None
    if unit_choices:
        parts = text.rsplit(None, 1)
        if len(parts) == 2 and parts[1] in unit_choices:
            text, unit = parts
        else:
            raise ConfigError(
                f"line {line_no}: key '{key}' requires a trailing unit "
                f"({' | '.join(unit_choices)})"
            )
    m = _LOGSPACE_RE.match(text.replace(" ", "")) or _LOGSPACE_RE.match(text)
    if m:
        start = _parse_float(m.group(1), line_no)
        stop = _parse_float(m.group(2), line_no)
        n = int(m.group(3))
        if start <= 0 or stop <= 0 or n < 2:
            raise ConfigError(f"line {line_no}: logspace needs positive bounds and n >= 2")
        step = (math.log10(stop) - math.log10(start)) / (n - 1)
        values = tuple(10.0 ** (math.log10(start) + i * step) for i in range(n))
    else:
        tokens = [t.strip() for t in text.split(",") if t.strip()]
        if not tokens:
            raise ConfigError(f"line {line_no}: key '{key}' needs at least one value")
        values = tuple(_parse_float(t, line_no) for t in tokens)
    return values, unit


class _Parser:
    """Accumulates key assignments with duplicate and cross-key checks."""

    def __init__(self):
        self.cfg_kwargs = {}
        self.seen = {}
        self.omega_source = None  # 'omega' or 'wavelength'
        self.scan_values_raw = None

    def assign(self, attr, value, line_no, key):
        if attr in self.seen:
            raise ConfigError(
                f"line {line_no}: key '{key}' already set on line {self.seen[attr]}"
            )
        self.seen[attr] = line_no
        self.cfg_kwargs[attr] = value


def _handle_pulse_key(p, key, tokens, rest, line_no):
    if key == "intensity":
        if len(tokens) != 2 or tokens[1] not in ("au", "Wcm2"):
            raise ConfigError(
                f"line {line_no}: key 'intensity' requires a unit suffix (au | Wcm2)"
            )
        value = _parse_float(tokens[0], line_no)
        e0 = intensity_to_field(value, tokens[1])  # validates sign
        p.assign("intensity_au", e0**2, line_no, key)
    elif key == "wavelength":
        if len(tokens) != 2 or tokens[1] != "nm":
            raise ConfigError(f"line {line_no}: key 'wavelength' requires the 'nm' unit suffix")
        if p.omega_source:
            raise ConfigError(
                f"line {line_no}: both wavelength and omega given; specify only one"
            )
        p.omega_source = "wavelength"
        p.assign("omega_au", wavelength_to_omega(_parse_float(tokens[0], line_no)), line_no, key)
    elif key == "omega":
        if p.omega_source:
            raise ConfigError(
                f"line {line_no}: both wavelength and omega given; specify only one"
            )
        p.omega_source = "omega"
        p.assign("omega_au", _parse_au(tokens, line_no, key), line_no, key)
    elif key == "ellipticity":
        p.assign("ellipticity", _parse_bare(tokens, line_no, key), line_no, key)
    elif key == "ramp_cycles":
        p.assign("ramp_cycles", _parse_bare(tokens, line_no, key), line_no, key)
    elif key == "plateau_cycles":
        p.assign("plateau_cycles", _parse_bare(tokens, line_no, key), line_no, key)
    elif key == "intensity_convention":
        p.assign(
            "intensity_convention",
            _parse_enum(INTENSITY_CONVENTIONS)(tokens, line_no, key),
            line_no,
            key,
        )
    elif key == "softening":
        p.assign("softening", _parse_au(tokens, line_no, key), line_no, key)
    else:
        raise ConfigError(f"line {line_no}: unknown key '{key}' in section [pulse]")


def _handle_grid_key(p, key, tokens, rest, line_no):
    if key in ("nx", "ny"):
        p.assign(key, _parse_int(tokens, line_no, key), line_no, key)
    elif key in ("dx", "dy"):
        p.assign(key, _parse_au(tokens, line_no, key), line_no, key)
    else:
        raise ConfigError(f"line {line_no}: unknown key '{key}' in section [grid]")


def _handle_propagator_key(p, key, tokens, rest, line_no):
    if key == "dt":
        p.assign("dt", _parse_au(tokens, line_no, key), line_no, key)
    elif key == "gauge":
        p.assign("gauge", _parse_enum(("velocity", "length"))(tokens, line_no, key), line_no, key)
    elif key == "absorber_width":
        p.assign("absorber_width_au", _parse_au(tokens, line_no, key), line_no, key)
    elif key == "absorber_exponent":
        p.assign("absorber_exponent", _parse_bare(tokens, line_no, key), line_no, key)
    elif key == "dt_imag":
        p.assign("dt_imag", _parse_au(tokens, line_no, key), line_no, key)
    elif key == "imaginary_time_tol":
        p.assign("imaginary_time_tol", _parse_au(tokens, line_no, key), line_no, key)
    elif key == "tail_cycles":
        p.assign("tail_cycles", _parse_bare(tokens, line_no, key), line_no, key)
    elif key == "fft_workers":
        p.assign("fft_workers", _parse_int(tokens, line_no, key), line_no, key)
    else:
        raise ConfigError(f"line {line_no}: unknown key '{key}' in section [propagator]")


def _handle_observables_key(p, key, tokens, rest, line_no):
    if key == "spectrum_source":
        p.assign(
            "spectrum_source", _parse_enum(("dipole", "acceleration"))(tokens, line_no, key), line_no, key
        )
    elif key == "spectrum_window":
        p.assign("spectrum_window", _parse_enum(("none", "hann"))(tokens, line_no, key), line_no, key)
    elif key == "rescale_spectrum":
        p.assign("rescale_spectrum", _parse_bool(tokens, line_no, key), line_no, key)
    elif key == "snapshot_times_cycles":
        values, _ = _parse_value_list(rest, line_no, key)
        p.assign("snapshot_times_cycles", values, line_no, key)
    else:
        raise ConfigError(f"line {line_no}: unknown key '{key}' in section [observables]")


def _handle_scan_key(p, key, tokens, rest, line_no):
    if key == "variable":
        p.assign("scan_variable", _parse_enum(SCAN_VARIABLES)(tokens, line_no, key), line_no, key)
    elif key == "values":
        p.scan_values_raw = (rest, line_no)
    elif key == "ellipticities":
        values, _ = _parse_value_list(rest, line_no, key)
        p.assign("scan_ellipticities", values, line_no, key)
    else:
        raise ConfigError(f"line {line_no}: unknown key '{key}' in section [scan]")


_SECTION_HANDLERS = {
    "grid": _handle_grid_key,
    "pulse": _handle_pulse_key,
    "propagator": _handle_propagator_key,
    "observables": _handle_observables_key,
    "scan": _handle_scan_key,
}


def parse_config(text):
    """Parse configuration text into a validated :class:`RunConfig`."""
    p = _Parser()
    section = None
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^\[([A-Za-z_]+)\]$", line)
        if m:
            name = m.group(1)
            if name not in SECTIONS:
                raise ConfigError(
                    f"line {line_no}: unknown section [{name}]; expected one of "
                    + " ".join(f"[{s}]" for s in SECTIONS)
                )
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"line {line_no}: key outside of any section")
        key, rest = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {line_no}: empty key")
        tokens = rest.split()
        _SECTION_HANDLERS[section](p, key, tokens, rest, line_no)

    # scan values need the scan variable to pick the unit rule
    if p.scan_values_raw is not None:
        rest, line_no = p.scan_values_raw
        variable = p.cfg_kwargs.get("scan_variable")
        if variable is None:
            raise ConfigError(f"line {line_no}: scan 'values' given without a 'variable'")
        if variable == "intensity":
            values, unit = _parse_value_list(rest, line_no, "values", unit_choices=("au", "Wcm2"))
            if unit == "Wcm2":
                values = tuple(intensity_to_field(v, "Wcm2") ** 2 for v in values)
        else:
            values, _ = _parse_value_list(rest, line_no, "values")
        p.cfg_kwargs["scan_values"] = values

    cfg = RunConfig(**p.cfg_kwargs)
    return cfg.validate()


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return f"{v:.17g}"


def manifest_text(cfg, header_comments=()):
    """Render a config with every parameter resolved; valid input to parse_config."""
    lines = ["# tdse2d manifest: all parameters resolved, re-runnable as a config file."]
    for comment in header_comments:
        lines.append(f"# {comment}")
    lines += [
        "",
        "[grid]",
        f"nx = {cfg.nx}",
        f"ny = {cfg.ny}",
        f"dx = {_fmt(cfg.dx)} au",
        f"dy = {_fmt(cfg.dy)} au",
        "",
        "[pulse]",
        f"intensity = {_fmt(cfg.intensity_au)} au",
        f"omega = {_fmt(cfg.omega_au)} au",
        f"ellipticity = {_fmt(cfg.ellipticity)}",
        f"ramp_cycles = {_fmt(cfg.ramp_cycles)}",
        f"plateau_cycles = {_fmt(cfg.plateau_cycles)}",
        f"intensity_convention = {cfg.intensity_convention}",
        f"softening = {_fmt(cfg.softening)} au",
        "",
        "[propagator]",
        f"dt = {_fmt(cfg.dt)} au",
        f"gauge = {cfg.gauge}",
        f"absorber_width = {_fmt(cfg.resolved_absorber_width())} au",
        f"absorber_exponent = {_fmt(cfg.absorber_exponent)}",
        f"dt_imag = {_fmt(cfg.dt_imag)} au",
        f"imaginary_time_tol = {_fmt(cfg.imaginary_time_tol)} au",
        f"tail_cycles = {_fmt(cfg.tail_cycles)}",
        f"fft_workers = {cfg.fft_workers}",
        "",
        "[observables]",
        f"spectrum_source = {cfg.spectrum_source}",
        f"spectrum_window = {cfg.spectrum_window}",
        f"rescale_spectrum = {_fmt(cfg.rescale_spectrum)}",
    ]
    if cfg.snapshot_times_cycles:
        lines.append(
            "snapshot_times_cycles = " + ", ".join(_fmt(v) for v in cfg.snapshot_times_cycles)
        )
    if cfg.scan_variable is not None:
        lines += [
            "",
            "[scan]",
            f"variable = {cfg.scan_variable}",
        ]
        values = ", ".join(_fmt(v) for v in cfg.scan_values)
        if cfg.scan_variable == "intensity":
            lines.append(f"values = {values} au")
            lines.append(
                "ellipticities = " + ", ".join(_fmt(v) for v in cfg.scan_ellipticities)
            )
        else:
            lines.append(f"values = {values}")
    lines.append("")
    return "\n".join(lines)


def point_config(cfg, **overrides):
    """Copy of ``cfg`` with the scan section cleared and fields overridden."""
    return replace(
        cfg, scan_variable=None, scan_values=(), **overrides
    )
