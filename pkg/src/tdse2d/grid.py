"""Discretized 2D position/momentum space and the complex wavefunction container.

Conventions fixed here once and relied on everywhere else:

* The grid is symmetric about the origin: ``x0 = -(nx/2)*dx``, so the point
  (0, 0) lies exactly on a grid node.
* Amplitudes are stored row-major with x the fastest index, i.e. arrays have
  shape ``(ny, nx)`` and ``amp[j, i]`` is the value at ``(x[i], y[j])``.
* The forward FFT is unnormalized; the inverse carries the 1/(nx*ny) factor
  (the scipy/numpy default).  Momentum-space quantities with physical
  normalization are obtained through :func:`momentum_amplitudes`.

All quantities are in atomic units.
"""

import numpy as np
import scipy.fft as _fft

from .errors import ConfigError, NumericalBlowupError


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


class Grid2D:
    """Uniform 2D grid with its conjugate momentum grid.

    Immutable after construction; the coordinate arrays are marked read-only
    so a grid can be shared freely between propagations.
    """

    def __init__(self, nx, ny, dx, dy):
        for name, n in (("nx", nx), ("ny", ny)):
            if int(n) != n or not _is_power_of_two(int(n)) or n < 16:
                raise ConfigError(f"{name} must be a power of two >= 16, got {n!r}")
        if dx <= 0 or dy <= 0:
            raise ConfigError(f"grid spacings must be positive, got dx={dx}, dy={dy}")
        self.nx = int(nx)
        self.ny = int(ny)
        self.dx = float(dx)
        self.dy = float(dy)
        self.x0 = -(self.nx // 2) * self.dx
        self.y0 = -(self.ny // 2) * self.dy
        self.x = self.x0 + self.dx * np.arange(self.nx)
        self.y = self.y0 + self.dy * np.arange(self.ny)
        # FFT ordering: [0, 1, ..., n/2-1, -n/2, ..., -1] * (2*pi / (n*d))
        self.kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, self.dx)
        self.ky = 2.0 * np.pi * np.fft.fftfreq(self.ny, self.dy)
        for arr in (self.x, self.y, self.kx, self.ky):
            arr.setflags(write=False)

    @property
    def shape(self):
        """Array shape ``(ny, nx)`` of fields living on this grid."""
        return (self.ny, self.nx)

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def box_x(self):
        """Full box extent along x, ``nx*dx``."""
        return self.nx * self.dx

    @property
    def box_y(self):
        return self.ny * self.dy

    def meshes(self):
        """Position meshes X, Y of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y)

    def __eq__(self, other):
        if not isinstance(other, Grid2D):
            return NotImplemented
        return (self.nx, self.ny, self.dx, self.dy) == (other.nx, other.ny, other.dx, other.dy)

    def __hash__(self):
        return hash((self.nx, self.ny, self.dx, self.dy))

    def __repr__(self):
        return f"Grid2D(nx={self.nx}, ny={self.ny}, dx={self.dx}, dy={self.dy})"


def build_grid(nx, ny, dx, dy):
    """Construct a :class:`Grid2D`; rejects non-power-of-two sizes and bad spacings."""
    return Grid2D(nx, ny, dx, dy)


class Wavefunction:
    """Complex amplitude field on a :class:`Grid2D`.

    ``|amp|^2 * dx * dy`` is probability, so a normalized state has
    ``norm() == 1``.
    """

    __slots__ = ("grid", "amp")

    def __init__(self, grid, amp, copy=True):
        amp = np.array(amp, dtype=np.complex128, copy=copy)
        if amp.shape != grid.shape:
            raise ValueError(f"amplitude shape {amp.shape} does not match grid shape {grid.shape}")
        self.grid = grid
        self.amp = amp

    def norm2(self):
        """Integrated probability; raises on non-finite amplitudes."""
        s = float(np.sum(np.abs(self.amp) ** 2)) * self.grid.cell_area
        if not np.isfinite(s):
            raise NumericalBlowupError("non-finite amplitudes in wavefunction")
        return s

    def norm(self):
        return float(np.sqrt(self.norm2()))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero wavefunction")
        return Wavefunction(self.grid, self.amp / n, copy=False)

    def density(self):
        """Probability density |psi|^2 (shape (ny, nx))."""
        return np.abs(self.amp) ** 2

    def copy(self):
        return Wavefunction(self.grid, self.amp, copy=True)

    def __repr__(self):
        return f"Wavefunction(grid={self.grid!r})"


def norm(psi):
    """sqrt of the integrated probability of ``psi``."""
    return psi.norm()


def inner_product(a, b):
    """<a|b> = sum conj(a)*b dx dy.  Both states must live on the same grid."""
    if a.grid != b.grid:
        raise ValueError("wavefunctions live on different grids")
    return complex(np.vdot(a.amp, b.amp)) * a.grid.cell_area


def gaussian_wavepacket(grid, x0=0.0, y0=0.0, sigma=1.0, kx=0.0, ky=0.0):
    """Normalized Gaussian with position variance sigma^2 per axis and mean momentum (kx, ky)."""
    X, Y = grid.meshes()
    amp = np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (4.0 * sigma**2) + 1j * (kx * X + ky * Y))
    return Wavefunction(grid, amp, copy=False).normalized()


def forward_fft(amp, workers=1):
    """Unnormalized forward 2D FFT (the package-wide convention)."""
    return _fft.fft2(amp, workers=workers)


def inverse_fft(amp, workers=1):
    """Inverse 2D FFT carrying the 1/(nx*ny) factor."""
    return _fft.ifft2(amp, workers=workers)


def momentum_amplitudes(psi, workers=1):
    """Continuum-normalized momentum-space amplitudes on the (kx, ky) grid.

    Scaled so that Parseval holds against :meth:`Wavefunction.norm2`:
    ``sum |out|^2 dkx dky / (2*pi)^2 == sum |amp|^2 dx dy``.  The global
    linear phase tied to the grid offset (x0, y0) is not applied; moduli are
    what all consumers here use.
    """
    return psi.grid.cell_area * forward_fft(psi.amp, workers=workers)
