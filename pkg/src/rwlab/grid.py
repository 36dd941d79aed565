"""Uniform 1-D grids, sampled functions and the discrete Fourier transform.

Samples are cell values: sample ``i`` stands for the cell ``[x_i, x_i + h)``
with ``x_i = -L + i*h``.  Integrals use the rectangle rule, so grid-aligned
step functions integrate exactly.  Pointwise comparisons against continuum
formulas should use :attr:`Grid.centers`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_L = 8.0
DEFAULT_N = 4096


class Extension(enum.Enum):
    ZERO = "zero-padded"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[-L, L)`` with ``N`` cells, ``N`` a power of two."""

    half_length: float = DEFAULT_L
    n_points: int = DEFAULT_N

    def __post_init__(self):
        n = int(self.n_points)
        if n < 2 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "half_length", float(self.half_length))

    @property
    def L(self) -> float:
        return self.half_length

    @property
    def N(self) -> int:
        return self.n_points

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + np.arange(self.n_points) * self.h
        x.flags.writeable = False
        return x

    @cached_property
    def centers(self) -> np.ndarray:
        c = self.x + 0.5 * self.h
        c.flags.writeable = False
        return c

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Frequencies ``k / (2L)`` for ``k = -N/2 .. N/2 - 1`` (ascending)."""
        k = np.arange(-self.n_points // 2, self.n_points // 2)
        xi = k / (2.0 * self.half_length)
        xi.flags.writeable = False
        return xi

    def index(self, x: float) -> int:
        """Index of the grid point ``x`` (must lie on the grid up to rounding)."""
        t = (x + self.half_length) / self.h
        i = int(round(t))
        if abs(t - i) > 1e-9 or not 0 <= i <= self.n_points:
            raise ValueError(f"{x} is not a grid point of {self}")
        return i

    def interval(self, a: float, b: float) -> Interval:
        """Grid interval covering the continuum interval ``[a, b)``."""
        return Interval(self.index(a), self.index(b))

    def inner_window(self) -> Interval:
        """The trusted window ``[-L/2, L/2)``."""
        return Interval(self.n_points // 4, 3 * self.n_points // 4)

    def full(self) -> Interval:
        return Interval(0, self.n_points)

    def refine(self, factor: int = 2) -> Grid:
        return Grid(self.half_length, self.n_points * factor)

    def indicator(self, a: float, b: float) -> SampledFunction:
        """``chi_[a, b)`` sampled at grid points."""
        x = self.x
        return SampledFunction(self, ((x >= a) & (x < b)).astype(float))

    def sample(self, fn, extension: Extension = Extension.ZERO) -> SampledFunction:
        return SampledFunction(self, fn(self.x), extension)


@dataclass(frozen=True)
class Interval:
    """Half-open range ``[start, end)`` of cell indices."""

    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"empty or invalid interval [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def slice(self) -> slice:
        return slice(self.start, self.end)

    def measure(self, grid: Grid) -> float:
        return len(self) * grid.h

    def check(self, grid: Grid) -> Interval:
        if self.end > grid.n_points:
            raise ValueError(f"{self} exceeds grid of {grid.n_points} cells")
        return self


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    samples: np.ndarray
    extension: Extension = Extension.ZERO

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.dtype.kind not in "fc":
            s = s.astype(float)
        if s.shape != (self.grid.n_points,):
            raise ValueError(
                f"samples must have shape ({self.grid.n_points},), got {s.shape}")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    def with_samples(self, samples, extension: Extension | None = None) -> SampledFunction:
        return SampledFunction(self.grid, samples, extension or self.extension)

    def as_periodic(self) -> SampledFunction:
        return SampledFunction(self.grid, self.samples, Extension.PERIODIC)

    def as_zero_padded(self) -> SampledFunction:
        return SampledFunction(self.grid, self.samples, Extension.ZERO)

    def abs(self) -> SampledFunction:
        return self.with_samples(np.abs(self.samples))

    @cached_property
    def prefix(self) -> np.ndarray:
        """``prefix[k] = sum(samples[:k])``, length ``N + 1``."""
        p = np.zeros(self.grid.n_points + 1, dtype=self.samples.dtype)
        np.cumsum(self.samples, out=p[1:])
        p.flags.writeable = False
        return p

    def _binary(self, other, op):
        if isinstance(other, SampledFunction):
            if other.grid != self.grid:
                raise ValueError("grid mismatch")
            other = other.samples
        return self.with_samples(op(self.samples, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return self.with_samples(-self.samples)

    def __len__(self):
        return self.grid.n_points


def integrate(f: SampledFunction) -> float | complex:
    """Rectangle rule ``h * sum(f)``."""
    return f.grid.h * f.samples.sum()


def average(f: SampledFunction, Q: Interval) -> float | complex:
    """Mean of ``f`` over the cells of ``Q`` via cached prefix sums."""
    Q.check(f.grid)
    p = f.prefix
    return (p[Q.end] - p[Q.start]) / len(Q)


def spectral_transform(f: SampledFunction) -> np.ndarray:
    """Fourier coefficients ``F_k = h * sum_j f_j exp(-2 pi i x_j xi_k)``.

    Returned in the order of :attr:`Grid.frequencies` (``k = -N/2 .. N/2-1``),
    so ``F_k`` approximates the continuum transform at ``xi_k = k / (2L)``.
    """
    if f.extension is not Extension.PERIODIC:
        raise ValueError("spectral transform needs a periodic function; "
                         "re-tag with as_periodic() after windowing")
    g = f.grid
    raw = np.fft.fftshift(np.fft.fft(f.samples))
    k = np.arange(-g.n_points // 2, g.n_points // 2)
    # x_0 = -L contributes exp(2 pi i L xi_k) = (-1)^k
    return g.h * np.where(k % 2, -1.0, 1.0) * raw


def inverse_spectral_transform(F: np.ndarray, grid: Grid, real: bool = False) -> SampledFunction:
    """Invert :func:`spectral_transform`: ``f_j = (1/2L) sum_k F_k exp(2 pi i x_j xi_k)``."""
    F = np.asarray(F)
    if F.shape != (grid.n_points,):
        raise ValueError("coefficient length does not match grid")
    k = np.arange(-grid.n_points // 2, grid.n_points // 2)
    raw = np.where(k % 2, -1.0, 1.0) * F / grid.h
    f = np.fft.ifft(np.fft.ifftshift(raw))
    if real:
        f = f.real
    return SampledFunction(grid, f, Extension.PERIODIC)
