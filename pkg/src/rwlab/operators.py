"""Maximal, Hilbert and bilinear multiplier operators on sampled functions.

Conventions
-----------
* Fourier transform ``f^(xi) = int f(x) exp(-2 pi i x xi) dx``.
* Hilbert kernel ``1 / (pi (x - t))``, i.e. multiplier ``-i sgn(xi)``.
* ``H_r h = (h + i e^{2 pi i x r} H(e^{-2 pi i r .} h)) / 2`` is the projection
  onto frequencies above ``r`` (half weight exactly at ``r``).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from . import _scan
from .grid import (Extension, SampledFunction, inverse_spectral_transform,
                   spectral_transform)


def maximal(f: SampledFunction) -> SampledFunction:
    """Uncentered Hardy-Littlewood maximal function over grid intervals."""
    return f.with_samples(_scan.maximal_hull(np.abs(f.samples).astype(float)))


def maximal_reference(f: SampledFunction) -> SampledFunction:
    return f.with_samples(_scan.maximal_reference(f.samples))


# --------------------------------------------------------------------------- Hilbert

class Backend(str, enum.Enum):
    SPECTRAL = "spectral"
    PV = "pv-quadrature"


def _pv_kernel(n: int) -> np.ndarray:
    m = np.arange(-(n - 1), n, dtype=float)
    k = np.zeros_like(m)
    nz = m != 0
    k[nz] = 1.0 / (np.pi * m[nz])
    return k


def _hilbert_pv(s: np.ndarray) -> np.ndarray:
    n = s.size
    k = _pv_kernel(n)
    if np.iscomplexobj(s):
        full = fftconvolve(s.real, k) + 1j * fftconvolve(s.imag, k)
    else:
        full = fftconvolve(s, k)
    return full[n - 1:2 * n - 1]


def hilbert_pv_direct(f: SampledFunction) -> SampledFunction:
    """Direct principal-value sum, pairing cells ``i - k`` and ``i + k``.

    O(N^2); the oracle for the FFT-evaluated quadrature.
    """
    s = f.samples
    n = s.size
    out = np.zeros(n, dtype=np.result_type(s, float))
    padded = np.concatenate([np.zeros(n, s.dtype), s, np.zeros(n, s.dtype)])
    idx = np.arange(n) + n
    for k in range(1, n):
        out += (padded[idx - k] - padded[idx + k]) / (np.pi * k)
    return f.with_samples(out)


def _hilbert_spectral(f: SampledFunction) -> np.ndarray:
    F = spectral_transform(f)
    xi = f.grid.frequencies
    sym = -1j * np.sign(xi)
    # Nyquist: no partner frequency, zero it so real input stays real
    sym[0] = 0.0
    out = inverse_spectral_transform(F * sym, f.grid).samples
    return out.real if not f.is_complex else out


def hilbert(f: SampledFunction, backend: Backend | str | None = None) -> SampledFunction:
    """Hilbert transform with kernel ``1/(pi (x - t))``.

    ``backend`` defaults to spectral for periodic input and to the
    principal-value quadrature for zero-padded input.
    """
    if backend is None:
        backend = Backend.SPECTRAL if f.extension is Extension.PERIODIC else Backend.PV
    backend = Backend(backend)
    if backend is Backend.SPECTRAL:
        return f.with_samples(_hilbert_spectral(f.as_periodic()))
    return f.with_samples(_hilbert_pv(f.samples))


def modulated_hilbert(f: SampledFunction, r: float,
                      backend: Backend | str | None = None) -> SampledFunction:
    """``H_r f = (f + i e^{2 pi i r x} H(e^{-2 pi i r .} f)) / 2``."""
    x = f.grid.x
    phase = np.exp(2j * np.pi * r * x)
    inner = f.with_samples(f.samples * np.conj(phase))
    Hf = hilbert(inner, backend).samples
    return f.with_samples(0.5 * (f.samples + 1j * phase * Hf))


def bilinear_hts(f: SampledFunction, g: SampledFunction, t: float, s: float,
                 backend: Backend | str | None = None) -> SampledFunction:
    """``H_{t,s}(f, g) = H_t f * H_s g``."""
    return modulated_hilbert(f, t, backend) * modulated_hilbert(g, s, backend)


# --------------------------------------------------------------------------- multipliers

@dataclass(frozen=True)
class AtomicMeasure:
    """Finite signed (or complex) measure ``sum_j mu_j delta_{(t_j, s_j)}`` on R^2."""

    atoms: tuple[tuple[float, float, complex], ...]
    normalized: bool = False

    def __post_init__(self):
        atoms = tuple((float(t), float(s), complex(m) if np.iscomplexobj(m) else float(m))
                      for t, s, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not np.isfinite(self.total_variation):
            raise ValueError("atom masses must be finite")
        if self.normalized and abs(self.total_mass - 1.0) > 1e-12:
            raise ValueError(f"normalized measure must have mass 1, got {self.total_mass}")

    @classmethod
    def delta(cls, t: float = 0.0, s: float = 0.0) -> AtomicMeasure:
        return cls(((t, s, 1.0),), normalized=True)

    @classmethod
    def normalize(cls, atoms) -> AtomicMeasure:
        atoms = list(atoms)
        total = sum(m for _, _, m in atoms)
        return cls(tuple((t, s, m / total) for t, s, m in atoms), normalized=True)

    @property
    def total_mass(self):
        return sum(m for _, _, m in self.atoms)

    @property
    def total_variation(self) -> float:
        return float(sum(abs(m) for _, _, m in self.atoms))

    def __len__(self):
        return len(self.atoms)


class Symbol:
    """Bounded symbol ``m(xi, eta)`` evaluated on frequency pairs."""

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 provenance: str = "raw", bound: float | None = None):
        self._fn = fn
        self.provenance = provenance
        self.bound = bound

    def __call__(self, xi, eta):
        xi, eta = np.broadcast_arrays(np.asarray(xi, float), np.asarray(eta, float))
        return self._fn(xi, eta)

    @classmethod
    def from_measure(cls, mu: AtomicMeasure) -> Symbol:
        """``m(xi, eta) = mu((-inf, xi] x (-inf, eta])``."""
        atoms = mu.atoms

        def m(xi, eta):
            out = np.zeros(xi.shape, dtype=complex if any(
                isinstance(a[2], complex) for a in atoms) else float)
            for t, s, w in atoms:
                out = out + w * ((xi >= t) & (eta >= s))
            return out

        return cls(m, "from-measure", mu.total_variation)

    @classmethod
    def tensor(cls, m1: Callable, m2: Callable) -> Symbol:
        return cls(lambda xi, eta: m1(xi) * m2(eta), "tensor")

    @classmethod
    def raw(cls, fn: Callable) -> Symbol:
        return cls(fn, "raw")


def bv_multiplier(f: SampledFunction, g: SampledFunction, mu: AtomicMeasure,
                  backend: Backend | str | None = None) -> SampledFunction:
    """``B_m(f, g) = sum_j mu_j H_{t_j, s_j}(f, g)`` for an atomic measure.

    An empty measure returns the zero function and emits a warning.
    """
    if len(mu) == 0:
        warnings.warn("empty atomic measure: B_m is identically zero", RuntimeWarning)
        return f.with_samples(np.zeros(f.grid.n_points, dtype=complex))
    out = np.zeros(f.grid.n_points, dtype=complex)
    for t, s, w in mu.atoms:
        out += w * bilinear_hts(f, g, t, s, backend).samples
    return f.with_samples(out)


class BandBudgetExceeded(ValueError):
    pass


MAX_DIRECT_N = 2 ** 12
MAX_ACTIVE = 256


def _active(F: np.ndarray, tol: float) -> np.ndarray:
    scale = np.abs(F).max()
    if scale == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(np.abs(F) > tol * scale)


def direct_multiplier(f: SampledFunction, g: SampledFunction, m: Symbol,
                      tol: float = 1e-13) -> SampledFunction:
    """Double Fourier sum ``sum_{k,l} m(xi_k, eta_l) f^_k g^_l e^{2 pi i x (xi_k + eta_l)}``.

    O(N^2) in the number of active frequencies; grids above ``2**12`` need
    inputs with at most 256 active frequencies each.
    """
    grid = f.grid
    F = spectral_transform(f.as_periodic())
    G = spectral_transform(g.as_periodic())
    kf, kg = _active(F, tol), _active(G, tol)
    if grid.n_points > MAX_DIRECT_N and max(kf.size, kg.size) > MAX_ACTIVE:
        raise BandBudgetExceeded(
            f"{kf.size}/{kg.size} active frequencies on N={grid.n_points}; "
            f"limit is {MAX_ACTIVE} above N={MAX_DIRECT_N}")
    N = grid.n_points
    xi = grid.frequencies
    # coefficients of exp(2 pi i x (k + l)/(2L)) indexed by k + l + N
    coef = np.zeros(2 * N + 1, dtype=complex)
    if kf.size and kg.size:
        for k in kf:
            row = m(xi[k], xi[kg]) * F[k] * G[kg]
            np.add.at(coef, kg + k, row)
    # positions in grid.frequencies run k - N/2; the pair sum index is
    # (k - N/2) + (l - N/2) = (k + l) - N
    n = np.flatnonzero(coef)
    freq = (n - N) / (2.0 * grid.L)
    x = grid.x
    out = np.exp(2j * np.pi * np.outer(x, freq)) @ coef[n] if n.size else np.zeros(N, complex)
    return SampledFunction(grid, out / (2.0 * grid.L) ** 2, Extension.PERIODIC)


def fourier_multiplier(f: SampledFunction, m1: Callable) -> SampledFunction:
    """Linear multiplier ``T_m f`` on a periodic function."""
    F = spectral_transform(f.as_periodic())
    return inverse_spectral_transform(F * m1(f.grid.frequencies), f.grid)


# --------------------------------------------------------------------------- S_T and products

class Op(str, enum.Enum):
    """Closed set of operator handles usable from experiment configs."""

    ID = "Id"
    H = "H"
    M = "M"
    S_H = "S_H"
    S_ID = "S_Id"

    def __call__(self, f: SampledFunction) -> SampledFunction:
        if self is Op.ID:
            return f
        if self is Op.H:
            return hilbert(f)
        if self is Op.M:
            return maximal(f)
        if self is Op.S_H:
            return sharp_s(f, Op.H)
        return sharp_s(f, Op.ID)

    @classmethod
    def parse(cls, name: str) -> Op:
        for op in cls:
            if op.value.lower() == name.lower():
                return op
        raise ValueError(f"unknown operator {name!r}; expected one of "
                         f"{', '.join(o.value for o in cls)}")


def sharp_s(f: SampledFunction, T: Op | str = Op.ID) -> SampledFunction:
    """``S_T f = (M(|T f|^{1/2}))^2``."""
    T = T if isinstance(T, Op) else Op.parse(T)
    if T in (Op.S_H, Op.S_ID):
        raise ValueError("S_T is defined for T in {Id, H, M}")
    Tf = T(f)
    root = Tf.with_samples(np.sqrt(np.abs(Tf.samples)))
    return f.with_samples(maximal(root).samples ** 2)


def product_op(T1: Op | str, T2: Op | str, f1: SampledFunction,
               f2: SampledFunction) -> SampledFunction:
    """``B(f1, f2) = (T1 f1)(T2 f2)``."""
    T1 = T1 if isinstance(T1, Op) else Op.parse(T1)
    T2 = T2 if isinstance(T2, Op) else Op.parse(T2)
    return T1(f1) * T2(f2)
