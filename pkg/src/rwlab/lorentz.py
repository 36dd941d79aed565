"""Distribution functions, rearrangements and Lorentz quasi-norms w.r.t. ``w dx``.

All quantities are restricted to a window of cells (by default the trusted
inner window ``[-L/2, L/2)``).  Rearrangements are exact step functions, so
every norm below is evaluated in closed form on each step.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import Grid, Interval, SampledFunction


@dataclass(frozen=True, eq=False)
class WeightedMeasureView:
    """The measure ``w dx`` restricted to ``window``."""

    grid: Grid
    density: np.ndarray
    window: Interval

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.shape != (self.grid.n_points,):
            raise ValueError("density does not match grid")
        self.window.check(self.grid)
        dw = d[self.window.slice]
        if not np.all(np.isfinite(dw)) or np.any(dw <= 0):
            raise ValueError("weight must be positive and finite on the window")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "density", d)

    @classmethod
    def of(cls, weight=None, grid: Grid | None = None,
           window: Interval | None = None) -> WeightedMeasureView:
        """Build from a ``Weight``, a ``SampledFunction``, an array or ``None`` (Lebesgue)."""
        if grid is None:
            grid = getattr(weight, "grid", None)
        if grid is None:
            raise ValueError("grid is required when weight carries none")
        if weight is None:
            density = np.ones(grid.n_points)
        else:
            density = getattr(weight, "samples", weight)
        return cls(grid, density, window or grid.inner_window())

    @cached_property
    def masses(self) -> np.ndarray:
        """Cell masses ``h * w_i`` on the window."""
        return self.grid.h * self.density[self.window.slice]

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def restrict(self, f) -> np.ndarray:
        s = f.samples if isinstance(f, SampledFunction) else np.asarray(f)
        if s.shape != (self.grid.n_points,):
            raise ValueError("function does not match grid")
        return s[self.window.slice]


def _magnitudes(f, nu: WeightedMeasureView) -> np.ndarray:
    a = np.abs(nu.restrict(f))
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite samples")
    return a


def distribution(f, nu: WeightedMeasureView, lam: float) -> float:
    """``nu({|f| > lam})``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    a = _magnitudes(f, nu)
    return float(nu.masses[a > lam].sum())


@dataclass(frozen=True)
class Rearrangement:
    """Decreasing rearrangement as a step function.

    ``values[k]`` holds on ``[t[k], t[k+1])`` of the mass axis; values are
    strictly decreasing (ties merged) and strictly positive.
    """

    values: np.ndarray
    t: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, float)
        k = np.searchsorted(self.t, s, side="right") - 1
        out = np.zeros(s.shape)
        ok = (k >= 0) & (k < self.values.size)
        out[ok] = self.values[k[ok]]
        return out

    def level_length(self, lam: float) -> float:
        """``|{s : f*(s) > lam}|``."""
        k = np.searchsorted(-self.values, -lam, side="left")
        return float(self.t[k])


def rearrangement(f, nu: WeightedMeasureView) -> Rearrangement:
    a = _magnitudes(f, nu)
    m = nu.masses
    order = np.argsort(-a, kind="stable")
    a, m = a[order], m[order]
    keep = a > 0
    a, m = a[keep], m[keep]
    if a.size == 0:
        return Rearrangement(np.zeros(0), np.zeros(1))
    # merge ties so each step carries one value
    start = np.flatnonzero(np.concatenate([[True], a[1:] != a[:-1]]))
    vals = a[start]
    mass = np.add.reduceat(m, start)
    t = np.concatenate([[0.0], np.cumsum(mass)])
    return Rearrangement(vals, t)


def _power_increments(t: np.ndarray, alpha: float) -> np.ndarray:
    """``t[k+1]^alpha - t[k]^alpha`` without cancellation."""
    lo, hi = t[:-1], t[1:]
    out = np.empty(lo.size)
    zero = lo == 0
    out[zero] = hi[zero] ** alpha
    nz = ~zero
    out[nz] = lo[nz] ** alpha * np.expm1(alpha * np.log1p((hi[nz] - lo[nz]) / lo[nz]))
    return out


def lorentz_norm(f, nu: WeightedMeasureView, p: float, q: float) -> float:
    """``||f||_{L^{p,q}(nu)} = (int_0^inf (t^{1/p} f*(t))^q dt/t)^{1/q}``.

    On each step ``[t_k, t_{k+1})`` of the rearrangement the integral equals
    ``v_k^q (p/q) (t_{k+1}^{q/p} - t_k^{q/p})``.
    """
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    r = rearrangement(f, nu)
    if r.values.size == 0:
        return 0.0
    # factor out the largest value to keep v^q in range
    top = r.values[0]
    s = np.sum((r.values / top) ** q * _power_increments(r.t, q / p))
    return float(top * ((p / q) * s) ** (1.0 / q))


def weak_norm(f, nu: WeightedMeasureView, p: float) -> float:
    """``sup_lam lam * nu({|f| > lam})^{1/p}``.

    Between consecutive sample magnitudes the level set is constant, so the
    supremum is the left limit at a jump: ``v_k * nu({|f| >= v_k})^{1/p}``.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    r = rearrangement(f, nu)
    if r.values.size == 0:
        return 0.0
    return float(np.max(r.values * r.t[1:] ** (1.0 / p)))


def kolmogorov_rhs(f1, v, u, q: float, r: float,
                   window: Interval | None = None) -> float:
    """``(sup_E nu(E)^{r/q - 1} int_E f1^r u v^{q-r})^{1/r}`` with ``nu = u v^q``.

    ``int_E f1^r u v^{q-r} = int_E g^r dnu`` for ``g = f1/v``; at fixed
    ``nu(E)`` this is largest on superlevel sets of ``g``, so the supremum
    runs over prefixes of the cells sorted by ``g``.
    """
    if not 0 < r < q:
        raise ValueError(f"need 0 < r < q, got r={r}, q={q}")
    grid = f1.grid
    vs = getattr(v, "samples", v)
    us = getattr(u, "samples", u)
    nu = WeightedMeasureView(grid, np.asarray(us) * np.asarray(vs) ** q,
                             window or grid.inner_window())
    g = np.abs(nu.restrict(f1)) / nu.restrict(vs)
    order = np.argsort(-g, kind="stable")
    g, m = g[order], nu.masses[order]
    if g.size == 0 or g[0] == 0:
        return 0.0
    top = g[0]
    mass = np.cumsum(m)
    integral = np.cumsum((g / top) ** r * m)
    val = np.max(mass ** (r / q - 1.0) * integral)
    return float(top * val ** (1.0 / r))


def weighted_lp_norm(f, nu: WeightedMeasureView, p: float) -> float:
    """``(int |f|^p dnu)^{1/p}``."""
    a = _magnitudes(f, nu)
    top = a.max() if a.size else 0.0
    if top == 0:
        return 0.0
    return float(top * np.sum((a / top) ** p * nu.masses) ** (1.0 / p))


def log_lp_norm(f, log_density: np.ndarray, grid: Grid, p: float,
                window: Interval | None = None) -> float:
    """``log (int |f|^p w)^{1/p}`` from ``log w``; for weights beyond float range."""
    window = window or grid.inner_window()
    a = np.abs(getattr(f, "samples", f))[window.slice]
    lw = np.asarray(log_density)[window.slice]
    nz = a > 0
    if not nz.any():
        return -np.inf
    terms = p * np.log(a[nz]) + lw[nz] + np.log(grid.h)
    top = terms.max()
    return float((top + np.log(np.exp(terms - top).sum())) / p)
