"""Test functions defined in continuum coordinates.

Every function here is fixed independently of the grid (breakpoints on a
lattice of spacing ``L/128``), so the same function can be sampled on a grid
and on its refinements.
"""
from __future__ import annotations

import numpy as np

from .grid import Grid, SampledFunction

LATTICE_DIVS = 128


def _lattice(grid: Grid) -> float:
    return grid.L / LATTICE_DIVS


def indicator(grid: Grid, a: float, b: float) -> SampledFunction:
    if not a < b:
        raise ValueError(f"indicator needs a < b, got ({a}, {b})")
    return grid.indicator(a, b)


def bump(grid: Grid, center: float, radius: float) -> SampledFunction:
    """``exp(1 - 1/(1 - t^2))`` for ``|t| < 1``, ``t = (x - center)/radius``."""
    if not radius > 0:
        raise ValueError("bump radius must be positive")
    t = (grid.centers - center) / radius
    out = np.zeros(grid.n_points)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return SampledFunction(grid, out)


def _support(grid: Grid) -> tuple[int, int]:
    # lattice indices spanning [-L/4, L/4]
    half = LATTICE_DIVS // 4
    return -half, half


def step(grid: Grid, seed: int, count: int) -> SampledFunction:
    """Random non-negative step function with ``count`` pieces in ``[-L/4, L/4]``."""
    count = int(count)
    if count < 1:
        raise ValueError("step count must be >= 1")
    lo, hi = _support(grid)
    rng = np.random.default_rng(int(seed))
    cuts = np.sort(rng.choice(np.arange(lo + 1, hi), size=min(count - 1, hi - lo - 1),
                              replace=False))
    edges = np.concatenate([[lo], cuts, [hi]]) * _lattice(grid)
    heights = rng.uniform(0.1, 1.0, size=edges.size - 1)
    out = np.zeros(grid.n_points)
    x = grid.x
    for a, b, v in zip(edges[:-1], edges[1:], heights):
        out[(x >= a) & (x < b)] = v
    return SampledFunction(grid, out)


def random_indicator(grid: Grid, rng: np.random.Generator) -> tuple[float, float]:
    lo, hi = _support(grid)
    a, b = np.sort(rng.choice(np.arange(lo, hi + 1), size=2, replace=False))
    d = _lattice(grid)
    return float(a * d), float(b * d)


def trig(grid: Grid, rng: np.random.Generator, terms: int = 4) -> SampledFunction:
    """Trigonometric polynomial restricted to a random lattice interval."""
    a, b = random_indicator(grid, rng)
    x = grid.x
    length = b - a
    k = rng.integers(1, 6, size=terms)
    amp = rng.uniform(-1, 1, size=terms)
    phase = rng.uniform(0, 2 * np.pi, size=terms)
    vals = 1.0 + sum(c * np.cos(2 * np.pi * kk * (x - a) / length + ph) / terms
                     for c, kk, ph in zip(amp, k, phase))
    return SampledFunction(grid, np.where((x >= a) & (x < b), vals, 0.0))


FAMILIES = ("indicators", "steps", "trig", "bumps", "mixed")


def family(grid: Grid, kind: str, count: int, seed: int = 0) -> list[tuple[str, SampledFunction]]:
    """Seeded list of ``(label, function)`` pairs.

    ``indicators`` are the restricted-type extremizers; the other kinds guard
    against conclusions that only hold for indicators.
    """
    if kind not in FAMILIES:
        raise ValueError(f"unknown family {kind!r}; expected one of {', '.join(FAMILIES)}")
    rng = np.random.default_rng(int(seed))
    out = []
    kinds = ["indicators", "steps", "trig", "bumps"] if kind == "mixed" else [kind]
    for i in range(int(count)):
        k = kinds[i % len(kinds)]
        if k == "indicators":
            a, b = random_indicator(grid, rng)
            out.append((f"ind[{a:g},{b:g})", indicator(grid, a, b)))
        elif k == "steps":
            s = int(rng.integers(0, 2 ** 31))
            c = int(rng.integers(2, 9))
            out.append((f"step({s},{c})", step(grid, s, c)))
        elif k == "trig":
            s = int(rng.integers(0, 2 ** 31))
            out.append((f"trig({s})", trig(grid, np.random.default_rng(s))))
        else:
            lo, hi = _support(grid)
            d = _lattice(grid)
            r = float(rng.integers(2, 17)) * d
            c = float(rng.integers(lo, hi + 1)) * d
            c = float(np.clip(c, lo * d + r, hi * d - r))
            out.append((f"bump({c:g},{r:g})", bump(grid, c, r)))
    return out
