"""Rubio de Francia iteration for ``L f = M(u0 f) / u0`` and its constants.

``R h = sum_k L^k h / (2 K0)^k`` is truncated after ``k_max`` terms.  Since
``L 1 = M u0 / u0 <= [u0]_{A_1}``, each term is bounded by
``([u0]_{A_1} / (2 K0))^k max h``; with ``K0 >= [u0]_{A_1}`` this is the
geometric ``2^{-k} max h`` used for the tail bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _scan
from .grid import Grid, SampledFunction
from .lorentz import WeightedMeasureView, log_lp_norm, lorentz_norm
from .operators import maximal
from .weights import Weight, a1_constant, default_stride, endpoints, power_weight

SLACK = 0.10


def _kmax(tol: float) -> int:
    return max(1, math.ceil(-math.log2(tol)))


@dataclass(frozen=True, eq=False)
class RdfConfig:
    u0: Weight
    nu: Weight
    s: float
    p: float
    K0: float
    p0: float
    k_max: int = 27
    tail_tol: float = 1e-8

    def __post_init__(self):
        if not self.K0 > 0:
            raise ValueError("K0 must be positive")
        if not self.p0 > 1:
            raise ValueError("p0 must exceed 1")
        if self.p < self.p0:
            raise ValueError(f"need p >= p0, got p={self.p:g} < p0={self.p0:g}")
        if self.s < 1:
            raise ValueError("s must be >= 1")
        if 2.0 ** -self.k_max > self.tail_tol:
            raise ValueError(f"k_max={self.k_max} leaves tail 2^-k_max > {self.tail_tol:g}; "
                             f"need k_max >= {_kmax(self.tail_tol)}")

    @property
    def measure_weight(self) -> np.ndarray:
        """Density of ``u0 nu^s``."""
        return self.u0.samples * self.nu.samples ** self.s


def l_op(u0: Weight, f: SampledFunction) -> SampledFunction:
    """``f -> M(u0 f) / u0``."""
    s = np.asarray(f.samples)
    if np.iscomplexobj(s) or np.any(s < 0):
        raise ValueError("l_op needs a non-negative real function")
    return f.with_samples(maximal(f.with_samples(u0.samples * s)).samples / u0.samples)


@dataclass
class RdfResult:
    """``R h`` with the post-hoc checks of the three iteration properties.

    ``checks`` maps property name to ``(value, bound, ok)``.
    """

    Rh: SampledFunction
    tail_bound: float
    observed_tail: float
    a1_u0: float
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c[2] for c in self.checks.values())


def rdf_iterate(cfg: RdfConfig, h: SampledFunction, slack: float = SLACK) -> RdfResult:
    """Truncated ``R h`` with tail bound and diagnostics.

    Raises ``ValueError`` if ``h`` is negative or zero, or if ``K0`` is too
    small for the geometric tail to reach ``tail_tol`` within ``k_max``.
    """
    s = np.asarray(h.samples)
    if np.iscomplexobj(s) or np.any(s < 0):
        raise ValueError("h must be non-negative")
    top = float(s.max())
    if top == 0:
        raise ValueError("h must not vanish identically")
    a1 = a1_constant(cfg.u0)
    rho = a1 / (2.0 * cfg.K0)
    if rho >= 1:
        raise ValueError(f"K0={cfg.K0:g} below [u0]_A1/2={a1 / 2:g}: series need not converge")
    tail = rho ** (cfg.k_max + 1) / (1 - rho)
    if tail > cfg.tail_tol:
        raise ValueError(f"tail bound {tail:.3g} exceeds {cfg.tail_tol:g} at k_max={cfg.k_max}")

    term = h.with_samples(s.astype(float))
    total = term.samples.copy()
    for _ in range(cfg.k_max):
        term = term.with_samples(l_op(cfg.u0, term).samples / (2.0 * cfg.K0))
        total += term.samples
    # two extra terms to audit the tail bound
    extra = np.zeros_like(total)
    for _ in range(2):
        term = term.with_samples(l_op(cfg.u0, term).samples / (2.0 * cfg.K0))
        extra += term.samples
    Rh = h.with_samples(total)

    res = RdfResult(Rh, tail * top, float(extra.max()), a1)
    res.checks["majorizes"] = (float(np.min(total - s)), 0.0, bool(np.all(total >= s)))
    a1_rh = a1_constant(cfg.u0.samples * total)
    res.checks["a1"] = (a1_rh, 2 * cfg.K0, a1_rh <= 2 * cfg.K0 * (1 + slack))
    nu = WeightedMeasureView.of(cfg.measure_weight, grid=h.grid)
    lr = lorentz_norm(Rh, nu, cfg.p, 1.0)
    lh = lorentz_norm(h, nu, cfg.p, 1.0)
    res.checks["lorentz"] = (lr / lh, 2.0, lr <= 2 * lh * (1 + slack))
    res.checks["tail"] = (res.observed_tail, res.tail_bound, res.observed_tail <= res.tail_bound)
    return res


@dataclass(frozen=True)
class K0Estimate:
    p0: float
    K0: float
    eps: float
    C0: float
    C1: float
    buckley: float

    def config(self, u0: Weight, nu: Weight, s: float, p: float | None = None,
               k_max: int = 27) -> RdfConfig:
        return RdfConfig(u0, nu, s, self.p0 if p is None else p, self.K0, self.p0, k_max)


def _log_samples(w: Weight) -> np.ndarray:
    return np.log(w.samples)


def maximal_norm_log(f: SampledFunction, log_w: np.ndarray, p: float) -> float:
    """``log(||M f|| / ||f||)`` in ``L^p(w)``, with ``w`` given by its logarithm."""
    g = f.grid
    return (log_lp_norm(maximal(f), log_w, g, p)
            - log_lp_norm(f, log_w, g, p))


def buckley_bound(log_w: np.ndarray, p: float, stride: int | None = None) -> float:
    """``[w]_{A_p}^{1/(p-1)}``, the A_p route to the norm of M.

    ``[w]_{A_p}`` is scale invariant, so ``w`` is rescaled to max 1 before the
    scan; returns ``inf`` when the scan overflows.
    """
    lw = np.asarray(log_w) - np.max(log_w)
    with np.errstate(over="ignore", under="ignore"):
        w = np.exp(lw)
        wd = np.exp(-lw / (p - 1.0))
    if not (np.all(np.isfinite(wd)) and np.all(w > 0)):
        return math.inf
    stride = stride or default_stride(w.size, "ap")
    val = _scan.ap_scan(w, wd, float(p), endpoints(w.size, stride))
    if not np.isfinite(val):
        return math.inf
    with np.errstate(over="ignore"):
        return float(val ** (1.0 / (p - 1.0)))


def k0_estimate(u0: Weight, nu: Weight, s: float, family: list[SampledFunction],
                n: int = 1) -> K0Estimate:
    """``(p0, K0)`` following the quantitative choice of constants.

    ``eps = 1/(2^{n+1}[u0]_{A_1})``; ``p0 = 1 + 2((1+eps)/eps) s sum(alpha_j)``;
    ``C1 = [u0]_{A_1}``; ``C0`` is the largest measured ``||Mf||/||f||`` on
    ``L^{p0}(u0^{1-p0} nu^s)`` over ``family``; ``K0 = 4 p0 (C0 + C1)``.
    """
    try:
        alphas = nu.maximal_exponents()
    except ValueError as e:
        raise ValueError(f"nu carries no exponent data: {e}") from None
    if not family:
        raise ValueError("C0 needs a non-empty test family")
    a1 = a1_constant(u0)
    eps = 1.0 / (2 ** (n + 1) * a1)
    p0 = 1.0 + 2.0 * ((1.0 + eps) / eps) * s * sum(alphas)
    if not p0 > 1:
        raise ValueError("p0 must exceed 1: nu needs a negative maximal exponent")
    log_w = (1.0 - p0) * _log_samples(u0) + s * _log_samples(nu)
    C0 = max(math.exp(maximal_norm_log(f, log_w, p0)) for f in family)
    C1 = a1
    return K0Estimate(p0, 4.0 * p0 * (C0 + C1), eps, C0, C1, buckley_bound(log_w, p0))


def power_fit(x, y) -> tuple[float, float]:
    """Least-squares ``log y = c + e log x``; returns ``(e, c)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    e, c = np.polyfit(lx, ly, 1)
    return float(e), float(c)


def a1_power_family(grid: Grid, count: int = 8) -> list[Weight]:
    """``|x|^{-a}`` with ``a = 1 - 2^{-k}``; ``[u0]_{A_1}`` roughly doubles with ``k``."""
    return [power_weight(-(1 - 2.0 ** -k), grid) for k in range(1, count + 1)]
