"""Weights, exponent triples and estimators for the weight-class constants.

Every estimator returns a supremum over grid intervals.  Interval scans take
a ``stride``: endpoints are restricted to multiples of it (plus ``N``), which
trades accuracy for runtime; ``stride=1`` is the exhaustive scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import _scan, families
from .expr import BinOp, Call, Name, Num
from .grid import Grid, SampledFunction
from .operators import maximal


@dataclass(frozen=True)
class Provenance:
    """How a weight was built.

    ``kind`` is one of ``power``, ``maximal-power``, ``hat-composite``,
    ``product``, ``scaled`` or ``explicit``; ``params`` holds the recipe.
    """

    kind: str
    params: Mapping = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Weight:
    grid: Grid
    samples: np.ndarray
    provenance: Provenance = Provenance("explicit")
    certified: Mapping[str, float] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.n_points,):
            raise ValueError("weight samples do not match grid")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("weight samples must be positive and finite")
        s = s.copy()
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __str__(self):
        return self.label or self.provenance.kind

    def __mul__(self, other):
        if isinstance(other, Weight):
            return Weight(self.grid, self.samples * other.samples,
                          Provenance("product", {"factors": (self, other)}),
                          label=f"{self}*{other}")
        c = float(other)
        if not c > 0:
            raise ValueError("weights can only be scaled by positive numbers")
        return Weight(self.grid, c * self.samples,
                      Provenance("scaled", {"base": self, "c": c}),
                      dict(self.certified), label=f"{c:g}*{self}")

    __rmul__ = __mul__

    def __pow__(self, e: float) -> Weight:
        e = float(e)
        kind, par = self.provenance.kind, self.provenance.params
        label = f"({self})^{e:g}"
        if kind == "power":
            return power_weight(par["a"] * e, self.grid)
        if kind == "maximal-power":
            return Weight(self.grid, self.samples ** e,
                          Provenance("maximal-power", {"h": par["h"], "b": par["b"] * e}),
                          label=label)
        if kind == "product":
            out = None
            for f in par["factors"]:
                out = f ** e if out is None else out * (f ** e)
            return out
        return Weight(self.grid, self.samples ** e, Provenance("explicit"), label=label)

    def as_function(self) -> SampledFunction:
        return SampledFunction(self.grid, self.samples)

    def factorization(self) -> tuple[Weight, Weight]:
        """Stored split ``w = u v`` with ``u`` in A_1 and ``v`` in RH_inf.

        Raises ``ValueError`` when the provenance carries no certified split.
        """
        kind, par = self.provenance.kind, self.provenance.params
        one = power_weight(0.0, self.grid)
        if kind == "power":
            return (self, one) if par["a"] <= 0 else (one, self)
        if kind == "maximal-power":
            return (self, one) if par["b"] >= 0 else (one, self)
        if kind == "hat-composite":
            return par["u0"], par["v"]
        if kind == "scaled":
            u, v = par["base"].factorization()
            return u * par["c"], v
        if kind == "product":
            splits = [f.factorization() for f in par["factors"]]
            nontrivial = [u for u, _ in splits if not _is_one(u)]
            if len(nontrivial) > 1:
                raise ValueError("product of several A_1 factors has no certified split")
            u = nontrivial[0] if nontrivial else one
            v = splits[0][1]
            for _, vv in splits[1:]:
                v = v * vv
            return u, v
        raise ValueError(f"weight with {kind!r} provenance has no certified factorization")

    def maximal_exponents(self) -> list[float]:
        """Exponents ``alpha_j`` when the weight is ``prod_j (M h_j)^{-alpha_j}``."""
        kind, par = self.provenance.kind, self.provenance.params
        if kind == "maximal-power" and par["b"] < 0:
            return [-par["b"]]
        if kind == "product":
            out = []
            for f in par["factors"]:
                out += f.maximal_exponents()
            return out
        if kind == "power" and par["a"] == 0:
            return []
        raise ValueError(f"weight {self} is not a product of negative maximal powers")


def _is_one(w: Weight) -> bool:
    return w.provenance.kind == "power" and w.provenance.params["a"] == 0.0


@dataclass(frozen=True)
class ExponentTriple:
    """``(p1, p2; p)`` with ``1/p = 1/p1 + 1/p2``."""

    p1: float
    p2: float
    p: float | None = None

    def __post_init__(self):
        p1, p2 = float(self.p1), float(self.p2)
        if p1 < 1 or p2 < 1:
            raise ValueError(f"need p1, p2 >= 1, got ({p1}, {p2})")
        implied = 1.0 / (1.0 / p1 + 1.0 / p2)
        if self.p is not None and abs(1.0 / float(self.p) - 1.0 / implied) > 1e-12:
            raise ValueError(
                f"exponent relation 1/p = 1/p1 + 1/p2 violated: "
                f"1/{self.p:g} != 1/{p1:g} + 1/{p2:g}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        object.__setattr__(self, "p", implied if self.p is None else float(self.p))


# --------------------------------------------------------------------------- constructors

def power_weight(a: float, grid: Grid) -> Weight:
    """``max(|x|, h/2)^a``; needs ``a > -1`` for local integrability."""
    a = float(a)
    if a <= -1:
        raise ValueError(f"power({a:g}) is not locally integrable (need a > -1)")
    s = np.maximum(np.abs(grid.x), grid.h / 2) ** a
    return Weight(grid, s, Provenance("power", {"a": a}), label=f"power({a:g})")


def maximal_power(h: SampledFunction, b: float, label: str = "") -> Weight:
    """``(M h)^b``; an A_1 weight for ``0 <= b < 1``."""
    if not np.any(h.samples != 0):
        raise ValueError("h must not vanish identically")
    mh = maximal(h).samples
    return Weight(h.grid, mh ** float(b),
                  Provenance("maximal-power", {"h": h, "b": float(b)}),
                  label=label or f"(Mh)^{b:g}")


def hat_aq2_build(u0: Weight, h1: SampledFunction, h2: SampledFunction,
                  alpha: float, q: float) -> Weight:
    """``u0 (M h1)^{alpha(1-q)} (M h2)^{(1-alpha)(1-q)}`` with certified constant.

    The certified Â_{q,2} constant is ``a1_constant(u0)^{1/q}``.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if q < 1:
        raise ValueError("q must be >= 1")
    if not _is_one(u0.factorization()[1]):
        raise ValueError("u0 must carry A_1 provenance")
    for h in (h1, h2):
        if not np.any(h.samples != 0):
            raise ValueError("h1 and h2 must not vanish identically")
    v1 = maximal_power(h1, alpha * (1 - q), label=f"(Mh1)^{alpha * (1 - q):g}")
    v2 = maximal_power(h2, (1 - alpha) * (1 - q), label=f"(Mh2)^{(1 - alpha) * (1 - q):g}")
    v = v1 * v2
    cert = a1_constant(u0) ** (1.0 / q)
    return Weight(u0.grid, u0.samples * v.samples,
                  Provenance("hat-composite",
                             {"u0": u0, "h1": h1, "h2": h2, "alpha": alpha, "q": q, "v": v}),
                  {"hat_aq2": cert, "a1_u0": cert ** q},
                  label=f"hatq2({u0},a={alpha:g},q={q:g})")


# --------------------------------------------------------------------------- strides

def default_stride(n: int, kind: str = "ap") -> int:
    """Endpoint stride for interval scans.

    ``ap``/``rh``: exhaustive below 2**12 and 8 above.  ``apr`` and ``fw``
    carry an extra O(N) factor per interval, so they keep about 512 and 128
    endpoints respectively.
    """
    if kind in ("ap", "rh"):
        return 1 if n < 4096 else 8
    if kind == "apr":
        return max(1, n // 512)
    if kind == "fw":
        return max(1, n // 128)
    raise ValueError(f"unknown scan kind {kind!r}")


def endpoints(n: int, stride: int) -> np.ndarray:
    return np.unique(np.concatenate([np.arange(0, n, int(stride)), [n]])).astype(np.int64)


def _samples(w) -> np.ndarray:
    return np.asarray(getattr(w, "samples", w), dtype=float)


# --------------------------------------------------------------------------- constants

def a1_constant(w) -> float:
    """``max Mw / w`` over the grid."""
    s = _samples(w)
    return float(np.max(_scan.maximal_hull(s) / s))


def ap_constant(w, q: float, stride: int | None = None) -> float:
    """``sup_Q avg_Q(w) avg_Q(w^{1-q'})^{q-1}``; ``inf`` if ``w^{1-q'}`` overflows."""
    if not q > 1:
        raise ValueError("ap_constant needs q > 1")
    s = _samples(w)
    with np.errstate(over="ignore", divide="ignore"):
        wd = s ** (-1.0 / (q - 1.0))
    if not np.all(np.isfinite(wd)) or not np.all(np.isfinite(s)):
        return math.inf
    stride = stride or default_stride(s.size, "ap")
    val = _scan.ap_scan(s, wd, float(q), endpoints(s.size, stride))
    return float(val) if np.isfinite(val) else math.inf


def apr_constant(w, q: float, stride: int | None = None) -> float:
    """``sup_{E in Q} (|E|/|Q|)(w(Q)/w(E))^{1/q}``."""
    if not q >= 1:
        raise ValueError("apr_constant needs q >= 1")
    s = _samples(w)
    stride = stride or default_stride(s.size, "apr")
    return float(_scan.apr_scan(s, float(q), endpoints(s.size, stride)))


def fujii_wilson(w, stride: int | None = None) -> float:
    """``sup_Q (1/w(Q)) int_Q M(w chi_Q)``."""
    s = _samples(w)
    stride = stride or default_stride(s.size, "fw")
    return float(_scan.fujii_wilson_scan(s, endpoints(s.size, stride)))


def rh_inf_constant(v, stride: int | None = None) -> float:
    """``sup_Q (max_Q v) |Q| / v(Q)``."""
    s = _samples(v)
    stride = stride or default_stride(s.size, "rh")
    return float(_scan.rh_scan(s, endpoints(s.size, stride)))


def rh1_bound(w: Weight, stride: int | None = None) -> float:
    """Upper bound ``[u]_{A_1} [v]_{RH_inf}`` from the stored split ``w = u v``."""
    u, v = w.factorization()
    return a1_constant(u) * rh_inf_constant(v, stride)


CONSTANTS: dict[str, Callable] = {
    "a1": lambda w, q=None, stride=None: a1_constant(w),
    "ap": lambda w, q=2.0, stride=None: ap_constant(w, q, stride),
    "apr": lambda w, q=2.0, stride=None: apr_constant(w, q, stride),
    "fujii-wilson": lambda w, q=None, stride=None: fujii_wilson(w, stride),
    "rh-inf": lambda w, q=None, stride=None: rh_inf_constant(w, stride),
    "rh1": lambda w, q=None, stride=None: rh1_bound(w, stride),
}


# --------------------------------------------------------------------------- class membership

@dataclass
class DoublingTrace:
    ns: list[int]
    values: list[float]

    @property
    def ratios(self) -> list[float]:
        return [b / a for a, b in zip(self.values[:-1], self.values[1:])]

    @property
    def last_drift(self) -> float:
        a, b = self.values[-2], self.values[-1]
        return abs(b / a - 1.0)


GROWTH_FACTOR = 1.4
STABLE_DRIFT = 0.10


def doubling_trace(build: Callable[[Grid], Weight], constant: Callable[[Weight], float],
                   grid: Grid, doublings: int = 3) -> DoublingTrace:
    """Evaluate ``constant(build(g))`` on ``grid`` and ``doublings`` refinements."""
    ns, vals = [], []
    g = grid
    for _ in range(doublings + 1):
        ns.append(g.n_points)
        vals.append(constant(build(g)))
        g = g.refine()
    return DoublingTrace(ns, vals)


def classify(trace: DoublingTrace, growth: float = GROWTH_FACTOR,
             drift: float = STABLE_DRIFT) -> str:
    """``divergent`` if every doubling grows by ``growth``; ``stable`` if the last drifts < ``drift``."""
    r = trace.ratios
    if r and all(x >= growth or not np.isfinite(x) for x in r):
        return "divergent"
    if trace.last_drift < drift:
        return "stable"
    return "inconclusive"


# --------------------------------------------------------------------------- expression evaluation

def _num(node) -> float:
    if isinstance(node, Num):
        return node.value
    raise ValueError(f"expected a number, got {node}")


def build_function(node, grid: Grid) -> SampledFunction:
    """Evaluate ``indicator(a,b) | bump(c,r) | step(seed,count)``."""
    if not isinstance(node, Call):
        raise ValueError(f"expected a function expression, got {node}")
    args = [_num(a) for a in node.args]
    if node.func == "indicator" and len(args) == 2:
        return families.indicator(grid, *args)
    if node.func == "bump" and len(args) == 2:
        return families.bump(grid, *args)
    if node.func == "step" and len(args) == 2:
        return families.step(grid, int(args[0]), int(args[1]))
    raise ValueError(f"unknown function {node}")


def build_weight(node, grid: Grid) -> Weight:
    """Evaluate a weight expression tree on ``grid``."""
    if isinstance(node, Name):
        if node.id == "one":
            return power_weight(0.0, grid)
        raise ValueError(f"unknown weight {node.id!r}")
    if isinstance(node, BinOp):
        left = build_weight(node.left, grid)
        if node.op == "*":
            return left * build_weight(node.right, grid)
        if node.op == "^":
            return left ** _num(node.right)
        raise ValueError(f"unknown operator {node.op!r}")
    if isinstance(node, Call):
        if node.func == "power" and len(node.args) == 1:
            return power_weight(_num(node.args[0]), grid)
        if node.func == "a1max" and len(node.args) == 2:
            h = build_function(node.args[0], grid)
            return maximal_power(h, _num(node.args[1]), label=str(node))
        if node.func == "hatq2" and len(node.args) == 5:
            u0 = build_weight(node.args[0], grid)
            h1 = build_function(node.args[1], grid)
            h2 = build_function(node.args[2], grid)
            return hat_aq2_build(u0, h1, h2, _num(node.args[3]), _num(node.args[4]))
    raise ValueError(f"unknown weight expression {node}")
