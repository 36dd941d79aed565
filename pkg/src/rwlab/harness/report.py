"""Experiment reports: rows, summaries, envelope fits and serialization."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import isotonic_regression

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VACUOUS = 3
EXIT_VIOLATION = 4

ENVELOPE_SLACK = 0.15


def case_id(*parts) -> str:
    """Stable digest of a case's inputs."""
    text = json.dumps([str(p) for p in parts], separators=(",", ":"))
    return hashlib.sha1(text.encode()).hexdigest()[:16]


def fmt(x) -> str:
    """Reals with 17 significant digits; everything else via ``str``."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


@dataclass
class Row:
    case_id: str
    lhs: float
    rhs: float
    readings: dict = field(default_factory=dict)
    vacuous: bool = False

    @property
    def ratio(self) -> float:
        return ratio(self.lhs, self.rhs)


def envelope_fit(x, y, slack: float = ENVELOPE_SLACK, labels=None) -> dict:
    """Test whether readings ``y`` admit a non-decreasing majorant in ``x``.

    Points are sorted by ``(x, y)`` and fitted with the least-squares
    non-decreasing sequence (pool adjacent violators).  The fit passes if
    every reading is within ``1 + slack`` of it.  A log-log slope is reported
    alongside as a growth summary.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    out = {"slack": slack, "n": int(x.size)}
    if x.size == 0:
        out.update(ok=True, worst=0.0)
        return out
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    fit = isotonic_regression(ys).x
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = np.where(fit > 0, ys / fit - 1.0, np.where(ys > 0, np.inf, 0.0))
    if labels is not None:
        out["labels"] = [labels[i] for i in order]
    out["x"] = xs.tolist()
    out["y"] = ys.tolist()
    out["fit"] = fit.tolist()
    out["worst"] = float(excess.max())
    out["ok"] = bool(np.all(np.isfinite(ys)) and excess.max() <= slack)
    pos = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if pos.sum() >= 2 and np.ptp(np.log(xs[pos])) > 0:
        e, c = np.polyfit(np.log(xs[pos]), np.log(ys[pos]), 1)
        out["power_law"] = {"exponent": float(e), "log_coef": float(c)}
    return out


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class ExperimentReport:
    experiment: str
    rows: list[Row]
    labels: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    reading_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.case_id)

    @property
    def live(self) -> list[Row]:
        return [r for r in self.rows if not r.vacuous]

    @property
    def max_ratio(self) -> float:
        live = self.live
        return max((r.ratio for r in live), default=0.0)

    @property
    def violations(self) -> list[str]:
        return self.summary.get("violations", [])

    @property
    def exit_code(self) -> int:
        if self.rows and not self.live:
            return EXIT_VACUOUS
        if self.violations:
            return EXIT_VIOLATION
        return EXIT_OK

    def csv_text(self) -> str:
        lines = [",".join(["case_id", "lhs", "rhs", "ratio", *self.reading_names])]
        for r in self.rows:
            vals = [r.case_id, fmt(r.lhs), fmt(r.rhs), fmt(r.ratio)]
            vals += [fmt(r.readings.get(k, "")) for k in self.reading_names]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"

    def summary_dict(self) -> dict:
        out = {"experiment": self.experiment, "max_ratio": self.max_ratio,
               "cases": len(self.rows), "vacuous_cases": len(self.rows) - len(self.live)}
        out.update(self.summary)
        out["labels"] = dict(sorted(self.labels.items()))
        return _clean(out)

    def write(self, out: str | Path, plots: bool = False) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "rows.csv").write_text(self.csv_text())
        (out / "summary.json").write_text(json.dumps(self.summary_dict(), indent=2,
                                                     sort_keys=True) + "\n")
        if plots:
            self.plot(out / "plots")
        return out

    def plot(self, folder: Path):
        """Scatter of ratio against each envelope's weight constant (needs matplotlib)."""
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        folder.mkdir(parents=True, exist_ok=True)
        for name, env in self.summary.get("envelopes", {}).items():
            if not env.get("x"):
                continue
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.scatter(env["x"], env["y"], s=12, label="max ratio")
            ax.step(env["x"], env["fit"], where="post", color="k", lw=1, label="isotonic fit")
            ax.set_xlabel("weight constant")
            ax.set_ylabel("LHS / RHS")
            ax.set_title(f"{self.experiment} {name}")
            ax.legend()
            safe = "".join(c if c.isalnum() else "_" for c in name)
            fig.savefig(folder / f"{safe}.svg", metadata={"Date": None})
            plt.close(fig)


def read_rows(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
