"""Synthetic joints from the A -> X -> Y model, sample ingestion, and (de)serialization.

Floats are written with Python's shortest round-trip repr, so a parse of a
written file reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import INPUT_TOL, Alphabet, Encoder, JointAXY, make_joint
from .errors import AlphabetMismatch, BadParameter, NegativeMass, NotNormalized
from .solver import FitResult

CSV_HEADER = ("a", "x", "y")


def _stochastic(arr, name: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(arr, dtype=np.float64)
    except (TypeError, ValueError):
        raise BadParameter(f"{name} must be a numeric array") from None
    if arr.ndim != ndim or 0 in arr.shape:
        raise BadParameter(f"{name} must be a non-empty {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NotNormalized(f"{name} contains non-finite entries")
    if np.any(arr < 0):
        raise NegativeMass(f"{name} has negative entries")
    dev = np.max(np.abs(arr.sum(axis=-1) - 1.0))
    if dev > INPUT_TOL:
        raise NotNormalized(f"{name} rows deviate from 1 by {dev:.3g}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GeneratorSpec:
    p_a: np.ndarray
    p_x_given_a: np.ndarray
    p_y_given_x: np.ndarray

    def __post_init__(self):
        p_a = _stochastic(self.p_a, "p_a", 1)
        pxa = _stochastic(self.p_x_given_a, "p_x_given_a", 2)
        pyx = _stochastic(self.p_y_given_x, "p_y_given_x", 2)
        if pxa.shape[0] != p_a.size:
            raise AlphabetMismatch(f"p_x_given_a has {pxa.shape[0]} rows but |A| = {p_a.size}")
        if pyx.shape[0] != pxa.shape[1]:
            raise AlphabetMismatch(f"p_y_given_x has {pyx.shape[0]} rows but |X| = {pxa.shape[1]}")
        object.__setattr__(self, "p_a", p_a)
        object.__setattr__(self, "p_x_given_a", pxa)
        object.__setattr__(self, "p_y_given_x", pyx)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.p_a.size, self.p_x_given_a.shape[1], self.p_y_given_x.shape[1])

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        if not isinstance(d, dict):
            raise BadParameter("generator spec must be a JSON object")
        fields = ("p_a", "p_x_given_a", "p_y_given_x")
        missing = [f for f in fields if f not in d]
        if missing:
            raise BadParameter(f"generator spec is missing {missing}")
        return cls(*(d[f] for f in fields))

    def to_dict(self) -> dict:
        return {
            "p_a": self.p_a.tolist(),
            "p_x_given_a": self.p_x_given_a.tolist(),
            "p_y_given_x": self.p_y_given_x.tolist(),
        }


# Pinned test instance: A and X correlated, Y depends on A only through X.
SYNTHETIC_V1 = GeneratorSpec(
    p_a=[0.5, 0.5],
    p_x_given_a=[[0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4]],
    p_y_given_x=[[0.9, 0.1], [0.6, 0.4], [0.4, 0.6], [0.1, 0.9]],
)


def spec_to_joint(spec: GeneratorSpec) -> JointAXY:
    """P(a, x, y) = P(a) P(x|a) P(y|x)."""
    p = spec.p_a[:, None, None] * spec.p_x_given_a[:, :, None] * spec.p_y_given_x[None, :, :]
    return make_joint(p / p.sum())


@dataclass(frozen=True)
class SampleTable:
    a: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        cols = [np.asarray(c, dtype=np.int64) for c in (self.a, self.x, self.y)]
        if len({c.shape for c in cols}) != 1 or cols[0].ndim != 1:
            raise BadParameter("sample columns must be 1-d and equally long")
        if cols[0].size < 1:
            raise BadParameter("a sample table needs at least one row")
        for name, c in zip(CSV_HEADER, cols):
            c.setflags(write=False)
            object.__setattr__(self, name, c)

    @property
    def n(self) -> int:
        return self.a.size


def _categorical(rng: np.random.Generator, cdf: np.ndarray) -> np.ndarray:
    """One draw per row of ``cdf`` (rows are cumulative distributions)."""
    u = rng.random(cdf.shape[0])
    idx = np.sum(cdf <= u[:, None], axis=1)
    return np.minimum(idx, cdf.shape[1] - 1)


def sample(spec: GeneratorSpec, n: int, seed: int) -> SampleTable:
    """Ancestral sampling A -> X -> Y, deterministic in ``seed``."""
    if int(n) != n or n < 1:
        raise BadParameter(f"n must be a positive integer, got {n!r}")
    n = int(n)
    rng = np.random.default_rng(seed)
    a = _categorical(rng, np.broadcast_to(np.cumsum(spec.p_a), (n, spec.p_a.size)))
    x = _categorical(rng, np.cumsum(spec.p_x_given_a, axis=1)[a])
    y = _categorical(rng, np.cumsum(spec.p_y_given_x, axis=1)[x])
    return SampleTable(a, x, y)


def empirical_joint(table: SampleTable, alphabets) -> JointAXY:
    """Relative frequencies count(a, x, y) / n over explicitly declared alphabets."""
    sizes = tuple(a.size if isinstance(a, Alphabet) else int(a) for a in alphabets)
    if len(sizes) != 3:
        raise AlphabetMismatch("three alphabets (A, X, Y) are required")
    for name, col, size in zip(CSV_HEADER, (table.a, table.x, table.y), sizes):
        bad = (col < 0) | (col >= size)
        if np.any(bad):
            raise AlphabetMismatch(
                f"column {name} has value {int(col[bad][0])} outside alphabet of size {size}"
            )
    flat = np.ravel_multi_index((table.a, table.x, table.y), sizes)
    counts = np.bincount(flat, minlength=int(np.prod(sizes))).reshape(sizes)
    return make_joint(counts / table.n, alphabets)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, float) - np.asarray(q, float))))


# --- sample CSV ---------------------------------------------------------------

def samples_to_csv(table: SampleTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(zip(table.a.tolist(), table.x.tolist(), table.y.tolist()))
    return buf.getvalue()


def samples_from_csv(text: str) -> SampleTable:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(c.strip() for c in rows[0]) != CSV_HEADER:
        raise BadParameter("sample CSV must start with the header a,x,y")
    body = [r for r in rows[1:] if r]
    try:
        cols = np.array([[int(c) for c in r] for r in body], dtype=np.int64)
    except ValueError:
        raise BadParameter("sample CSV rows must be integer triples") from None
    if cols.ndim != 2 or cols.shape[0] == 0 or cols.shape[1] != 3:
        raise BadParameter("sample CSV must hold at least one a,x,y triple per row")
    return SampleTable(cols[:, 0], cols[:, 1], cols[:, 2])


def write_samples(table: SampleTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(samples_to_csv(table))


def read_samples(path) -> SampleTable:
    return samples_from_csv(Path(path).read_text(encoding="utf-8"))


# --- JSON documents -----------------------------------------------------------

def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise BadParameter(f"{path}: invalid JSON ({exc})") from None


def joint_to_dict(joint: JointAXY) -> dict:
    return {"p": joint.p.tolist()}


def joint_from_dict(d: dict) -> JointAXY:
    return make_joint(np.array(d["p"], dtype=np.float64), renormalize=False)


def encoder_to_dict(enc: Encoder) -> dict:
    return {"q": enc.q.tolist()}


def encoder_from_dict(d: dict) -> Encoder:
    return Encoder(np.array(d["q"], dtype=np.float64))


def _finite_or_none(v: float):
    return v if math.isfinite(v) else None


def fit_result_to_dict(res: FitResult) -> dict:
    return {
        "encoder": res.encoder.q.tolist(),
        "metrics": {k: float(res.metrics[k]) for k in ("i_xu", "i_auy", "i_uy", "lagrangian")},
        "converged": bool(res.converged),
        "iterations": int(res.iterations),
        "restart_index": int(res.restart_index),
        "stationarity_residual": _finite_or_none(float(res.stationarity_residual)),
        "trace": [float(v) for v in res.trace],
        "restart_lagrangians": [_finite_or_none(float(v)) for v in res.restart_lagrangians],
    }


def fit_result_from_dict(d: dict) -> FitResult:
    if not isinstance(d, dict) or "encoder" not in d:
        raise BadParameter("fit result must be a JSON object with an 'encoder' field")
    raw = d["encoder"]
    # hand-written files may use the {"q": ...} encoder form
    enc = encoder_from_dict(raw) if isinstance(raw, dict) else Encoder(np.array(raw, dtype=np.float64))
    resid = d.get("stationarity_residual")
    return FitResult(
        encoder=enc,
        metrics={k: float(v) for k, v in d.get("metrics", {}).items()},
        converged=bool(d.get("converged", False)),
        iterations=int(d.get("iterations", 0)),
        restart_index=int(d.get("restart_index", 0)),
        stationarity_residual=math.nan if resid is None else float(resid),
        trace=[float(v) for v in d.get("trace", [])],
        restart_lagrangians=[math.nan if v is None else float(v)
                             for v in d.get("restart_lagrangians", [])],
    )
