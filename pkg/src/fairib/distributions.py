"""Finite discrete probability objects and the index algebra over (A, X, Y).

All tensors are stored in linear space as read-only float64 arrays.  The
joint over the protected attribute A, features X and label Y is indexed
``p[a, x, y]``; encoders are indexed ``q[x, u]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AlphabetMismatch,
    ConditionOnNull,
    EmptySupport,
    NegativeMass,
    NotNormalized,
)

CLAMP_TOL = 1e-15
INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12
NEGATIVE_TOL = 1e-12

_AXES = {"A": 0, "X": 1, "Y": 2}


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise AlphabetMismatch(f"alphabet size must be a positive integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise AlphabetMismatch(f"{len(labels)} labels for alphabet of size {self.size}")
            if len(set(labels)) != len(labels):
                raise AlphabetMismatch("alphabet labels must be unique")
            object.__setattr__(self, "labels", labels)


def _as_alphabets(alphabets, shape: Sequence[int]) -> tuple[Alphabet, ...]:
    if alphabets is None:
        return tuple(Alphabet(n) for n in shape)
    out = tuple(a if isinstance(a, Alphabet) else Alphabet(int(a)) for a in alphabets)
    if tuple(a.size for a in out) != tuple(shape):
        raise AlphabetMismatch(
            f"array shape {tuple(shape)} does not match alphabet sizes {tuple(a.size for a in out)}"
        )
    return out


def _check_rows(arr: np.ndarray, what: str, tol: float) -> None:
    if not np.all(np.isfinite(arr)):
        raise NotNormalized(f"{what} contains non-finite entries")
    if np.any(arr < -NEGATIVE_TOL):
        raise NegativeMass(f"{what} has negative entries (min {arr.min():.3g})")
    sums = arr.sum(axis=-1)
    dev = np.max(np.abs(sums - 1.0))
    if dev > tol:
        raise NotNormalized(f"{what} rows deviate from 1 by {dev:.3g}")


@dataclass(frozen=True)
class JointAXY:
    """Validated joint distribution P(a, x, y).  Build it with :func:`make_joint`."""

    p: np.ndarray
    alphabets: tuple[Alphabet, Alphabet, Alphabet]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.p.shape

    @property
    def n_a(self) -> int:
        return self.p.shape[0]

    @property
    def n_x(self) -> int:
        return self.p.shape[1]

    @property
    def n_y(self) -> int:
        return self.p.shape[2]


def make_joint(p, alphabets=None, *, renormalize=True) -> JointAXY:
    """Validate ``p[a, x, y]`` and return an immutable :class:`JointAXY`.

    Entries below 1e-15 in magnitude are clamped to zero and the tensor is
    renormalized.  Every x must keep positive marginal mass.  Pass
    ``renormalize=False`` to keep already-normalized values bit for bit.
    """
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 3:
        raise AlphabetMismatch(f"joint must be 3-dimensional, got shape {arr.shape}")
    alph = _as_alphabets(alphabets, arr.shape)
    if not np.all(np.isfinite(arr)):
        raise NotNormalized("joint contains non-finite entries")
    if np.any(arr < -NEGATIVE_TOL):
        raise NegativeMass(f"joint has negative entries (min {arr.min():.3g})")
    total = arr.sum()
    if abs(total - 1.0) > INPUT_TOL:
        raise NotNormalized(f"joint sums to {total!r}")
    arr = np.where(np.abs(arr) < CLAMP_TOL, 0.0, arr)
    arr = np.clip(arr, 0.0, None)
    if renormalize:
        arr = arr / arr.sum()
    px = arr.sum(axis=(0, 2))
    empty = np.flatnonzero(px <= 0.0)
    if empty.size:
        raise EmptySupport(f"x values {empty.tolist()} have zero probability; prune them first")
    return JointAXY(_frozen(arr), alph)


@dataclass(frozen=True)
class Encoder:
    """Row-stochastic Q(u|x) indexed ``q[x, u]``."""

    q: np.ndarray
    alphabets: tuple[Alphabet, Alphabet] = field(default=None)

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.float64)
        if q.ndim != 2:
            raise AlphabetMismatch(f"encoder must be 2-dimensional, got shape {q.shape}")
        _check_rows(q, "encoder", INTERNAL_TOL)
        object.__setattr__(self, "q", _frozen(np.clip(q, 0.0, None)))
        object.__setattr__(self, "alphabets", _as_alphabets(self.alphabets, q.shape))

    @property
    def n_x(self) -> int:
        return self.q.shape[0]

    @property
    def n_u(self) -> int:
        return self.q.shape[1]


@dataclass(frozen=True)
class Marginal:
    """R(u)."""

    r: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1:
            raise AlphabetMismatch("marginal must be 1-dimensional")
        _check_rows(r, "marginal", INTERNAL_TOL)
        object.__setattr__(self, "r", _frozen(np.clip(r, 0.0, None)))


@dataclass(frozen=True)
class Decoder:
    """S(y|u) indexed ``s[u, y]``; ``dead`` flags rows replaced by the uniform law."""

    s: np.ndarray
    dead: tuple[bool, ...] = ()

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.float64)
        if s.ndim != 2:
            raise AlphabetMismatch("decoder must be 2-dimensional")
        _check_rows(s, "decoder", INTERNAL_TOL)
        object.__setattr__(self, "s", _frozen(np.clip(s, 0.0, None)))
        dead = tuple(bool(d) for d in self.dead) or (False,) * s.shape[0]
        object.__setattr__(self, "dead", dead)


def _axes(vars: Iterable[str]) -> list[int]:
    names = [v.upper() for v in vars]
    if not names:
        raise ValueError("at least one variable is required")
    try:
        axes = sorted({_AXES[v] for v in names})
    except KeyError as exc:
        raise ValueError(f"unknown variable {exc.args[0]!r}; expected A, X or Y") from None
    return axes


def marginal(joint: JointAXY, vars: Iterable[str]) -> np.ndarray:
    """Marginal over ``vars`` (e.g. ``"XY"``); kept axes stay in (A, X, Y) order."""
    keep = _axes(vars)
    drop = tuple(ax for ax in range(3) if ax not in keep)
    return joint.p.sum(axis=drop)


def conditional(joint: JointAXY, target: Iterable[str], given: Iterable[str]) -> np.ndarray:
    """P(target | given), indexed ``[*given, *target]``.

    Raises ConditionOnNull if any conditioning cell has probability below 1e-15.
    """
    t_axes = _axes(target)
    g_axes = _axes(given)
    if set(t_axes) & set(g_axes):
        raise ValueError("target and given variables must be disjoint")
    keep = sorted(t_axes + g_axes)
    pj = joint.p.sum(axis=tuple(ax for ax in range(3) if ax not in keep))
    # reorder to [*given, *target]
    order = [keep.index(ax) for ax in g_axes] + [keep.index(ax) for ax in t_axes]
    pj = np.transpose(pj, order)
    n_given = len(g_axes)
    pg = pj.sum(axis=tuple(range(n_given, pj.ndim)))
    if np.any(pg < CLAMP_TOL):
        raise ConditionOnNull("conditioning event has zero probability")
    return pj / pg.reshape(pg.shape + (1,) * len(t_axes))
