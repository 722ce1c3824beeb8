"""Exact information functionals in nats.

Everything here is a plain finite sum over the support; ``0 log 0`` is taken
as 0.  Small negative results from round-off (down to -1e-12) are clamped
to zero; anything more negative signals a bug and raises InternalError.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import Encoder, JointAXY
from .errors import AlphabetMismatch, BadParameter, InternalError, LengthMismatch

ROUNDOFF_TOL = 1e-12


def _clamp(value: float, what: str) -> float:
    if value < 0.0:
        if value < -ROUNDOFF_TOL:
            raise InternalError(f"{what} evaluated to {value!r}")
        return 0.0
    return float(value)


def _xlogy_ratio(p: np.ndarray, num: np.ndarray, den: np.ndarray) -> float:
    """sum p * log(num / den) over cells with p > 0."""
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(num[mask]) - np.log(den[mask]))))


def entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64).ravel()
    nz = p[p > 0]
    return _clamp(float(-np.sum(nz * np.log(nz))), "entropy")


def kl_divergence(p, q) -> float:
    """D(p || q); returns ``math.inf`` when p puts mass where q has none."""
    p = np.asarray(p, dtype=np.float64).ravel()
    q = np.asarray(q, dtype=np.float64).ravel()
    if p.shape != q.shape:
        raise LengthMismatch(f"lengths differ: {p.size} vs {q.size}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return _clamp(_xlogy_ratio(p, p, q), "KL divergence")


def mutual_information(pxy) -> float:
    pxy = np.asarray(pxy, dtype=np.float64)
    if pxy.ndim != 2:
        raise AlphabetMismatch("mutual_information expects a 2-d joint")
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    return _clamp(_xlogy_ratio(pxy, pxy, px * py), "mutual information")


def conditional_mutual_information(pabc) -> float:
    """I(A;B|C) for a joint indexed ``[a, b, c]``."""
    pabc = np.asarray(pabc, dtype=np.float64)
    if pabc.ndim != 3:
        raise AlphabetMismatch("conditional_mutual_information expects a 3-d joint")
    pc = pabc.sum(axis=(0, 1), keepdims=True)
    pac = pabc.sum(axis=1, keepdims=True)
    pbc = pabc.sum(axis=0, keepdims=True)
    # p(a,b|c) / (p(a|c) p(b|c)) == p(a,b,c) p(c) / (p(a,c) p(b,c))
    return _clamp(
        _xlogy_ratio(pabc, pabc * pc, pac * pbc), "conditional mutual information"
    )


def information_terms(p: np.ndarray, q: np.ndarray) -> tuple[float, float, float]:
    """(I(X;U), I(A;U|Y), I(U;Y)) for raw arrays ``p[a,x,y]`` and ``q[x,u]``.

    The joint over (a, x, y, u) factorizes as P(a,x,y) Q(u|x).
    """
    pxy = p.sum(axis=0)
    px = pxy.sum(axis=1)
    pxu = px[:, None] * q
    pauy = np.einsum("axy,xu->auy", p, q)
    puy = pauy.sum(axis=0)
    return (
        mutual_information(pxu),
        conditional_mutual_information(pauy),
        mutual_information(puy),
    )


def _check_pair(joint: JointAXY, enc: Encoder) -> None:
    if enc.n_x != joint.n_x:
        raise AlphabetMismatch(f"encoder has {enc.n_x} rows but |X| = {joint.n_x}")


def check_weights(alpha: float, beta: float) -> None:
    if not (math.isfinite(alpha) and alpha > 0):
        raise BadParameter(f"alpha must be > 0, got {alpha!r}")
    if not (math.isfinite(beta) and beta >= 0):
        raise BadParameter(f"beta must be >= 0, got {beta!r}")


def lagrangian(joint: JointAXY, enc: Encoder, alpha: float, beta: float) -> float:
    """alpha*I(X;U) + beta*I(A;U|Y) - I(U;Y) for the encoder applied to the joint."""
    check_weights(alpha, beta)
    _check_pair(joint, enc)
    i_xu, i_auy, i_uy = information_terms(joint.p, enc.q)
    return alpha * i_xu + beta * i_auy - i_uy
