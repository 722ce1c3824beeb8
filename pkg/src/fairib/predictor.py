"""Bayes decision rule on the representation U and the equalized-odds audit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import Encoder, JointAXY
from .errors import AlphabetMismatch, BadParameter
from .information import conditional_mutual_information

# Expected losses closer than this are treated as tied.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class LossMatrix:
    """ell[y_hat, y]: cost of predicting y_hat when the label is y."""

    ell: np.ndarray

    def __post_init__(self):
        ell = np.array(self.ell, dtype=np.float64)
        if ell.ndim != 2 or ell.shape[0] != ell.shape[1]:
            raise BadParameter(f"loss matrix must be square, got shape {ell.shape}")
        if not np.all(np.isfinite(ell)) or np.any(ell < 0):
            raise BadParameter("loss matrix entries must be finite and non-negative")
        ell.setflags(write=False)
        object.__setattr__(self, "ell", ell)

    @classmethod
    def hamming(cls, n: int) -> "LossMatrix":
        return cls(1.0 - np.eye(n))

    @property
    def size(self) -> int:
        return self.ell.shape[0]

    @property
    def is_hamming(self) -> bool:
        return bool(np.array_equal(self.ell, 1.0 - np.eye(self.size)))


@dataclass(frozen=True)
class DecisionRule:
    delta: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "delta", tuple(int(d) for d in self.delta))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.delta, dtype=np.int64)


@dataclass(frozen=True)
class EqualizedOddsAudit:
    cmi: float
    max_rate_gap: float


def _check(joint: JointAXY, enc: Encoder) -> None:
    if enc.n_x != joint.n_x:
        raise AlphabetMismatch(f"encoder has {enc.n_x} rows but |X| = {joint.n_x}")


def _check_rule(rule: DecisionRule, enc: Encoder, n_y: int) -> np.ndarray:
    delta = rule.as_array()
    if delta.shape != (enc.n_u,):
        raise AlphabetMismatch(f"rule covers {delta.size} symbols but |U| = {enc.n_u}")
    if np.any((delta < 0) | (delta >= n_y)):
        raise AlphabetMismatch("rule maps to labels outside the Y alphabet")
    return delta


def joint_uy(joint: JointAXY, enc: Encoder) -> np.ndarray:
    """P(u, y) = sum_x Q(u|x) P(x, y)."""
    _check(joint, enc)
    return enc.q.T @ joint.p.sum(axis=0)


def expected_losses(joint: JointAXY, enc: Encoder, loss: LossMatrix,
                    dead_cluster_tol: float = 1e-12) -> np.ndarray:
    """Posterior expected loss of each action, indexed [u, y_hat].

    Dead clusters (P(u) below the tolerance) use the label prior instead of
    their posterior.
    """
    puy = joint_uy(joint, enc)
    if loss.size != joint.n_y:
        raise AlphabetMismatch(f"loss matrix is {loss.size}x{loss.size} but |Y| = {joint.n_y}")
    pu = puy.sum(axis=1)
    prior = joint.p.sum(axis=(0, 1))
    live = pu >= dead_cluster_tol
    post = np.where(live[:, None], puy / np.where(live, pu, 1.0)[:, None], prior[None, :])
    return post @ loss.ell.T


def bayes_rule(joint: JointAXY, enc: Encoder, loss: LossMatrix | None = None,
               dead_cluster_tol: float = 1e-12) -> DecisionRule:
    """Risk-minimizing deterministic rule u -> y_hat.

    Ties go to the smallest label index, except under Hamming loss where
    they go to the largest; for binary labels that is the rule
    ``y_hat = 1[P(Y=1|u) >= P(Y=0|u)]``.
    """
    if loss is None:
        loss = LossMatrix.hamming(joint.n_y)
    risk = expected_losses(joint, enc, loss, dead_cluster_tol)
    best = risk.min(axis=1, keepdims=True)
    tied = risk <= best + TIE_TOL
    if loss.is_hamming:
        delta = risk.shape[1] - 1 - np.argmax(tied[:, ::-1], axis=1)
    else:
        delta = np.argmax(tied, axis=1)
    return DecisionRule(delta)


def bayes_risk(joint: JointAXY, enc: Encoder, rule: DecisionRule,
               loss: LossMatrix | None = None) -> float:
    """E[ell(delta(U), Y)] under the encoder-induced joint."""
    if loss is None:
        loss = LossMatrix.hamming(joint.n_y)
    puy = joint_uy(joint, enc)
    delta = _check_rule(rule, enc, joint.n_y)
    return float(np.sum(puy * loss.ell[delta, :]))


def prediction_joint(joint: JointAXY, enc: Encoder, rule: DecisionRule) -> np.ndarray:
    """P(a, y_hat, y) for the end-to-end predictor, indexed [a, y_hat, y]."""
    _check(joint, enc)
    delta = _check_rule(rule, enc, joint.n_y)
    onehot = np.zeros((enc.n_u, joint.n_y))
    onehot[np.arange(enc.n_u), delta] = 1.0
    pauy = np.einsum("axy,xu->auy", joint.p, enc.q)
    return np.einsum("auy,uk->aky", pauy, onehot)


def equalized_odds_gap(joint: JointAXY, enc: Encoder, rule: DecisionRule) -> EqualizedOddsAudit:
    """I(A; Y_hat | Y) and the largest between-group difference in P(Y_hat | Y, A)."""
    pakY = prediction_joint(joint, enc, rule)
    cmi = conditional_mutual_information(pakY)
    pay = pakY.sum(axis=1)  # [a, y]
    gap = 0.0
    for y in range(joint.n_y):
        groups = np.flatnonzero(pay[:, y] > 0)
        if groups.size < 2:
            continue
        rates = pakY[groups, :, y] / pay[groups, y][:, None]  # [a, y_hat]
        gap = max(gap, float(np.max(rates.max(axis=0) - rates.min(axis=0))))
    return EqualizedOddsAudit(cmi=cmi, max_rate_gap=gap)
