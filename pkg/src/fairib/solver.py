"""Alternating minimization of alpha*I(X;U) + beta*I(A;U|Y) - I(U;Y).

Each iteration updates the encoder Q(u|x) through a Gibbs-form fixed point,
then the induced marginal R(u) and decoder S(y|u).  With beta = 0 this is
the classic information-bottleneck iteration.

The fairness kernel uses P(A | x, y) inside the divergence.  Under the
A -> X -> Y graphical model this equals P(A | x), so synthetic joints reduce
to the textbook form, while empirical joints (where the Markov property only
holds approximately) still get the exact gradient of the objective.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import logsumexp

from .distributions import Decoder, Encoder, JointAXY, Marginal
from .errors import AlphabetMismatch, BadParameter, DegenerateNormalizer
from .information import check_weights, information_terms

log = logging.getLogger(__name__)

# P~(a|y,u) below this is floored before taking logs; only reachable after
# an encoder entry underflows to exactly zero.
_LOG_FLOOR = 1e-300
MONOTONE_TOL = 1e-9
MONOTONE_WINDOW = 10


@dataclass(frozen=True)
class SolverParams:
    alpha: float
    beta: float
    u_size: int
    epsilon: float = 1e-8
    max_iters: int = 2000
    restarts: int = 10
    seed: int = 0
    dead_cluster_tol: float = 1e-12

    def __post_init__(self):
        try:
            check_weights(float(self.alpha), float(self.beta))
        except (TypeError, ValueError) as exc:
            raise BadParameter(str(exc)) from None
        for name in ("u_size", "max_iters", "restarts"):
            val = getattr(self, name)
            if isinstance(val, bool) or int(val) != val or val < 1:
                raise BadParameter(f"{name} must be a positive integer, got {val!r}")
            object.__setattr__(self, name, int(val))
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise BadParameter(f"epsilon must be > 0, got {self.epsilon!r}")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise BadParameter(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (math.isfinite(self.dead_cluster_tol) and self.dead_cluster_tol >= 0):
            raise BadParameter(f"dead_cluster_tol must be >= 0, got {self.dead_cluster_tol!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, d: dict) -> "SolverParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise BadParameter(f"unknown solver parameters: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise BadParameter(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverState:
    q: Encoder
    r: Marginal
    s: Decoder
    lagrangian_trace: list[float] = field(default_factory=list)
    iter: int = 0


@dataclass
class FitResult:
    encoder: Encoder
    metrics: dict[str, float]
    converged: bool
    iterations: int
    restart_index: int
    stationarity_residual: float
    trace: list[float]
    restart_lagrangians: list[float] = field(default_factory=list)


class _JointView:
    """Quantities derived once from the joint and reused every iteration."""

    def __init__(self, joint: JointAXY):
        p = joint.p
        self.p = p
        self.pxy = p.sum(axis=0)
        self.px = self.pxy.sum(axis=1)
        self.py = self.pxy.sum(axis=0)
        self.pay = p.sum(axis=1)
        self.py_x = self.pxy / self.px[:, None]
        # weights P(a,x,y)/P(x) = P(y|x) P(a|x,y)
        self.w_axy = p / self.px[None, :, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            self.pa_xy = np.where(self.pxy[None] > 0, p / self.pxy[None], 0.0)
            self.pa_y = np.where(self.py[None] > 0, self.pay / self.py[None], 0.0)
            log_pa_xy = np.where(p > 0, np.log(np.where(p > 0, self.pa_xy, 1.0)), 0.0)
            log_py_x = np.where(self.pxy > 0, np.log(np.where(self.pxy > 0, self.py_x, 1.0)), 0.0)
        # sum_y P(y|x) sum_a P(a|x,y) log P(a|x,y)
        self.neg_h_a_xy = np.sum(self.w_axy * log_pa_xy, axis=(0, 2))
        self.neg_h_y_x = np.sum(self.py_x * log_py_x, axis=1)
        self.n_a, self.n_x, self.n_y = p.shape


def _view(joint) -> _JointView:
    return joint if isinstance(joint, _JointView) else _JointView(joint)


def _safe_log(arr: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(arr, _LOG_FLOOR))


def _fair_posterior(jv: _JointView, q: np.ndarray, r: np.ndarray, tol: float) -> np.ndarray:
    """P~(a | y, u) indexed [a, y, u]; dead clusters and empty cells are uniform."""
    pa_yu = np.einsum("axy,xu->ayu", jv.p, q)
    p_yu = pa_yu.sum(axis=0)
    live = (p_yu > 0) & (r[None, :] >= tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        post = np.where(live[None], pa_yu / p_yu[None], 1.0 / jv.n_a)
    return post


def _fair_kl(jv: _JointView, post: np.ndarray) -> np.ndarray:
    """sum_y P(y|x) D(P(A|x,y) || P~(A|y,u)) indexed [x, u]."""
    cross = np.einsum("axy,ayu->xu", jv.w_axy, _safe_log(post))
    return jv.neg_h_a_xy[:, None] - cross


def _label_kl(jv: _JointView, s: np.ndarray) -> np.ndarray:
    """D(P(Y|x) || S(Y|u)) indexed [x, u]."""
    return jv.neg_h_y_x[:, None] - jv.py_x @ _safe_log(s).T


def _check_state(jv: _JointView, state: SolverState) -> None:
    if state.q.n_x != jv.n_x:
        raise AlphabetMismatch(f"encoder has {state.q.n_x} rows but |X| = {jv.n_x}")
    if state.s.s.shape != (state.q.n_u, jv.n_y) or state.r.r.shape != (state.q.n_u,):
        raise AlphabetMismatch("state distributions have inconsistent shapes")


def f_matrix(joint, state: SolverState, params: SolverParams) -> np.ndarray:
    """The Gibbs exponent f(x, u) for every (x, u)."""
    jv = _view(joint)
    _check_state(jv, state)
    a, b = params.alpha, params.beta
    f = -_label_kl(jv, state.s.s) / a
    if b != 0.0:
        post = _fair_posterior(jv, state.q.q, state.r.r, params.dead_cluster_tol)
        f = f + (b / a) * _fair_kl(jv, post)
    return f


def compute_f(joint, state: SolverState, params: SolverParams, x: int, u: int) -> float:
    return float(f_matrix(joint, state, params)[x, u])


def _log_z(state: SolverState, f: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_r = np.log(state.r.r)
    # logsumexp subtracts the per-row max before exponentiating
    log_z = logsumexp(log_r[None, :] + f, axis=1)
    if not np.all(np.isfinite(log_z)):
        raise DegenerateNormalizer("encoder normalizer is zero or non-finite for some x")
    return log_z


def compute_log_z(joint, state: SolverState, params: SolverParams) -> np.ndarray:
    return _log_z(state, f_matrix(joint, state, params))


def compute_z(joint, state: SolverState, params: SolverParams, x: int) -> float:
    """Z(x) = sum_u R(u) exp(f(x, u)).  Overflows to inf for huge exponents; use compute_log_z."""
    return float(np.exp(compute_log_z(joint, state, params)[x]))


def update_encoder(joint, state: SolverState, params: SolverParams) -> Encoder:
    f = f_matrix(joint, state, params)
    with np.errstate(divide="ignore"):
        logits = np.log(state.r.r)[None, :] + f
    q = np.exp(logits - _log_z(state, f)[:, None])
    q = q / q.sum(axis=1, keepdims=True)
    return Encoder(q)


def update_marginal(joint, q: Encoder) -> Marginal:
    jv = _view(joint)
    r = jv.px @ q.q
    return Marginal(r / r.sum())


def update_decoder(joint, q: Encoder, r: Marginal, dead_cluster_tol: float = 1e-12) -> Decoder:
    jv = _view(joint)
    p_uy = q.q.T @ jv.pxy
    dead = r.r < dead_cluster_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        s = p_uy / p_uy.sum(axis=1, keepdims=True)
    s[dead] = 1.0 / jv.n_y
    return Decoder(s, tuple(dead))


def state_from_encoder(joint, q: Encoder, tol: float = 1e-12) -> SolverState:
    """The (Q, R, S) triple with R and S induced by ``q``."""
    jv = _view(joint)
    r = update_marginal(jv, q)
    return SolverState(q, r, update_decoder(jv, q, r, tol))


def alternating_step(joint, state: SolverState, params: SolverParams) -> SolverState:
    """One encoder/marginal/decoder update; the trace is not extended."""
    jv = _view(joint)
    q = update_encoder(jv, state, params)
    new = state_from_encoder(jv, q, params.dead_cluster_tol)
    new.lagrangian_trace = state.lagrangian_trace
    new.iter = state.iter + 1
    return new


def _objective(jv: _JointView, q: np.ndarray, params: SolverParams) -> float:
    i_xu, i_auy, i_uy = information_terms(jv.p, q)
    return params.alpha * i_xu + params.beta * i_auy - i_uy


def non_increasing(trace, tol: float = MONOTONE_TOL) -> bool:
    d = np.diff(np.asarray(trace, dtype=np.float64))
    return bool(np.all(d <= tol))


def restart_seeds(params: SolverParams) -> list[np.random.SeedSequence]:
    """Independent child seeds, one per restart, derived from ``params.seed``."""
    return np.random.SeedSequence(params.seed).spawn(params.restarts)


def solve_restart(joint, params: SolverParams, k: int) -> tuple[SolverState, bool]:
    """Run restart ``k`` to termination; returns the final state and the convergence flag.

    The encoder starts from a Dirichlet(1, ..., 1) draw per row.  The loop
    stops once successive Lagrangian values differ by less than epsilon, or
    at max_iters.  A run counts as converged only if the threshold fired and
    the last MONOTONE_WINDOW steps never increased the objective.
    """
    jv = _view(joint)
    rng = np.random.default_rng(restart_seeds(params)[k])
    q0 = rng.dirichlet(np.ones(params.u_size), size=jv.n_x)
    state = state_from_encoder(jv, Encoder(q0), params.dead_cluster_tol)
    trace = [_objective(jv, state.q.q, params)]
    fired = False
    for _ in range(params.max_iters):
        state = alternating_step(jv, state, params)
        value = _objective(jv, state.q.q, params)
        if not math.isfinite(value):
            raise DegenerateNormalizer("Lagrangian became non-finite")
        trace.append(value)
        if abs(trace[-1] - trace[-2]) < params.epsilon:
            fired = True
            break
    state.lagrangian_trace = trace
    converged = fired and non_increasing(trace[-(MONOTONE_WINDOW + 1):])
    return state, converged


def fit(joint: JointAXY, params: SolverParams) -> FitResult:
    """Multi-restart alternating minimization; keeps the restart with the lowest final value.

    Ties on the final value go to the lowest restart index.
    """
    if not isinstance(params, SolverParams):
        raise BadParameter("params must be a SolverParams instance")
    jv = _view(joint)
    best = None
    finals = []
    for k in range(params.restarts):
        try:
            state, converged = solve_restart(jv, params, k)
        except DegenerateNormalizer as exc:
            log.warning("restart %d degenerate: %s", k, exc)
            finals.append(math.nan)
            continue
        final = state.lagrangian_trace[-1]
        finals.append(final)
        log.debug("restart %d: L=%.12g iters=%d converged=%s", k, final, state.iter, converged)
        if best is None or final < best[1].lagrangian_trace[-1]:
            best = (k, state, converged)
    if best is None:
        raise DegenerateNormalizer("all restarts degenerated")
    k, state, converged = best
    i_xu, i_auy, i_uy = information_terms(jv.p, state.q.q)
    grad = lagrangian_gradient(jv, state.q, params)
    return FitResult(
        encoder=state.q,
        metrics={
            "i_xu": i_xu,
            "i_auy": i_auy,
            "i_uy": i_uy,
            "lagrangian": params.alpha * i_xu + params.beta * i_auy - i_uy,
        },
        converged=converged,
        iterations=state.iter,
        restart_index=k,
        stationarity_residual=stationarity_residual(grad, state.q),
        trace=list(state.lagrangian_trace),
        restart_lagrangians=finals,
    )


def lagrangian_gradient(joint, q: Encoder, params: SolverParams) -> np.ndarray:
    """Partial derivatives of the Lagrangian with respect to each Q(u|x), indexed [x, u].

    R and S are taken at their self-consistent values for ``q``.  The
    result is only meaningful up to a per-row constant (the row-sum
    constraint); project before comparing.
    """
    jv = _view(joint)
    if q.n_x != jv.n_x:
        raise AlphabetMismatch(f"encoder has {q.n_x} rows but |X| = {jv.n_x}")
    state = state_from_encoder(jv, q, params.dead_cluster_tol)
    px = jv.px[:, None]
    with np.errstate(divide="ignore"):
        d_compress = px * (np.log(q.q) - np.log(state.r.r)[None, :] + 1.0)
    # -P(x) D(P(Y|x)||S(Y|u)) + P(x) D(P(Y|x)||P(Y))
    kl_y_prior = _label_kl(jv, jv.py[None, :])
    d_relevance = px * (-_label_kl(jv, state.s.s) + kl_y_prior)
    grad = params.alpha * d_compress - d_relevance
    if params.beta != 0.0:
        post = _fair_posterior(jv, q.q, state.r.r, params.dead_cluster_tol)
        d_fair = px * (-_fair_kl(jv, post) + _fair_kl(jv, jv.pa_y[:, :, None]))
        grad = grad + params.beta * d_fair
    return grad


def projected_gradient(grad: np.ndarray, q: Encoder) -> np.ndarray:
    """Remove each row's Q-weighted mean, the component normal to the simplex.

    Entries with Q(u|x) = 0 sit on the simplex boundary (log Q = -inf there);
    they are reported as 0.
    """
    support = q.q > 0
    g = np.where(support, np.asarray(grad, dtype=np.float64), 0.0)
    proj = g - np.sum(q.q * g, axis=1, keepdims=True)
    return np.where(support, proj, 0.0)


def stationarity_residual(grad: np.ndarray, q: Encoder) -> float:
    proj = projected_gradient(grad, q)
    return float(np.max(np.linalg.norm(proj, axis=1)))
