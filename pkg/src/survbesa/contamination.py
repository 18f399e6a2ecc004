"""Robust attention via epsilon-contamination of the softmax weights.

Attention rows become mixtures (1 - eps) * softmax(-D/phi) + eps * theta,
where each row of theta is a free distribution over the other learners.
With phi fixed, the pairwise ranking margins are linear in theta, so theta
is trained by minimizing a hinge loss on misranked pairs with projected
subgradient steps; the feasible set is a product of probability simplices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import AttentionContext, attention_matrix
from .errors import (
    EmptyPairSet,
    InvalidEpsilon,
    InvalidPhi,
    InvalidValue,
    NonFiniteObjective,
    SingleLearner,
)

_SIMPLEX_TOL = 1e-9


def _check_epsilon(epsilon: float):
    if not np.isfinite(epsilon) or not (0.0 <= epsilon <= 1.0):
        raise InvalidEpsilon(f"epsilon must lie in [0, 1], got {epsilon!r}")


def _check_phi(phi: float):
    if not np.isfinite(phi) or phi <= 0:
        raise InvalidPhi(f"phi must be a positive real, got {phi!r}")


def uniform_theta(n_learners: int) -> np.ndarray:
    """Rows uniform over the other learners, zero diagonal."""
    if n_learners < 2:
        raise SingleLearner("contaminated attention needs at least two learners")
    theta = np.full((n_learners, n_learners), 1.0 / (n_learners - 1))
    np.fill_diagonal(theta, 0.0)
    return theta


def check_theta(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    M = theta.shape[0]
    if theta.ndim != 2 or theta.shape != (M, M):
        raise InvalidValue("theta must be a square matrix")
    if np.any(np.abs(np.diag(theta)) > _SIMPLEX_TOL):
        raise InvalidValue("theta diagonal must be zero")
    if np.any(theta < -_SIMPLEX_TOL) or np.any(
        np.abs(theta.sum(axis=1) - 1.0) > 1e-6
    ):
        raise InvalidValue("theta rows must be distributions over other learners")
    return theta


@dataclass(frozen=True)
class ContaminationParams:
    epsilon: float
    phi: float
    theta: np.ndarray  # (M, M), zero diagonal, rows on simplices

    def __post_init__(self):
        _check_epsilon(self.epsilon)
        _check_phi(self.phi)
        object.__setattr__(self, "theta", check_theta(self.theta))


def contaminated_matrix(dist, params: ContaminationParams) -> np.ndarray:
    """(M, M) mixture attention matrix with zero diagonal, rows summing to 1."""
    s = attention_matrix(dist, params.phi)
    return (1.0 - params.epsilon) * s + params.epsilon * params.theta


def contaminated_weights(dist, params: ContaminationParams, query: int) -> np.ndarray:
    """Row `query` of the mixture matrix, compressed to the other learners."""
    row = contaminated_matrix(dist, params)[query]
    return np.delete(row, query)


@dataclass(frozen=True)
class ContaminationProblem:
    """Precomputed linear structure of the pair margins.

    For pair p = (i, j) and the mixture weights,

        R_p(theta) = q_sum[p] + G[p] @ c(theta),   c(theta)[k] = sum_l theta[l, k],

    with Q[p, l, k] = (1-eps) * (s_j[l,k] u_j[k] - s_i[l,k] u_i[k]) summed into
    q_sum, and G[p, k] = eps * (u_j[k] - u_i[k]).  u is the expected time of
    each learner curve normalized by the training horizon.
    """

    Q: np.ndarray  # (P, M, M)
    G: np.ndarray  # (P, M)
    q_sum: np.ndarray  # (P,)
    epsilon: float
    phi: float
    lam: float

    @property
    def n_pairs(self) -> int:
        return self.G.shape[0]

    @property
    def n_learners(self) -> int:
        return self.G.shape[1]


def precompute_qg(
    contexts: list[AttentionContext],
    pairs,
    epsilon: float,
    phi: float,
    lam: float = 0.0,
) -> ContaminationProblem:
    _check_epsilon(epsilon)
    _check_phi(phi)
    if lam < 0 or not np.isfinite(lam):
        raise InvalidValue(f"lam must be a non-negative real, got {lam!r}")
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if pairs.size == 0:
        raise EmptyPairSet("no comparable pairs to train on")
    if not contexts or contexts[0].n_learners < 2:
        raise SingleLearner("contaminated attention needs at least two learners")

    S = np.stack([attention_matrix(c.dist, phi) for c in contexts])  # (n, M, M)
    U = np.stack([c.that_normalized for c in contexts])  # (n, M)
    SU = S * U[:, None, :]  # s_i[l,k] * u_i[k]
    i, j = pairs[:, 0], pairs[:, 1]
    Q = (1.0 - epsilon) * (SU[j] - SU[i])
    G = epsilon * (U[j] - U[i])
    return ContaminationProblem(
        Q, G, Q.sum(axis=(1, 2)), float(epsilon), float(phi), float(lam)
    )


def r_values(problem: ContaminationProblem, theta) -> np.ndarray:
    """(P,) pair margins at theta; linear in theta."""
    c = np.asarray(theta, dtype=float).sum(axis=0)
    return problem.q_sum + problem.G @ c


def hinge_objective(
    problem: ContaminationProblem, theta, flipped_sign: bool = False
) -> tuple[float, np.ndarray]:
    """Hinge loss over pairs plus ridge penalty, and one subgradient.

    The default penalizes misranked pairs: sum_p max(0, -R_p) + lam ||theta||^2.
    `flipped_sign` selects the variant that penalizes +R_p instead; it trains
    the ranking backwards and exists only for side-by-side comparison.
    """
    theta = np.asarray(theta, dtype=float)
    M = theta.shape[0]
    r = r_values(problem, theta)
    sign = 1.0 if flipped_sign else -1.0
    margins = sign * r
    value = float(np.sum(np.maximum(0.0, margins)) + problem.lam * np.sum(theta**2))

    viol = margins > 0  # zero branch at the kink
    gsum = sign * problem.G[viol].sum(axis=0)  # (M,)
    sub = np.tile(gsum, (M, 1))
    np.fill_diagonal(sub, 0.0)
    sub = sub + 2.0 * problem.lam * theta
    return value, sub


def project_row_simplex(v) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex.

    Sort-and-threshold: with u the descending sort, the projection is
    max(v - t, 0) where t is the largest threshold keeping the sum at 1.
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u > cssv / k)[0][-1]
    return np.maximum(v - cssv[rho] / (rho + 1), 0.0)


def project_theta(theta) -> np.ndarray:
    """Project each row's off-diagonal part onto the simplex; diagonal stays 0."""
    theta = np.asarray(theta, dtype=float)
    M = theta.shape[0]
    out = np.zeros_like(theta)
    for l in range(M):
        keep = np.arange(M) != l
        out[l, keep] = project_row_simplex(theta[l, keep])
    return out


@dataclass(frozen=True)
class ContaminationResult:
    theta: np.ndarray
    value: float
    history: np.ndarray  # objective value before each step, then at the end


def solve_contamination(
    problem: ContaminationProblem,
    steps: int = 200,
    step_size: float = 0.1,
    flipped_sign: bool = False,
    seed: int | None = None,  # accepted for interface symmetry; solver is deterministic
) -> ContaminationResult:
    """Projected subgradient descent from the uniform theta.

    Step t uses rate step_size / sqrt(t).  Subgradient methods do not descend
    monotonically, so the best iterate seen is returned rather than the last.
    """
    del seed
    M = problem.n_learners
    theta = uniform_theta(M)
    best_theta, best_value = theta, np.inf
    history = np.empty(steps + 1)
    for t in range(steps):
        value, sub = hinge_objective(problem, theta, flipped_sign)
        if not np.isfinite(value):
            raise NonFiniteObjective(f"objective became {value!r} at step {t}")
        history[t] = value
        if value < best_value:
            best_theta, best_value = theta, value
        theta = project_theta(theta - (step_size / np.sqrt(t + 1)) * sub)
    value, _ = hinge_objective(problem, theta, flipped_sign)
    if not np.isfinite(value):
        raise NonFiniteObjective(f"objective became {value!r} after the last step")
    history[steps] = value
    if value < best_value:
        best_theta, best_value = theta, value
    return ContaminationResult(best_theta, float(best_value), history)
