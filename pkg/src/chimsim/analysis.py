"""Closed-form collision probabilities and a Monte-Carlo cross-check.

Symbols follow the model: P surrounding sensors, each in range with
probability alpha; M channels; K sensors per WBAN; m rectangles in the
orthogonal family (Z = K*m symbol patterns); x concurrent transmitters, y of
them on orthogonal patterns; t sensors colliding in both TDMA and IMB parts.

Binomials are exact Python integers; only the final ratio is a float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class AnalysisParams:
    P: int
    alpha: float
    M: int
    K: int
    m: int
    x: int = 0
    y: int = 0
    t: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha={self.alpha} outside [0, 1]")
        if self.P < 0 or self.M < 1 or self.K < 1 or self.m < 1:
            raise DomainError("P must be >= 0 and M, K, m >= 1")
        if not 0 <= self.y <= self.x:
            raise DomainError(f"need 0 <= y <= x, got x={self.x}, y={self.y}")
        if not 0 <= self.t <= self.K:
            raise DomainError(f"need 0 <= t <= K, got t={self.t}, K={self.K}")

    @property
    def Z(self) -> int:
        return self.K * self.m

    @property
    def slots(self) -> int:
        """min(M, K): the transmission opportunities one interferer can hit."""
        return min(self.M, self.K)

    def with_(self, **changes) -> "AnalysisParams":
        return replace(self, **changes)


def pr_x(p: AnalysisParams) -> float:
    """Pr(X = x) = C(P, x) alpha^x (1-alpha)^(P-x) (min(M,K)/K)^x."""
    if p.x > p.P:
        raise DomainError(f"x={p.x} exceeds P={p.P}")
    return (math.comb(p.P, p.x)
            * (p.alpha * p.slots / p.K) ** p.x
            * (1.0 - p.alpha) ** (p.P - p.x))


def pr_y_given_x(p: AnalysisParams) -> float:
    """Hypergeometric Pr(Y = y | X = x) = C(K, y) C(Z-K, x-y) / C(Z, x)."""
    Z, K = p.Z, p.K
    if p.x > Z:
        raise DomainError(f"x={p.x} exceeds Z={Z}")
    if p.x - p.y > Z - K:
        raise DomainError(f"x-y={p.x - p.y} exceeds Z-K={Z - K}")
    return math.comb(K, p.y) * math.comb(Z - K, p.x - p.y) / math.comb(Z, p.x)


def y_support(p: AnalysisParams) -> range:
    """Values of y with non-zero Pr(Y = y | X = x)."""
    return range(max(0, p.x - (p.Z - p.K)), min(p.x, p.K) + 1)


def _miss(p: AnalysisParams) -> float:
    """1 - Q, computed directly so it keeps full precision when Q is near 1."""
    n = p.x - p.y
    if n == 0:
        return 1.0
    return (1.0 - 1.0 / p.slots) ** n


def q_coll(p: AnalysisParams) -> float:
    """Q = 1 - (1 - 1/min(M,K))^(x-y)."""
    n = p.x - p.y
    if n == 0:
        return 0.0
    if p.slots == 1:
        return 1.0
    return -math.expm1(n * math.log1p(-1.0 / p.slots))


def pr_t_imb(p: AnalysisParams, Q: float | None = None) -> float:
    """Binomial two-stage collision law C(K, t) (Q^2)^t (1 - Q^2)^(K-t)."""
    if Q is None:
        Q, miss = q_coll(p), _miss(p)
    else:
        miss = 1.0 - Q
    if not 0.0 <= Q <= 1.0:
        raise DomainError(f"Q={Q} outside [0, 1]")
    q2 = Q * Q
    return math.comb(p.K, p.t) * q2 ** p.t * (miss * (1.0 + Q)) ** (p.K - p.t)


def pr_t_imb_expanded(p: AnalysisParams) -> float:
    """Same law with Q substituted and 1 - Q^2 factored.

    With a = (1 - 1/min(M,K))^(x-y):
    C(K, t) a^(K-t) (2 - a)^(K-t) (1 - a)^(2t).
    """
    a = _miss(p)
    return (math.comb(p.K, p.t) * a ** (p.K - p.t)
            * (2.0 - a) ** (p.K - p.t) * (1.0 - a) ** (2 * p.t))


def expected_w(p: AnalysisParams, Q: float | None = None) -> float:
    """Expected number of first-stage colliders, K * Q."""
    return p.K * (q_coll(p) if Q is None else Q)


def mc_oracle(p: AnalysisParams, samples: int, rng, chunk: int = 200_000):
    """Monte-Carlo estimate of Q and its binomial standard error.

    Each of the x-y non-orthogonal interferers lands on a uniform slot among
    min(M, K); the tagged sensor collides when any lands on its own slot.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    n = p.x - p.y
    if n == 0:
        return 0.0, 0.0
    hits = 0
    left = samples
    while left:
        b = min(chunk, left)
        tagged = rng.integers(0, p.slots, b)
        draws = rng.integers(0, p.slots, (b, n))
        hits += int(np.count_nonzero((draws == tagged[:, None]).any(axis=1)))
        left -= b
    est = hits / samples
    return est, math.sqrt(est * (1.0 - est) / samples)


def marginal_collision_probability(P: int, alpha: float, M: int, K: int, m: int) -> float:
    """Sum over x, y of Pr(X=x) Pr(Y=y|X=x) Q(x, y).

    A convenience composition of the conditional formulas; the model itself
    does not define a network-level marginal. Pr(X=x) as written is not
    normalised unless M >= K, so neither is this sum.
    """
    base = AnalysisParams(P, alpha, M, K, m)
    total = 0.0
    for x in range(0, min(P, base.Z) + 1):
        px = pr_x(base.with_(x=x))
        if px == 0.0:
            continue
        at_x = base.with_(x=x)
        for y in y_support(at_x):
            py = at_x.with_(y=y)
            total += px * pr_y_given_x(py) * q_coll(py)
    return total
