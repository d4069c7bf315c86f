"""Nested logit core: surplus, choice probabilities, and conjugate entropy.

The surplus of a utility vector v under a nest partition with scale
parameters mu is

    E(v) = ln sum_l ( sum_{i in N_l} exp(v_i / mu_l) )^{mu_l},

its gradient is the vector of choice probabilities, and its convex
conjugate is the generalized entropy

    E*(q) = sum_l mu_l sum_{i in N_l} q_i ln q_i
          + sum_l (1 - mu_l) Q_l ln Q_l,       Q_l = sum_{i in N_l} q_i.

Everything is evaluated through per-nest log-sum-exp (the raw formula
overflows for moderate v / mu), so values are safe for |v_i| <= 700.
All functions accept batched utilities of shape (..., n) and operate on
the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

# Smallest admissible scale parameter: below this, exp(v/mu) is
# numerically meaningless even in log space.
MU_MIN = 1e-6

# Tolerance for the simplex membership test in `conjugate`.
SIMPLEX_ATOL = 1e-8


class StructureError(ValueError):
    """Nest structure or dimension invariants violated."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class NestStructure:
    """Partition of alternatives {0, ..., n-1} into nests with scales.

    Attributes:
        n: number of alternatives.
        nests: disjoint, nonempty index tuples covering range(n).
        mu: one scale parameter per nest, each in (MU_MIN, 1].
    """

    n: int
    nests: tuple[tuple[int, ...], ...]
    mu: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "nests", tuple(tuple(sorted(int(i) for i in nest)) for nest in self.nests)
        )
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))
        if self.n < 1:
            raise StructureError(f"need at least one alternative, got n={self.n}")
        if len(self.nests) != len(self.mu):
            raise StructureError(
                f"{len(self.nests)} nests but {len(self.mu)} scale parameters"
            )
        if not self.nests:
            raise StructureError("empty nest list")
        seen: set[int] = set()
        for nest in self.nests:
            if not nest:
                raise StructureError("empty nest")
            for i in nest:
                if not 0 <= i < self.n:
                    raise StructureError(f"alternative index {i} outside range(0, {self.n})")
                if i in seen:
                    raise StructureError(f"nests not disjoint: index {i} repeated")
                seen.add(i)
        if len(seen) != self.n:
            missing = sorted(set(range(self.n)) - seen)
            raise StructureError(f"nests do not cover all alternatives; missing {missing}")
        for m in self.mu:
            if not (MU_MIN < m <= 1.0):
                raise StructureError(f"mu out of range ({MU_MIN}, 1]: {m}")

        # index arrays cached for the hot evaluation paths
        object.__setattr__(
            self, "_idx", tuple(np.array(nest, dtype=np.intp) for nest in self.nests)
        )

    @classmethod
    def single(cls, n: int, mu: float = 1.0) -> "NestStructure":
        """One nest holding every alternative (multinomial logit for mu=1)."""
        return cls(n, (tuple(range(n)),), (mu,))

    @property
    def n_nests(self) -> int:
        return len(self.nests)

    @property
    def min_mu(self) -> float:
        return min(self.mu)


@dataclass(frozen=True)
class SmoothnessModuli:
    """Analytic moduli of the surplus / conjugate pair.

    smoothness: Lipschitz bound on the surplus gradient,
        ||grad E(v) - grad E(v')||_1 <= smoothness * ||v - v'||_inf.
    strong_convexity: modulus of the conjugate entropy w.r.t. ||.||_1.
    gnl_bound: the looser generalized-nested-logit comparison constant
        2 / min mu - 1.
    """

    smoothness: float
    strong_convexity: float
    gnl_bound: float


def _as_utilities(ns: NestStructure, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] != ns.n:
        raise StructureError(f"utility vector must have last dimension {ns.n}")
    if not np.all(np.isfinite(v)):
        raise DomainError("utilities must be finite")
    return v


def _logsumexp(x: np.ndarray) -> np.ndarray:
    # stable log-sum-exp along the last axis; inputs are always finite
    # here, so the max subtraction never produces nan
    m = x.max(axis=-1)
    return m + np.log(np.exp(x - m[..., None]).sum(axis=-1))


def _inclusive_values(ns: NestStructure, v: np.ndarray) -> np.ndarray:
    """Per-nest log-attractiveness mu_l * ln sum_{i in N_l} exp(v_i / mu_l)."""
    iv = np.empty(v.shape[:-1] + (ns.n_nests,))
    for l, (idx, mu) in enumerate(zip(ns._idx, ns.mu)):
        iv[..., l] = mu * _logsumexp(v[..., idx] / mu)
    return iv


def surplus(ns: NestStructure, v) -> float | np.ndarray:
    """Expected maximum utility E(v); shape (...,) for v of shape (..., n)."""
    v = _as_utilities(ns, v)
    out = _logsumexp(_inclusive_values(ns, v))
    return float(out) if out.ndim == 0 else out


def choice_probabilities(ns: NestStructure, v) -> np.ndarray:
    """Probability that each alternative attains the maximum utility.

    Equals the gradient of `surplus` at v. Computed in log space as the
    product of the nest probability (softmax of inclusive values) and
    the within-nest probability (softmax of v / mu inside the nest).
    """
    v = _as_utilities(ns, v)
    iv = _inclusive_values(ns, v)
    log_denom = _logsumexp(iv)
    q = np.empty_like(v)
    for l, (idx, mu) in enumerate(zip(ns._idx, ns.mu)):
        w = v[..., idx] / mu
        log_nest = iv[..., l] - log_denom
        log_within = w - (iv[..., l] / mu)[..., None]
        q[..., idx] = np.exp(log_nest[..., None] + log_within)
    return q


def conjugate(ns: NestStructure, q) -> float | np.ndarray:
    """Generalized entropy E*(q) on the simplex; always <= 0.

    Entries with q_i = 0 contribute zero through the limit x ln x -> 0;
    no clamping is applied.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim == 0 or q.shape[-1] != ns.n:
        raise StructureError(f"probability vector must have last dimension {ns.n}")
    if np.any(q < -1e-12):
        raise DomainError("probabilities must be nonnegative")
    q = np.maximum(q, 0.0)
    total = q.sum(axis=-1)
    if np.any(np.abs(total - 1.0) > SIMPLEX_ATOL):
        raise DomainError(
            f"probabilities must sum to 1 within {SIMPLEX_ATOL}; got sum {total}"
        )
    out = np.zeros(q.shape[:-1])
    for idx, mu in zip(ns._idx, ns.mu):
        qn = q[..., idx]
        out += mu * xlogy(qn, qn).sum(axis=-1)
        if mu < 1.0:
            qtot = qn.sum(axis=-1)
            out += (1.0 - mu) * xlogy(qtot, qtot)
    return float(out) if out.ndim == 0 else out


def fenchel_gap(ns: NestStructure, v) -> float | np.ndarray:
    """|E(v) + E*(grad E(v)) - <grad E(v), v>|; zero in exact arithmetic."""
    v = _as_utilities(ns, v)
    q = choice_probabilities(ns, v)
    gap = surplus(ns, v) + conjugate(ns, q) - (q * v).sum(axis=-1)
    return abs(float(gap)) if np.ndim(gap) == 0 else np.abs(gap)


def smoothness_moduli(ns: NestStructure) -> SmoothnessModuli:
    """Smoothness of the surplus and strong convexity of its conjugate."""
    beta = ns.min_mu
    return SmoothnessModuli(
        smoothness=1.0 / beta,
        strong_convexity=beta,
        gnl_bound=2.0 / beta - 1.0,
    )
