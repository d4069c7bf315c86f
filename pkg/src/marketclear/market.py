"""Market aggregation: the total expected revenue potential and its gradient.

The market's convex potential is

    TER(p) = sum_k profit_k(p) + sum_j count_j * E_j(a_j - p),

whose gradient is the excess supply sum_k y_k(p) - sum_j count_j x_j(p)
and whose minimizers over p >= 0 are exactly the prices that clear the
market on average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import supply
from .nested_logit import NestStructure, StructureError, choice_probabilities, surplus
from .supply import Supplier, check_prices


@dataclass(frozen=True)
class ConsumerType:
    """A population of identical consumers.

    Attributes:
        count: population size, > 0.
        a: observable utilities of the n goods.
        nests: nest structure of the random utility errors.
    """

    count: float
    a: np.ndarray
    nests: NestStructure

    def __post_init__(self) -> None:
        object.__setattr__(self, "count", float(self.count))
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        if self.count <= 0:
            raise StructureError(f"population count must be positive, got {self.count}")
        if self.a.shape != (self.nests.n,):
            raise StructureError(
                f"utilities have shape {self.a.shape}, expected ({self.nests.n},)"
            )
        if not np.all(np.isfinite(self.a)):
            raise StructureError("observable utilities must be finite")


@dataclass(frozen=True)
class EquilibriumResidual:
    """How far a price vector is from clearing the market.

    min_excess: most negative component of excess supply.
    complementarity: <p, z(p)>, zero at an equilibrium.
    grad_norm: natural-map residual ||p - [p - z(p)]_+||_2.
    """

    min_excess: float
    complementarity: float
    grad_norm: float


@dataclass(frozen=True)
class ProductivityCheck:
    """Outcome of the strict supply-dominance test, with a witness.

    Truthy iff feasible supply can strictly exceed total expected demand
    in every good; then `supply` (one vector per supplier, the box upper
    corners) and `shares` (one simplex point used by every consumer
    type) witness the strict inequality.
    """

    ok: bool
    supply: tuple[np.ndarray, ...] | None = None
    shares: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Market:
    """Full market instance: J consumer types, K suppliers, n goods."""

    n: int
    consumers: tuple[ConsumerType, ...]
    suppliers: tuple[Supplier, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "consumers", tuple(self.consumers))
        object.__setattr__(self, "suppliers", tuple(self.suppliers))
        if not self.consumers or not self.suppliers:
            raise StructureError("market needs at least one consumer type and one supplier")
        for j, ct in enumerate(self.consumers):
            if ct.nests.n != self.n:
                raise StructureError(f"consumer type {j} has dimension {ct.nests.n}, "
                                     f"market has {self.n}")
        for k, s in enumerate(self.suppliers):
            if s.n != self.n:
                raise StructureError(f"supplier {k} has dimension {s.n}, market has {self.n}")

    @property
    def total_population(self) -> float:
        return sum(ct.count for ct in self.consumers)

    def ter(self, p) -> float | np.ndarray:
        """Total expected revenue at prices p (batched over leading axes).

        Defined for all finite p: the potential extends smoothly off the
        nonnegative orthant, which the accelerated scheme relies on.
        """
        p = check_prices(p, self.n, nonnegative=False)
        out = sum(supply._profit_raw(s, p) for s in self.suppliers)
        out += sum(ct.count * surplus(ct.nests, ct.a - p) for ct in self.consumers)
        return float(out) if np.ndim(out) == 0 else out

    def ter_gradient(self, p) -> np.ndarray:
        """Excess supply z(p) = sum_k y_k(p) - sum_j count_j x_j(p)."""
        p = check_prices(p, self.n, nonnegative=False)
        z = sum(supply._best_response_raw(s, p) for s in self.suppliers)
        z = z - sum(
            ct.count * choice_probabilities(ct.nests, ct.a - p) for ct in self.consumers
        )
        return z

    def smoothness_constant(self) -> float:
        """Gradient Lipschitz bound sum_j count_j / min_l mu_jl + sum_k 1 / gamma_k."""
        lip = sum(ct.count / ct.nests.min_mu for ct in self.consumers)
        lip += sum(1.0 / s.gamma for s in self.suppliers)
        return lip

    def productivity_check(self) -> ProductivityCheck:
        """Can feasible supply strictly exceed total expected demand?

        With box capacities the best feasible supply is the upper corner
        H = sum_k hi_k, and total expected demand ranges over N * simplex
        with N the total population. Writing u = H / N, strict dominance
        in every good is achievable iff u > 0 everywhere and either
        sum_i min(u_i, 1) > 1, or n = 1 and u_1 > 1 (a single good takes
        the whole simplex, so the capped sum test degenerates there).
        """
        cap = np.sum([s.hi for s in self.suppliers], axis=0)
        pop = self.total_population
        u = cap / pop
        if np.any(u <= 0):
            return ProductivityCheck(False)
        capped = np.minimum(u, 1.0)
        if self.n == 1:
            if u[0] <= 1.0:
                return ProductivityCheck(False)
            shares = np.ones(1)
        elif capped.sum() > 1.0:
            shares = capped / capped.sum()
        else:
            return ProductivityCheck(False)
        return ProductivityCheck(True, tuple(s.hi.copy() for s in self.suppliers), shares)

    def equilibrium_residual(self, p) -> EquilibriumResidual:
        """Clearing residuals of Definition-style equilibrium conditions at p."""
        p = check_prices(p, self.n)
        z = self.ter_gradient(p)
        natural = p - np.maximum(p - z, 0.0)
        return EquilibriumResidual(
            min_excess=float(z.min()),
            complementarity=float(np.dot(p, z)),
            grad_norm=float(np.linalg.norm(natural)),
        )
