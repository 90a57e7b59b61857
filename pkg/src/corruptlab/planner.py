"""Budget-constrained acquisition of corrupted data sets.

Two complementary views of source quality are kept side by side and never
merged: the lower-bound view buys effective clean samples (maximize
sum alpha_i * n_i, an unbounded knapsack) and the upper-bound view prefers
cheap-per-guarantee sources (ascending cost * ||corrected||_inf^2).  The two
rankings usually agree but are allowed to differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    CapacityGuardExceeded,
    InvalidParameter,
    MissingStatistic,
    ParseError,
)

#: Largest integer-scaled knapsack capacity the DP will accept.
CAPACITY_GUARD = 10**7


@dataclass(frozen=True)
class SourceOffer:
    """A purchasable corrupted-data source with its derived statistics."""

    name: str
    alpha: float
    unit_cost: Fraction
    corrected_sup: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameter(f"alpha must be in [0, 1], got {self.alpha!r}")
        cost = Fraction(self.unit_cost)
        if cost <= 0:
            raise InvalidParameter(f"unit cost must be positive, got {cost}")
        object.__setattr__(self, "unit_cost", cost)
        if self.corrected_sup is not None and self.corrected_sup < 0.0:
            raise InvalidParameter("corrected_sup must be non-negative")


@dataclass(frozen=True)
class AcquisitionPlan:
    """Counts to buy per source, with the objective sum alpha_i * n_i."""

    counts: dict[str, int]
    objective: float
    spend: Fraction

    def to_json(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "objective": self.objective,
            "spend": {"num": self.spend.numerator, "den": self.spend.denominator},
        }


def _density_order(offers: Sequence[SourceOffer]) -> list[SourceOffer]:
    # Highest alpha-per-cost first; ties broken by lower cost, then name.
    return sorted(offers, key=lambda o: (-(o.alpha / o.unit_cost), o.unit_cost, o.name))


def greedy_plan(offers: Sequence[SourceOffer], budget: Fraction) -> AcquisitionPlan:
    """Buy the densest source until it no longer fits, then the next, etc."""
    budget = Fraction(budget)
    if budget < 0:
        raise InvalidParameter(f"budget must be >= 0, got {budget}")
    if not offers:
        raise InvalidParameter("need at least one offer")
    counts: dict[str, int] = {}
    objective = 0.0
    remaining = budget
    for offer in _density_order(offers):
        n = int(remaining // offer.unit_cost)
        if n > 0:
            counts[offer.name] = counts.get(offer.name, 0) + n
            objective += offer.alpha * n
            remaining -= offer.unit_cost * n
    return AcquisitionPlan(counts=counts, objective=objective, spend=budget - remaining)


def exact_plan(offers: Sequence[SourceOffer], budget: Fraction) -> AcquisitionPlan:
    """Optimal unbounded-knapsack plan by dynamic programming.

    Rational costs are scaled to integers via the least common multiple of
    their denominators; the scaled capacity must stay within the guard.
    """
    budget = Fraction(budget)
    if budget < 0:
        raise InvalidParameter(f"budget must be >= 0, got {budget}")
    if not offers:
        raise InvalidParameter("need at least one offer")
    scale = math.lcm(*(o.unit_cost.denominator for o in offers), budget.denominator)
    capacity = int(budget * scale)
    if capacity > CAPACITY_GUARD:
        raise CapacityGuardExceeded(
            f"scaled capacity {capacity} exceeds guard {CAPACITY_GUARD}"
        )
    ordered = _density_order(offers)
    int_costs = [int(o.unit_cost * scale) for o in ordered]

    best = [0.0] * (capacity + 1)
    choice = [-1] * (capacity + 1)  # -1: leave a unit of budget unused
    for w in range(1, capacity + 1):
        best[w] = best[w - 1]
        for idx, cost in enumerate(int_costs):
            if cost <= w:
                candidate = best[w - cost] + ordered[idx].alpha
                if candidate > best[w]:
                    best[w] = candidate
                    choice[w] = idx

    counts: dict[str, int] = {}
    spend = Fraction(0)
    w = capacity
    while w > 0:
        idx = choice[w]
        if idx < 0:
            w -= 1
            continue
        counts[ordered[idx].name] = counts.get(ordered[idx].name, 0) + 1
        spend += ordered[idx].unit_cost
        w -= int_costs[idx]
    objective = sum(o.alpha * counts.get(o.name, 0) for o in ordered)
    return AcquisitionPlan(counts=counts, objective=objective, spend=spend)


def rank_sources_lower(offers: Sequence[SourceOffer]) -> list[str]:
    """Source names by decreasing alpha / cost (the knapsack greedy key)."""
    return [o.name for o in _density_order(offers)]


def rank_sources_upper(offers: Sequence[SourceOffer]) -> list[str]:
    """Source names by increasing cost * ||corrected||_inf^2."""
    for o in offers:
        if o.corrected_sup is None:
            raise MissingStatistic(f"offer {o.name!r} has no corrected_sup")
    return [o.name for o in sorted(offers, key=lambda o: (o.unit_cost * o.corrected_sup**2, o.name))]


# -- JSON wire format -----------------------------------------------------------
# [{"name": ..., "alpha": ..., "corrected_sup": ...?,
#   "cost": {"num": int, "den": int}}, ...]

def _cost_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        try:
            return Fraction(int(obj["num"]), int(obj.get("den", 1)))
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad cost object: {exc}") from exc
    if isinstance(obj, int):
        return Fraction(obj)
    raise ParseError(f'cost must be an integer or {{"num", "den"}}, got {obj!r}')


def offers_from_json(obj: list) -> list[SourceOffer]:
    if not isinstance(obj, list) or not obj:
        raise ParseError("offers JSON must be a non-empty list")
    offers = []
    for entry in obj:
        if not isinstance(entry, dict) or not {"name", "alpha", "cost"} <= set(entry):
            raise ParseError('each offer needs "name", "alpha" and "cost"')
        offers.append(SourceOffer(
            name=str(entry["name"]),
            alpha=float(entry["alpha"]),
            unit_cost=_cost_from_json(entry["cost"]),
            corrected_sup=(
                float(entry["corrected_sup"]) if entry.get("corrected_sup") is not None else None
            ),
        ))
    return offers
