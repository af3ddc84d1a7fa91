"""Closed-form long-run expected version age on PATH/TREE networks.

Each link contributes E[Y^2] / (2 E[Y]) -- the limiting mean backward
recurrence time of its update process -- and a node's expected age is the sum
of the contributions along its path from the source, divided by the source's
mean inter-update time.  The result is additive in the links, invariant to
their ordering along a path, and inversely proportional to the source mean.

The closed form assumes non-arithmetic inter-update distributions; networks
containing deterministic links are still computed but carry a structured
warning, since the constant-interval case is exactly the operating point that
minimizes every link's contribution (variance zero gives the floor mean/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import Distribution
from .errors import InfiniteSecondMoment, InvalidParameter, NotATree
from .network import CacheNetwork, NetworkClass

__all__ = [
    "AnalyticAge",
    "link_contribution",
    "expected_version_age",
    "expected_version_age_poisson",
]


@dataclass(frozen=True)
class AnalyticAge:
    """Per-node expected age with the per-link breakdown behind it."""

    per_node: dict[str, float]
    contributions: dict[tuple[str, str], float]
    source_mean: float
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "source_mean": self.source_mean,
            "per_node": dict(self.per_node),
            "contributions": {f"{s}->{d}": c for (s, d), c in self.contributions.items()},
            "warnings": list(self.warnings),
        }


def link_contribution(dist: Distribution) -> float:
    """E[Y^2] / (2 E[Y]) for one link's inter-update time."""
    m = dist.moments()
    if math.isinf(m.second_moment):
        raise InfiniteSecondMoment(f"{dist} has an infinite second moment")
    return m.second_moment / (2.0 * m.mean)


def expected_version_age(network: CacheNetwork) -> AnalyticAge:
    """Exact limiting expected version age at every node of a PATH/TREE network.

    Sums per-path link contributions with ``math.fsum`` (correctly rounded, so
    reordering links along a path cannot change any node's value) and divides
    by the source mean.  Raises :class:`NotATree` on general graphs and
    :class:`InfiniteSecondMoment` naming the offending distribution.
    """
    if network.classification is NetworkClass.GENERAL:
        raise NotATree("closed form requires tree")
    m0 = network.source_dist.moments()
    if not m0.is_finite:
        raise InfiniteSecondMoment(
            f"source distribution {network.source_dist} has a divergent moment"
        )
    warnings: list[str] = []
    if network.source_dist.arithmetic:
        warnings.append(
            f"source distribution {network.source_dist} is arithmetic; "
            "the closed form assumes non-arithmetic inter-update times"
        )
    contributions: dict[tuple[str, str], float] = {}
    for link in network.links:
        try:
            contributions[(link.src, link.dst)] = link_contribution(link.dist)
        except InfiniteSecondMoment as exc:
            raise InfiniteSecondMoment(
                f"link {link.src}->{link.dst}: {exc}"
            ) from None
        if link.dist.arithmetic:
            warnings.append(
                f"link {link.src}->{link.dst} has an arithmetic distribution {link.dist}; "
                "the closed form assumes non-arithmetic inter-update times"
            )
    per_node: dict[str, float] = {network.source: 0.0}
    for node in network.topo_order():
        path = network.path_to_source(node)
        per_node[node] = (
            math.fsum(contributions[(l.src, l.dst)] for l in path) / m0.mean
        )
    return AnalyticAge(
        per_node=per_node,
        contributions=contributions,
        source_mean=m0.mean,
        warnings=tuple(warnings),
    )


def expected_version_age_poisson(source_rate: float, link_rates) -> float:
    """Special case when every process is Poisson: source_rate * sum(1/rate).

    Agrees with :func:`expected_version_age` over exponential specs to machine
    precision; kept as an independent formula so the two routes cross-check
    each other.
    """
    if not (isinstance(source_rate, (int, float)) and source_rate > 0):
        raise InvalidParameter(f"source rate must be positive, got {source_rate!r}")
    rates = list(link_rates)
    for r in rates:
        if not (isinstance(r, (int, float)) and r > 0):
            raise InvalidParameter(f"link rates must be positive, got {r!r}")
    return source_rate * math.fsum(1.0 / r for r in rates)
