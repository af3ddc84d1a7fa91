"""Parameter sweeps comparing the closed form against Monte Carlo.

Three built-in studies, each a family of PATH networks:

* ``source_mean``: 3-hop chain rayleigh(1) / chi_square(1) / beta(2, 3) with a
  pareto1(3, m) source, swept over the scale m.  The predicted end-node age is
  (sum of the three link contributions) / source mean, inversely proportional
  to the source's mean update interval.
* ``hop_count``: n-hop chains of uniform(0, 2) links, pareto1(3, 1/3) source;
  the prediction grows linearly, (4/3) n.
* ``link_variance``: 4-hop chains of mean-1 uniform links whose variance v is
  swept; prediction 4 v + 4, linear in the common link variance.

Every point records the analytic value, the Monte Carlo mean, its standard
error, and the z-score of their difference.  A sweep passes its statistical
gate when at most 1 point in 20 lands beyond 4 sigma.  Runs are reproducible:
point seeds derive from (master seed, kind, point index), so equal seeds give
byte-identical CSV output.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .analytic import expected_version_age
from .distributions import Beta, ChiSquare, ParetoI, Rayleigh, Uniform
from .errors import InvalidParameter
from .network import CacheNetwork
from .rng import derive_seed
from .simulator import SimOutcome, monte_carlo

__all__ = [
    "CSV_HEADER",
    "SweepPoint",
    "ExperimentSweep",
    "fig5_network",
    "fig6_network",
    "fig7_network",
    "sweep_source_mean",
    "sweep_hop_count",
    "sweep_link_variance",
    "sweep_network_family",
]

CSV_HEADER = "sweep_kind,param,analytic,mc_mean,mc_stderr,z,iterations,horizon,seed"

Z_GATE = 4.0

DEFAULT_ITERATIONS = 20_000
DEFAULT_HORIZON = 1e3


@dataclass
class SweepPoint:
    param: float
    analytic: float
    outcome: SimOutcome
    seed: int

    @property
    def z(self) -> float:
        diff = self.outcome.mean - self.analytic
        if self.outcome.stderr == 0.0:
            return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return diff / self.outcome.stderr


@dataclass
class ExperimentSweep:
    kind: str
    points: list[SweepPoint]
    estimator: str
    master_seed: int
    slope: float | None = None
    intercept: float | None = None

    @property
    def n_exceeding(self) -> int:
        return sum(1 for p in self.points if abs(p.z) > Z_GATE)

    @property
    def passed(self) -> bool:
        allowed = max(1, len(self.points) // 20)
        return self.n_exceeding <= allowed

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for p in self.points:
            writer.writerow(
                [
                    self.kind,
                    repr(float(p.param)),
                    repr(float(p.analytic)),
                    repr(float(p.outcome.mean)),
                    repr(float(p.outcome.stderr)),
                    repr(float(p.z)),
                    p.outcome.iterations,
                    repr(float(p.outcome.horizon)),
                    p.seed,
                ]
            )
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "estimator": self.estimator,
            "master_seed": self.master_seed,
            "fit": {"slope": self.slope, "intercept": self.intercept},
            "gate": {
                "z_threshold": Z_GATE,
                "n_exceeding": self.n_exceeding,
                "passed": self.passed,
            },
            "points": [
                {
                    "param": float(p.param),
                    "analytic": float(p.analytic),
                    "z": float(p.z),
                    "seed": p.seed,
                    "outcome": p.outcome.to_dict(),
                }
                for p in self.points
            ],
        }


def fig5_network(m: float) -> CacheNetwork:
    """3-hop chain rayleigh(1)/chi_square(1)/beta(2,3), pareto1(3, m) source."""
    return CacheNetwork(
        nodes=["src", "n1", "n2", "n3"],
        source="src",
        source_dist=ParetoI(shape=3.0, scale=m),
        links=[
            ("src", "n1", Rayleigh(sigma=1.0)),
            ("n1", "n2", ChiSquare(k=1)),
            ("n2", "n3", Beta(alpha=2.0, beta=3.0)),
        ],
    )


def fig6_network(n: int) -> CacheNetwork:
    """n-hop chain of uniform(0, 2) links with a pareto1(3, 1/3) source.

    n = 0 is the degenerate source-only network (age identically zero).
    """
    if n < 0:
        raise InvalidParameter(f"hop count must be >= 0, got {n}")
    nodes = ["src"] + [f"n{i}" for i in range(1, n + 1)]
    links = [(nodes[i], nodes[i + 1], Uniform(lo=0.0, hi=2.0)) for i in range(n)]
    return CacheNetwork(
        nodes=nodes, source="src", source_dist=ParetoI(shape=3.0, scale=1.0 / 3.0), links=links
    )


def fig7_network(v: float) -> CacheNetwork:
    """4-hop chain of mean-1 uniform links with variance v, 0 < v <= 1/3."""
    if not 0.0 < v <= 1.0 / 3.0:
        raise InvalidParameter(
            f"link variance must lie in (0, 1/3] to keep the support nonnegative, got {v}"
        )
    half_width = math.sqrt(3.0 * v)
    dist = Uniform(lo=1.0 - half_width, hi=1.0 + half_width)
    nodes = ["src", "n1", "n2", "n3", "n4"]
    links = [(nodes[i], nodes[i + 1], dist) for i in range(4)]
    return CacheNetwork(
        nodes=nodes, source="src", source_dist=ParetoI(shape=3.0, scale=1.0 / 3.0), links=links
    )


def _require_monotone(values) -> list:
    values = list(values)
    if len(values) >= 2:
        diffs = np.diff(np.asarray(values, dtype=float))
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise InvalidParameter(f"sweep values must be strictly monotone, got {values}")
    return values


def sweep_network_family(
    kind: str,
    values,
    make_network,
    iterations: int = DEFAULT_ITERATIONS,
    horizon: float = DEFAULT_HORIZON,
    seed: int = 1,
    estimator: str = "terminal",
    threads: int = 1,
    fit: bool = False,
) -> ExperimentSweep:
    """Run one comparison point per value over a family of PATH/TREE networks.

    The target is the deepest leaf; the analytic column comes straight from
    :func:`expected_version_age` on each point's network.
    """
    values = _require_monotone(values)
    points: list[SweepPoint] = []
    for idx, value in enumerate(values):
        network = make_network(value)
        leaves = network.leaves()
        target = max(leaves, key=lambda n: network.depth[n]) if leaves else network.source
        ana = expected_version_age(network).per_node[target]
        point_seed = derive_seed(seed, "sweep", kind, idx)
        outcome = monte_carlo(
            network,
            targets=[target],
            horizon=horizon,
            iterations=iterations,
            master_seed=point_seed,
            estimator=estimator,
            threads=threads,
        )[target]
        points.append(SweepPoint(param=value, analytic=ana, outcome=outcome, seed=point_seed))
    sweep = ExperimentSweep(kind=kind, points=points, estimator=estimator, master_seed=seed)
    if fit and len(points) >= 2:
        xs = np.asarray([p.param for p in points], dtype=float)
        ys = np.asarray([p.outcome.mean for p in points], dtype=float)
        slope, intercept = np.polyfit(xs, ys, 1)
        sweep.slope = float(slope)
        sweep.intercept = float(intercept)
    return sweep


def sweep_source_mean(
    m_values=(1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 1.0),
    iterations: int = DEFAULT_ITERATIONS,
    horizon: float = DEFAULT_HORIZON,
    seed: int = 1,
    estimator: str = "terminal",
    threads: int = 1,
) -> ExperimentSweep:
    """End-node age of the fixed 3-hop chain vs the source scale parameter m."""
    return sweep_network_family(
        "source_mean",
        m_values,
        fig5_network,
        iterations=iterations,
        horizon=horizon,
        seed=seed,
        estimator=estimator,
        threads=threads,
    )


def sweep_hop_count(
    n_values=(1, 2, 3, 4, 5, 6),
    iterations: int = DEFAULT_ITERATIONS,
    horizon: float = DEFAULT_HORIZON,
    seed: int = 1,
    estimator: str = "terminal",
    threads: int = 1,
) -> ExperimentSweep:
    """End-node age vs chain length; records the least-squares slope."""
    for n in n_values:
        if int(n) != n:
            raise InvalidParameter(f"hop counts must be integers, got {n}")
    return sweep_network_family(
        "hop_count",
        [int(n) for n in n_values],
        fig6_network,
        iterations=iterations,
        horizon=horizon,
        seed=seed,
        estimator=estimator,
        threads=threads,
        fit=True,
    )


def sweep_link_variance(
    v_values=(0.05, 0.15, 0.25, 1.0 / 3.0),
    iterations: int = DEFAULT_ITERATIONS,
    horizon: float = DEFAULT_HORIZON,
    seed: int = 1,
    estimator: str = "terminal",
    threads: int = 1,
) -> ExperimentSweep:
    """End-node age of the 4-hop chain vs common link variance; fits a line."""
    return sweep_network_family(
        "link_variance",
        v_values,
        fig7_network,
        iterations=iterations,
        horizon=horizon,
        seed=seed,
        estimator=estimator,
        threads=threads,
        fit=True,
    )
