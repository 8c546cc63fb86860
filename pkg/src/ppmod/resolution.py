"""Self-consistent estimation of the modularity resolution parameter.

Starting from a guess for gamma, alternately maximize modularity, fit the
degree-corrected planted-partition rates to the resulting groups, and map
those rates back to a new gamma, until gamma stops moving.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Graph, Partition
from .optimize import AnnealSchedule, anneal, greedy_refine
from .quality import NullModel, PlantedPartitionParams, log_mean, modularity

log = logging.getLogger(__name__)


class DegenerateEstimate(ValueError):
    """The current partition does not determine both rates."""


def estimate_omegas(graph: Graph, partition: Partition) -> PlantedPartitionParams:
    """Fit ``omega_in`` and ``omega_out`` by matching observed and expected edge counts."""
    if graph.m == 0:
        raise ValueError("empty graph")
    two_m = 2.0 * graph.m
    kappa = partition.kappa.astype(np.float64)
    expected_in = float(kappa @ kappa) / two_m
    if partition.occupied() < 2 or np.isclose(expected_in, two_m, rtol=1e-15, atol=0):
        raise DegenerateEstimate("no between-group structure: all edge ends lie in one group")
    m_in = partition.m_in
    return PlantedPartitionParams(
        omega_in=2.0 * m_in / expected_in,
        omega_out=(two_m - 2.0 * m_in) / (two_m - expected_in),
    )


def gamma_from_omegas(params: PlantedPartitionParams) -> float:
    """Resolution parameter at which modularity and planted-partition likelihood agree."""
    if params.omega_out == 0:
        raise DegenerateEstimate("gamma undefined: omega_out = 0")
    if params.omega_in == 0:
        raise DegenerateEstimate("gamma undefined: omega_in = 0")
    return log_mean(params.omega_in, params.omega_out)


@dataclass
class GammaIteration:
    gamma: float
    omega_in: float
    omega_out: float
    Q: float
    m_in: int
    gamma_next: float


@dataclass
class GammaTrace:
    iterations: list[GammaIteration] = field(default_factory=list)
    converged: bool = False
    final_gamma: float = float("nan")
    diagnostic: str = ""
    partition: Partition | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "iterations": [asdict(it) for it in self.iterations],
            "converged": self.converged,
            "final_gamma": self.final_gamma,
            "n_iterations": len(self.iterations),
            "diagnostic": self.diagnostic,
        }

    def to_json(self, **extra) -> str:
        return json.dumps({**extra, **self.to_dict()}, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "gamma", "omega_in", "omega_out", "Q", "m_in", "gamma_next"])
        for t, it in enumerate(self.iterations, 1):
            w.writerow([t, repr(it.gamma), repr(it.omega_in), repr(it.omega_out), repr(it.Q),
                        it.m_in, repr(it.gamma_next)])
        return buf.getvalue()


def iterate_gamma(graph: Graph, q: int, gamma0: float = 1.0, tol: float = 0.01,
                  max_iter: int = 10, schedule: AnnealSchedule | None = None,
                  workers: int = 1) -> GammaTrace:
    """Iterate modularity maximization and rate estimation until gamma settles.

    The first pass anneals from scratch; later passes warm-start a greedy
    polish from the previous partition.  Iteration stops once
    ``|gamma_next - gamma| <= tol * max(1, gamma)``.  A partition that leaves
    a rate undetermined ends the run with ``converged=False`` and a
    diagnostic rather than an exception.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    if graph.m == 0:
        raise ValueError("empty graph")
    if not gamma0 > 0:
        raise ValueError("gamma0 must be positive")
    trace = GammaTrace()
    gamma = float(gamma0)
    part = None
    for t in range(max_iter):
        if part is None:
            part = anneal(graph, q, gamma, NullModel.CONFIGURATION, schedule, workers=workers)
        part = greedy_refine(graph, part, gamma)
        trace.partition = part
        try:
            params = estimate_omegas(graph, part)
            nxt = gamma_from_omegas(params)
        except DegenerateEstimate as exc:
            trace.diagnostic = f"iteration {t + 1} at gamma={gamma:.6g}: {exc}"
            log.warning(trace.diagnostic)
            return trace
        trace.iterations.append(GammaIteration(
            gamma=gamma, omega_in=params.omega_in, omega_out=params.omega_out,
            Q=modularity(graph, part, gamma), m_in=part.m_in, gamma_next=nxt))
        log.debug("iteration %d: gamma %.6f -> %.6f", t + 1, gamma, nxt)
        trace.final_gamma = nxt
        if abs(nxt - gamma) <= tol * max(1.0, gamma):
            trace.converged = True
            return trace
        gamma = nxt
    trace.diagnostic = f"no convergence within {max_iter} iterations"
    return trace
