"""Acceptance criteria 1-8, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are also
collected into an "acceptance criteria" section of the pytest summary.
Run just this module with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import os
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from ppmod.cli import bundled_path, run_fig1
from ppmod.graph import load_edgelist, move_node, new_partition
from ppmod.optimize import (AnnealSchedule, SearchMode, batch_modularity, canonical_assignments,
                            optimize)
from ppmod.quality import (NullModel, PlantedPartitionParams, delta_modularity,
                           equivalence_constants, modularity, pp_log_likelihood,
                           pp_sbm_log_likelihood, uniform_absolute_rates,
                           uniform_equivalence_constants)
from ppmod.resolution import iterate_gamma
from ppmod.synth import SyntheticSpec, generate_planted_partition

from .conftest import random_multigraph, regular_multigraph

FIG1_QS = (2, 3, 4, 6, 8, 10)


def optimal_set(values, sign, tol):
    values = sign * np.asarray(values, dtype=float)
    return set(np.flatnonzero(values >= values.max() - tol).tolist())


def label_agreement(found, truth, q):
    """Best node agreement over all relabelings of ``found``."""
    best = 0
    for perm in itertools.permutations(range(q)):
        best = max(best, int(np.sum(np.asarray(perm)[found] == truth)))
    return best / len(truth)


def test_criterion_1_equivalence_identity(karate, acceptance):
    t0 = time.perf_counter()
    params = PlantedPartitionParams(1.5, 0.5)
    graphs = [karate] + [random_multigraph(50, 150, seed) for seed in range(10)]
    worst_spread = worst_c = 0.0
    for idx, g in enumerate(graphs):
        const = equivalence_constants(params, g.m)
        rng = np.random.default_rng(idx)
        offsets = []
        for _ in range(100):
            q = int(rng.integers(1, 6))
            p = new_partition(g, rng.integers(0, q, g.n), q)
            offsets.append(pp_log_likelihood(g, p, params) - const.B * modularity(g, p, const.gamma))
        mean = float(np.mean(offsets))
        worst_spread = max(worst_spread, float(np.ptp(offsets)) / abs(mean))
        worst_c = max(worst_c, abs(mean - const.C) / abs(const.C))
    elapsed = time.perf_counter() - t0
    ok = worst_spread <= 1e-9 and worst_c <= 1e-9 and elapsed < 5
    acceptance(1, ok, f"spread={worst_spread:.1e} C_err={worst_c:.1e} time={elapsed:.2f}s")
    assert ok


def test_criterion_2_argmax_transfer(acceptance):
    t0 = time.perf_counter()
    mismatches = []
    assignments = canonical_assignments(8, 2)
    for seed in range(20):
        g = random_multigraph(8, 16, seed, self_loops=False)
        for w_in, w_out in [(1.5, 0.5), (0.5, 1.5)]:
            params = PlantedPartitionParams(w_in, w_out)
            const = equivalence_constants(params, g.m)
            mode = SearchMode.for_coefficient(const.B)
            Q = batch_modularity(g, assignments, 2, const.gamma)
            L = [pp_log_likelihood(g, new_partition(g, a, 2), params) for a in assignments]
            by_q = optimal_set(Q, mode.sign, 1e-9)
            by_l = optimal_set(L, 1, 1e-9 * abs(const.B))
            if by_q != by_l:
                mismatches.append((seed, w_in, w_out))
    elapsed = time.perf_counter() - t0
    ok = not mismatches and elapsed < 30
    acceptance(2, ok, f"40 instances, mismatches={mismatches} time={elapsed:.2f}s")
    assert ok


def test_criterion_3_trivial_values(bundled_graphs, acceptance):
    worst = 0.0
    for g in bundled_graphs.values():
        p = new_partition(g, np.zeros(g.n, dtype=int), 1)
        for gamma in (1.0, 0.5, 2.0):
            worst = max(worst, abs(modularity(g, p, gamma) - (1 - gamma)))
    ok = worst <= 1e-12
    acceptance(3, ok, f"graphs={sorted(bundled_graphs)} max_err={worst:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_4_fig1(acceptance):
    t0 = time.perf_counter()
    jobs = max(1, min(len(FIG1_QS) * 5, os.cpu_count() or 1))
    rows = run_fig1(FIG1_QS, 5, jobs, seed=0, group_size=250, d_in=16, d_out=8, gamma0=1.0,
                    tol=0.01, max_iter=10, restarts=5)
    elapsed = time.perf_counter() - t0
    details, ok = [], True
    for q in FIG1_QS:
        cell = [r for r in rows if r["q"] == q]
        med = statistics.median(r["gamma_est"] for r in cell)
        truth = q / ((q + 1) * np.log(2))
        rel = abs(med - truth) / truth
        conv = all(r["converged"] and r["iterations"] <= 10 for r in cell)
        ok &= rel <= 0.05 and conv
        details.append(f"q={q}:{med:.4f}/{truth:.4f}")
    ok &= elapsed < 15 * 60
    acceptance(4, ok, f"{' '.join(details)} time={elapsed:.0f}s")
    assert ok


def dolphins_path():
    env = os.environ.get("PPMOD_DOLPHINS")
    if env:
        return Path(env)
    try:
        return bundled_path("dolphins")
    except FileNotFoundError:
        return None


def test_criterion_5_karate(karate, acceptance):
    t0 = time.perf_counter()
    trace = iterate_gamma(karate, 2)
    elapsed = time.perf_counter() - t0
    ok = (trace.converged and len(trace.iterations) <= 10
          and 0.70 <= trace.final_gamma <= 0.86 and elapsed < 60)
    acceptance("5/karate", ok, f"gamma={trace.final_gamma:.4f} iterations={len(trace.iterations)} "
               f"time={elapsed:.2f}s")
    assert ok


def test_criterion_5_dolphins(acceptance):
    path = dolphins_path()
    if path is None:
        acceptance("5/dolphins", False, "dolphins edge list not available "
                   "(place it at src/ppmod/data/dolphins.txt or set PPMOD_DOLPHINS)")
        pytest.fail("dolphins network unavailable")
    graph = load_edgelist(path)
    t0 = time.perf_counter()
    trace = iterate_gamma(graph, 2)
    elapsed = time.perf_counter() - t0
    ok = ((graph.n, graph.m) == (62, 159) and trace.converged and len(trace.iterations) <= 10
          and 0.49 <= trace.final_gamma <= 0.69 and elapsed < 60)
    acceptance("5/dolphins", ok, f"n={graph.n} m={graph.m} gamma={trace.final_gamma:.4f} "
               f"iterations={len(trace.iterations)} time={elapsed:.2f}s")
    assert ok


def test_criterion_6_edge_count(acceptance):
    ms = np.array([generate_planted_partition(SyntheticSpec(2, 250, 16, 8, seed=s))[0].m
                   for s in range(20)])
    se = ms.std(ddof=1) / np.sqrt(len(ms))
    ok = bool(abs(ms.mean() - 6000) <= 3 * se)
    acceptance("6/edges", ok, f"mean_m={ms.mean():.1f} |diff|={abs(ms.mean() - 6000):.1f} 3se={3 * se:.1f}")
    assert ok


def test_criterion_6_recovery(acceptance):
    agreements = []
    for seed in range(5):
        graph, truth = generate_planted_partition(SyntheticSpec(2, 250, 16, 8, seed=seed))
        found = optimize(graph, 2, 1.0, schedule=AnnealSchedule(seed=seed))
        agreements.append(label_agreement(found.assignment, truth.assignment, 2))
    ok = min(agreements) >= 0.95
    acceptance("6/recovery", ok, f"agreement={[round(a, 3) for a in agreements]} (need >= 0.95 each)")
    assert ok


def test_criterion_7_incremental_updates(acceptance):
    moves, stat_errors, worst = 0, 0, 0.0
    for seed in range(5):
        g = random_multigraph(30, 90, seed)
        rng = np.random.default_rng(seed)
        q = 4
        p = new_partition(g, rng.integers(0, q, g.n), q)
        null = NullModel.UNIFORM if seed % 2 else NullModel.CONFIGURATION
        for _ in range(2000):
            i, s = int(rng.integers(g.n)), int(rng.integers(q))
            gamma = float(rng.uniform(0.2, 2.0))
            before = modularity(g, p, gamma, null)
            d = delta_modularity(g, p, i, s, gamma, null)
            move_node(p, i, s)
            worst = max(worst, abs(modularity(g, p, gamma, null) - before - d))
            fresh = new_partition(g, p.assignment, q)
            stat_errors += not (np.array_equal(p.kappa, fresh.kappa)
                                and np.array_equal(p.sizes, fresh.sizes)
                                and np.array_equal(p.edge_ends, fresh.edge_ends))
            moves += 1
    ok = moves == 10_000 and stat_errors == 0 and worst <= 1e-12
    acceptance(7, ok, f"moves={moves} stat_mismatches={stat_errors} max_delta_err={worst:.1e}")
    assert ok


def test_criterion_8_uniform_null_equivalence(acceptance):
    params = PlantedPartitionParams(1.5, 0.5)
    mismatches = []
    for seed in range(10):
        g = regular_multigraph(8, 3, seed)
        const = uniform_equivalence_constants(params, g)
        absolute = uniform_absolute_rates(params, g)
        for q in (2, 3):
            assignments = canonical_assignments(g.n, q)
            Q = batch_modularity(g, assignments, q, const.gamma, NullModel.UNIFORM)
            L = [pp_sbm_log_likelihood(g, new_partition(g, a, q), absolute) for a in assignments]
            if optimal_set(Q, 1, 1e-9) != optimal_set(L, 1, 1e-9 * abs(const.B)):
                mismatches.append((seed, q))
    ok = not mismatches
    acceptance(8, ok, f"10 regular instances n=8 q=2,3 mismatches={mismatches}")
    assert ok
