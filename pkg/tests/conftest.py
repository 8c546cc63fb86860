import numpy as np
import pytest

from ppmod.cli import bundled_path
from ppmod.graph import build_graph, from_arrays, load_edgelist

TWO_TRIANGLES = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]


def random_multigraph(n, m, seed, self_loops=True):
    """Uniform random endpoints: multiedges and (optionally) self-edges occur naturally."""
    rng = np.random.default_rng(seed)
    u = rng.integers(0, n, size=m)
    v = rng.integers(0, n, size=m)
    if not self_loops:
        keep = u != v
        u, v = u[keep], v[keep]
    return from_arrays(u, v, n)


def regular_multigraph(n, k, seed):
    """k-regular multigraph on even n: union of k random perfect matchings."""
    rng = np.random.default_rng(seed)
    us, vs = [], []
    for _ in range(k):
        perm = rng.permutation(n)
        us.append(perm[0::2])
        vs.append(perm[1::2])
    return from_arrays(np.concatenate(us), np.concatenate(vs), n)


# --- brute-force oracles: dense O(n^2) sums straight from the definitions ---

def dense_m_in(graph, g):
    A = graph.to_dense()
    g = np.asarray(g)
    return 0.5 * np.sum(A * (g[:, None] == g[None, :]))


def dense_modularity(graph, g, gamma=1.0, null="config"):
    A = graph.to_dense().astype(float)
    n = graph.n
    m = A.sum() / 2
    k = A.sum(axis=1)
    if null == "config":
        P = np.outer(k, k) / (2 * m)
    else:
        P = np.full((n, n), m / (n * (n - 1) / 2))
    g = np.asarray(g)
    delta = g[:, None] == g[None, :]
    return float(np.sum((A - gamma * P) * delta) / (2 * m))


def dense_dcsbm(graph, g, omega):
    A = graph.to_dense().astype(float)
    m = A.sum() / 2
    k = A.sum(axis=1)
    g = np.asarray(g)
    W = np.asarray(omega, dtype=float)[g[:, None], g[None, :]]
    with np.errstate(divide="ignore"):
        logW = np.where(A > 0, np.log(W), 0.0)
    return float(0.5 * np.sum(A * logW - np.outer(k, k) / (2 * m) * W))


def dense_sbm(graph, g, omega):
    A = graph.to_dense().astype(float)
    g = np.asarray(g)
    W = np.asarray(omega, dtype=float)[g[:, None], g[None, :]]
    with np.errstate(divide="ignore"):
        logW = np.where(A > 0, np.log(W), 0.0)
    return float(0.5 * np.sum(A * logW - W))


def dense_omegas(graph, g):
    """Rates from observed vs configuration-expected edge counts, via explicit pair sums."""
    A = graph.to_dense().astype(float)
    m = A.sum() / 2
    k = A.sum(axis=1)
    g = np.asarray(g)
    same = g[:, None] == g[None, :]
    P = np.outer(k, k) / (2 * m)
    m_in = 0.5 * np.sum(A * same)
    m_out = m - m_in
    return m_in / (0.5 * np.sum(P * same)), m_out / (0.5 * np.sum(P * ~same))


@pytest.fixture
def two_triangles():
    return build_graph(TWO_TRIANGLES)


@pytest.fixture(scope="session")
def karate():
    return load_edgelist(bundled_path("karate"))


@pytest.fixture(scope="session")
def bundled_graphs():
    graphs = {"karate": load_edgelist(bundled_path("karate"))}
    try:
        graphs["dolphins"] = load_edgelist(bundled_path("dolphins"))
    except FileNotFoundError:
        pass
    return graphs


# --- acceptance report: one line per criterion, echoed in the terminal summary ---

ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request, capsys):
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, [])

    def report(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return passed

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":").split("/")[0])):
            terminalreporter.write_line(line)
