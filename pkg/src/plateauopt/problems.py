"""Problem representations and exact reductions: QUBO <-> Ising <-> MaxCut.

Also houses the instance generators for the three benchmark families
(random QUBOs, random Euclidean TSPs, weighted d-regular MaxCut graphs) and
the flat-file instance format used by the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

SYMMETRY_TOL = 1e-12


# ---------------------------------------------------------------------------
# Representations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Qubo:
    """Minimize x^T Q x over binary x; Q must be symmetric."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.matrix, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("QUBO matrix must be square")
        if not np.allclose(q, q.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise ValueError("QUBO matrix must be symmetric")
        object.__setattr__(self, "matrix", q)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Energy v^T J v + h^T v + c over spins v in {-1, +1}^n.

    J is symmetric with zero diagonal and enters through the full quadratic
    form (both triangles), i.e. each unordered pair contributes 2*J_ij.
    """

    couplings: np.ndarray
    fields: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        j = np.asarray(self.couplings, dtype=float)
        h = np.asarray(self.fields, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1] or h.shape != (j.shape[0],):
            raise ValueError("couplings must be n x n and fields length n")
        if not np.allclose(j, j.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise ValueError("couplings must be symmetric")
        if not np.allclose(np.diag(j), 0.0, atol=SYMMETRY_TOL):
            raise ValueError("couplings must have zero diagonal")
        object.__setattr__(self, "couplings", j)
        object.__setattr__(self, "fields", h)

    @property
    def n(self) -> int:
        return self.fields.shape[0]

    def energy(self, spins) -> float:
        v = _check_spins(spins, self.n)
        return float(v @ self.couplings @ v + self.fields @ v + self.offset)


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Simple undirected graph with real edge weights; edges stored as (i, j, w), i < j."""

    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        seen = set()
        for i, j, _ in self.edges:
            if not 0 <= i < j < self.n_nodes:
                raise ValueError(f"bad edge ({i}, {j}) for {self.n_nodes} nodes")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.edges:
            empty = np.empty(0, dtype=int)
            return empty, empty.copy(), np.empty(0, dtype=float)
        ei, ej, ew = zip(*self.edges)
        return np.array(ei, dtype=int), np.array(ej, dtype=int), np.array(ew, dtype=float)

    @property
    def total_weight(self) -> float:
        return float(self.edge_arrays[2].sum())


@dataclass(frozen=True, eq=False)
class TspInstance:
    """Symmetric TSP distances plus the penalty weights of its QUBO form.

    ``penalty_a`` (one-city-per-slot constraints) must dominate
    ``penalty_b * max(distances)`` so no infeasible assignment can undercut
    a feasible tour.
    """

    distances: np.ndarray
    penalty_a: float
    penalty_b: float

    def __post_init__(self) -> None:
        d = np.asarray(self.distances, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(d, d.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise ValueError("distance matrix must be symmetric")
        if np.any(d < 0) or not np.allclose(np.diag(d), 0.0):
            raise ValueError("distances must be non-negative with zero diagonal")
        if not self.penalty_a > self.penalty_b * d.max():
            raise ValueError("penalty_a must exceed penalty_b * max distance")
        object.__setattr__(self, "distances", d)

    @property
    def n_cities(self) -> int:
        return self.distances.shape[0]

    def tour_length(self, tour) -> float:
        order = list(tour)
        if sorted(order) != list(range(self.n_cities)):
            raise ValueError("tour must visit every city exactly once")
        return float(
            sum(
                self.distances[order[p], order[(p + 1) % len(order)]]
                for p in range(len(order))
            )
        )


def _check_spins(spins, n: int) -> np.ndarray:
    v = np.asarray(spins, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"expected spin vector of length {n}, got shape {v.shape}")
    if not np.all(np.abs(v) == 1.0):
        raise ValueError("spins must be in {-1, +1}")
    return v


def _check_bits(bits, n: int) -> np.ndarray:
    x = np.asarray(bits, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"expected binary vector of length {n}, got shape {x.shape}")
    return x


# ---------------------------------------------------------------------------
# Energies and reductions
# ---------------------------------------------------------------------------


def qubo_energy(qubo: Qubo, bits) -> float:
    """x^T Q x for a binary assignment x."""
    x = _check_bits(bits, qubo.n)
    return float(x @ qubo.matrix @ x)


def qubo_to_ising(qubo: Qubo) -> IsingModel:
    """Exact spin form of a QUBO under x_i = (v_i + 1) / 2.

    For every x and its spin image v = 2x - 1:
    ``qubo_energy(Q, x) == v^T J v + h^T v + c`` with J the off-diagonal part
    of Q scaled by 1/4, h the half row sums, and c absorbing the diagonal
    and constant terms.
    """
    q = qubo.matrix
    j = q / 4.0
    np.fill_diagonal(j, 0.0)
    h = q.sum(axis=1) / 2.0
    c = (q.sum() + np.trace(q)) / 4.0
    return IsingModel(couplings=j, fields=h, offset=float(c))


def ising_to_maxcut(model: IsingModel) -> tuple[WeightedGraph, int, tuple[float, float]]:
    """Reduce an Ising model to MaxCut on n + 1 nodes via a gauge node.

    Returns ``(graph, gauge_node, (offset, scale))`` such that for every
    spin vector v with the gauge spin fixed to +1:

        ``model.energy(v[:-1]) == offset - scale * cut_value(graph, v)``

    Couplings map to edges (i, j) of weight 2*J_ij -- the factor 2 matches
    the full quadratic form v^T J v, which counts each pair twice -- and
    fields map to gauge edges (i, g) of weight h_i.  ``scale`` is 2 and
    ``offset`` is c plus the total edge weight.  Zero-weight edges are
    omitted.  Minimizing the energy is equivalent to maximizing the cut.
    """
    n = model.n
    gauge = n
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            w = 2.0 * model.couplings[i, j]
            if w != 0.0:
                edges.append((i, j, w))
        if model.fields[i] != 0.0:
            edges.append((i, gauge, float(model.fields[i])))
    graph = WeightedGraph(n_nodes=n + 1, edges=tuple(edges))
    offset = model.offset + graph.total_weight
    return graph, gauge, (offset, 2.0)


def laplacian(graph: WeightedGraph) -> np.ndarray:
    """Weighted graph Laplacian L = D - W; symmetric with zero row sums."""
    w = np.zeros((graph.n_nodes, graph.n_nodes))
    ei, ej, ew = graph.edge_arrays
    w[ei, ej] = ew
    w[ej, ei] = ew
    lap = np.diag(w.sum(axis=1)) - w
    return lap


def cut_value(graph: WeightedGraph, spins) -> float:
    """Total weight of edges crossing the spin partition; equals v^T L v / 4."""
    v = _check_spins(spins, graph.n_nodes)
    ei, ej, ew = graph.edge_arrays
    if ew.size == 0:
        return 0.0
    return float(ew[v[ei] != v[ej]].sum())


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------


def random_qubo(n: int, density: float, seed) -> Qubo:
    """Random symmetric QUBO: N(0, 1) entries, sparsified, then symmetrized.

    A dense standard-normal matrix is drawn first; a Bernoulli(density) keep
    mask is drawn on the upper triangle (including the diagonal) and
    mirrored, so the zero pattern is symmetric; the result is (Q + Q^T) / 2.
    Deterministic per seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must be in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, n))
    keep_upper = np.triu(rng.random((n, n)) < density)
    keep = keep_upper | np.triu(keep_upper, 1).T
    q = q * keep
    return Qubo((q + q.T) / 2.0)


def random_tsp(n: int, seed) -> TspInstance:
    """Euclidean TSP on n uniform points in [0, 100]^2.

    Penalties: B = 1 on the tour length, A = 1 + ceil(max distance) on the
    assignment constraints, which guarantees penalty dominance.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    rng = np.random.default_rng(seed)
    points = rng.uniform(0.0, 100.0, size=(n, 2))
    delta = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((delta**2).sum(axis=2))
    np.fill_diagonal(dist, 0.0)
    dist = (dist + dist.T) / 2.0
    return TspInstance(
        distances=dist,
        penalty_a=1.0 + math.ceil(dist.max()),
        penalty_b=1.0,
    )


def random_regular_graph(
    n: int, d: int, seed, weight_range: tuple[float, float] = (0.0, 5.0)
) -> WeightedGraph:
    """Simple d-regular graph on n nodes with uniform edge weights.

    Requires n*d even (handshake) and d < n.  Weights are drawn uniformly
    from ``weight_range`` over the sorted edge list, so the instance is
    deterministic per seed.
    """
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    if d >= n:
        raise ValueError(f"degree {d} must be < n = {n}")
    if (n * d) % 2 != 0:
        raise ValueError(f"n * d must be even, got n={n}, d={d}")
    if d == 0:
        return WeightedGraph(n_nodes=n, edges=())
    seed_int = int(np.random.SeedSequence(seed).generate_state(1)[0])
    g = nx.random_regular_graph(d, n, seed=seed_int)
    pairs = sorted((min(i, j), max(i, j)) for i, j in g.edges())
    rng = np.random.default_rng(seed)
    weights = rng.uniform(weight_range[0], weight_range[1], size=len(pairs))
    edges = tuple((i, j, float(w)) for (i, j), w in zip(pairs, weights))
    return WeightedGraph(n_nodes=n, edges=edges)


# ---------------------------------------------------------------------------
# TSP QUBO formulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TspEncoding:
    """QUBO form of a TSP instance plus its constant offset and decoder.

    Variables are x[city, position] flattened row-major into n^2 bits.  The
    full objective is ``x^T Q x + offset``; for a feasible assignment it
    equals penalty_b times the tour length.
    """

    instance: TspInstance
    qubo: Qubo
    offset: float

    @property
    def n_cities(self) -> int:
        return self.instance.n_cities

    def decode(self, bits) -> list[int] | None:
        """Tour as an ordered city list, or None if infeasible."""
        n = self.n_cities
        if not tsp_feasible(bits, n):
            return None
        assignment = np.asarray(bits).reshape(n, n)
        return [int(np.argmax(assignment[:, p])) for p in range(n)]

    def objective(self, bits) -> float:
        """Full penalty objective x^T Q x + offset."""
        return qubo_energy(self.qubo, bits) + self.offset


def tsp_qubo(instance: TspInstance) -> TspEncoding:
    """Quadratic penalty formulation of the TSP over n^2 slot variables.

    Objective: B * sum d_uv x[u,p] x[v,p+1 mod n]
             + A * sum_v (1 - sum_p x[v,p])^2
             + A * sum_p (1 - sum_v x[v,p])^2,
    expanded into a symmetric QUBO matrix plus the constant 2*A*n, returned
    as ``offset``.
    """
    n = instance.n_cities
    a, b = instance.penalty_a, instance.penalty_b
    d = instance.distances
    size = n * n
    q = np.zeros((size, size))

    def idx(city: int, pos: int) -> int:
        return city * n + pos

    def add_pair(p1: int, p2: int, coeff: float) -> None:
        q[p1, p2] += coeff / 2.0
        q[p2, p1] += coeff / 2.0

    # tour length: consecutive positions, all ordered city pairs
    for p in range(n):
        p_next = (p + 1) % n
        for u in range(n):
            for v in range(n):
                if u != v and d[u, v] != 0.0:
                    add_pair(idx(u, p), idx(v, p_next), b * d[u, v])
    # each city appears exactly once; each position holds exactly one city
    for v in range(n):
        for p in range(n):
            q[idx(v, p), idx(v, p)] += -a  # -2A + A from the squared expansion
            q[idx(p, v), idx(p, v)] += -a  # same for the position constraint
        for p1 in range(n):
            for p2 in range(p1 + 1, n):
                add_pair(idx(v, p1), idx(v, p2), 2.0 * a)  # city row pairs
                add_pair(idx(p1, v), idx(p2, v), 2.0 * a)  # position column pairs
    offset = 2.0 * a * n
    return TspEncoding(instance=instance, qubo=Qubo(q), offset=offset)


def tsp_feasible(bits, n: int) -> bool:
    """True iff the n^2 bits reshape to a permutation matrix (a valid tour)."""
    x = np.asarray(bits)
    if x.shape != (n * n,):
        raise ValueError(f"expected {n * n} bits, got shape {x.shape}")
    m = x.reshape(n, n)
    if not np.all((m == 0) | (m == 1)):
        return False
    return bool(np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1))


def maxcut_qubo(graph: WeightedGraph) -> Qubo:
    """QUBO whose energy is minus the cut of x (classical baseline form).

    With x_i marking the side of node i: -cut(x) = x^T Q x where
    Q_ii = -sum_j w_ij and Q_ij = w_ij for i != j.
    """
    n = graph.n_nodes
    q = np.zeros((n, n))
    ei, ej, ew = graph.edge_arrays
    for i, j, w in zip(ei, ej, ew):
        q[i, j] += w
        q[j, i] += w
        q[i, i] -= w
        q[j, j] -= w
    return Qubo(q)


# ---------------------------------------------------------------------------
# Instance files: header "kind n density_or_degree seed", then the body
# ---------------------------------------------------------------------------


def save_instance(path, instance, *, density_or_degree=None, seed=None) -> None:
    """Write one instance to a flat text file.

    Header line: ``kind n density_or_degree seed`` (missing values as "-").
    Body: row-major matrix lines (qubo / tsp distances) or ``i j w`` edge
    lines (graph).  Floats use repr and round-trip exactly.
    """
    lines = []
    dparam = "-" if density_or_degree is None else str(density_or_degree)
    sparam = "-" if seed is None else str(seed)
    if isinstance(instance, Qubo):
        lines.append(f"qubo {instance.n} {dparam} {sparam}")
        lines.extend(" ".join(repr(float(v)) for v in row) for row in instance.matrix)
    elif isinstance(instance, TspInstance):
        lines.append(f"tsp {instance.n_cities} {dparam} {sparam}")
        lines.extend(
            " ".join(repr(float(v)) for v in row) for row in instance.distances
        )
    elif isinstance(instance, WeightedGraph):
        lines.append(f"graph {instance.n_nodes} {dparam} {sparam}")
        lines.extend(f"{i} {j} {repr(float(w))}" for i, j, w in instance.edges)
    else:
        raise TypeError(f"cannot serialize {type(instance).__name__}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path):
    """Read an instance file written by :func:`save_instance`.

    Returns ``(instance, header)`` where header carries kind, n,
    density_or_degree and seed (None where "-").  TSP penalties are
    recomputed by the standard rule (B = 1, A = 1 + ceil(max distance)).
    """
    text = Path(path).read_text().strip().splitlines()
    kind, n_str, dparam, sparam = text[0].split()
    n = int(n_str)
    header = {
        "kind": kind,
        "n": n,
        "density_or_degree": None if dparam == "-" else float(dparam),
        "seed": None if sparam == "-" else int(sparam),
    }
    body = text[1:]
    if kind == "qubo":
        matrix = np.array([[float(v) for v in line.split()] for line in body])
        return Qubo(matrix), header
    if kind == "tsp":
        dist = np.array([[float(v) for v in line.split()] for line in body])
        inst = TspInstance(
            distances=dist, penalty_a=1.0 + math.ceil(dist.max()), penalty_b=1.0
        )
        return inst, header
    if kind == "graph":
        edges = []
        for line in body:
            i, j, w = line.split()
            edges.append((int(i), int(j), float(w)))
        return WeightedGraph(n_nodes=n, edges=tuple(edges)), header
    raise ValueError(f"unknown instance kind {kind!r}")
