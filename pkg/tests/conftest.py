"""Shared brute-force oracles, kept independent of the library's code paths."""

from __future__ import annotations

import itertools

import numpy as np
import pytest


def all_bit_vectors(n: int) -> np.ndarray:
    """All 2^n binary assignments as a (2^n, n) float matrix (bit 0 first)."""
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(float)


def qubo_energies_all(matrix: np.ndarray) -> np.ndarray:
    """x^T Q x for every binary x, by direct enumeration."""
    x = all_bit_vectors(matrix.shape[0])
    return np.einsum("bi,ij,bj->b", x, matrix, x)


def brute_force_qubo_min(matrix: np.ndarray) -> tuple[np.ndarray, float]:
    energies = qubo_energies_all(matrix)
    best = int(np.argmin(energies))
    x = all_bit_vectors(matrix.shape[0])[best]
    return x, float(energies[best])


def cut_by_edge_enumeration(edges, spins) -> float:
    """Cut value summed edge by edge, independent of any matrix form."""
    v = np.asarray(spins)
    return float(sum(w for i, j, w in edges if v[i] != v[j]))


def brute_force_max_cut(edges, n_nodes: int) -> tuple[np.ndarray, float]:
    """Best cut with the last spin fixed to +1 (gauge convention)."""
    best_cut = -np.inf
    best_v = None
    for bits in itertools.product((-1, 1), repeat=n_nodes - 1):
        v = np.array(bits + (1,))
        cut = cut_by_edge_enumeration(edges, v)
        if cut > best_cut:
            best_cut, best_v = cut, v
    return best_v, float(best_cut)


_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_word_matrix(word: str) -> np.ndarray:
    """Dense matrix of a Pauli word via Kronecker products (leftmost = high bit)."""
    out = _PAULI[word[0]]
    for letter in word[1:]:
        out = np.kron(out, _PAULI[letter])
    return out


def random_weighted_graph_edges(n_nodes: int, rng, p: float = 0.6):
    """Random edge list (i, j, w) with weights in (0.1, 5)."""
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < p:
                edges.append((i, j, float(rng.uniform(0.1, 5.0))))
    return tuple(edges)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
