"""Statevector evaluation of the diagonal-ansatz cut objective.

The ansatz state is ``U(angles) H |0>`` with U the diagonal encoding gate,
i.e. the uniform superposition with per-basis-state phases.  Its energy
against the zero-padded graph Laplacian, scaled by 2^(n-2), equals the cut
value v^T L v / 4 whenever the angles sit on plateau centers.

Exact mode contracts the dense padded Laplacian.  Shot mode estimates each
term of the Pauli decomposition from simulated projective measurements:
words over {I, Z} share one computational-basis batch, every word with an
X or Y gets its own rotated-basis batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .encoding import EncodingKind, EncodingLayout, EncodingSpec, build_diagonal
from .problems import WeightedGraph, laplacian

_COEFF_TOL = 1e-12

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
# measure Y by rotating with H @ S^dagger (Y = S H Z H S^dagger)
_Y_ROTATION = _HADAMARD @ np.diag([1.0, -1.0j])


@dataclass
class EvalCounter:
    """Counts energy evaluations (one per classical-quantum round).

    Optimizer runs own their counter, so merging parallel experiments is a
    matter of summing per-run counts.
    """

    count: int = 0

    def increment(self) -> None:
        self.count += 1


@dataclass(frozen=True)
class PauliTerm:
    """One term of a Hermitian observable: real coefficient times a Pauli word."""

    coefficient: float
    word: str


# ---------------------------------------------------------------------------
# Pauli decomposition
# ---------------------------------------------------------------------------


def pauli_decompose(matrix, tol: float = _COEFF_TOL) -> list[PauliTerm]:
    """Decompose a real symmetric 2^n x 2^n matrix into Pauli words.

    Coefficients are Tr(P M) / 2^n over all 4^n words; terms below ``tol``
    in magnitude are dropped.  The leftmost letter of a word acts on the
    most significant bit of the basis index.  Every Pauli word has exactly
    one non-zero entry per row, so each trace costs O(2^n) via fancy
    indexing instead of a dense product.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    idx = np.arange(dim)
    terms: list[PauliTerm] = []
    for letters in product("IXYZ", repeat=n):
        xmask = 0
        zlike = 0  # bits carrying Z or Y, i.e. a (-1)^bit sign
        n_y = 0
        for pos, letter in enumerate(letters):
            bit = 1 << (n - 1 - pos)
            if letter == "X":
                xmask |= bit
            elif letter == "Y":
                xmask |= bit
                zlike |= bit
                n_y += 1
            elif letter == "Z":
                zlike |= bit
        signs = 1 - 2 * (np.bitwise_count(idx & zlike).astype(int) & 1)
        trace = (-1j) ** n_y * float(signs @ m[idx ^ xmask, idx])
        coeff = trace / dim
        if abs(coeff.imag) > 1e-9:
            raise ValueError("matrix is not symmetric: complex Pauli coefficient")
        if abs(coeff.real) >= tol:
            terms.append(PauliTerm(coefficient=float(coeff.real), word="".join(letters)))
    return terms


# ---------------------------------------------------------------------------
# State preparation and expectation values
# ---------------------------------------------------------------------------


def prepare_state(diagonal) -> np.ndarray:
    """Amplitudes of U H |0>: the uniform superposition phased by U's diagonal."""
    u = np.asarray(diagonal, dtype=complex)
    if u.ndim != 1:
        raise ValueError("diagonal must be a 1-d vector")
    return u / np.sqrt(u.shape[0])


def expectation_exact(state, matrix) -> float:
    """<s| M |s> by dense contraction; the tiny imaginary residue is dropped."""
    s = np.asarray(state, dtype=complex)
    m = np.asarray(matrix)
    if m.shape != (s.shape[0], s.shape[0]):
        raise ValueError(
            f"dimension mismatch: state {s.shape[0]}, matrix {m.shape}"
        )
    return float(np.vdot(s, m @ s).real)


def _measure_probabilities(amplitudes: np.ndarray) -> np.ndarray:
    p = np.abs(amplitudes) ** 2
    return p / p.sum()


def _word_mask(word: str, letters: str) -> int:
    n = len(word)
    mask = 0
    for pos, letter in enumerate(word):
        if letter in letters:
            mask |= 1 << (n - 1 - pos)
    return mask


def _rotate_for_measurement(amplitudes: np.ndarray, word: str) -> np.ndarray:
    n = len(word)
    tensor = amplitudes.reshape((2,) * n)
    for pos, letter in enumerate(word):
        if letter == "X":
            gate = _HADAMARD
        elif letter == "Y":
            gate = _Y_ROTATION
        else:
            continue
        tensor = np.moveaxis(np.tensordot(gate, tensor, axes=(1, pos)), 0, pos)
    return tensor.reshape(-1)


def expectation_sampled(state, terms, shots: int, rng: np.random.Generator) -> float:
    """Monte-Carlo estimate of sum_P c_P <P> from simulated measurements.

    All {I, Z}-only words share a single batch of ``shots`` computational-
    basis samples; each word containing X or Y is measured in its own
    rotated basis with a fresh batch.  The estimator is unbiased for
    :func:`expectation_exact` of the reconstructed observable.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    amps = np.asarray(state, dtype=complex)
    dim = amps.shape[0]
    idx = np.arange(dim)
    diagonal_terms = [t for t in terms if set(t.word) <= {"I", "Z"}]
    rotated_terms = [t for t in terms if set(t.word) & {"X", "Y"}]
    total = 0.0
    if diagonal_terms:
        counts = rng.multinomial(shots, _measure_probabilities(amps))
        for term in diagonal_terms:
            zmask = _word_mask(term.word, "Z")
            signs = 1 - 2 * (np.bitwise_count(idx & zmask).astype(int) & 1)
            total += term.coefficient * float(counts @ signs) / shots
    for term in rotated_terms:
        rotated = _rotate_for_measurement(amps, term.word)
        counts = rng.multinomial(shots, _measure_probabilities(rotated))
        support = _word_mask(term.word, "XYZ")
        signs = 1 - 2 * (np.bitwise_count(idx & support).astype(int) & 1)
        total += term.coefficient * float(counts @ signs) / shots
    return float(total)


# ---------------------------------------------------------------------------
# The diagonal ansatz
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DiagonalAnsatz:
    """A graph's padded Laplacian bound to an encoding layout and spec."""

    graph: WeightedGraph
    layout: EncodingLayout
    spec: EncodingSpec
    padded_laplacian: np.ndarray
    _pauli_terms: list[PauliTerm] | None = field(default=None, repr=False)

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    @property
    def pauli_terms(self) -> list[PauliTerm]:
        """Pauli decomposition of the padded Laplacian, computed once."""
        if self._pauli_terms is None:
            self._pauli_terms = pauli_decompose(self.padded_laplacian)
        return self._pauli_terms


def build_ansatz(
    graph: WeightedGraph,
    spec: EncodingSpec,
    layout: EncodingLayout | None = None,
) -> DiagonalAnsatz:
    """Bind a graph to an encoding; defaults to the full (one-hot) layout."""
    if layout is None:
        layout = EncodingLayout.full(graph.n_nodes)
    if layout.n_nodes != graph.n_nodes:
        raise ValueError(
            f"layout is for {layout.n_nodes} nodes, graph has {graph.n_nodes}"
        )
    if spec.kind is EncodingKind.DOUBLE_EXP and spec.m < graph.n_nodes:
        raise ValueError(
            f"double-exp encoding needs m >= n_nodes ({graph.n_nodes}), got m={spec.m}"
        )
    padded = np.zeros((layout.dim, layout.dim))
    lap = laplacian(graph)
    padded[: graph.n_nodes, : graph.n_nodes] = lap
    return DiagonalAnsatz(
        graph=graph, layout=layout, spec=spec, padded_laplacian=padded
    )


def ansatz_energy(
    ansatz: DiagonalAnsatz,
    angles,
    mode: str = "exact",
    *,
    shots: int = 1024,
    rng: np.random.Generator | None = None,
    counter: EvalCounter | None = None,
) -> float:
    """Cut-value objective 2^(n-2) <0| H U' L U H |0> for one angle vector.

    ``mode`` is "exact" (dense contraction) or "shots" (sampled Pauli
    estimation with ``shots`` samples per measurement batch; requires
    ``rng``).  Increments ``counter`` once per call: one evaluation is one
    classical-quantum round regardless of shot count.
    """
    state = prepare_state(build_diagonal(angles, ansatz.layout, ansatz.spec))
    if mode == "exact":
        value = expectation_exact(state, ansatz.padded_laplacian)
    elif mode == "shots":
        if rng is None:
            raise ValueError("shots mode requires an rng")
        value = expectation_sampled(state, ansatz.pauli_terms, shots, rng)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if counter is not None:
        counter.increment()
    return 2.0 ** (ansatz.n_qubits - 2) * value
