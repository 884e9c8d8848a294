"""Plateau encodings: continuous angles to binary spin configurations.

A plateau encoding is a map R(alpha, q) from an angle to [0, 1] whose graph
consists of alternating flat levels at 0 and 1, toggling with frequency 2^q
as alpha sweeps [0, 2*pi).  Reading the levels for q = 0 .. d-1 at a single
angle therefore yields a d-bit word, and one continuous parameter enumerates
all 2^d words.

Two encodings are provided:

* :func:`double_exp_plateau` -- ``exp(-exp(2^(m-q) * sin(2^q*alpha + off)))``.
  The inner exponent grows like 2^m, which blows past float64 headroom for
  moderate m; evaluation clamps the exponent at +/-709 so the result
  saturates to exactly 0.0 or 1.0 instead of passing through infinities.
* :func:`sawtooth_plateau` -- a numerically stable alternative built from a
  [0, 2]-valued sawtooth ramp; every intermediate stays bounded by 2 and the
  hyperparameter m disappears.

:func:`build_diagonal` turns an angle vector plus an :class:`EncodingLayout`
into the diagonal ``(e^{i*pi*R_0}, ..., e^{i*pi*R_{n-2}}, 1, ..., 1)`` of a
unit-modulus gate whose entries act as soft spins; the trailing 1s are the
fixed gauge entry plus power-of-two padding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * math.pi

# Largest inner exponent fed to exp(); exp(709) ~ 8.2e307 still fits in a
# float64, and exp(-exp(+/-709)) saturates to exactly 0.0 / 1.0.
EXP_CLAMP = 709.0

# Plateau-center angles for q = 0: level 0 (diagonal entry +1) and level 1
# (entry -1).  Used by the alternating optimizer and by spin round-trips.
SPIN_UP_ANGLE = math.pi / 2.0
SPIN_DOWN_ANGLE = 3.0 * math.pi / 2.0

# Arguments whose sine is this close to zero count as cotangent poles.  The
# slack (rather than an exact-zero test) makes ramp restarts fire at float
# representations of k*pi, so transition angles land on a consistent side.
_POLE_TOL = 1e-9


class EncodingKind(enum.Enum):
    """Which plateau function encodes the diagonal entries."""

    DOUBLE_EXP = "rf"
    SAWTOOTH = "rfprime"


class PhaseOffsetVariant(enum.Enum):
    """Reading of the sine-phase offset inside the double-exp encoding.

    The base-2 formula ``arcsin(log2(-log2(0.5)) / 2^(m-q))`` is identically
    zero because log2(-log2(0.5)) = log2(1) = 0.  The natural-log reading
    ``arcsin(ln(-ln(0.5)) / 2^(m-q))`` gives a small negative shift that
    places the 0.5-crossing of the double exponential.  Both are kept; LOG2
    is the default.
    """

    LOG2 = "log2"
    NATURAL_LOG = "ln"


@dataclass(frozen=True)
class EncodingSpec:
    """Encoding selection plus the hyperparameters of the double-exp variant.

    ``m`` and ``phase_variant`` only matter for ``EncodingKind.DOUBLE_EXP``;
    the sawtooth encoding has no hyperparameters.  The constraint
    ``m >= n_nodes`` is enforced where the graph size is known (see
    :func:`build_diagonal`).
    """

    kind: EncodingKind
    m: int = 0
    phase_variant: PhaseOffsetVariant = PhaseOffsetVariant.LOG2

    def __post_init__(self) -> None:
        if self.kind is EncodingKind.DOUBLE_EXP and self.m < 0:
            raise ValueError(f"m must be non-negative, got {self.m}")


def wrap_angles(angles):
    """Wrap angles into [0, 2*pi)."""
    a = np.asarray(angles, dtype=float)
    wrapped = np.mod(a, TWO_PI)
    # a tiny negative input can round to exactly 2*pi under fmod
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    return float(wrapped) if a.ndim == 0 else wrapped


def phase_offset(q: int, m: int, variant: PhaseOffsetVariant = PhaseOffsetVariant.LOG2) -> float:
    """Sine-phase offset of the double-exp encoding (see PhaseOffsetVariant)."""
    if not 0 <= q <= m:
        raise ValueError(f"need 0 <= q <= m, got q={q}, m={m}")
    if variant is PhaseOffsetVariant.LOG2:
        numerator = math.log2(-math.log2(0.5))  # == 0.0 exactly
    else:
        numerator = math.log(-math.log(0.5))  # ln(ln 2) ~ -0.36651
    return math.asin(numerator / 2.0 ** (m - q))


def inner_exponent(alpha, q: int, spec: EncodingSpec):
    """Unclamped inner exponent ``2^(m-q) * sin(2^q*alpha + offset)``.

    Exposed so callers can observe the overflow pathology the clamp in
    :func:`double_exp_plateau` protects against: already at m = 64 the outer
    ``exp`` of this value exceeds the float64 range.
    """
    _check_double_exp(spec, q)
    a = np.asarray(alpha, dtype=float)
    off = phase_offset(q, spec.m, spec.phase_variant)
    t = 2.0 ** (spec.m - q) * np.sin(2.0**q * a + off)
    return float(t) if a.ndim == 0 else t


def double_exp_plateau(alpha, q: int, spec: EncodingSpec):
    """Double-exponential plateau level in [0, 1].

    Evaluates ``exp(-exp(t))`` with ``t = 2^(m-q) * sin(2^q*alpha + offset)``.
    ``t`` is clamped to +/-EXP_CLAMP first: the clamped branch saturates to
    exactly 0.0 or 1.0, which is the plateau value the unclamped formula
    converges to anyway.
    """
    a = np.asarray(alpha, dtype=float)
    t = np.clip(inner_exponent(a, q, spec), -EXP_CLAMP, EXP_CLAMP)
    out = np.exp(-np.exp(t))
    return float(out) if a.ndim == 0 else out


def sawtooth(alpha, q: int):
    """Rising ramp from 0 to 2 with period 2^(1-q)*pi.

    Evaluates ``1 - (2/pi) * arctan(cot(2^(q-1)*alpha))``.  At arguments
    where the cotangent is singular (2^(q-1)*alpha = k*pi) the ramp restarts
    and the value is defined as 0, the right-continuous limit.
    """
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    a = np.asarray(alpha, dtype=float)
    x = 2.0 ** (q - 1) * a
    sin_x = np.sin(x)
    with np.errstate(divide="ignore"):
        ramp = 1.0 - (2.0 / np.pi) * np.arctan(np.cos(x) / sin_x)
    ramp = np.where(np.abs(sin_x) < _POLE_TOL, 0.0, ramp)
    # clip guards 1-ulp arctan saturation overshoot; the ramp is in [0, 2)
    out = np.clip(ramp, 0.0, 2.0)
    return float(out) if a.ndim == 0 else out


def sawtooth_plateau(alpha, q: int):
    """Numerically stable plateau level in [0, 1] built from two sawtooth passes.

    First ``sbar = sawtooth(alpha, q)`` is computed and held fixed; the
    correction ``sawtooth(2^(1-q)*pi*sbar, q)`` then subtracts the ramp's
    slope, leaving the flat levels.  Note the q-scalings cancel exactly:
    sawtooth multiplies its argument by 2^(q-1), so the inner expression is
    arctan(cot(pi*sbar)) for every q (both scalings are exact powers of two,
    so the cancellation is exact in floating point as well).

    Integer ``sbar`` sits exactly on a level boundary, where the inner
    sawtooth is singular; the correction there is pinned to 0 at the ramp
    restart (sbar = 0) and to the left limit 2 at positive integers, which
    puts boundary angles on the level-0 side for every q.

    The result lies in [0, 1] and every intermediate lies in [0, 2].
    """
    a = np.asarray(alpha, dtype=float)
    sbar = np.asarray(sawtooth(a, q))
    nearest = np.round(sbar)
    on_boundary = np.abs(sbar - nearest) < _POLE_TOL
    with np.errstate(invalid="ignore"):
        step = np.where(
            on_boundary,
            np.where(nearest == 0.0, 0.0, 2.0),
            sawtooth(2.0 ** (1 - q) * np.pi * sbar, q),
        )
    out = np.clip(sbar - 0.5 * step, 0.0, 1.0)
    return float(out) if a.ndim == 0 else out


def encoded_level(alpha, q: int, spec: EncodingSpec):
    """Plateau level in [0, 1] under the encoding selected by ``spec``."""
    if spec.kind is EncodingKind.DOUBLE_EXP:
        return double_exp_plateau(alpha, q, spec)
    return sawtooth_plateau(alpha, q)


def _check_double_exp(spec: EncodingSpec, q: int) -> None:
    if spec.kind is not EncodingKind.DOUBLE_EXP:
        raise ValueError("spec does not select the double-exp encoding")
    if not 0 <= q <= spec.m:
        raise ValueError(f"need 0 <= q <= m, got q={q}, m={spec.m}")


# ---------------------------------------------------------------------------
# Layouts: which (variable, q) pair feeds each diagonal position
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EncodingLayout:
    """Assignment of (variable, frequency) pairs to encoded diagonal positions.

    ``blocks[i] = (variable_index, q_values)``: variable i drives
    ``len(q_values)`` consecutive diagonal positions, one per q.  Traversing
    blocks in order fills positions 0 .. n_nodes-2; position n_nodes-1 is
    the gauge entry (always 1) and positions beyond pad the diagonal up to
    the next power of two.

    Within a block the q values run 0 .. d_i - 1, and the block sizes d_i
    sum to n_nodes - 1.  The *full* layout gives every position its own
    variable at q = 0; it is the layout the alternating optimizer requires.
    """

    n_nodes: int
    blocks: tuple[tuple[int, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        total = 0
        for pos, (var, qs) in enumerate(self.blocks):
            if var != pos:
                raise ValueError("blocks must be indexed 0..k-1 in order")
            if len(qs) == 0:
                raise ValueError("empty q block")
            if tuple(qs) != tuple(range(len(qs))):
                raise ValueError(f"q values must be 0..d-1 contiguous, got {qs}")
            if max(qs) > self.n_nodes - 2:
                raise ValueError(f"q value {max(qs)} exceeds n_nodes - 2")
            total += len(qs)
        if total != self.n_nodes - 1:
            raise ValueError(
                f"layout covers {total} positions, expected {self.n_nodes - 1}"
            )

    @property
    def n_spins(self) -> int:
        """Number of encoded diagonal positions (n_nodes - 1)."""
        return self.n_nodes - 1

    @property
    def n_variables(self) -> int:
        return len(self.blocks)

    @property
    def n_qubits(self) -> int:
        """ceil(log2(n_nodes)); the diagonal has 2^n_qubits entries."""
        return (self.n_nodes - 1).bit_length()

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def is_full(self) -> bool:
        return all(qs == (0,) for _, qs in self.blocks)

    @cached_property
    def position_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays (variable index, q) per encoded diagonal position."""
        pos_var = np.empty(self.n_spins, dtype=int)
        pos_q = np.empty(self.n_spins, dtype=int)
        j = 0
        for var, qs in self.blocks:
            for q in qs:
                pos_var[j] = var
                pos_q[j] = q
                j += 1
        return pos_var, pos_q

    @classmethod
    def full(cls, n_nodes: int) -> "EncodingLayout":
        """One variable per encoded position, all at q = 0."""
        return cls(n_nodes, tuple((i, (0,)) for i in range(n_nodes - 1)))

    @classmethod
    def compact(cls, n_nodes: int, n_variables: int) -> "EncodingLayout":
        """Spread n_nodes - 1 positions over ``n_variables`` angle variables.

        Block sizes differ by at most one; each block enumerates q from 0.
        ``n_variables = 1`` yields the maximally compressed single-angle
        layout with q up to n_nodes - 2.
        """
        n_spins = n_nodes - 1
        if not 1 <= n_variables <= n_spins:
            raise ValueError(f"need 1 <= n_variables <= {n_spins}")
        base, rem = divmod(n_spins, n_variables)
        blocks = []
        for i in range(n_variables):
            d = base + (1 if i < rem else 0)
            blocks.append((i, tuple(range(d))))
        return cls(n_nodes, tuple(blocks))


# ---------------------------------------------------------------------------
# Diagonal construction and spin rounding
# ---------------------------------------------------------------------------


def build_diagonal(angles, layout: EncodingLayout, spec: EncodingSpec) -> np.ndarray:
    """Diagonal of the encoding gate for one angle vector.

    Entry j < n_nodes - 1 is ``exp(i*pi*R(alpha_i, q))`` for the (i, q) pair
    the layout assigns to position j; the gauge entry and the power-of-two
    padding are exactly 1.
    """
    ang = np.atleast_1d(np.asarray(angles, dtype=float))
    if ang.shape != (layout.n_variables,):
        raise ValueError(
            f"expected {layout.n_variables} angles, got shape {ang.shape}"
        )
    if spec.kind is EncodingKind.DOUBLE_EXP and spec.m < layout.n_nodes:
        raise ValueError(
            f"double-exp encoding needs m >= n_nodes ({layout.n_nodes}), got m={spec.m}"
        )
    pos_var, pos_q = layout.position_table
    levels = np.empty(layout.n_spins, dtype=float)
    for q in np.unique(pos_q):  # full layouts collapse to a single q = 0 call
        sel = pos_q == q
        levels[sel] = encoded_level(ang[pos_var[sel]], int(q), spec)
    entries = np.ones(layout.dim, dtype=complex)
    entries[: layout.n_spins] = np.exp(1j * np.pi * levels)
    return entries


def spins_from_angles(angles, layout: EncodingLayout, spec: EncodingSpec) -> np.ndarray:
    """Round the diagonal to spins in {-1, +1}^n_nodes.

    Spin j is the sign of the real part of entry j (sign(0) := +1); since
    ``exp(i*pi*R)`` has positive real part iff R < 1/2, this rounds each
    level to its nearest plateau.  The last spin is the gauge spin, always
    +1 -- cut values are invariant under a global flip, so fixing one spin
    loses nothing.
    """
    entries = build_diagonal(angles, layout, spec)
    spins = np.ones(layout.n_nodes, dtype=int)
    spins[: layout.n_spins] = np.where(entries[: layout.n_spins].real >= 0.0, 1, -1)
    return spins


def angles_for_spins(spins) -> np.ndarray:
    """Full-layout plateau-center angles that reproduce ``spins``.

    The input must include the trailing gauge spin (+1).  Spin +1 maps to
    pi/2 and spin -1 to 3*pi/2, matching direct evaluation of both
    encodings at q = 0.
    """
    v = np.asarray(spins, dtype=int)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("spins must be a non-empty 1-d vector")
    if not np.all(np.abs(v) == 1):
        raise ValueError("spins must be +/-1")
    if v[-1] != 1:
        raise ValueError("gauge spin (last entry) must be +1")
    return np.where(v[:-1] == 1, SPIN_UP_ANGLE, SPIN_DOWN_ANGLE).astype(float)
