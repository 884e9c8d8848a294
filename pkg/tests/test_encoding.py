"""Plateau encodings: frozen example values, stability, and enumeration."""

from __future__ import annotations

import math

import numpy as np
import pytest

from plateauopt.encoding import (
    EXP_CLAMP,
    EncodingKind,
    EncodingLayout,
    EncodingSpec,
    PhaseOffsetVariant,
    angles_for_spins,
    build_diagonal,
    double_exp_plateau,
    inner_exponent,
    phase_offset,
    sawtooth,
    sawtooth_plateau,
    spins_from_angles,
    wrap_angles,
)

SAW_SPEC = EncodingSpec(EncodingKind.SAWTOOTH)
DEXP_M6 = EncodingSpec(EncodingKind.DOUBLE_EXP, m=6)


class TestPhaseOffset:
    def test_log2_reading_is_identically_zero(self):
        # log2(-log2(0.5)) = log2(1) = 0, so the offset vanishes for any q, m
        assert phase_offset(0, 6) == 0.0
        assert phase_offset(6, 6) == 0.0
        assert phase_offset(3, 127) == 0.0

    def test_natural_log_reading(self):
        # asin(ln(ln 2) / 64); ln(ln 2) = -0.36651292...
        value = phase_offset(0, 6, PhaseOffsetVariant.NATURAL_LOG)
        assert value == pytest.approx(-0.0057268, abs=1e-7)
        assert value == pytest.approx(math.asin(math.log(math.log(2.0)) / 64.0))

    def test_rejects_q_outside_range(self):
        with pytest.raises(ValueError):
            phase_offset(7, 6)
        with pytest.raises(ValueError):
            phase_offset(-1, 6)


class TestDoubleExpPlateau:
    def test_saturates_to_zero_at_plateau(self):
        # inner exp(64) ~ 6.2e27 drives the outer exponential to exact zero
        assert double_exp_plateau(math.pi / 2, 0, DEXP_M6) == 0.0

    def test_inner_value_magnitude(self):
        t = inner_exponent(math.pi / 2, 0, DEXP_M6)
        assert math.exp(t) == pytest.approx(6.2e27, rel=0.01)

    def test_saturates_to_one(self):
        assert double_exp_plateau(3 * math.pi / 2, 0, DEXP_M6) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_zero_angle(self):
        assert double_exp_plateau(0.0, 0, DEXP_M6) == pytest.approx(
            math.exp(-1.0), abs=1e-12
        )

    def test_clamp_keeps_m127_finite_where_naive_overflows(self):
        spec = EncodingSpec(EncodingKind.DOUBLE_EXP, m=127)
        t = inner_exponent(math.pi / 2, 0, spec)
        assert t > EXP_CLAMP  # the clamp path triggers
        with np.errstate(over="ignore"):
            assert np.isinf(np.exp(t))  # unclamped evaluation blows up
        grid = np.linspace(0.0, 2 * math.pi, 4001)
        values = double_exp_plateau(grid, 0, spec)
        assert np.all(np.isfinite(values))
        assert np.all((values >= 0.0) & (values <= 1.0))

    def test_natural_log_variant_shares_plateaus(self):
        spec = EncodingSpec(
            EncodingKind.DOUBLE_EXP, m=6, phase_variant=PhaseOffsetVariant.NATURAL_LOG
        )
        assert double_exp_plateau(math.pi / 2, 0, spec) == pytest.approx(0.0, abs=1e-12)
        assert double_exp_plateau(3 * math.pi / 2, 0, spec) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_requires_matching_spec(self):
        with pytest.raises(ValueError):
            double_exp_plateau(0.1, 0, SAW_SPEC)
        with pytest.raises(ValueError):
            double_exp_plateau(0.1, 7, DEXP_M6)


class TestSawtooth:
    @pytest.mark.parametrize(
        "alpha,q,expected",
        [
            (math.pi / 2, 0, 0.5),  # cot(pi/4) = 1
            (math.pi, 0, 1.0),  # cot(pi/2) = 0
            (3 * math.pi / 2, 0, 1.5),  # cot(3pi/4) = -1
            (0.0, 0, 0.0),  # singular point: right-continuous restart
            (3 * math.pi / 4, 1, 1.5),
        ],
    )
    def test_known_values(self, alpha, q, expected):
        assert sawtooth(alpha, q) == pytest.approx(expected, abs=1e-12)

    def test_right_continuous_at_restart(self):
        assert sawtooth(1e-12, 0) == pytest.approx(0.0, abs=1e-9)

    def test_bounded_and_finite_for_extreme_q(self, rng):
        alphas = rng.uniform(0.0, 2 * math.pi, size=2000)
        for q in (0, 1, 3, 7, 63, 127):
            values = sawtooth(alphas, q)
            assert np.all(np.isfinite(values))
            assert np.all((values >= 0.0) & (values <= 2.0))

    def test_rejects_negative_q(self):
        with pytest.raises(ValueError):
            sawtooth(0.3, -1)


class TestSawtoothPlateau:
    @pytest.mark.parametrize(
        "alpha,q,expected",
        [
            (math.pi / 2, 0, 0.0),
            (3 * math.pi / 2, 0, 1.0),
            (3 * math.pi / 4, 1, 1.0),
        ],
    )
    def test_known_values(self, alpha, q, expected):
        assert sawtooth_plateau(alpha, q) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("q", [0, 1, 2, 3])
    def test_matches_floor_of_sawtooth_between_transitions(self, q):
        # the level flips where 2^q * alpha crosses multiples of pi
        alphas = np.linspace(0.0, 2 * math.pi, 20011, endpoint=False)
        period = math.pi / 2**q
        distance = np.abs(alphas / period - np.round(alphas / period)) * period
        keep = distance > 0.05
        plateau = sawtooth_plateau(alphas[keep], q)
        stair = np.floor(sawtooth(alphas[keep], q))
        assert np.max(np.abs(plateau - stair)) < 0.01

    def test_unit_interval_in_bulk(self, rng):
        alphas = rng.uniform(-10.0, 10.0, size=5000)
        for q in range(8):
            values = sawtooth_plateau(alphas, q)
            assert np.all(np.isfinite(values))
            assert np.all((values >= 0.0) & (values <= 1.0))


class TestPlateauAgreement:
    @pytest.mark.parametrize("alpha", [math.pi / 2, 3 * math.pi / 2])
    def test_encodings_agree_on_plateau_centers(self, alpha):
        a = round(double_exp_plateau(alpha, 0, DEXP_M6))
        b = round(sawtooth_plateau(alpha, 0))
        assert a == b


class TestEnumeration:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    @pytest.mark.parametrize("kind", [EncodingKind.SAWTOOTH, EncodingKind.DOUBLE_EXP])
    def test_single_variable_sweep_enumerates_all_words(self, d, kind):
        # midpoints of the 2^d constancy intervals of the fastest bit
        layout = EncodingLayout.compact(d + 1, 1)
        if kind is EncodingKind.DOUBLE_EXP:
            spec = EncodingSpec(kind, m=max(6, d + 1))
        else:
            spec = SAW_SPEC
        words = set()
        for t in range(2**d):
            alpha = (2 * t + 1) * math.pi / 2 ** (d + 1) * 2.0
            spins = spins_from_angles([alpha], layout, spec)
            words.add(tuple(int(s) for s in spins[:d]))
        assert len(words) == 2**d


class TestBuildDiagonal:
    def test_two_node_example(self):
        layout = EncodingLayout.full(3)
        entries = build_diagonal([math.pi / 2, 3 * math.pi / 2], layout, SAW_SPEC)
        np.testing.assert_allclose(entries, [1.0, -1.0, 1.0, 1.0], atol=1e-12)
        assert entries[2] == 1.0 and entries[3] == 1.0  # gauge + padding exact

    def test_all_up_angles_give_plus_one_everywhere(self):
        layout = EncodingLayout.compact(9, 2)
        entries = build_diagonal([math.pi / 2, math.pi / 2], layout, SAW_SPEC)
        np.testing.assert_allclose(entries.real, 1.0, atol=1e-9)

    def test_length_mismatch_raises(self):
        layout = EncodingLayout.full(3)
        with pytest.raises(ValueError):
            build_diagonal([0.1], layout, SAW_SPEC)

    def test_unit_modulus(self, rng):
        layout = EncodingLayout.full(6)
        entries = build_diagonal(rng.uniform(0, 2 * math.pi, 5), layout, SAW_SPEC)
        np.testing.assert_allclose(np.abs(entries), 1.0, atol=1e-12)

    def test_double_exp_needs_m_at_least_n_nodes(self):
        layout = EncodingLayout.full(8)
        with pytest.raises(ValueError):
            build_diagonal(
                np.full(7, 0.3), layout, EncodingSpec(EncodingKind.DOUBLE_EXP, m=6)
            )


class TestSpinsFromAngles:
    def test_example(self):
        layout = EncodingLayout.full(3)
        spins = spins_from_angles([math.pi / 2, 3 * math.pi / 2], layout, SAW_SPEC)
        assert spins.tolist() == [1, -1, 1]

    def test_all_up(self):
        layout = EncodingLayout.full(5)
        spins = spins_from_angles([math.pi / 2] * 4, layout, SAW_SPEC)
        assert spins.tolist() == [1, 1, 1, 1, 1]

    def test_gauge_spin_always_plus_one(self, rng):
        layout = EncodingLayout.full(7)
        for _ in range(25):
            spins = spins_from_angles(rng.uniform(0, 2 * math.pi, 6), layout, SAW_SPEC)
            assert spins[-1] == 1
            assert set(np.unique(spins)) <= {-1, 1}

    def test_diagonal_matches_spins_on_plateau_centers(self, rng):
        layout = EncodingLayout.full(9)
        for _ in range(10):
            target = np.append(rng.choice([-1, 1], size=8), 1)
            angles = angles_for_spins(target)
            entries = build_diagonal(angles, layout, SAW_SPEC)
            spins = spins_from_angles(angles, layout, SAW_SPEC)
            assert spins.tolist() == target.tolist()
            np.testing.assert_allclose(entries[:8], target[:8], atol=1e-12)

    def test_angles_for_spins_validates(self):
        with pytest.raises(ValueError):
            angles_for_spins([1, -1, -1])  # gauge spin must be +1
        with pytest.raises(ValueError):
            angles_for_spins([1, 0, 1])


class TestEncodingLayout:
    def test_full_layout_properties(self):
        layout = EncodingLayout.full(6)
        assert layout.n_spins == 5
        assert layout.n_variables == 5
        assert layout.n_qubits == 3
        assert layout.dim == 8
        assert layout.is_full

    @pytest.mark.parametrize(
        "n_nodes,expected_qubits", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (9, 4)]
    )
    def test_qubit_count(self, n_nodes, expected_qubits):
        blocks = tuple((i, (0,)) for i in range(n_nodes - 1))
        layout = EncodingLayout(n_nodes, blocks)
        assert layout.n_qubits == expected_qubits
        assert layout.dim >= n_nodes

    def test_compact_distributes_evenly(self):
        layout = EncodingLayout.compact(8, 3)
        sizes = [len(qs) for _, qs in layout.blocks]
        assert sorted(sizes) == [2, 2, 3]
        assert all(qs == tuple(range(len(qs))) for _, qs in layout.blocks)
        assert not layout.is_full

    def test_single_variable_layout_uses_all_frequencies(self):
        layout = EncodingLayout.compact(5, 1)
        assert layout.blocks == ((0, (0, 1, 2, 3)),)

    def test_invalid_layouts_raise(self):
        with pytest.raises(ValueError):  # q not contiguous from zero
            EncodingLayout(3, ((0, (1,)), (1, (0,))))
        with pytest.raises(ValueError):  # wrong total
            EncodingLayout(4, ((0, (0,)), (1, (0,))))
        with pytest.raises(ValueError):  # bad block index
            EncodingLayout(3, ((0, (0,)), (2, (0,))))
        with pytest.raises(ValueError):  # q exceeds n_nodes - 2
            EncodingLayout(3, ((0, (0, 1, 2)),))


class TestWrapAngles:
    def test_wraps_into_range(self):
        values = wrap_angles(np.array([-0.1, 0.0, 2 * math.pi, 7.0, -1e-18]))
        assert np.all((values >= 0.0) & (values < 2 * math.pi))
        assert wrap_angles(3 * math.pi) == pytest.approx(math.pi)

    def test_scalar_passthrough(self):
        assert wrap_angles(1.25) == 1.25
