import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdce.grids import Dims, tf_to_dd
from cdce.pilots import (
    Frame,
    FrameSpec,
    Lattice,
    assemble_frame,
    discrete_af,
    make_pilot_sequence,
    pilot_dd_image,
)

from oracles import twisted_convolution_reference

D = Dims(8, 14, 2)


class TestMakePilotSequence:
    def test_all_ones(self):
        np.testing.assert_array_equal(
            make_pilot_sequence("all_ones", 4), np.ones(4, dtype=complex)
        )

    def test_walsh_row_one_alternates(self):
        np.testing.assert_array_equal(
            make_pilot_sequence("walsh", 4, param=1), [1, -1, 1, -1]
        )

    def test_walsh_default_row(self):
        seq = make_pilot_sequence("walsh", 8)
        np.testing.assert_array_equal(seq, np.array([1, 1, 1, 1, -1, -1, -1, -1]))

    def test_walsh_needs_power_of_two(self):
        with pytest.raises(ValueError, match="power-of-two"):
            make_pilot_sequence("walsh", 6)

    def test_walsh_row_range(self):
        with pytest.raises(ValueError):
            make_pilot_sequence("walsh", 4, param=4)

    def test_zadoff_chu_prime_length_has_flat_autocorrelation(self):
        z = make_pilot_sequence("zadoff_chu", 7, param=1)
        for lag in range(1, 7):
            corr = np.vdot(z, np.roll(z, lag))
            assert abs(corr) == pytest.approx(0.0, abs=1e-10)

    def test_zadoff_chu_even_length_formula(self):
        z = make_pilot_sequence("zadoff_chu", 4, param=1)
        n = np.arange(4)
        np.testing.assert_allclose(z, np.exp(-1j * np.pi * n * n / 4), atol=1e-12)

    def test_zadoff_chu_root_must_be_coprime(self):
        with pytest.raises(ValueError, match="coprime"):
            make_pilot_sequence("zadoff_chu", 8, param=2)

    @pytest.mark.parametrize("kind", ["all_ones", "walsh", "zadoff_chu"])
    def test_unit_modulus(self, kind):
        seq = make_pilot_sequence(kind, 8)
        np.testing.assert_allclose(np.abs(seq), 1.0, atol=1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_pilot_sequence("gold", 8)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            make_pilot_sequence("all_ones", 0)


class TestFrameSpec:
    def test_default_lattice_pilot_count(self):
        assert FrameSpec(dims=D).n_pilots == 56

    def test_offsets_shrink_the_lattice(self):
        spec = FrameSpec(dims=D, lattice=Lattice(freq_offset=1, time_offset=4))
        assert spec.n_pilots == len(range(1, 8, 2)) * len(range(4, 14))

    def test_offset_beyond_grid_rejected(self):
        with pytest.raises(ValueError):
            FrameSpec(dims=D, lattice=Lattice(freq_offset=8))

    def test_nonpositive_power_rejected(self):
        with pytest.raises(ValueError):
            FrameSpec(dims=D, pilot_power=0.0)

    def test_bad_enums_rejected(self):
        with pytest.raises(ValueError):
            FrameSpec(dims=D, sequence_kind="pn")
        with pytest.raises(ValueError):
            FrameSpec(dims=D, data_mode="qam")
        with pytest.raises(ValueError):
            FrameSpec(dims=D, placement="speckle")


class TestAssembleFrame:
    def test_pilot_only_energy(self):
        spec = FrameSpec(dims=D, pilot_power=2.0)
        frame = assemble_frame(spec)
        assert np.sum(np.abs(frame.tf) ** 2) == pytest.approx(spec.n_pilots * 2.0)
        np.testing.assert_array_equal(frame.tf, frame.pilot_only_tf)

    def test_dense_all_ones_lattice_fills_grid(self):
        spec = FrameSpec(dims=D, lattice=Lattice(freq_spacing=1, time_spacing=1))
        frame = assemble_frame(spec)
        np.testing.assert_allclose(frame.tf, np.ones((D.m, D.n)), atol=1e-12)

    def test_scan_order_is_column_major(self):
        spec = FrameSpec(dims=Dims(4, 2, 0), sequence_kind="walsh", lattice=Lattice())
        frame = assemble_frame(spec)
        seq = make_pilot_sequence("walsh", 4)
        expected = np.zeros((4, 2), dtype=complex)
        expected[0, 0], expected[2, 0] = seq[0], seq[1]
        expected[0, 1], expected[2, 1] = seq[2], seq[3]
        np.testing.assert_array_equal(frame.pilot_only_tf, expected)

    def test_mask_marks_exactly_the_lattice(self):
        frame = assemble_frame(FrameSpec(dims=D))
        rows, cols = np.nonzero(frame.pilot_mask)
        assert set(rows) == {0, 2, 4, 6}
        assert set(cols) == set(range(14))
        assert frame.pilot_mask.sum() == 56

    def test_qpsk_fill_covers_non_pilot_positions(self):
        spec = FrameSpec(dims=D, data_mode="qpsk")
        frame = assemble_frame(spec, np.random.default_rng(0))
        data = frame.tf[~frame.pilot_mask]
        assert np.all(np.abs(np.abs(data) - 1.0) < 1e-12)
        np.testing.assert_array_equal(
            frame.tf[frame.pilot_mask], frame.pilot_only_tf[frame.pilot_mask]
        )

    def test_qpsk_symbol_energy_is_exactly_unit(self):
        rng = np.random.default_rng(1)
        frame = assemble_frame(FrameSpec(dims=D, data_mode="qpsk"), rng)
        energies = np.abs(frame.tf[~frame.pilot_mask]) ** 2
        assert energies.mean() == pytest.approx(1.0, rel=0.01)

    def test_qpsk_needs_rng(self):
        with pytest.raises(ValueError, match="rng"):
            assemble_frame(FrameSpec(dims=D, data_mode="qpsk"))

    def test_uniform_random_placement(self):
        spec = FrameSpec(dims=D, placement="uniform_random")
        frame = assemble_frame(spec, np.random.default_rng(5))
        assert frame.pilot_mask.sum() == spec.n_pilots
        assert np.sum(np.abs(frame.pilot_only_tf) ** 2) == pytest.approx(spec.n_pilots)

    def test_uniform_random_needs_rng(self):
        with pytest.raises(ValueError, match="rng"):
            assemble_frame(FrameSpec(dims=D, placement="uniform_random"))

    def test_uniform_random_is_seed_deterministic(self):
        spec = FrameSpec(dims=D, placement="uniform_random")
        a = assemble_frame(spec, np.random.default_rng(8))
        b = assemble_frame(spec, np.random.default_rng(8))
        np.testing.assert_array_equal(a.pilot_mask, b.pilot_mask)


class TestPilotDdImage:
    def test_full_grid_all_ones_is_impulse(self):
        spec = FrameSpec(dims=D, lattice=Lattice(freq_spacing=1, time_spacing=1))
        img = pilot_dd_image(assemble_frame(spec))
        expected = np.zeros((D.m, D.n))
        expected[0, 0] = np.sqrt(D.grid_size)
        np.testing.assert_allclose(img, expected, atol=1e-12)

    @pytest.mark.parametrize(
        "kind,dims",
        [("all_ones", D), ("all_ones", Dims(16, 16, 2)), ("walsh", Dims(16, 16, 2))],
    )
    def test_lattice_pilots_concentrate_energy(self, kind, dims):
        spec = FrameSpec(dims=dims, sequence_kind=kind)
        img = pilot_dd_image(assemble_frame(spec))
        energy = np.sort(np.abs(img.ravel()) ** 2)[::-1]
        top = np.cumsum(energy)[spec.n_pilots - 1]
        assert top >= 0.9 * energy.sum()

    def test_zadoff_chu_spreads_energy(self):
        spec = FrameSpec(dims=D, sequence_kind="zadoff_chu")
        img = pilot_dd_image(assemble_frame(spec))
        energy = np.abs(img) ** 2
        assert energy.max() < 0.5 * energy.sum()


class TestDiscreteAf:
    def test_zero_lag_is_energy(self):
        frame = assemble_frame(FrameSpec(dims=D))
        x_dd = pilot_dd_image(frame)
        af = discrete_af(x_dd)
        assert af[0, 0] == pytest.approx(np.sum(np.abs(x_dd) ** 2))

    def test_impulse_af_is_single_spike(self):
        x = np.zeros((4, 5), dtype=complex)
        x[0, 0] = 2.0
        af = discrete_af(x)
        expected = np.zeros((4, 5), dtype=complex)
        expected[0, 0] = 4.0
        np.testing.assert_allclose(af, expected, atol=1e-12)

    def test_lattice_af_peaks_at_half_delay_grid(self):
        frame = assemble_frame(FrameSpec(dims=D))
        af = np.abs(discrete_af(pilot_dd_image(frame)))
        assert af[4, 0] == pytest.approx(af[0, 0])
        others = af.copy()
        others[0, 0] = others[4, 0] = 0.0
        assert others.max() < 1e-9 * af[0, 0]

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=10)
    def test_peak_dominates_on_random_grids(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
        af = discrete_af(x)
        assert np.max(np.abs(af)) <= abs(af[0, 0]) + 1e-10

    def test_matches_scalar_reference_definition(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((5, 6)) + 1j * rng.standard_normal((5, 6))
        np.testing.assert_allclose(
            discrete_af(x), twisted_convolution_reference(x, x), atol=1e-10
        )

    def test_frame_invariants_hold(self):
        frame = assemble_frame(FrameSpec(dims=D))
        assert isinstance(frame, Frame)
        assert frame.tf.shape == frame.pilot_only_tf.shape == frame.pilot_mask.shape
