import numpy as np
import pytest

from core.errors import CapacityError, DimensionError, InstanceFormatError
from core.hubo import (BinaryPolynomial, HuboInstance, bitstring, brute_force_ground_state, energies, energy,
                       evaluate, flip_delta, instance_digest, instance_from_dict, instance_to_dict, load_instance,
                       max_flip_bounds, random_instance, save_instance, spins_from_bitstring, spins_to_bits,
                       to_binary, to_spin)
from tests.conftest import all_spins


class TestBuild:
    def test_duplicate_hyperedges_accumulate(self):
        inst = HuboInstance.build(3, quadratic={(1, 0): 1.0, (0, 1): 2.0}, cubic=[(2, 0, 1, 0.5), (0, 1, 2, 0.25)])
        assert inst.quadratic == {(0, 1): 3.0}
        assert inst.cubic == {(0, 1, 2): 0.75}

    def test_repeated_index_rejected(self):
        with pytest.raises(InstanceFormatError):
            HuboInstance.build(3, quadratic={(1, 1): 1.0})

    def test_out_of_range_rejected(self):
        with pytest.raises(InstanceFormatError):
            HuboInstance.build(3, cubic={(0, 1, 3): 1.0})

    def test_non_finite_rejected(self):
        with pytest.raises(InstanceFormatError):
            HuboInstance.build(2, linear={0: float("nan")})

    def test_empty_instance_is_zero(self):
        inst = HuboInstance.build(4)
        assert inst.is_zero()
        assert inst.num_terms == 0


class TestEnergy:
    def test_hand_computed(self, small_instance):
        # 1*1 + 2*(1*-1) + -1*(1*-1*1) + 0.5
        assert energy(small_instance, [1, -1, 1]) == pytest.approx(0.5)

    def test_batch_matches_single(self, random_six):
        spins = all_spins(6)
        batch = energies(random_six, spins)
        for row, value in zip(spins[::7], batch[::7]):
            assert energy(random_six, row) == pytest.approx(value, abs=1e-12)

    def test_wrong_length(self, small_instance):
        with pytest.raises(DimensionError):
            energy(small_instance, [1, 1])

    def test_flip_delta_matches_energy_difference(self, random_six):
        rng = np.random.default_rng(3)
        for _ in range(20):
            s = rng.choice([-1, 1], size=6)
            i = int(rng.integers(6))
            flipped = s.copy()
            flipped[i] *= -1
            assert flip_delta(random_six, s, i) == pytest.approx(energy(random_six, flipped) - energy(random_six, s),
                                                                  abs=1e-9)

    def test_flip_bounds_dominate(self, random_six):
        bounds = max_flip_bounds(random_six)
        for s in all_spins(6)[::5]:
            for i in range(6):
                assert abs(flip_delta(random_six, s, i)) <= bounds[i] + 1e-12


class TestBinaryForm:
    def test_binary_and_spin_forms_agree(self):
        for seed in range(10):
            inst = random_instance(7, seed=seed, pair_density=0.5, triple_density=0.2)
            poly = to_binary(inst)
            for s in all_spins(7):
                assert evaluate(poly, spins_to_bits(s)) == pytest.approx(energy(inst, s), abs=1e-9)

    def test_to_spin_inverts_to_binary(self, random_six):
        back = to_spin(to_binary(random_six))
        for key, value in random_six.quadratic.items():
            assert back.quadratic[key] == pytest.approx(value, abs=1e-12)
        for key, value in random_six.cubic.items():
            assert back.cubic[key] == pytest.approx(value, abs=1e-12)
        assert back.offset == pytest.approx(random_six.offset, abs=1e-12)

    def test_single_cubic_monomial(self):
        # x0 x1 x2 is 1 only on '111'
        poly = BinaryPolynomial.build(3, cubic={(0, 1, 2): 1.0})
        inst = to_spin(poly)
        values = energies(inst, all_spins(3))
        assert values[-1] == pytest.approx(1.0)
        assert np.allclose(values[:-1], 0.0)


class TestBitstrings:
    def test_qubit_zero_first(self):
        assert bitstring([1, -1, 1]) == "010"
        assert list(spins_from_bitstring("10")) == [-1, 1]

    def test_rejects_garbage(self):
        with pytest.raises(InstanceFormatError):
            spins_from_bitstring("01x")


class TestBruteForce:
    def test_matches_enumeration(self, random_six):
        spins, value = brute_force_ground_state(random_six)
        assert value == pytest.approx(energies(random_six, all_spins(6)).min(), abs=1e-12)
        assert energy(random_six, spins) == pytest.approx(value, abs=1e-12)

    def test_degenerate_tie_breaks_lexicographically(self):
        inst = HuboInstance.build(3, linear={2: 1.0})
        spins, value = brute_force_ground_state(inst)
        assert bitstring(spins) == "001"
        assert value == -1.0

    def test_capacity(self):
        with pytest.raises(CapacityError):
            brute_force_ground_state(HuboInstance.build(5), max_vars=4)


class TestInterchange:
    def test_file_round_trip(self, tmp_path, random_six):
        path = save_instance(random_six, str(tmp_path / "inst.json"))
        loaded = load_instance(path)
        assert loaded == random_six
        assert instance_digest(loaded) == instance_digest(random_six)

    def test_malformed_document(self):
        with pytest.raises(InstanceFormatError):
            instance_from_dict({"linear": []})

    def test_dict_rows(self, small_instance):
        data = instance_to_dict(small_instance)
        assert data["cubic"] == [[0, 1, 2, -1.0]]
