import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingnet.errors import CapacityError, ParseError, UsageError
from isingnet.model import (ProblemInstance, all_energies, brute_force_ground, cut_value, energy,
                            enumerate_gibbs, gen_ba_maxcut, gen_er_maxcut, gen_lattice, gen_sk,
                            index_to_spins, parse_gset, serialize_gset, spins_to_index, total_weight)


def test_energy_matches_explicit_sum():
    inst = gen_sk(6, seed=3)
    J = inst.couplings.toarray()
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = rng.choice([-1.0, 1.0], size=6)
        direct = -sum(J[i, j] * s[i] * s[j] for i in range(6) for j in range(i + 1, 6))
        assert energy(inst, s) == pytest.approx(direct, abs=1e-12)


def test_energy_with_field():
    inst = ProblemInstance.from_couplings(np.array([[0, 1.0], [1.0, 0]]), h=np.array([0.5, -0.25]))
    assert energy(inst, np.array([1.0, 1.0])) == pytest.approx(-1.0 - 0.25)


def test_cut_identity():
    inst = gen_er_maxcut(10, 20, seed=2)
    W = -inst.couplings.toarray()
    rng = np.random.default_rng(1)
    for _ in range(5):
        s = rng.choice([-1.0, 1.0], size=10)
        cut = sum(W[i, j] for i in range(10) for j in range(i + 1, 10) if s[i] != s[j])
        assert cut_value(inst, s) == pytest.approx(cut)
        assert cut == pytest.approx(0.5 * (total_weight(inst) - energy(inst, s)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=20))
def test_index_round_trip(spins):
    s = np.array(spins, dtype=np.int8)
    assert np.array_equal(index_to_spins(spins_to_index(s), len(spins)), s)


def test_index_convention():
    assert spins_to_index(np.array([1, -1, -1])) == 1
    assert spins_to_index(np.array([-1, -1, 1])) == 4


def test_gset_round_trip():
    inst = gen_er_maxcut(30, 60, seed=5)
    back = parse_gset(serialize_gset(inst))
    assert back.content_hash() == inst.content_hash()


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("3\n", 1),
    ("3 2\n1 2 1\n", 2),
    ("3 1\n1 4 1\n", 2),
    ("3 1\n2 2 1\n", 2),
    ("3 2\n1 2 1\n2 1 1\n", 3),
    ("3 1\n1 2 x\n", 2),
])
def test_gset_parse_errors(text, line):
    with pytest.raises(ParseError) as e:
        parse_gset(text)
    assert e.value.line == line


def test_generators_are_seeded():
    assert gen_sk(20, 1).content_hash() == gen_sk(20, 1).content_hash()
    assert gen_sk(20, 1).content_hash() != gen_sk(20, 2).content_hash()
    assert gen_ba_maxcut(50, 3, 4).content_hash() == gen_ba_maxcut(50, 3, 4).content_hash()
    er = gen_er_maxcut(40, 100, 0)
    assert er.n_edges == 100
    assert set(np.unique(er.couplings.data)) <= {-1.0, 1.0}


def test_lattice_structure():
    inst = gen_lattice(4, 3, periodic=True)
    assert inst.n == 12 and inst.n_edges == 24
    assert np.all(np.asarray(inst.couplings.sum(axis=1)).ravel() == 4)
    emin, idx = brute_force_ground(inst)
    assert emin == -24 and set(idx) == {0, (1 << 12) - 1}


def test_gibbs_normalization_and_ratios():
    inst = gen_sk(8, seed=0)
    g = enumerate_gibbs(inst, 2.0)
    assert abs(g.probs.sum() - 1.0) <= 1e-12
    E = all_energies(inst)
    i, j = 3, 77
    assert g.probs[i] / g.probs[j] == pytest.approx(np.exp(-2.0 * (E[i] - E[j])))


def test_all_energies_brute_force():
    inst = gen_sk(5, seed=9)
    E = all_energies(inst)
    for k, s in enumerate(itertools.product([-1.0, 1.0], repeat=5)):
        idx = spins_to_index(np.array(s))
        assert E[idx] == pytest.approx(energy(inst, np.array(s)))
        assert k < 32


def test_enumeration_capacity():
    with pytest.raises(CapacityError):
        all_energies(gen_sk(30, 0))


def test_instance_validation():
    with pytest.raises(UsageError):
        ProblemInstance.from_couplings(np.array([[0, 1.0], [0.5, 0]]))
    with pytest.raises(UsageError):
        ProblemInstance.from_couplings(np.array([[1.0, 0], [0, 0]]))
