import numpy as np
import pytest

from isingnet.errors import UndefinedHeuristicError, UsageError
from isingnet.model import ProblemInstance, gen_er_maxcut, gen_lattice, gen_sk
from isingnet.partition import (Partition, make_contiguous_partition, make_partition, spectrum, split,
                                tau_flip)

RC = 310e3 * 50e-15


def test_contiguous_sizes():
    p = make_contiguous_partition(10, 3)
    assert p.sizes == (4, 3, 3)
    assert list(p.block_of) == [0] * 4 + [1] * 3 + [2] * 3


def test_random_partition_is_seeded_and_covering():
    a = make_partition(50, 4, "random", seed=1)
    b = make_partition(50, 4, "random", seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.blocks, b.blocks))
    assert np.array_equal(np.sort(np.concatenate(a.blocks)), np.arange(50))


def test_partition_validation():
    with pytest.raises(UsageError):
        make_contiguous_partition(4, 5)
    with pytest.raises(UsageError):
        Partition.from_blocks(4, [[0, 1], [1, 2, 3]])
    with pytest.raises(UsageError):
        make_partition(4, 2, "striped")


@pytest.mark.parametrize("b", [1, 2, 5])
def test_split_is_exact(b):
    inst = gen_sk(20, 4)
    s = split(inst, make_contiguous_partition(20, b))
    assert abs(s.j_int + s.j_ext - inst.couplings).max() == 0
    blk = s.partition.block_of
    ext = s.j_ext.tocoo()
    assert np.all(blk[ext.row] != blk[ext.col])
    if b == 1:
        assert s.j_ext.nnz == 0


def test_lattice_spectrum():
    inst = gen_lattice(4, 3)
    rep = spectrum(inst, split(inst, make_contiguous_partition(12, 4)))
    assert rep.rho_full == pytest.approx(4.0)
    assert rep.dominant_sign == 1
    assert tau_flip(rep, RC) == pytest.approx(3.875e-9)


@pytest.mark.parametrize("inst", [gen_lattice(4, 3), gen_sk(30, 1), gen_er_maxcut(40, 120, 2)])
def test_mean_abs_heuristic_is_slower(inst):
    rep = spectrum(inst, split(inst, make_contiguous_partition(inst.n, 2)))
    assert tau_flip(rep, RC, "mean_abs") >= tau_flip(rep, RC, "radius")


def test_lanczos_path_agrees_with_dense():
    from isingnet import partition as P

    inst = gen_er_maxcut(300, 1500, 3)
    s = split(inst, make_contiguous_partition(300, 2))
    dense = spectrum(inst, s)
    old = P.DENSE_EIG_LIMIT
    try:
        P.DENSE_EIG_LIMIT = 10
        sparse = spectrum(inst, s)
    finally:
        P.DENSE_EIG_LIMIT = old
    assert sparse.rho_full == pytest.approx(dense.rho_full, rel=1e-6)
    assert sparse.mean_abs_lambda == pytest.approx(dense.mean_abs_lambda, rel=0.1)


def test_tau_flip_undefined_without_couplings():
    inst = ProblemInstance.from_couplings(np.zeros((3, 3)))
    rep = spectrum(inst, split(inst, make_contiguous_partition(3, 1)))
    with pytest.raises(UndefinedHeuristicError):
        tau_flip(rep, RC)
