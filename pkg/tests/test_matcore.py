import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from commfactor.exceptions import BranchInfeasible, NotNormal, NotStructured, NotUnitary, Singular
from commfactor.matcore import (
    BlockDecomposition,
    Projection,
    as_matrix,
    commutator,
    dist_to_unitaries,
    eig_normal,
    expi_hermitian,
    is_positive_invertible,
    is_projection,
    is_unitary,
    log_positive,
    log_unitary,
    op_norm,
    polar,
    unitary_log_angles,
)

from conftest import random_complex, random_hermitian, random_positive, random_unitary, rng_for

seeds = st.integers(0, 2**32 - 1)


def test_as_matrix_rejects_non_square():
    with pytest.raises(NotStructured):
        as_matrix(np.ones((2, 3)))
    with pytest.raises(NotStructured):
        as_matrix([[np.nan]])


def test_predicates():
    assert is_unitary(np.diag([1j, -1]))
    assert not is_unitary(np.diag([2, 1]))
    assert is_positive_invertible(np.diag([2.0, 0.5]))
    assert not is_positive_invertible(np.diag([2.0, -0.5]))
    assert is_projection(np.diag([1.0, 0.0]))
    assert not is_projection(np.array([[1, 1], [0, 0]]))


def test_eig_normal_identity():
    vals, q = eig_normal(np.eye(3))
    np.testing.assert_allclose(vals, np.ones(3))
    assert is_unitary(q)


def test_eig_normal_sorted_by_argument():
    vals, q = eig_normal(np.diag([1j, -1j]))
    np.testing.assert_allclose(vals, [-1j, 1j])
    np.testing.assert_allclose(np.abs(q), [[0, 1], [1, 0]], atol=1e-14)


def test_eig_normal_hermitian_ascending(rng):
    a = random_hermitian(rng, 6)
    vals, q = eig_normal(a)
    assert np.all(np.diff(vals.real) >= 0)
    assert op_norm(q @ np.diag(vals) @ q.conj().T - a) <= 1e-10


def test_eig_normal_rejects_non_normal():
    with pytest.raises(NotNormal):
        eig_normal(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds, st.integers(1, 64))
def test_eig_normal_reconstruction(seed, n):
    u = random_unitary(rng_for(seed), n)
    vals, q = eig_normal(u)
    assert op_norm(q @ np.diag(vals) @ q.conj().T - u) <= 1e-9 * op_norm(u)
    args = np.angle(vals)
    assert np.all(np.diff(args) >= -1e-12)


def test_log_unitary_examples():
    np.testing.assert_allclose(log_unitary(np.eye(2)), 0, atol=1e-15)
    a = log_unitary(np.diag(np.exp([1j * np.pi / 3, -1j * np.pi / 3])))
    np.testing.assert_allclose(a, np.diag([np.pi / 3, -np.pi / 3]), atol=1e-12)
    a = log_unitary(np.diag([-1.0, -1.0]))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(a)), [-np.pi, np.pi], atol=1e-12)


def test_log_unitary_branch_infeasible():
    with pytest.raises(BranchInfeasible):
        log_unitary(np.diag([1j, 1]), target_sum=0.0)
    with pytest.raises(NotUnitary):
        log_unitary(np.diag([2.0, 0.5]))


@given(seeds, st.integers(1, 10), st.integers(-3, 3))
def test_log_unitary_roundtrip(seed, n, turns):
    u = random_unitary(rng_for(seed), n)
    target = float(np.angle(np.linalg.det(u))) + 2 * np.pi * turns
    a = log_unitary(u, target)
    assert op_norm(expi_hermitian(a) - u) <= 1e-9
    assert abs(np.trace(a).real - target) <= 1e-9


def test_unitary_log_angles_sum():
    theta = unitary_log_angles(np.exp(1j * np.array([3.0, 3.0, -6.0 + 2 * np.pi])), 0.0)
    assert abs(theta.sum()) < 1e-12


def test_polar_examples(rng):
    u = random_unitary(rng, 4)
    pu, ph = polar(u)
    np.testing.assert_allclose(pu, u, atol=1e-12)
    np.testing.assert_allclose(ph, np.eye(4), atol=1e-12)
    pu, ph = polar(np.diag([2.0, 0.5]))
    np.testing.assert_allclose(pu, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(ph, np.diag([2.0, 0.5]), atol=1e-15)
    x = random_complex(rng, 4)
    pu, ph = polar(x)
    assert op_norm(pu @ ph - x) <= 1e-10
    assert op_norm(pu.conj().T @ pu - np.eye(4)) <= 1e-10
    assert is_positive_invertible(ph)
    with pytest.raises(Singular):
        polar(np.diag([1.0, 0.0]))


def test_log_positive(rng):
    h = random_positive(rng, 5, det_one=False)
    a = log_positive(h)
    w, q = np.linalg.eigh(a)
    assert op_norm((q * np.exp(w)) @ q.conj().T - h) <= 1e-10


def test_commutator_examples(rng):
    y = random_complex(rng, 3)
    np.testing.assert_allclose(commutator(np.eye(3), y), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(commutator(np.diag([2.0, 3.0]), np.diag([5.0, 7.0])), np.eye(2))
    # hand multiplication: xy = [[2,1],[1,1]], x^-1 y^-1 = [[2,-1],[-1,1]]
    x = np.array([[1, 1], [0, 1]])
    y = np.array([[1, 0], [1, 1]])
    np.testing.assert_allclose(commutator(x, y), [[3, -1], [1, 0]], atol=1e-14)


def test_commutator_singular():
    with pytest.raises(Singular):
        commutator(np.diag([1.0, 0.0]), np.eye(2))


@given(seeds, st.integers(1, 12))
def test_commutator_has_det_one(seed, n):
    rng = rng_for(seed)
    c = commutator(random_complex(rng, n), random_complex(rng, n))
    assert abs(np.linalg.det(c) - 1) <= 1e-10 * max(1.0, op_norm(c)) ** n


@given(seeds, st.integers(1, 10))
def test_unitary_conjugation_isometry(seed, n):
    rng = rng_for(seed)
    q = random_unitary(rng, n)
    x = random_complex(rng, n)
    lhs = op_norm(q @ x @ q.conj().T - np.eye(n))
    assert abs(lhs - op_norm(x - np.eye(n))) <= 1e-12 * max(1.0, lhs)


def test_dist_to_unitaries():
    assert dist_to_unitaries(np.diag([1.1, 0.8])) == pytest.approx(0.2)


def test_projection_and_blocks(rng):
    p = Projection.coordinate(4, [0, 2])
    assert p.rank == 2
    q = p.complement()
    assert q.rank == 2
    assert op_norm(p.matrix @ q.matrix) <= 1e-14
    assert p.equivalent(q)
    with pytest.raises(NotStructured):
        Projection(np.array([[1.0, 1.0], [0.0, 0.0]]), 1)
    w = random_unitary(rng, 5)
    dec = BlockDecomposition.from_basis(w, [2, 3])
    assert dec.ranks == [2, 3]
    total = sum(b.matrix for b in dec.blocks)
    np.testing.assert_allclose(total, np.eye(5), atol=1e-12)
    with pytest.raises(NotStructured):
        BlockDecomposition((Projection.coordinate(3, [0]), Projection.coordinate(3, [0, 1])), 3)
