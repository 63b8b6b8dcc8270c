import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from commfactor.exceptions import DimMismatch, NotStructured
from commfactor.matcore import op_norm
from commfactor.pathfun import (
    EigenFunctions,
    MatrixPath,
    concatenate,
    merge_grids,
    path_multiply,
    reconstruct,
    sup_distance,
    track_eigenfunctions,
    uniform_grid,
)

from conftest import random_hermitian, random_unitary, rng_for, smooth_unitary_path_fn

seeds = st.integers(0, 2**32 - 1)


def rotation_path(rng, m):
    """Smooth unitary path ``r(s)`` with ``r(0) = 1``."""
    a = random_hermitian(rng, m)
    w, q = np.linalg.eigh(a / np.linalg.norm(a, 2))
    return lambda s: (q * np.exp(1j * w * s)) @ q.conj().T


def test_grid_validation():
    with pytest.raises(NotStructured):
        MatrixPath(np.array([0.0, 0.5]), np.zeros((2, 2, 2)))
    with pytest.raises(NotStructured):
        MatrixPath(np.array([0.0, 0.6, 0.5, 1.0]), np.zeros((4, 2, 2)))
    with pytest.raises(NotStructured):
        MatrixPath(np.array([0.0, 1.0]), np.zeros((3, 2, 2)))


def test_samples_are_read_only():
    p = MatrixPath.identity(2, 5)
    with pytest.raises(ValueError):
        p.samples[0, 0, 0] = 3


def test_interpolation_is_linear():
    p = MatrixPath(np.array([0.0, 1.0]), np.array([np.eye(2), 3 * np.eye(2)]))
    np.testing.assert_allclose(p(0.25), 1.5 * np.eye(2))


def test_merge_grids():
    g = merge_grids([0, 0.5, 1], [0, 0.5 + 1e-14, 0.75, 1])
    np.testing.assert_allclose(g, [0, 0.5, 0.75, 1])


def test_multiply_identity_and_constants(rng):
    a = MatrixPath.from_function(smooth_unitary_path_fn(rng, 3), 33)
    out = path_multiply(a, MatrixPath.identity(3))
    assert sup_distance(out, a) <= 1e-15
    x, y = random_unitary(rng, 3), random_unitary(rng, 3)
    prod = path_multiply(MatrixPath.constant(x), MatrixPath.constant(y))
    assert sup_distance(prod, MatrixPath.constant(x @ y)) <= 1e-14


def test_multiply_pointwise_oracle(rng):
    fa, fb = smooth_unitary_path_fn(rng, 3), smooth_unitary_path_fn(rng, 3)
    a = MatrixPath.from_function(fa, uniform_grid(101))
    b = MatrixPath.from_function(fb, uniform_grid(101))
    prod = a @ b
    for s in uniform_grid(101):
        assert op_norm(prod(s) - fa(s) @ fb(s)) <= 1e-12


def test_multiply_merges_grids(rng):
    a = MatrixPath.from_function(smooth_unitary_path_fn(rng, 2), uniform_grid(3))
    b = MatrixPath.from_function(smooth_unitary_path_fn(rng, 2), uniform_grid(4))
    assert path_multiply(a, b).n_points == 5


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        path_multiply(MatrixPath.identity(2), MatrixPath.identity(3))
    with pytest.raises(DimMismatch):
        sup_distance(MatrixPath.identity(2), MatrixPath.identity(3))


def test_sup_distance_examples(rng):
    a = MatrixPath.from_function(smooth_unitary_path_fn(rng, 2), 17)
    assert sup_distance(a, a) == 0
    p = MatrixPath.from_function(lambda s: np.diag([np.exp(1j * np.pi * s), 1]), 257)
    assert sup_distance(p, MatrixPath.identity(2)) == pytest.approx(2.0, abs=1e-12)


@given(seeds)
def test_sup_distance_refinement_monotone(seed):
    rng = rng_for(seed)
    a = MatrixPath.from_function(smooth_unitary_path_fn(rng, 2), 9)
    b = MatrixPath.from_function(smooth_unitary_path_fn(rng, 2), 9)
    assert sup_distance(a, b, refine=True, max_points=65) >= sup_distance(a, b)


def test_concatenate(rng):
    f = smooth_unitary_path_fn(rng, 2)
    a = MatrixPath.from_function(f, 9)
    b = MatrixPath.from_function(lambda s: f(1) @ f(s), 9)
    c = concatenate(a, b)
    assert c.n_points == 17
    assert op_norm(c(0.5) - f(1)) <= 1e-14
    with pytest.raises(NotStructured):
        concatenate(a, MatrixPath.constant(np.diag([1, -1])))


def test_eigenfunctions_must_be_sorted():
    with pytest.raises(NotStructured):
        EigenFunctions(np.array([0.0, 1.0]), np.array([[1.0, 0.0], [0.0, 1.0]]))
    ef = EigenFunctions.from_unsorted(np.array([0.0, 1.0]), np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(ef.values, [[0, 0], [1, 1]])


def test_track_constant():
    u = MatrixPath.constant(np.diag(np.exp([1j * np.pi / 4, -1j * np.pi / 4])), 9)
    phi, frame = track_eigenfunctions(u)
    np.testing.assert_allclose(phi.values, [[-np.pi / 4] * 9, [np.pi / 4] * 9], atol=1e-14)
    assert frame.is_unitary_valued()


def test_track_recovers_conjugated_rotation(rng):
    r = rotation_path(rng, 2)
    grid = uniform_grid(257)
    u = MatrixPath.from_function(lambda s: r(s) @ np.diag([np.exp(1j * s), np.exp(-1j * s)]) @ r(s).conj().T, grid)
    phi, frame = track_eigenfunctions(u)
    np.testing.assert_allclose(phi.values, [-grid, grid], atol=1e-6)
    assert sup_distance(reconstruct(phi, frame), u) <= 1e-6


def test_track_crossing_is_sorted():
    grid = uniform_grid(65)
    u = MatrixPath.from_function(lambda s: np.diag(np.exp(1j * np.array([s, 1 - s]))), grid)
    phi, _ = track_eigenfunctions(u)
    np.testing.assert_allclose(phi.values[0], np.minimum(grid, 1 - grid), atol=1e-12)
    np.testing.assert_allclose(phi.values[1], np.maximum(grid, 1 - grid), atol=1e-12)
    assert phi.modulus() <= 2 / 64 + 1e-12


def test_track_lifts_across_branch_cut():
    grid = uniform_grid(129)
    u = MatrixPath.from_function(lambda s: np.diag(np.exp(1j * np.array([3 * s, -3 * s]))), grid)
    phi, _ = track_eigenfunctions(u)
    np.testing.assert_allclose(phi.values, [-3 * grid, 3 * grid], atol=1e-10)


def test_track_selfadjoint(rng):
    a, b = random_hermitian(rng, 3), random_hermitian(rng, 3)
    h = MatrixPath.from_function(lambda s: a + s * b, 129)
    phi, frame = track_eigenfunctions(h, "selfadjoint")
    assert sup_distance(reconstruct(phi, frame, "selfadjoint"), h) <= 1e-10


def test_track_rejects_non_unitary():
    with pytest.raises(NotStructured):
        track_eigenfunctions(MatrixPath.constant(np.diag([2.0, 1.0])))


@given(seeds, st.integers(2, 4))
def test_tracking_reconstructs_and_sums(seed, m):
    rng = rng_for(seed)
    u = MatrixPath.from_function(smooth_unitary_path_fn(rng, m), 257)
    phi, frame = track_eigenfunctions(u)
    assert sup_distance(reconstruct(phi, frame), u) <= 1e-6
    assert np.all(np.diff(phi.values, axis=0) >= 0)
    # det u = 1 along the path, so the lifted sum is one constant multiple of 2 pi
    sums = phi.values.sum(axis=0)
    assert np.ptp(sums) <= 1e-8
    assert abs(sums[0] / (2 * np.pi) - np.rint(sums[0] / (2 * np.pi))) <= 1e-8


def test_grid_doubling_is_stable(rng):
    f = smooth_unitary_path_fn(rng, 3)
    coarse, _ = track_eigenfunctions(MatrixPath.from_function(f, 129))
    fine, _ = track_eigenfunctions(MatrixPath.from_function(f, 257))
    np.testing.assert_allclose(fine.values[:, ::2], coarse.values, atol=1e-8)
