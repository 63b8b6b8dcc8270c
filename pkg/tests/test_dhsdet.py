import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from commfactor.dhsdet import (
    DhsValue,
    TraceFunctional,
    continuity_radius,
    homotopy_defect,
    logdet_path_determinant,
    matrix_determinant_value,
    path_determinant,
    path_value,
    reduce_mod,
)
from commfactor.exceptions import EndpointMismatch, Singular, SingularSample
from commfactor.matcore import commutator
from commfactor.pathfun import MatrixPath, concatenate, reparametrize, uniform_grid

from conftest import random_complex, random_sl, rng_for

seeds = st.integers(0, 2**32 - 1)


def loop(points=257):
    return MatrixPath.from_function(lambda t: np.diag([np.exp(2j * np.pi * t), 1]), points)


def exp_path(a, points=129):
    return MatrixPath.from_function(lambda t: expm(t * a), points)


def test_trace_functional(rng):
    tau = TraceFunctional(3)
    assert tau(np.eye(3)) == pytest.approx(1.0)
    a, b = random_complex(rng, 3), random_complex(rng, 3)
    assert tau(a @ b) == pytest.approx(tau(b @ a))
    assert tau.lattice_step == pytest.approx(1 / 3)
    assert TraceFunctional(3, normalized=False).lattice_step == 1.0


def test_reduce_mod_half_open():
    assert reduce_mod(0.25, 0.5) == pytest.approx(-0.25)
    assert reduce_mod(-0.25, 0.5) == pytest.approx(-0.25)
    assert reduce_mod(0.7, 0.5) == pytest.approx(0.2)


def test_dhs_value_invariants():
    v = DhsValue.from_raw(1.3 + 0.1j, 0.5)
    assert -0.25 <= v.residue.real < 0.25
    assert v.dist_to_zero == pytest.approx(abs(v.residue))
    k = (v.raw.real - v.residue.real) / 0.5
    assert k == pytest.approx(round(k))
    assert v.residue.imag == v.raw.imag


def test_constant_path_is_zero(rng):
    x = random_complex(rng, 3)
    assert abs(path_determinant(MatrixPath.constant(x, 9))) <= 1e-15


def test_loop_is_one_half():
    assert path_determinant(loop()) == pytest.approx(0.5, abs=1e-9)
    assert path_determinant(loop(), method="spectral") == pytest.approx(0.5, abs=1e-9)
    assert logdet_path_determinant(loop()) == pytest.approx(0.5, abs=1e-9)
    assert path_determinant(loop(), TraceFunctional(2, normalized=False)) == pytest.approx(1.0, abs=1e-9)


@given(seeds, st.integers(1, 5))
def test_exponential_path_closed_form(seed, n):
    a = random_complex(rng_for(seed), n)
    a *= 2.0 / np.linalg.norm(a, 2)
    expected = np.trace(a) / (2j * np.pi * n)
    assert abs(path_determinant(exp_path(a)) - expected) <= 1e-9


def test_unitary_path_value_is_real(rng):
    h = random_complex(rng, 3)
    h = (h + h.conj().T) / 2
    v = path_determinant(exp_path(1j * h))
    assert abs(v.imag) <= 1e-8


def test_singular_sample():
    p = MatrixPath.from_function(lambda t: np.diag([1 - 2 * t, 1]), 5)
    with pytest.raises(SingularSample):
        path_determinant(p)


def test_matrix_value_examples():
    assert matrix_determinant_value(np.eye(4)).dist_to_zero == 0
    assert matrix_determinant_value(np.diag([-1.0, -1.0])).dist_to_zero <= 1e-15
    with pytest.raises(Singular):
        matrix_determinant_value(np.zeros((2, 2)))


@pytest.mark.parametrize("theta", [0.05, 0.2, 0.4, -0.3])
def test_matrix_value_rank_one_phase(theta):
    v = matrix_determinant_value(np.diag([np.exp(2j * np.pi * theta), 1, 1]))
    assert v.raw.real == pytest.approx(theta / 3)
    assert v.residue.real == pytest.approx(reduce_mod(theta / 3, 1 / 3))
    assert abs(v.residue.imag) <= 1e-15


def test_diag_2_1_value():
    v = matrix_determinant_value(np.diag([2.0, 1.0]))
    assert v.residue.imag == pytest.approx(-np.log(2) / (4 * np.pi))
    assert not v.is_zero


@given(seeds, st.integers(2, 8))
def test_is_zero_iff_det_one(seed, n):
    rng = rng_for(seed)
    x = random_sl(rng, n)
    assert matrix_determinant_value(x).is_zero
    assert not matrix_determinant_value(x * 1.01).is_zero


@given(seeds, st.integers(1, 6))
def test_commutator_value_vanishes(seed, n):
    rng = rng_for(seed)
    c = commutator(random_complex(rng, n), random_complex(rng, n))
    assert matrix_determinant_value(c).dist_to_zero <= 1e-9


@given(seeds, st.integers(1, 4))
def test_normalized_and_unnormalized_agree(seed, n):
    x = random_complex(rng_for(seed), n)
    a = matrix_determinant_value(x, TraceFunctional(n))
    b = matrix_determinant_value(x, TraceFunctional(n, normalized=False))
    assert a.raw * n == pytest.approx(b.raw)
    assert b.lattice_step == pytest.approx(n * a.lattice_step)
    assert b.dist_to_zero == pytest.approx(n * a.dist_to_zero, abs=1e-12)


@given(seeds)
def test_concatenation_additivity(seed):
    rng = rng_for(seed)
    a = random_complex(rng, 3)
    b = random_complex(rng, 3)
    p = exp_path(a / np.linalg.norm(a, 2), 33)
    q = MatrixPath(p.grid, p.endpoint(1)[None] @ exp_path(b / np.linalg.norm(b, 2), 33).samples)
    total = path_determinant(concatenate(p, q))
    assert abs(total - path_determinant(p) - path_determinant(q)) <= 1e-9


@given(seeds)
def test_multiplicativity_from_one(seed):
    rng = rng_for(seed)
    a, b = random_complex(rng, 3), random_complex(rng, 3)
    p = exp_path(a / np.linalg.norm(a, 2), 65)
    q = exp_path(b / np.linalg.norm(b, 2), 65)
    prod = MatrixPath(p.grid, p.samples @ q.samples)
    assert abs(path_determinant(prod) - path_determinant(p) - path_determinant(q)) <= 1e-8


def test_homotopy_defect_examples(rng):
    a = random_complex(rng, 2)
    p = exp_path(a, 65)
    assert homotopy_defect(p, p).residue == 0
    q = reparametrize(p, lambda s: s**2, uniform_grid(257))
    assert homotopy_defect(p, q).residue <= 1e-8
    d = homotopy_defect(loop(), MatrixPath.identity(2, 3))
    assert d.residue <= 1e-9
    assert d.lattice_multiple == pytest.approx(0.5)
    with pytest.raises(EndpointMismatch):
        homotopy_defect(p, MatrixPath.identity(2))


@pytest.mark.parametrize("eps", [1e-2, 1e-3])
def test_continuity_at_zero(eps):
    rng = rng_for(11)
    for n in (2, 4, 7):
        y = random_sl(rng, n)
        delta = continuity_radius(eps, y)
        assert delta > 0
        for _ in range(20):
            e = random_complex(rng, n)
            x = y + 0.999 * delta * e / np.linalg.norm(e, 2)
            assert matrix_determinant_value(x).dist_to_zero < eps


def test_path_value_reduces_loop():
    v = path_value(loop())
    assert v.raw.real == pytest.approx(0.5)
    assert v.is_zero
