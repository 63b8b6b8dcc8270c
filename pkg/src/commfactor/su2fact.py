"""2x2 commutator kernels.

* :func:`su2_diag_commutator` writes ``diag(e^{it}, e^{-it})`` as a
  commutator of two SU(2) elements within ``|e^{it} - 1|^{1/2}`` of 1.
* :func:`swap_trick_commutator` handles any unit ``alpha`` using
  ``diag(alpha, 1) S diag(conj(alpha), 1) S = diag(alpha, conj(alpha))``
  with the swap ``S``, and the norm-controlled kernel when possible.
* :func:`invertible_diag_commutator` writes ``diag(lam, 1/lam)``, ``lam > 0``,
  as a commutator of two conjugated shears.

Each kernel has a batched form (``*_kernel``) acting on arrays of
parameters and returning stacks of 2x2 matrices; the path factorizations
use those directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import NonPositive, NotUnitModulus, OutOfRange
from .matcore import commutator, op_norm
from .pathfun import MatrixPath, merge_grids

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = SIGMA_X

Value = Union[np.ndarray, MatrixPath]


def _dist_to_one(a):
    if isinstance(a, MatrixPath):
        return a.dist_to_identity()
    a = np.asarray(a)
    return float(op_norm(a - np.eye(a.shape[-1])).max()) if a.ndim == 3 else float(
        op_norm(a - np.eye(a.shape[-1]))
    )


@dataclass(frozen=True)
class CommutatorPair:
    """A pair ``(x, y)`` standing for the commutator ``x y x^-1 y^-1``.

    ``x`` and ``y`` are matrices or :class:`MatrixPath` values; the recorded
    distances to 1 are sup-norms over the grid for paths.
    """

    x: Value
    y: Value
    norm_x_to_1: float = None
    norm_y_to_1: float = None
    condition: float = None

    def __post_init__(self):
        if isinstance(self.x, MatrixPath) != isinstance(self.y, MatrixPath):
            raise TypeError("x and y must both be matrices or both be paths")
        if not isinstance(self.x, MatrixPath):
            object.__setattr__(self, "x", np.asarray(self.x, dtype=complex))
            object.__setattr__(self, "y", np.asarray(self.y, dtype=complex))
        if self.norm_x_to_1 is None:
            object.__setattr__(self, "norm_x_to_1", _dist_to_one(self.x))
        if self.norm_y_to_1 is None:
            object.__setattr__(self, "norm_y_to_1", _dist_to_one(self.y))

    @property
    def is_path(self):
        return isinstance(self.x, MatrixPath)

    @property
    def dim(self):
        return self.x.dim if self.is_path else self.x.shape[-1]

    @property
    def max_dist_to_1(self):
        return max(self.norm_x_to_1, self.norm_y_to_1)

    def value(self):
        """The commutator itself (a matrix or a path on the pair's grid)."""
        if self.is_path:
            grid = merge_grids(self.x.grid, self.y.grid)
            xs, ys = self.x.resample(grid).samples, self.y.resample(grid).samples
            return MatrixPath(grid, commutator(xs, ys))
        return commutator(self.x, self.y)

    def conjugate(self, q):
        """``(q x q^*, q y q^*)`` for a unitary matrix or path ``q``."""
        if self.is_path or isinstance(q, MatrixPath):
            qp = q if isinstance(q, MatrixPath) else MatrixPath.constant(q)
            x = self.x if self.is_path else MatrixPath.constant(self.x)
            y = self.y if self.is_path else MatrixPath.constant(self.y)
            qa = qp.adjoint()
            return CommutatorPair(qp @ x @ qa, qp @ y @ qa)
        qh = np.conj(q.T)
        return CommutatorPair(q @ self.x @ qh, q @ self.y @ qh, self.norm_x_to_1, self.norm_y_to_1)


# -- SU(2) kernel -------------------------------------------------------------


def su2_kernel(t):
    """Batched SU(2) pairs with ``(v, w) = diag(e^{it}, e^{-it})``.

    ``v`` and ``w`` are rotations by ``2 beta`` about orthogonal axes with
    ``sin(beta)^2 = |sin(t/2)|``; their commutator is
    ``cos t + i sin t (m . sigma)`` for a unit axis ``m`` with ``m_z > 0``
    (the axes are exchanged for ``t < 0`` to keep it so), and both are then
    conjugated by the unitary taking ``m . sigma`` to ``sigma_z``. Since
    ``||v - 1|| = 2 sin(beta / 2)`` and ``beta < pi/2``, this is at most
    ``sqrt(2 |sin(t/2)|) = |e^{it} - 1|^{1/2}``.

    Returns ``(v, w)`` of shape ``(len(t), 2, 2)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.abs(t) >= np.pi / 2):
        raise OutOfRange("su2 kernel needs |t| < pi/2")
    return _su2_pairs(t)


def _su2_pairs(t):
    # valid for any |t| <= pi/2; the public entry point keeps the open range
    beta = np.arcsin(np.sqrt(np.abs(np.sin(t / 2))))
    c, s = np.cos(beta)[:, None, None], np.sin(beta)[:, None, None]
    pos = (t >= 0)[:, None, None]
    axis_v = np.where(pos, SIGMA_Y, SIGMA_X)
    axis_w = np.where(pos, SIGMA_X, SIGMA_Y)
    eye = np.eye(2)
    v = c * eye + 1j * s * axis_v
    w = c * eye + 1j * s * axis_w
    # the vector part of the commutator is 2 s^2 (-s c, s c, c^2) (negated with
    # sin t for t < 0), so m = (-s, s, c) / sqrt(1 + s^2) without dividing by sin t
    norm = np.sqrt(1 + s * s)
    msig = (-s * SIGMA_X + s * SIGMA_Y + c * SIGMA_Z) / norm
    q = (eye + msig @ SIGMA_Z) / np.sqrt(2 * (1 + c / norm))
    qh = np.conj(np.swapaxes(q, -1, -2))
    return qh @ v @ q, qh @ w @ q


def su2_diag_commutator(t):
    """SU(2) pair with commutator ``diag(e^{it}, e^{-it})``, ``|t| < pi/2``."""
    v, w = su2_kernel([t])
    return CommutatorPair(v[0], w[0])


def su2_bound(t):
    """``|e^{it} - 1|^{1/2}``."""
    return np.sqrt(np.abs(np.expm1(1j * np.asarray(t))))


# -- swap trick -----------------------------------------------------------------


def swap_trick_kernel(alpha, tol=1e-8):
    """Batched pairs with commutator ``diag(alpha, conj(alpha))``.

    Uses the SU(2) kernel where ``|alpha - 1| < sqrt(2)`` and the pair
    ``(diag(alpha, 1), swap)`` elsewhere. The regime is decided on
    ``|alpha - 1|`` itself, so ``alpha = +-i`` rounded to just inside the
    disc still gets the SU(2) pair.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=complex))
    if np.any(np.abs(np.abs(alpha) - 1) > tol):
        raise NotUnitModulus("alpha must have modulus 1")
    alpha = alpha / np.abs(alpha)
    t = np.angle(alpha)
    near = np.abs(alpha - 1) < np.sqrt(2)
    v = np.empty((alpha.size, 2, 2), dtype=complex)
    w = np.empty_like(v)
    if np.any(near):
        v[near], w[near] = _su2_pairs(t[near])
    far = ~near
    v[far] = 0
    v[far, 0, 0] = alpha[far]
    v[far, 1, 1] = 1
    w[far] = SWAP
    return v, w


def swap_trick_commutator(alpha, tol=1e-8):
    """Unitary pair with commutator ``diag(alpha, conj(alpha))``."""
    v, w = swap_trick_kernel([alpha], tol)
    return CommutatorPair(v[0], w[0])


# -- invertible kernel ---------------------------------------------------------


def invertible_kernel(lam):
    """Batched pairs with commutator ``diag(lam, 1/lam)`` for ``lam > 0``.

    The shears ``x = [[1, a], [0, 1]]`` and ``y = [[1, 0], [b, 1]]`` with
    ``ab = lam^{1/2} - lam^{-1/2}`` and ``|a| = |b|`` have a commutator of
    trace ``2 + (ab)^2 = lam + 1/lam``. Conjugating by its unit-column
    eigenvector matrix ``P`` diagonalizes it; the columns are given in
    closed form so that ``P -> 1`` as ``lam -> 1``.

    Returns ``(x, y, cond)`` where ``cond`` is the condition number of ``P``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if np.any(~(lam > 0)):
        raise NonPositive("lambda must be positive")
    h = np.log(lam) / 2
    ab = 2 * np.sinh(h)
    r = np.sqrt(np.abs(ab))
    sgn = np.sign(h)
    a, b = r, sgn * r
    n = lam.size
    x = np.tile(np.eye(2, dtype=complex), (n, 1, 1))
    y = x.copy()
    x[:, 0, 1] = a
    y[:, 1, 0] = b
    # eigenvector for lam: (a, -expm1(-h)); for 1/lam: sgn * (expm1(h), e^h b)
    p = np.zeros((n, 2, 2))
    p[:, 0, 0], p[:, 1, 0] = a, -np.expm1(-h)
    p[:, 0, 1], p[:, 1, 1] = np.abs(np.expm1(h)), np.exp(h) * r
    trivial = h == 0
    p[trivial] = np.eye(2)
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    pinv = np.linalg.inv(p)
    cond = np.linalg.cond(p)
    return pinv @ x @ p, pinv @ y @ p, cond


def invertible_diag_commutator(lam):
    """Invertible pair with commutator ``diag(lam, 1/lam)``."""
    x, y, cond = invertible_kernel([lam])
    return CommutatorPair(x[0], y[0], condition=float(cond[0]))


def invertible_bound(lam):
    """``2 |lam - 1|^{1/2}``, asserted for ``|lam - 1| <= 1/2``."""
    return 2 * np.sqrt(np.abs(np.asarray(lam) - 1))
