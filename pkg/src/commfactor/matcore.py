"""Dense complex matrix numerics.

Matrices are plain square ``complex128`` ndarrays; :func:`as_matrix` is the
validation entry point. Functions that make sense sample-wise also accept
stacks of shape ``(..., n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import (
    BranchInfeasible,
    DimMismatch,
    NoConvergence,
    NotNormal,
    NotStructured,
    NotUnitary,
    Singular,
)

STRUCT_TOL = 1e-8
RECON_TOL = 1e-9


def recon_tol(x, base=RECON_TOL):
    """Reconstruction tolerance ``base * (1 + ||x||)``."""
    return base * (1.0 + op_norm(x))


def as_matrix(x, dim=None):
    """Return ``x`` as a square complex matrix, validating its shape."""
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise NotStructured(f"expected a non-empty square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimMismatch(f"expected dimension {dim}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise NotStructured("matrix has non-finite entries")
    return a


def identity_like(x):
    x = np.asarray(x)
    return np.broadcast_to(np.eye(x.shape[-1], dtype=complex), x.shape).copy()


def adjoint(x):
    return np.conj(np.swapaxes(x, -1, -2))


def op_norm(x):
    """Operator (spectral) norm; batched over leading axes."""
    x = np.asarray(x)
    if x.shape[-1] == 0:
        return 0.0 if x.ndim == 2 else np.zeros(x.shape[:-2])
    return np.linalg.norm(x, ord=2, axis=(-2, -1))


def dist_to_identity(x):
    x = np.asarray(x)
    return op_norm(x - identity_like(x))


# -- structural predicates ---------------------------------------------------


def is_hermitian(x, tol=STRUCT_TOL):
    x = np.asarray(x)
    return bool(op_norm(x - adjoint(x)) <= tol * max(1.0, op_norm(x)))


def is_unitary(x, tol=STRUCT_TOL):
    x = np.asarray(x)
    return bool(np.all(dist_to_identity(adjoint(x) @ x) <= tol))


def is_normal(x, tol=STRUCT_TOL):
    x = np.asarray(x)
    comm = x @ adjoint(x) - adjoint(x) @ x
    return bool(op_norm(comm) <= tol * max(1.0, op_norm(x)) ** 2)


def is_positive_invertible(x, tol=STRUCT_TOL):
    x = np.asarray(x)
    if not is_hermitian(x, tol):
        return False
    h = (x + adjoint(x)) / 2
    return bool(np.linalg.eigvalsh(h).min() > tol)


def is_projection(x, tol=STRUCT_TOL):
    x = np.asarray(x)
    return bool(op_norm(x @ x - x) + op_norm(x - adjoint(x)) <= tol)


def dist_to_unitaries(x):
    """Distance from ``x`` to the unitary group, ``max |s_i - 1|``."""
    s = np.linalg.svd(np.asarray(x), compute_uv=False)
    if s.size == 0:
        return 0.0
    return float(np.abs(s - 1.0).max())


# -- spectral ----------------------------------------------------------------


def principal_angle(z):
    """Argument in (-pi, pi]; numpy returns -pi for negative reals with -0j."""
    a = np.angle(z)
    return np.where(a <= -np.pi, np.pi, a)


def _spectral_order(vals, hermitian):
    idx = np.arange(vals.size)
    if hermitian:
        return np.lexsort((idx, vals.real))
    return np.lexsort((idx, vals.imag, principal_angle(vals)))


def eig_normal(x, tol=STRUCT_TOL):
    """Unitary diagonalization of a normal matrix.

    Returns ``(eigenvalues, q)`` with ``x = q @ diag(eigenvalues) @ q^*``.
    Hermitian input is ordered by ascending eigenvalue; anything else by
    principal argument in (-pi, pi], ties broken by imaginary part and
    then by original position.
    """
    x = as_matrix(x)
    if not is_normal(x, tol):
        raise NotNormal("matrix is not normal within tolerance")
    hermitian = is_hermitian(x, tol)
    try:
        if hermitian:
            vals, q = np.linalg.eigh((x + adjoint(x)) / 2)
            vals = vals.astype(complex)
        else:
            t, q = scipy.linalg.schur(x, output="complex")
            vals = np.diag(t).copy()
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    order = _spectral_order(vals, hermitian)
    return vals[order], q[:, order]


def expi_hermitian(a):
    """``exp(i a)`` for Hermitian ``a``."""
    a = as_matrix(a)
    w, q = np.linalg.eigh((a + adjoint(a)) / 2)
    return (q * np.exp(1j * w)) @ adjoint(q)


def exp_hermitian(a):
    """``exp(a)`` for Hermitian ``a`` (positive definite result)."""
    a = as_matrix(a)
    w, q = np.linalg.eigh((a + adjoint(a)) / 2)
    return (q * np.exp(w)) @ adjoint(q)


def log_positive(h, tol=STRUCT_TOL):
    """Hermitian logarithm of a positive invertible matrix."""
    h = as_matrix(h)
    if not is_positive_invertible(h, tol):
        raise NotStructured("matrix is not positive invertible")
    w, q = np.linalg.eigh((h + adjoint(h)) / 2)
    return (q * np.log(w)) @ adjoint(q)


def unitary_log_angles(vals, target_sum=0.0, tol=1e-6):
    """Lift unit eigenvalues to real angles summing to ``target_sum``.

    Angles start on the principal branch (-pi, pi]; whole multiples of
    2*pi are then moved onto individual angles, the largest one first when
    lowering and the smallest first when raising (ties resolved towards the
    later, respectively earlier, position).
    """
    theta = principal_angle(np.asarray(vals, dtype=complex)).astype(float)
    turns = (target_sum - theta.sum()) / (2 * np.pi)
    n_turns = int(np.rint(turns))
    if abs(turns - n_turns) > tol:
        raise BranchInfeasible(
            f"exp(i*{target_sum}) is not the determinant: off by {turns - n_turns:.3g} turns"
        )
    for _ in range(abs(n_turns)):
        if n_turns < 0:
            k = len(theta) - 1 - int(np.argmax(theta[::-1]))
            theta[k] -= 2 * np.pi
        else:
            k = int(np.argmin(theta))
            theta[k] += 2 * np.pi
    # spread the sub-tolerance remainder so the sum is exact
    theta += (target_sum - theta.sum()) / theta.size
    return theta


def log_unitary(u, target_sum=0.0, tol=STRUCT_TOL):
    """Hermitian ``a`` with ``exp(i a) = u`` and ``trace(a) = target_sum``."""
    u = as_matrix(u)
    if not is_unitary(u, tol):
        raise NotUnitary("log_unitary needs a unitary matrix")
    vals, q = eig_normal(u, tol)
    theta = unitary_log_angles(vals, target_sum, tol=max(tol, 1e-6))
    a = (q * theta) @ adjoint(q)
    return (a + adjoint(a)) / 2


def polar(x, tol=STRUCT_TOL):
    """Right polar decomposition ``x = u h`` of an invertible matrix."""
    x = as_matrix(x)
    w, s, vh = np.linalg.svd(x)
    if s.min() <= tol:
        raise Singular(f"smallest singular value {s.min():.3g} <= {tol:g}")
    u = w @ vh
    h = (adjoint(vh) * s) @ vh
    return u, (h + adjoint(h)) / 2


def commutator(x, y):
    """Multiplicative commutator ``x y x^-1 y^-1``; batched over leading axes."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    xy = x @ y
    yx = y @ x
    # x y x^-1 y^-1 = (x y) (y x)^-1
    try:
        out = np.swapaxes(
            np.linalg.solve(np.swapaxes(yx, -1, -2), np.swapaxes(xy, -1, -2)), -1, -2
        )
    except np.linalg.LinAlgError as exc:
        raise Singular("commutator of a singular matrix") from exc
    if not np.all(np.isfinite(out)):
        raise Singular("commutator of a singular matrix")
    return out


# -- projections -------------------------------------------------------------


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection together with an orthonormal basis of its range."""

    matrix: np.ndarray
    rank: int
    basis: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not is_projection(m, 1e-6):
            raise NotStructured("matrix is not a Hermitian idempotent")
        if int(round(np.trace(m).real)) != self.rank:
            raise NotStructured("rank does not match the trace")
        if self.basis is None:
            w, q = np.linalg.eigh((m + adjoint(m)) / 2)
            object.__setattr__(self, "basis", q[:, np.argsort(-w)[: self.rank]])

    @classmethod
    def from_basis(cls, cols):
        """Projection onto the span of orthonormal columns."""
        cols = np.asarray(cols, dtype=complex)
        return cls(cols @ adjoint(cols), cols.shape[1], cols)

    @classmethod
    def coordinate(cls, n, indices):
        cols = np.eye(n, dtype=complex)[:, list(indices)]
        return cls.from_basis(cols)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def complement(self):
        n = self.dim
        full = np.linalg.qr(np.hstack([self.basis, np.eye(n)]))[0]
        return Projection.from_basis(full[:, self.rank : n])

    def equivalent(self, other):
        """Murray-von Neumann equivalence, which is rank equality in M_n."""
        return self.rank == other.rank


@dataclass(frozen=True)
class BlockDecomposition:
    """Ordered pairwise-orthogonal projections summing to the identity."""

    blocks: tuple
    total_dim: int

    def __post_init__(self):
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if sum(p.rank for p in blocks) != self.total_dim:
            raise NotStructured("block ranks do not sum to the total dimension")
        for i, p in enumerate(blocks):
            for q in blocks[i + 1 :]:
                if op_norm(p.matrix @ q.matrix) > 1e-6:
                    raise NotStructured("blocks are not pairwise orthogonal")

    @classmethod
    def from_basis(cls, w, sizes):
        """Split the columns of unitary ``w`` into consecutive blocks."""
        w = as_matrix(w)
        edges = np.concatenate([[0], np.cumsum(sizes)])
        blocks = [Projection.from_basis(w[:, a:b]) for a, b in zip(edges[:-1], edges[1:])]
        return cls(tuple(blocks), w.shape[0])

    @classmethod
    def coordinate(cls, sizes):
        n = int(sum(sizes))
        return cls.from_basis(np.eye(n, dtype=complex), sizes)

    @property
    def ranks(self):
        return [p.rank for p in self.blocks]

    def basis(self):
        """Unitary whose consecutive column groups span the blocks."""
        return np.hstack([p.basis for p in self.blocks])

    def slices(self):
        edges = np.concatenate([[0], np.cumsum(self.ranks)]).astype(int)
        return [slice(a, b) for a, b in zip(edges[:-1], edges[1:])]
