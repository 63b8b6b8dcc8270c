"""End-to-end commutator factorizations.

Matrices with determinant 1 are factored by one of three strategies:

``paper_ldu``
    Polar split ``x = u h``; each factor goes through the block
    factorization ``s t d``, nontrivial ``s`` and ``t`` each become one
    commutator, and the diagonal part becomes two commutators of 2x2
    kernels arranged along prefix sums of its eigenvalue logarithms. At
    most 4 pairs for unitary or positive input and 8 in general.
``cyclic``
    ``x = Q diag(lam) Q^-1`` and ``diag(lam) = (D, C)`` with ``C`` the
    cyclic shift and ``D`` the prefix products of ``lam``. One pair for
    diagonalizable input, two via the polar split otherwise. Used as an
    independent oracle.
``norm_controlled``
    For ``x`` close to 1: two SU(2)-kernel pairs per unitary factor with
    ``||v - 1|| <= ||u - 1||^{1/2}``, and two shear-kernel pairs for the
    positive factor.

Unitary matrix paths are diagonalized by eigenvalue tracking and factored
by the diagonal path constructions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .blocklu import recursive_std, unitriangular_commutator
from .dhsdet import DhsValue, TraceFunctional, matrix_determinant_value
from .diagfact import (
    _pair_layout,
    factor_diag_path_u4,
    factor_diag_path_u16,
    prefix_sum_permutation,
)
from .exceptions import (
    DeterminantObstruction,
    NotStructured,
    NotUnitary,
    ScheduleInfeasible,
    StrategyPreconditionViolated,
)
from .factorization import Certificate, CommutatorFactorization, multiply_commutators
from .matcore import (
    adjoint,
    as_matrix,
    eig_normal,
    is_positive_invertible,
    is_unitary,
    op_norm,
    polar,
    unitary_log_angles,
)
from .pathfun import EigenFunctions, MatrixPath, track_eigenfunctions
from .su2fact import CommutatorPair, invertible_kernel, swap_trick_kernel

REFUSE_TOL = 1e-6
WARN_TOL = 1e-8
STRATEGIES = ("paper_ldu", "cyclic", "norm_controlled")
PATH_STRATEGIES = ("paper", "cyclic")
UNITARY_RADIUS = np.sqrt(2) / 100
INVERTIBLE_RADIUS = 1e-3

__all__ = [
    "Certificate",
    "CommutatorFactorization",
    "DescentReport",
    "PolarReport",
    "descent_demo",
    "factor_matrix",
    "factor_unitary_path",
    "polar_split",
]


# -- determinant gate ----------------------------------------------------------


def _check_determinant(x):
    value = matrix_determinant_value(x, TraceFunctional(x.shape[0]))
    if value.dist_to_zero > REFUSE_TOL:
        raise DeterminantObstruction(
            f"determinant is nonzero: residue {value.residue:.6g} (det = {np.linalg.det(x):.6g})",
            residue=value.residue,
        )
    if value.dist_to_zero > WARN_TOL:
        warnings.warn(
            f"determinant residue {value.dist_to_zero:.3g} is above {WARN_TOL:g}; proceeding",
            RuntimeWarning,
            stacklevel=3,
        )
    return value


def _scalar_root(x):
    """``c`` with ``c^n = det x`` and ``|c - 1|`` minimal."""
    n = x.shape[0]
    det = np.linalg.det(x)
    return np.abs(det) ** (1 / n) * np.exp(1j * np.angle(det) / n)


@dataclass(frozen=True)
class PolarReport:
    input_value: DhsValue
    u_value: DhsValue
    h_value: DhsValue
    trace_log_h: float


def polar_split(x):
    """Polar decomposition ``x = u h`` of a determinant-one matrix.

    Refuses (:class:`DeterminantObstruction`) when the determinant residue
    exceeds 1e-6 and warns above 1e-8. Both parts are rescaled to
    determinant exactly 1 up to rounding; for inputs inside the warning
    band the removed scalar is at most ``1 + O(1e-6)`` and shows up in the
    reconstruction error.
    """
    x = as_matrix(x)
    value = _check_determinant(x)
    u, h = polar(x)
    n = x.shape[0]
    u = u / _scalar_root(u)
    h = h / np.linalg.det(h).real ** (1 / n)
    logs = np.log(np.linalg.eigvalsh(h))
    tau = TraceFunctional(n)
    report = PolarReport(
        value,
        matrix_determinant_value(u, tau),
        matrix_determinant_value(h, tau),
        float(logs.sum()),
    )
    return u, h, report


# -- diagonal matrices -------------------------------------------------------------


def _diagonal_pairs(logs, basis, kind):
    """Two pairs for ``basis diag(exp(logs)) basis^*`` (or ``exp(i logs)``).

    ``logs`` must sum to 0. The prefix-sum order keeps every block angle
    within the range of ``logs``.
    """
    n = logs.size
    if n == 1 or np.all(logs == 0):
        return []
    perm = prefix_sum_permutation(logs)
    psi = np.cumsum(logs[list(perm)])[:-1]
    pairs = []
    for summand in _pair_layout(n):
        if not summand:
            continue
        angles = np.array([psi[l] for _, _, l in summand])
        if kind == "unitary":
            bx, by = swap_trick_kernel(np.exp(1j * angles))
            cond = None
        else:
            bx, by, conds = invertible_kernel(np.exp(angles))
            cond = float(conds.max())
        x = np.eye(n, dtype=complex)
        y = np.eye(n, dtype=complex)
        for (a, b, _), vx, vy in zip(summand, bx, by):
            i, k = perm[a], perm[b]
            x[np.ix_([i, k], [i, k])] = vx
            y[np.ix_([i, k], [i, k])] = vy
        pairs.append(
            CommutatorPair(basis @ x @ adjoint(basis), basis @ y @ adjoint(basis), condition=cond)
        )
    return pairs


def _zero_sum_angles(vals):
    return unitary_log_angles(vals, 0.0, tol=1e-6)


def _normal_pairs(m, k):
    """Pairs for a determinant-one unitary or positive matrix via ``s t d``."""
    n = m.shape[0]
    if op_norm(m - np.eye(n)) == 0:
        return []
    positive = is_positive_invertible(m)
    if not positive and not is_unitary(m):
        raise NotStructured("expected a unitary or positive matrix")
    pairs = []
    if n > 1 and k > 1:
        std = recursive_std(m, min(k, n))
        scale = 1e-10 * (1 + op_norm(m))
        if op_norm(std.s - np.eye(n)) > scale:
            pairs.append(unitriangular_commutator(std.s, std.decomposition))
        if op_norm(std.t - np.eye(n)) > scale:
            pairs.append(unitriangular_commutator(std.t, std.decomposition))
        d = std.d
        w = std.decomposition.basis()
        # diagonalize d block by block in its own basis
        db = adjoint(w) @ d @ w
        cols = []
        vals = []
        for sl in std.decomposition.slices():
            block = db[sl, sl]
            if positive:
                ev, q = np.linalg.eigh((block + adjoint(block)) / 2)
            else:
                bu, _ = polar(block)
                ev, q = eig_normal(bu)
            vals.append(ev)
            cols.append(q)
        basis = w @ block_diag(*cols)
        vals = np.concatenate(vals)
    else:
        if positive:
            vals, basis = np.linalg.eigh((m + adjoint(m)) / 2)
        else:
            vals, basis = eig_normal(m)
    if positive:
        logs = np.log(vals.real)
        logs = logs - logs.mean()
        pairs += _diagonal_pairs(logs, basis, "positive")
    else:
        angles = _zero_sum_angles(vals)
        pairs += _diagonal_pairs(angles, basis, "unitary")
    return pairs


def _residual(x, pairs):
    """Scalar residual ``c 1`` carrying the determinant defect, or None."""
    c = _scalar_root(x)
    if abs(c - 1) <= 1e-12:
        return None
    return c * np.eye(x.shape[0])


def _paper_ldu(x, k):
    u, h, _ = polar_split(x)
    n = x.shape[0]
    pairs = []
    if is_unitary(x) or op_norm(h - np.eye(n)) <= 1e-13:
        pairs = _normal_pairs(u, k)
        limit = 4
    elif is_positive_invertible(x) or op_norm(u - np.eye(n)) <= 1e-13:
        pairs = _normal_pairs(h, k)
        limit = 4
    else:
        pairs = _normal_pairs(u, k) + _normal_pairs(h, k)
        limit = 8
    if len(pairs) > limit:
        raise AssertionError(f"paper_ldu produced {len(pairs)} pairs, above {limit}")
    return pairs


def _cyclic_one(m, unitary_basis):
    """One pair ``(Q D Q^-1, Q C Q^-1)`` for diagonalizable ``m`` with det 1."""
    n = m.shape[0]
    if unitary_basis:
        if is_positive_invertible(m):
            vals, q = np.linalg.eigh((m + adjoint(m)) / 2)
            vals = vals.astype(complex)
        else:
            vals, q = eig_normal(m)
        qinv = adjoint(q)
    else:
        vals, q = np.linalg.eig(m)
        qinv = np.linalg.inv(q)
    logs = np.log(np.abs(vals))
    logs = logs - logs.mean()
    angles = _zero_sum_angles(vals / np.abs(vals))
    prefix = np.cumsum(logs + 1j * angles)
    dmat = np.diag(np.exp(prefix))
    shift = np.roll(np.eye(n), 1, axis=0)
    return CommutatorPair(q @ dmat @ qinv, q @ shift @ qinv)


def _cyclic(x):
    n = x.shape[0]
    _check_determinant(x)
    if is_unitary(x) or is_positive_invertible(x):
        return [_cyclic_one(x / _scalar_root(x), True)]
    u, h, _ = polar_split(x)
    return [p for p in (_cyclic_one(u, True), _cyclic_one(h, True)) if op_norm(p.value() - np.eye(n)) > 0]


def _norm_controlled(x):
    n = x.shape[0]
    _check_determinant(x)
    dist = float(op_norm(x - np.eye(n)))
    if is_unitary(x):
        if dist >= UNITARY_RADIUS:
            raise StrategyPreconditionViolated(f"||u - 1|| = {dist:.3g} is not below sqrt(2)/100")
        u = x / _scalar_root(x)
        pairs = _small_unitary_pairs(u)
        bound = 2 * np.sqrt(2) * np.sqrt(dist)
    else:
        if dist >= INVERTIBLE_RADIUS:
            raise StrategyPreconditionViolated(f"||x - 1|| = {dist:.3g} is not below 1/1000")
        u, h, _ = polar_split(x)
        pairs = _small_unitary_pairs(u)
        logs = np.log(np.linalg.eigvalsh(h))
        vals, basis = np.linalg.eigh(h)
        logs = np.log(vals) - np.log(vals).mean()
        pairs += _diagonal_pairs(logs, basis, "positive")
        bound = 24 * np.sqrt(dist)
    worst = max((p.max_dist_to_1 for p in pairs), default=0.0)
    if worst > bound + 1e-6:
        raise AssertionError(f"factor norm {worst:.3g} exceeds the bound {bound:.3g}")
    return pairs


def _small_unitary_pairs(u):
    """Two SU(2)-kernel pairs; every block angle is below ``max |arg|``."""
    if op_norm(u - np.eye(u.shape[0])) == 0:
        return []
    vals, basis = eig_normal(u)
    angles = _zero_sum_angles(vals)
    if np.abs(angles).max() >= np.pi / 2:
        raise StrategyPreconditionViolated("eigenvalue angles leave (-pi/2, pi/2)")
    return _diagonal_pairs(angles, basis, "unitary")


def factor_matrix(x, strategy="paper_ldu", k=4):
    """Factor a determinant-one matrix into commutators.

    Returns a :class:`CommutatorFactorization` whose certificate records
    the reconstruction error, the count and the largest ``||. - 1||``.
    Raises :class:`DeterminantObstruction` when ``det x != 1``.
    """
    x = as_matrix(x)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    n = x.shape[0]
    if strategy == "paper_ldu":
        pairs = _paper_ldu(x, k)
    elif strategy == "cyclic":
        pairs = _cyclic(x)
    else:
        pairs = _norm_controlled(x)
    if op_norm(x - np.eye(n)) == 0:
        pairs = []
    residual = _residual(x, pairs)
    return CommutatorFactorization.build(pairs, x, strategy, residual)


# -- unitary paths ------------------------------------------------------------


def _shift_to_zero_sum(phi, tol=1e-6):
    """Move whole turns so the eigenvalue functions sum to 0; re-sort pointwise."""
    vals = phi.values.copy()
    sums = vals.sum(axis=0)
    turns = sums / (2 * np.pi)
    k = np.rint(turns)
    if np.any(np.abs(turns - k) > tol) or np.any(k != k[0]):
        raise DeterminantObstruction(
            "det u(s) is not identically 1 along the path",
            residue=float(np.abs(turns - k).max() + np.abs(k - k[0]).max()),
        )
    shift = int(k[0])
    m = vals.shape[0]
    if abs(shift) > m:
        raise DeterminantObstruction("eigenvalue lift needs more than one turn per function", residue=shift)
    if shift > 0:
        vals[m - shift :] -= 2 * np.pi
    elif shift < 0:
        vals[: -shift] += 2 * np.pi
    vals -= vals.sum(axis=0) / m
    order = np.argsort(vals, axis=0, kind="stable")
    return np.take_along_axis(vals, order, axis=0), order


def factor_unitary_path(u, strategy="paper", margin=1e-3, tol=1e-8):
    """Factor a unitary path with ``det u(s) = 1`` into path commutators.

    ``paper``: track eigenvalue functions, factor the diagonal path by the
    4-pair construction when ``max |phi| < pi/2 - margin`` and by the
    16-pair one otherwise, then conjugate every factor by the tracked
    frame. The diagonal factors are sampled at the input grid, where the
    product is exact. ``cyclic``: one pair ``(q D q^*, q C q^*)`` per sample.

    The frames are continuous away from eigenvalue crossings; at a
    crossing the sorted frame may jump, and so may the conjugated factors.
    """
    if strategy not in PATH_STRATEGIES:
        raise ValueError(f"unknown path strategy {strategy!r}")
    if not u.is_unitary_valued(tol):
        raise NotUnitary("path is not unitary-valued")
    m = u.dim
    if u.dist_to_identity() == 0:
        return CommutatorFactorization.build([], u, strategy)
    phi, frame = track_eigenfunctions(u, "unitary", tol)
    vals, order = _shift_to_zero_sum(phi)
    q = np.take_along_axis(frame.samples, order.T[:, None, :], axis=2)
    frame = MatrixPath(u.grid, q)
    if strategy == "cyclic":
        shift = np.roll(np.eye(m), 1, axis=0)
        dvals = np.exp(1j * np.cumsum(vals, axis=0))
        d = np.zeros((u.n_points, m, m), dtype=complex)
        d[:, np.arange(m), np.arange(m)] = dvals.T
        qh = adjoint(q)
        pair = CommutatorPair(MatrixPath(u.grid, q @ d @ qh), MatrixPath(u.grid, q @ shift @ qh))
        return CommutatorFactorization.build([pair], u, "cyclic")
    ef = EigenFunctions(u.grid, vals)
    if np.abs(vals).max() < np.pi / 2 - margin:
        diag = factor_diag_path_u4(ef)
    else:
        diag = factor_diag_path_u16(ef)
    pairs = []
    for p in diag.pairs:
        x = p.x.resample(u.grid)
        y = p.y.resample(u.grid)
        pairs.append(CommutatorPair(x, y).conjugate(frame))
    return CommutatorFactorization.build(pairs, u, "paper")


# -- descent scheme ------------------------------------------------------------


@dataclass(frozen=True)
class DescentReport:
    ranks: tuple
    schedule: tuple
    stage_norms: tuple
    increments: tuple
    fitted_constant: float
    schedule_constant: float
    recon_err: float
    factorization: CommutatorFactorization = field(repr=False)
    target: np.ndarray = field(repr=False)

    def as_dict(self):
        return {
            "ranks": list(self.ranks),
            "schedule": list(self.schedule),
            "stage_norms": list(self.stage_norms),
            "increments": list(self.increments),
            "fitted_constant": self.fitted_constant,
            "schedule_constant": self.schedule_constant,
            "recon_err": self.recon_err,
            "count": self.factorization.count,
        }


def _stage_unitary(rng, dim, target):
    """``exp(i a)`` with ``tr a = 0`` and ``||exp(i a) - 1|| = target``."""
    if target == 0:
        return np.eye(dim, dtype=complex)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = (z + adjoint(z)) / 2
    a -= np.trace(a).real / dim * np.eye(dim)
    w, q = np.linalg.eigh(a)
    w = w / np.abs(w).max() * 2 * np.arcsin(target / 2)
    return (q * np.exp(1j * w)) @ adjoint(q)


def descent_demo(n_stages, seed=0, base_rank=64, scale=0.9, constant=1e-2):
    """Finite model of the telescoping descent with schedule ``constant / n^2``.

    Stage ``n`` lives on its own block ``r_n`` of rank ``base_rank / 2^(n-1)``
    (the blocks are mutually orthogonal, so the model has dimension
    ``sum rank``). ``x_n = exp(i a_n)`` on ``r_n`` has ``tr a_n = 0`` and
    ``||x_n - 1|| = scale * constant / n^2``. With ``x_{N+1} = 1`` the
    elements ``C_n = x_n (+) x_{n+1}^-1`` commute and telescope:
    ``C_1 C_2 ... C_N = x_1``. Each ``C_n`` is factored by the
    norm-controlled strategy; stages of equal parity have disjoint
    supports, so their pairs are merged into one pair per slot, giving 4
    commutators in total. Partial products ``P_n = C_1 ... C_n`` move by
    ``||P_n - P_{n-1}|| = ||C_n - 1||``.
    """
    if not 2 <= n_stages <= 8:
        raise ValueError("n_stages must be between 2 and 8")
    ranks = [base_rank // 2 ** (n - 1) if base_rank % 2 ** (n - 1) == 0 else 0 for n in range(1, n_stages + 1)]
    if min(ranks) < 2:
        raise ScheduleInfeasible(f"stage ranks {ranks} fall below 2; use fewer stages or a larger base rank")
    rng = np.random.default_rng(seed)
    dim = sum(ranks)
    edges = np.concatenate([[0], np.cumsum(ranks)]).astype(int)
    schedule = [constant / n**2 for n in range(1, n_stages + 1)]
    xs = [_stage_unitary(rng, r, scale * s) for r, s in zip(ranks, schedule)]

    def embed(blocks):
        out = np.eye(dim, dtype=complex)
        for idx, mat in blocks:
            sl = slice(edges[idx], edges[idx + 1])
            out[sl, sl] = mat
        return out

    stages = []
    for n in range(n_stages):
        blocks = [(n, xs[n])]
        if n + 1 < n_stages:
            blocks.append((n + 1, adjoint(xs[n + 1])))
        stages.append(embed(blocks))
    target = embed([(0, xs[0])])

    increments = []
    partial = np.eye(dim, dtype=complex)
    for c in stages:
        new = partial @ c
        increments.append(float(op_norm(new - partial)))
        partial = new

    # factor each stage locally on its support and merge equal parities
    merged = {}
    for n, c in enumerate(stages):
        lo = edges[n]
        hi = edges[min(n + 2, n_stages)]
        local = c[lo:hi, lo:hi]
        fac = factor_matrix(local, "norm_controlled")
        for slot, p in enumerate(fac.pairs):
            key = (n % 2, slot)
            x, y = merged.get(key, (np.eye(dim, dtype=complex), np.eye(dim, dtype=complex)))
            x = x.copy()
            y = y.copy()
            x[lo:hi, lo:hi] = p.x
            y[lo:hi, lo:hi] = p.y
            merged[key] = (x, y)
    pairs = [CommutatorPair(*merged[key]) for key in sorted(merged)]
    factorization = CommutatorFactorization.build(pairs, target, "descent")
    fitted = max(inc * (n + 1) ** 2 for n, inc in enumerate(increments))
    return DescentReport(
        ranks=tuple(ranks),
        schedule=tuple(schedule),
        stage_norms=tuple(float(op_norm(x - np.eye(x.shape[0]))) for x in xs),
        increments=tuple(increments),
        fitted_constant=float(fitted),
        schedule_constant=constant,
        recon_err=float(op_norm(multiply_commutators(pairs, dim) - target)),
        factorization=factorization,
        target=target,
    )
