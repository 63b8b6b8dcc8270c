"""Block triangular factorizations.

``x = s t d`` with ``s`` block lower unitriangular, ``t`` block upper
unitriangular and ``d`` block diagonal, first for two blocks via the Schur
complement, then for ``k`` blocks by recursing into the complement. A block
unitriangular matrix is then written as a single commutator ``(g, v)``
with ``g`` block-scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    BlockSingular,
    IllConditioned,
    NoAdmissibleProjection,
    NotStructured,
    NotUnitriangular,
    PreconditionDistance,
    SchurConditionViolated,
)
from .matcore import (
    BlockDecomposition,
    Projection,
    adjoint,
    as_matrix,
    dist_to_unitaries,
    eig_normal,
    is_positive_invertible,
    op_norm,
    polar,
)
from .su2fact import CommutatorPair

NEAR_UNITARY = 0.1
DEFAULT_EPS = 1e-3


@dataclass(frozen=True)
class StdFactors:
    """``x = s @ t @ d`` relative to ``decomposition``."""

    s: np.ndarray
    t: np.ndarray
    d: np.ndarray
    decomposition: BlockDecomposition
    certificates: dict = field(default_factory=dict, compare=False)

    def product(self):
        return self.s @ self.t @ self.d

    def in_basis(self):
        """``(s, t, d)`` expressed in the decomposition's basis."""
        w = self.decomposition.basis()
        wh = adjoint(w)
        return wh @ self.s @ w, wh @ self.t @ w, wh @ self.d @ w


def _blocks(m, slices):
    return [[m[a, b] for b in slices] for a in slices]


def _solve(a, b, what):
    try:
        out = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise BlockSingular(f"{what} is singular") from exc
    if not np.all(np.isfinite(out)):
        raise BlockSingular(f"{what} is singular")
    return out


def schur_condition(x, p):
    """Both sides of ``||q x p (pxp)^-1 p x q|| < 1 / ||(qxq)^-1||`` (corner coordinates)."""
    x = as_matrix(x)
    q = p.complement()
    a = adjoint(p.basis) @ x @ p.basis
    b = adjoint(p.basis) @ x @ q.basis
    c = adjoint(q.basis) @ x @ p.basis
    d = adjoint(q.basis) @ x @ q.basis
    cross = op_norm(c @ _solve(a, b, "pxp"))
    inv_d = _solve(d, np.eye(d.shape[0]), "qxq")
    return float(cross), float(1.0 / op_norm(inv_d))


def schur_std(x, p):
    """Two-block factorization ``x = s t d`` for the projection ``p``.

    With ``q = 1 - p`` and ``S = qxq - qxp (pxp)^-1 pxq`` the Schur
    complement: ``s = 1 + qxp (pxp)^-1``, ``t = 1 + pxq S^-1`` and
    ``d = pxp + S``. The certificates record the two sides of the
    invertibility condition and the corner distances to the unitaries.
    """
    x = as_matrix(x)
    n = x.shape[0]
    if not 0 < p.rank < n:
        raise NotStructured("p must be a proper nonzero projection")
    q = p.complement()
    w = np.hstack([p.basis, q.basis])
    xw = adjoint(w) @ x @ w
    r = p.rank
    a, b, c, dd = xw[:r, :r], xw[:r, r:], xw[r:, :r], xw[r:, r:]
    cross, bound = schur_condition(x, p)
    if not cross < bound:
        raise SchurConditionViolated(
            f"cross term {cross:.3g} is not below {bound:.3g}", cross_term=cross, bound=bound
        )
    lower = c @ _solve(a, np.eye(r), "pxp")
    schur = dd - lower @ b
    upper = b @ _solve(schur, np.eye(n - r), "Schur complement")
    s = np.eye(n, dtype=complex)
    t = np.eye(n, dtype=complex)
    d = np.zeros((n, n), dtype=complex)
    s[r:, :r] = lower
    t[:r, r:] = upper
    d[:r, :r] = a
    d[r:, r:] = schur
    wh = adjoint(w)
    decomposition = BlockDecomposition((p, q), n)
    certs = {
        "cross_term": cross,
        "bound": bound,
        "dist_pxp": dist_to_unitaries(a),
        "dist_qxq": dist_to_unitaries(dd),
        "dist_pdp": dist_to_unitaries(a),
        "dist_qdq": dist_to_unitaries(schur),
    }
    if is_positive_invertible(x):
        if not (is_positive_invertible(a) and is_positive_invertible(schur)):
            raise NotStructured("positive input gave non-positive diagonal blocks")
    return StdFactors(w @ s @ wh, w @ t @ wh, w @ d @ wh, decomposition, certs)


def projection_bounds(x, p, eps=0.0):
    """Measured and allowed values of the three near-unitary estimates.

    Returns a dict with the cross term, the corner distances, and the
    allowed values ``(dist + eps)^2 / sqrt(1 - 2.1 (dist + eps))`` and
    ``dist + eps`` where ``dist`` is the distance of ``x`` to the unitaries.
    """
    x = as_matrix(x)
    q = p.complement()
    dist = dist_to_unitaries(x)
    cross, _ = schur_condition(x, p)
    pxp = adjoint(p.basis) @ x @ p.basis
    qxq = adjoint(q.basis) @ x @ q.basis
    e = dist + eps
    return {
        "dist": dist,
        "cross_term": cross,
        "cross_bound": e**2 / np.sqrt(1 - 2.1 * e) if 2.1 * e < 1 else np.inf,
        "dist_pxp": dist_to_unitaries(pxp),
        "dist_qxq": dist_to_unitaries(qxq),
        "dist_bound": e,
    }


def select_projection(x, r, eps=DEFAULT_EPS):
    """Rank-``r`` projection satisfying the Schur condition for ``x``.

    For positive ``x`` the span of ``r`` eigenvectors makes ``x``
    block-diagonal. When ``x = u h`` is within 1/10 of the unitaries, ``p``
    is spanned by ``r`` eigenvectors of ``u``: then ``p`` commutes with
    ``u``, the cross terms are compressions of ``u (h - 1)`` of norm at
    most ``d = ||h - 1||``, and ``||(pxp)^-1|| <= 1 / (1 - d)``. The three
    near-unitary estimates follow with ``eps = 0``; ``eps`` is the slack
    allowed when checking them.
    """
    x = as_matrix(x)
    n = x.shape[0]
    if not 0 < r < n:
        raise NotStructured(f"rank {r} is not strictly between 0 and {n}")
    if is_positive_invertible(x):
        _, q = np.linalg.eigh((x + adjoint(x)) / 2)
    else:
        dist = dist_to_unitaries(x)
        if dist >= NEAR_UNITARY:
            raise PreconditionDistance(f"distance to the unitaries {dist:.3g} is not below 1/10")
        u, _ = polar(x)
        _, q = eig_normal(u)
    p = Projection.from_basis(q[:, :r])
    try:
        cross, bound = schur_condition(x, p)
    except BlockSingular as exc:
        raise NoAdmissibleProjection(str(exc)) from exc
    if not cross < bound:
        raise NoAdmissibleProjection(
            "spectral projection violates the Schur condition", margins={"cross": cross, "bound": bound}
        )
    if not is_positive_invertible(x):
        b = projection_bounds(x, p, eps)
        if b["cross_term"] > b["cross_bound"] or max(b["dist_pxp"], b["dist_qxq"]) > b["dist_bound"]:
            raise NoAdmissibleProjection("near-unitary estimates fail", margins=b)
    return p


def two_class_ranks(n, k):
    """Ranks for ``k`` blocks in two classes of equal rank each.

    The first ``ceil(k/2)`` blocks share rank ``a`` and the rest rank
    ``b`` with ``|a - b|`` as small as possible; if no such split of ``n``
    exists the class sizes are varied, and as a last resort ``k - 1``
    blocks of rank 1 and one remainder block are used.
    """
    if not 1 <= k <= n:
        raise NotStructured(f"need 1 <= k <= n, got k={k}, n={n}")
    if k == 1:
        return [n]
    best = None
    first = (k + 1) // 2
    for c1 in sorted(range(1, k), key=lambda c: (abs(c - first), c)):
        c2 = k - c1
        for a in range(1, n):
            rest = n - c1 * a
            if rest < c2 or rest % c2:
                continue
            b = rest // c2
            key = (abs(a - b), abs(c1 - first))
            if best is None or key < best[0]:
                best = (key, c1, a, b)
    if best is None:
        return [1] * (k - 1) + [n - k + 1]
    _, c1, a, b = best
    return [a] * c1 + [b] * (k - c1)


def block_ldu(xw, sizes):
    """Block ``L D U`` of ``xw`` for consecutive blocks of the given sizes."""
    n = xw.shape[0]
    edges = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    lo = np.eye(n, dtype=complex)
    up = np.eye(n, dtype=complex)
    dg = np.zeros((n, n), dtype=complex)
    work = xw.copy()
    for i in range(len(sizes)):
        a, b = edges[i], edges[i + 1]
        piv = work[a:b, a:b]
        if i + 1 < len(sizes):
            lo[b:, a:b] = _solve(piv.T, work[b:, a:b].T, f"pivot block {i}").T
            up[a:b, b:] = _solve(piv, work[a:b, b:], f"pivot block {i}")
            work[b:, b:] = work[b:, b:] - lo[b:, a:b] @ piv @ up[a:b, b:]
        dg[a:b, a:b] = piv
    return lo, dg, up


def recursive_std(x, k, eps=DEFAULT_EPS):
    """``k``-block factorization ``x = s t d`` for unitary or positive ``x``.

    The blocks are chosen one at a time: ``select_projection`` picks the
    next block inside the current Schur complement, whose basis becomes the
    new working corner. With the blocks fixed, ``x = L D U`` in their basis
    and ``s = L``, ``t = D U D^-1``, ``d = D``. Errors carry the level in
    their message.
    """
    x = as_matrix(x)
    n = x.shape[0]
    sizes = two_class_ranks(n, k)
    basis = np.eye(n, dtype=complex)
    corner = x
    cols = []
    levels = []
    for level, r in enumerate(sizes[:-1]):
        try:
            p = select_projection(corner, r, eps)
            factors = schur_std(corner, p)
        except (NoAdmissibleProjection, SchurConditionViolated, PreconditionDistance, BlockSingular) as exc:
            exc.args = (f"level {level}: {exc.args[0]}",) + exc.args[1:]
            raise
        levels.append(factors.certificates)
        q = p.complement()
        cols.append(basis @ p.basis)
        corner = adjoint(q.basis) @ factors.d @ q.basis
        basis = basis @ q.basis
    cols.append(basis)
    w = np.hstack(cols)
    decomposition = BlockDecomposition.from_basis(w, sizes)
    lo, dg, up = block_ldu(adjoint(w) @ x @ w, sizes)
    t_in = dg @ up @ _solve(dg, np.eye(n), "diagonal factor")
    wh = adjoint(w)
    return StdFactors(w @ lo @ wh, w @ t_in @ wh, w @ dg @ wh, decomposition, {"levels": levels})


def _triangular_kind(tb, slices, tol):
    k = len(slices)
    for i in range(k):
        if op_norm(tb[slices[i], slices[i]] - np.eye(slices[i].stop - slices[i].start)) > tol:
            return None
    upper = all(op_norm(tb[slices[i], slices[j]]) <= tol for i in range(k) for j in range(i))
    lower = all(op_norm(tb[slices[i], slices[j]]) <= tol for i in range(k) for j in range(i + 1, k))
    if upper:
        return "upper"
    if lower:
        return "lower"
    return None


def unitriangular_commutator(t, decomposition, scalars=None, tol=1e-9):
    """Single commutator ``(g, v) = t`` for block unitriangular ``t``.

    ``g`` is ``lam_j`` on block ``j`` (default ``lam_j = 2^j``) and ``v``
    is unitriangular of the same shape, solved from
    ``(lam_i / lam_j - 1) v_ij = sum_{k strictly between, or k = j} t_ik v_kj``
    block by block, moving away from the diagonal. The pair's
    ``condition`` is ``max lam / min lam``.
    """
    t = as_matrix(t, decomposition.total_dim)
    w = decomposition.basis()
    slices = decomposition.slices()
    k = len(slices)
    lam = np.array([2.0 ** (j + 1) for j in range(k)] if scalars is None else scalars, dtype=complex)
    if lam.size != k or np.any(lam == 0):
        raise IllConditioned("need one nonzero scalar per block")
    tb = adjoint(w) @ t @ w
    kind = _triangular_kind(tb, slices, tol * (1 + op_norm(t)))
    if kind is None:
        raise NotUnitriangular("t is not block unitriangular for this decomposition")
    for i in range(k):
        for j in range(k):
            if i != j and abs(lam[i] / lam[j] - 1) < 1e-8:
                raise IllConditioned(f"blocks {i} and {j} have equal scalars")
    n = t.shape[0]
    v = np.eye(n, dtype=complex)
    if kind == "upper":
        order = [(i, j) for j in range(k) for i in range(j - 1, -1, -1)]
    else:
        order = [(i, j) for j in range(k) for i in range(j + 1, k)]
    for i, j in order:
        between = range(i + 1, j + 1) if kind == "upper" else range(j, i)
        acc = sum(tb[slices[i], slices[m]] @ v[slices[m], slices[j]] for m in between)
        v[slices[i], slices[j]] = acc / (lam[i] / lam[j] - 1)
    g = np.diag(np.concatenate([np.full(sl.stop - sl.start, lam[j]) for j, sl in enumerate(slices)]))
    wh = adjoint(w)
    cond = float(np.abs(lam).max() / np.abs(lam).min())
    return CommutatorPair(w @ g @ wh, w @ v @ wh, condition=cond)
