"""Commutator factorizations of diagonal matrix paths.

A sorted zero-sum family ``phi_1 <= ... <= phi_m`` gives the diagonal
paths ``diag(e^{i phi})`` (unitary) and ``diag(e^{phi})`` (invertible).
The constructions share one skeleton:

1. Cover [0, 1] by intervals on each of which one fixed permutation keeps
   all prefix sums of ``phi`` inside ``[min phi - delta, max phi + delta]``.
2. Take a partition of unity ``f_j`` subordinate to the cover. Permuting
   ``f_j phi`` by the interval's permutation, its diagonal splits as
   ``diag(psi_1, -psi_1, psi_3, -psi_3, ...) + diag(0, psi_2, -psi_2, ...)``
   with ``psi_l`` the scaled prefix sums. Each summand exponentiates to a
   direct sum of ``diag(e^{i psi}, e^{-i psi})`` blocks, which is one
   commutator of 2x2 kernels.
3. Intervals of equal parity are disjoint, so their commutators multiply
   into a single commutator. Two summands times two parities gives 4 pairs.

With prefix sums confined to ``(-pi/2, pi/2)`` the SU(2) kernel applies;
otherwise each block needs the 4-commutator general-angle construction,
giving 16 pairs. The invertible case uses the shear kernel.

Covers are computed exactly for piecewise-linear data: every validity
condition is linear on each grid segment, so the crossing points are
explicit. All breakpoints are added to the grid before the factors are
sampled, and the factors are evaluated pointwise from ``phi``, so the
product reconstructs the target exactly at every node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import RangeViolation, ResolutionTooCoarse, SumNotZero
from .factorization import CommutatorFactorization
from .matcore import adjoint, eig_normal
from .pathfun import EigenFunctions, MatrixPath, interpolate_rows, merge_grids
from .su2fact import SWAP, CommutatorPair, invertible_kernel, su2_kernel

SUM_TOL = 1e-8
MAX_INTERVALS = 100_000
GEODESIC_NODES = 8


# -- prefix sums -----------------------------------------------------------------


def prefix_sum_permutation(phis, tol=SUM_TOL):
    """Order a zero-sum list so every prefix sum lies in ``[min, max]``.

    Greedy rule: while the running sum is positive, append an unused
    negative value, otherwise an unused nonnegative one; among those, take
    the value keeping the running sum closest to 0 (ties go to the smaller
    index). A positive running sum ``S`` leaves a remainder summing to
    ``-S < 0``, so a negative value is always available and
    ``min <= S + v < S``; symmetrically for ``S <= 0``. Hence every prefix
    sum stays in ``[min, max]``.

    Returns the permutation as a tuple of indices into ``phis``.
    """
    phis = np.asarray(phis, dtype=float)
    total = phis.sum()
    if abs(total) > tol * max(1.0, np.abs(phis).max(initial=0.0)) * max(1, phis.size):
        raise SumNotZero(f"values sum to {total:.3g}")
    remaining = list(range(phis.size))
    order = []
    running = 0.0
    while remaining:
        if running > 0:
            admissible = [k for k in remaining if phis[k] < 0]
        else:
            admissible = [k for k in remaining if phis[k] >= 0]
        if not admissible:  # only reachable through rounding in the sum
            admissible = remaining
        best = min(admissible, key=lambda k: (abs(running + phis[k]), k))
        order.append(best)
        remaining.remove(best)
        running += phis[best]
    return tuple(order)


def _prefix_rows(values, perm):
    """Prefix sums ``psi_l = sum_{k<=l} values[perm[k]]`` for ``l < m``."""
    return np.cumsum(values[list(perm)], axis=0)[:-1]


def _pair_layout(m):
    """Index layout of the two block-diagonal summands.

    Returns ``[(a, b, l), ...]`` for each summand: positions ``a, b`` hold
    ``psi_l, -psi_l`` (0-based ``l`` into the prefix sums).
    """
    first = [(2 * i, 2 * i + 1, 2 * i) for i in range(m // 2) if 2 * i + 1 <= m - 1]
    second = [(2 * i - 1, 2 * i, 2 * i - 1) for i in range(1, (m + 1) // 2) if 2 * i <= m - 1]
    return first, second


# -- covers and partitions ----------------------------------------------------------


@dataclass(frozen=True)
class IntervalCover:
    """Chain of intervals ``O_j = (alpha_{j-1}, r_j)`` with one anchor each.

    ``anchors[j]`` is whatever was fixed on ``O_j`` (an angle, or a
    permutation for prefix-sum covers). Interval ``j`` is certified on
    ``validity[j]``; its right end ``r_j`` is where the certificate expires
    and ``alpha_j = r_j - h_j`` opens the next interval. The first interval
    contains 0 and the last contains 1, and ``O_j`` meets ``O_k`` only when
    ``|j - k| <= 1``.
    """

    intervals: tuple
    anchors: tuple
    validity: tuple

    @property
    def n(self):
        return len(self.intervals)

    @property
    def right_ends(self):
        return np.array([b for _, b in self.intervals])

    @property
    def transitions(self):
        """``alpha_j`` for ``j < n``: start of interval ``j + 1``."""
        return np.array([a for a, _ in self.intervals[1:]])

    def breakpoints(self):
        return np.concatenate([self.right_ends[:-1], self.transitions])

    def membership(self, s):
        """Number of intervals containing each point (0 and 1 count as inside)."""
        s = np.atleast_1d(s)
        count = np.zeros(s.shape, dtype=int)
        for j, (a, b) in enumerate(self.intervals):
            lo_ok = s > a if j > 0 else s >= a
            hi_ok = s < b if j < self.n - 1 else s <= b
            count += lo_ok & hi_ok
        return count

    def same_parity_gap(self):
        """Smallest distance between intervals two apart (inf if none)."""
        gaps = [self.intervals[j + 2][0] - self.intervals[j][1] for j in range(self.n - 2)]
        return min(gaps, default=np.inf)


def _extent(grid, g_nodes, s0, g0):
    """Maximal interval around ``s0`` where all rows of the PL constraint are >= 0."""

    def walk(indices, direction):
        prev_s, prev_g = s0, g0
        for k in indices:
            g = g_nodes[:, k]
            bad = g < 0
            if not bad.any():
                prev_s, prev_g = grid[k], g
                continue
            frac = prev_g[bad] / (prev_g[bad] - g[bad])
            return prev_s + direction * np.min(frac * abs(grid[k] - prev_s))
        return 1.0 if direction > 0 else 0.0

    right = np.flatnonzero(grid > s0)
    left = np.flatnonzero(grid < s0)[::-1]
    return walk(left, -1), walk(right, +1)


def _chain(grid, certify):
    """Build the interval chain from a certification callback.

    ``certify(s0)`` returns ``(anchor, g_nodes, g0)``: the choice made at
    ``s0``, its constraint rows sampled on the grid, and their values at
    ``s0`` (all positive).
    """
    anchors, validity, rights = [], [], []
    s0 = 0.0
    while True:
        anchor, g_nodes, g0 = certify(s0)
        if np.any(g0 <= 0):
            raise ResolutionTooCoarse(f"certificate has no slack at s = {s0:.6g}")
        lo, hi = _extent(grid, g_nodes, s0, g0)
        if rights and hi - s0 <= 1e-12:
            raise ResolutionTooCoarse(f"cover makes no progress at s = {s0:.6g}; refine the grid")
        anchors.append(anchor)
        validity.append((lo, hi))
        rights.append(hi)
        if hi >= 1.0 or len(anchors) > MAX_INTERVALS:
            break
        s0 = hi
    if rights[-1] < 1.0:
        raise ResolutionTooCoarse("too many cover intervals")
    rights[-1] = 1.0
    n = len(anchors)
    alphas = []
    for j in range(n - 1):
        prev = rights[j - 1] if j > 0 else 0.0
        h = min(rights[j] - validity[j + 1][0], (rights[j] - prev) / 2)
        if h <= 0:
            raise ResolutionTooCoarse("adjacent intervals do not overlap")
        alphas.append(rights[j] - h)
    starts = [0.0] + alphas
    intervals = tuple((a, b) for a, b in zip(starts, rights))
    return IntervalCover(intervals, tuple(anchors), tuple(validity))


def build_cover(grid, theta, osc=np.pi / 4):
    """Cover on which ``theta`` stays within ``osc`` of an anchor value.

    ``theta`` is sampled on ``grid`` and read as its piecewise-linear
    interpolant; the anchor of each interval is ``theta`` at the point
    where that interval was certified.
    """
    grid = np.asarray(grid, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if osc <= 0:
        raise ValueError("osc must be positive")

    def certify(s0):
        anchor = float(interpolate_rows(grid, theta, s0))
        g_nodes = np.stack([osc - (theta - anchor), osc + (theta - anchor)])
        return anchor, g_nodes, np.array([osc, osc])

    return _chain(grid, certify)


def build_prefix_cover(grid, values, lo, hi):
    """Cover on which one permutation keeps all prefix sums inside ``[lo, hi]``."""

    def certify(s0):
        at = interpolate_rows(grid, values, s0)
        perm = prefix_sum_permutation(at - at.mean())
        psi_nodes = _prefix_rows(values, perm)
        psi0 = _prefix_rows(at, perm)
        g_nodes = np.concatenate([psi_nodes - lo, hi - psi_nodes])
        g0 = np.concatenate([psi0 - lo, hi - psi0])
        return perm, g_nodes, g0

    return _chain(np.asarray(grid, dtype=float), certify)


@dataclass(frozen=True)
class PartitionOfUnity:
    """Piecewise-linear partition of unity subordinate to a chain cover.

    ``f_j`` is 1 between ``r_{j-1}`` and ``alpha_j`` and ramps linearly
    across the overlaps ``[alpha_j, r_j]``; neighbours are computed as
    ``rho`` and ``1 - rho`` so they sum to 1 exactly.
    """

    cover: IntervalCover

    def kinks(self):
        return self.cover.breakpoints()

    def __call__(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        cov = self.cover
        n = cov.n
        f = np.zeros((n, s.size))
        if n == 1:
            f[0] = 1.0
            return f
        rights = cov.right_ends
        alphas = cov.transitions
        # ramp position inside each overlap; 0 before it, 1 after it
        rho = np.clip((s[None, :] - alphas[:, None]) / (rights[:-1] - alphas)[:, None], 0.0, 1.0)
        f[0] = 1.0 - rho[0]
        for j in range(1, n):
            f[j] = rho[j - 1] if j == n - 1 else np.where(s <= rights[j - 1], rho[j - 1], 1.0 - rho[j])
        return f

    def sample(self, grid):
        """``(grid', values)`` with the kinks merged into ``grid``."""
        grid = merge_grids(grid, self.kinks())
        return grid, self(grid)


# -- 2x2 general-angle construction -----------------------------------------------


@dataclass(frozen=True)
class _GeneralAnglePlan:
    """Cover data for the 4-commutator factorization of ``diag(e^{i th}, e^{-i th})``.

    ``support``/``pad`` describe the localization ``g``: 1 on the support
    interval, linear down to 0 at distance ``pad / 2``.
    """

    partition: PartitionOfUnity
    support: tuple = None
    pad: float = 0.0

    def breakpoints(self):
        pts = list(self.partition.kinks())
        if self.support is not None:
            a, b = self.support
            pts += [a, b, a - self.pad / 2, b + self.pad / 2]
        return np.clip(np.array(pts, dtype=float), 0.0, 1.0)

    def localization(self, s):
        if self.support is None:
            return np.ones_like(s)
        a, b = self.support
        half = self.pad / 2
        left = np.clip((s - (a - half)) / half, 0.0, 1.0) if a > 0 else np.ones_like(s)
        right = np.clip(((b + half) - s) / half, 0.0, 1.0) if b < 1 else np.ones_like(s)
        return np.minimum(left, right)

    def evaluate(self, s, theta):
        """Samples ``(v1, v2, w2, v3, v4, w4)`` of shape ``(N, 2, 2)``; ``w1 = w3 = swap``."""
        g = self.localization(s)
        f = self.partition(s) * g[None, :]
        anchors = np.array(self.partition.cover.anchors)
        n = s.size
        out = []
        for parity in (0, 1):
            idx = np.arange(parity, anchors.size, 2)
            phase = (f[idx] * anchors[idx, None]).sum(axis=0)
            v_anchor = np.zeros((n, 2, 2), dtype=complex)
            v_anchor[:, 0, 0] = np.exp(1j * phase)
            v_anchor[:, 1, 1] = 1.0
            # at most one same-parity f is nonzero at each point
            t = (f[idx] * (theta[None, :] - anchors[idx, None])).sum(axis=0)
            if np.any(np.abs(t) >= np.pi / 2):
                raise ResolutionTooCoarse("angle left the kernel range; refine the grid")
            v, w = su2_kernel(t)
            out += [v_anchor, v, w]
        return out


def _general_angle_plan(grid, theta, support=None, pad=0.0):
    cover = build_cover(grid, theta, np.pi / 4)
    return _GeneralAnglePlan(PartitionOfUnity(cover), support, pad)


def general_diag_commutators(theta, grid=None, support=None, pad=0.1):
    """Four unitary pairs with product ``diag(e^{i theta}, e^{-i theta})``.

    ``theta`` is an :class:`EigenFunctions` row or samples on ``grid``.
    The first and third ``w`` are the constant swap. When ``support =
    (a, b)`` is given and ``theta`` vanishes outside it, every other factor
    is the identity at distance ``>= pad / 2`` from the support.

    Returns a list of four path-valued :class:`CommutatorPair`.
    """
    if isinstance(theta, EigenFunctions):
        grid, theta = theta.grid, theta.values[0]
    grid = np.asarray(grid, dtype=float)
    theta = np.asarray(theta, dtype=float)
    plan = _general_angle_plan(grid, theta, support, pad)
    fine = merge_grids(grid, plan.breakpoints())
    values = interpolate_rows(grid, theta, fine)
    v1, v2, w2, v3, v4, w4 = plan.evaluate(fine, values)
    swap = np.broadcast_to(SWAP, v1.shape)
    mats = [(v1, swap), (v2, w2), (v3, swap), (v4, w4)]
    return [CommutatorPair(MatrixPath(fine, x), MatrixPath(fine, y)) for x, y in mats]


# -- shared skeleton -------------------------------------------------------------


def _zero_sum(phi, tol):
    values = np.asarray(phi.values, dtype=float)
    sums = values.sum(axis=0)
    scale = max(1.0, float(np.abs(values).max(initial=0.0)))
    if np.any(np.abs(sums) > tol * scale * values.shape[0]):
        raise SumNotZero(f"eigenvalue functions sum to {np.abs(sums).max():.3g}, not 0")
    # exact zero sums keep the last prefix sum at 0
    return values - sums[None, :] / values.shape[0]


@dataclass
class _Skeleton:
    grid: np.ndarray
    values: np.ndarray
    cover: IntervalCover
    partition: PartitionOfUnity
    layout: tuple

    @property
    def m(self):
        return self.values.shape[0]


def _skeleton(phi, delta, tol):
    values = _zero_sum(phi, tol)
    lo, hi = values.min() - delta, values.max() + delta
    cover = build_prefix_cover(phi.grid, values, lo, hi)
    return _Skeleton(np.asarray(phi.grid), values, cover, PartitionOfUnity(cover), _pair_layout(values.shape[0]))


def _slot_angles(sk, vals, f, j, summand):
    """Angles of the 2x2 blocks of summand ``summand`` on interval ``j``.

    Returns ``[(i, k, angle_samples)]`` with original indices ``i, k``.
    """
    perm = sk.cover.anchors[j]
    psi = _prefix_rows(vals, perm)
    out = []
    for a, b, l in sk.layout[summand]:
        out.append((perm[a], perm[b], f[j] * psi[l]))
    return out


def _embed(stack, i, k, blocks):
    stack[:, i, i] = blocks[:, 0, 0]
    stack[:, i, k] = blocks[:, 0, 1]
    stack[:, k, i] = blocks[:, 1, 0]
    stack[:, k, k] = blocks[:, 1, 1]


def _four_pair_factorization(phi, delta, kernel, tol):
    """Slots (odd, first), (even, first), (odd, second), (even, second)."""
    sk = _skeleton(phi, delta, tol)
    grid, f = sk.partition.sample(sk.grid)
    vals = interpolate_rows(sk.grid, sk.values, grid)
    n, m = grid.size, sk.m
    pairs = []
    for summand in (0, 1):
        for parity in (0, 1):
            x = np.broadcast_to(np.eye(m, dtype=complex), (n, m, m)).copy()
            y = x.copy()
            for j in range(parity, sk.cover.n, 2):
                active = f[j] > 0
                if not active.any():
                    continue
                for i, k, angle in _slot_angles(sk, vals, f, j, summand):
                    bx, by = kernel(angle[active])
                    xa, ya = x[active], y[active]
                    _embed(xa, i, k, bx)
                    _embed(ya, i, k, by)
                    x[active], y[active] = xa, ya
            pairs.append(CommutatorPair(MatrixPath(grid, x), MatrixPath(grid, y)))
    return pairs, sk


def _diag_path(phi, imaginary, grid=None):
    """``diag(e^{i phi(s)})`` (or ``diag(e^{phi(s)})``) sampled on ``grid``."""
    grid = phi.grid if grid is None else grid
    vals = interpolate_rows(phi.grid, phi.values, grid)
    return MatrixPath(grid, _diag_samples(np.exp(1j * vals) if imaginary else np.exp(vals)))


def _finish(pairs, phi, imaginary, strategy):
    grid = pairs[0].x.grid
    return CommutatorFactorization.build(pairs, _diag_path(phi, imaginary, grid), strategy)


def _diag_samples(vals):
    m, n = vals.shape
    out = np.zeros((n, m, m), dtype=complex)
    out[:, np.arange(m), np.arange(m)] = vals.T
    return out


def _sup_dist_unitary(phi):
    return float(np.abs(np.expm1(1j * phi.values)).max(initial=0.0))


def _is_trivial(phi):
    return phi.values.size == 0 or float(np.abs(phi.values).max()) == 0.0


def _identity_pairs(phi, count):
    eye = MatrixPath.identity(phi.dim, phi.grid)
    return [CommutatorPair(eye, eye, 0.0, 0.0) for _ in range(count)]


# -- public factorizations ---------------------------------------------------------


def factor_diag_path_u4(phi, margin=None, tol=SUM_TOL):
    """Four unitary pairs for ``diag(e^{i phi})`` with ``|phi| < pi/2``.

    Each factor satisfies ``||v - 1|| <= sqrt(2) ||u - 1||^{1/2}`` in the
    sup-norm. ``delta`` is the largest value below ``pi/4``, below half the
    distance of ``ran(phi)`` to ``+-pi/2`` and with
    ``|e^{i delta} - 1| < ||u - 1||``; prefix sums are kept within
    ``delta`` of the range of ``phi``.
    """
    target = _diag_path(phi, True)
    if _is_trivial(phi):
        return CommutatorFactorization.build(_identity_pairs(phi, 4), target, "diag_u4")
    top = float(np.abs(phi.values).max())
    room = np.pi / 2 - top
    if room <= 0 or (margin is not None and room < margin):
        raise RangeViolation(f"max |phi| = {top:.6g} is not inside (-pi/2, pi/2) with margin")
    dist = _sup_dist_unitary(phi)
    delta = min(0.99 * np.pi / 4, room / 2, 0.99 * 2 * np.arcsin(min(1.0, dist / 2)))
    pairs, _ = _four_pair_factorization(phi, delta, su2_kernel, tol)
    return _finish(pairs, phi, True, "diag_u4")


def factor_diag_path_gl4(phi, tol=SUM_TOL):
    """Four invertible pairs for ``diag(e^{phi})``.

    ``delta`` satisfies ``e^delta - 1 <= ||z - 1|| / 4``. With prefix sums
    within ``delta`` of ``ran(phi)`` and ``||z - 1|| <= 1/2`` every
    ``lam = e^psi`` has ``|lam - 1| <= 1.375 ||z - 1||``, which keeps the
    factors within ``2 ||z - 1||^{1/2}``.
    """
    target = _diag_path(phi, False)
    if _is_trivial(phi):
        return CommutatorFactorization.build(_identity_pairs(phi, 4), target, "diag_gl4")
    dist = float(np.abs(np.expm1(phi.values)).max())
    delta = np.log1p(dist / 4)

    def kernel(angle):
        x, y, _ = invertible_kernel(np.exp(angle))
        return x, y

    pairs, _ = _four_pair_factorization(phi, delta, kernel, tol)
    return _finish(pairs, phi, False, "diag_gl4")


def _geodesic(wa, wb, tau):
    """Unitary path ``wa exp(tau log(wa^* wb))`` for ``tau`` in [0, 1]."""
    vals, q = eig_normal(adjoint(wa) @ wb)
    ang = np.angle(vals)
    steps = q[None] * np.exp(1j * tau[:, None, None] * ang[None, None, :])
    return wa[None] @ steps @ adjoint(q)[None]


def factor_diag_path_u16(phi, tol=SUM_TOL):
    """Sixteen unitary pairs for ``diag(e^{i phi})`` with no range restriction.

    Same skeleton as the 4-pair case, but every 2x2 block
    ``diag(e^{i psi}, e^{-i psi})`` of a summand is factored by the
    general-angle construction localized near its interval. Each of the
    four slots therefore expands into four pairs. The constant swaps of the
    first and third pair differ between intervals because they are
    permuted differently; between the active regions of two same-parity
    intervals (where the partner factor is 1) they are joined by a unitary
    geodesic.
    """
    target = _diag_path(phi, True)
    if _is_trivial(phi):
        return CommutatorFactorization.build(_identity_pairs(phi, 16), target, "diag_u16")
    dist = _sup_dist_unitary(phi)
    delta = min(0.99 * np.pi / 4, 0.99 * 2 * np.arcsin(min(1.0, dist / 2)))
    if delta <= 0:
        delta = 0.99 * np.pi / 4
    sk = _skeleton(phi, delta, tol)
    cover = sk.cover
    gap = cover.same_parity_gap()
    pad = gap / 3 if np.isfinite(gap) else 0.25
    coarse, f_coarse = sk.partition.sample(sk.grid)
    vals_coarse = interpolate_rows(sk.grid, sk.values, coarse)

    # plans per (interval, summand, block); localized to the interval
    plans = {}
    breaks = [coarse]
    for j in range(cover.n):
        support = cover.intervals[j]
        for summand in (0, 1):
            for b, (i, k, angle) in enumerate(_slot_angles(sk, vals_coarse, f_coarse, j, summand)):
                plan = _general_angle_plan(coarse, angle, support, pad)
                plans[j, summand, b] = plan
                breaks.append(plan.breakpoints())
    active = {j: (max(0.0, a - pad), min(1.0, b + pad)) for j, (a, b) in enumerate(cover.intervals)}
    for parity in (0, 1):
        idx = list(range(parity, cover.n, 2))
        for j, k in zip(idx, idx[1:]):
            lo, hi = active[j][1], active[k][0]
            breaks.append(np.linspace(lo, hi, GEODESIC_NODES + 2))
    grid = merge_grids(*breaks)
    f = sk.partition(grid)
    vals = interpolate_rows(sk.grid, sk.values, grid)
    n, m = grid.size, sk.m
    eye = np.broadcast_to(np.eye(m, dtype=complex), (n, m, m))

    pairs = []
    for summand in (0, 1):
        for parity in (0, 1):
            idx = list(range(parity, cover.n, 2))
            xs = [eye.copy() for _ in range(4)]
            ys = [eye.copy() for _ in range(4)]
            for j in idx:
                for b, (i, k, angle) in enumerate(_slot_angles(sk, vals, f, j, summand)):
                    v1, v2, w2, v3, v4, w4 = plans[j, summand, b].evaluate(grid, angle)
                    for slot, (bx, by) in enumerate([(v1, None), (v2, w2), (v3, None), (v4, w4)]):
                        live = np.any(np.abs(bx - np.eye(2)) > 0, axis=(1, 2))
                        if by is not None:
                            live |= np.any(np.abs(by - np.eye(2)) > 0, axis=(1, 2))
                        if not live.any():
                            continue
                        xa = xs[slot][live]
                        _embed(xa, i, k, bx[live])
                        xs[slot][live] = xa
                        if by is not None:
                            ya = ys[slot][live]
                            _embed(ya, i, k, by[live])
                            ys[slot][live] = ya
            swap_y = _swap_schedule(sk, grid, idx, summand, active)
            ys[0] = swap_y
            ys[2] = swap_y.copy()
            for slot in range(4):
                pairs.append(CommutatorPair(MatrixPath(grid, xs[slot]), MatrixPath(grid, ys[slot])))
    return _finish(pairs, phi, True, "diag_u16")


def _swap_matrix(sk, j, summand):
    m = sk.m
    w = np.eye(m, dtype=complex)
    perm = sk.cover.anchors[j]
    for a, b, _ in sk.layout[summand]:
        i, k = perm[a], perm[b]
        w[i, i] = w[k, k] = 0
        w[i, k] = w[k, i] = 1
    return w


def _swap_schedule(sk, grid, idx, summand, active):
    """Piecewise-constant swaps on active regions, geodesics in between."""
    n, m = grid.size, sk.m
    if not idx:
        return np.broadcast_to(np.eye(m, dtype=complex), (n, m, m)).copy()
    mats = {j: _swap_matrix(sk, j, summand) for j in idx}
    out = np.empty((n, m, m), dtype=complex)
    out[:] = mats[idx[0]]
    for j, k in zip(idx, idx[1:]):
        lo, hi = active[j][1], active[k][0]
        between = (grid > lo) & (grid < hi)
        tau = (grid[between] - lo) / (hi - lo)
        out[between] = _geodesic(mats[j], mats[k], tau)
        out[grid >= hi] = mats[k]
    return out


__all__ = [
    "IntervalCover",
    "PartitionOfUnity",
    "build_cover",
    "build_prefix_cover",
    "factor_diag_path_gl4",
    "factor_diag_path_u16",
    "factor_diag_path_u4",
    "general_diag_commutators",
    "prefix_sum_permutation",
]
