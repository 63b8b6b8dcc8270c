"""Matrix-valued functions on [0, 1], sampled on a grid.

A :class:`MatrixPath` stores one matrix per grid point and is interpolated
linearly in the entries between samples. This is the working model of
``M_m(C[0,1])``: norms are sup-norms over the grid, so they bound the true
sup-norm of the sampled function from below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DimMismatch, NotStructured, TrackingAmbiguous
from .matcore import STRUCT_TOL, adjoint, eig_normal, op_norm, principal_angle

DEFAULT_POINTS = 257
AMBIGUITY_RATIO = 1e-3
MAX_POINTS = 4097
GRID_MERGE_TOL = 1e-12


def uniform_grid(n_points=DEFAULT_POINTS):
    if n_points < 2:
        raise ValueError("a grid needs at least two points")
    return np.linspace(0.0, 1.0, n_points)


def merge_grids(*grids, tol=GRID_MERGE_TOL):
    """Sorted union of grids, dropping points closer than ``tol`` to a kept one."""
    pts = np.unique(np.concatenate([np.asarray(g, dtype=float).ravel() for g in grids]))
    pts = pts[(pts >= 0.0) & (pts <= 1.0)]
    keep = [0.0]
    for p in pts:
        if p - keep[-1] > tol:
            keep.append(float(p))
    if 1.0 - keep[-1] <= tol:
        keep[-1] = 1.0
    else:
        keep.append(1.0)
    return np.array(keep)


def interpolate_rows(grid, values, s):
    """Piecewise-linear interpolation of ``values[..., k]`` sampled on ``grid``."""
    grid = np.asarray(grid)
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    idx = np.clip(np.searchsorted(grid, s, side="right") - 1, 0, len(grid) - 2)
    h = grid[idx + 1] - grid[idx]
    w = (s - grid[idx]) / h
    v0 = np.take(values, idx, axis=-1)
    v1 = np.take(values, idx + 1, axis=-1)
    return v0 + w * (v1 - v0)


@dataclass(frozen=True)
class MatrixPath:
    """Sampled matrix function ``s -> samples[k]`` at ``s = grid[k]``."""

    grid: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        samples = np.array(self.samples, dtype=complex)
        if grid.ndim != 1 or grid.size < 2:
            raise NotStructured("grid must be 1-D with at least two points")
        if abs(grid[0]) > 1e-12 or abs(grid[-1] - 1.0) > 1e-12:
            raise NotStructured("grid must start at 0 and end at 1")
        grid[0], grid[-1] = 0.0, 1.0
        if np.any(np.diff(grid) <= 0):
            raise NotStructured("grid must be strictly increasing")
        if samples.ndim != 3 or samples.shape[0] != grid.size or samples.shape[1] != samples.shape[2]:
            raise NotStructured(f"samples of shape {samples.shape} do not fit a grid of {grid.size}")
        if not np.all(np.isfinite(samples)):
            raise NotStructured("samples contain non-finite entries")
        grid.setflags(write=False)
        samples.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "samples", samples)

    # construction

    @classmethod
    def from_function(cls, f, grid=DEFAULT_POINTS):
        """Sample ``f(s)`` on ``grid`` (a point count or explicit points)."""
        if np.isscalar(grid):
            grid = uniform_grid(int(grid))
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.stack([np.asarray(f(s), dtype=complex) for s in grid]))

    @classmethod
    def constant(cls, matrix, grid=2):
        if np.isscalar(grid):
            grid = uniform_grid(int(grid))
        grid = np.asarray(grid, dtype=float)
        m = np.asarray(matrix, dtype=complex)
        return cls(grid, np.broadcast_to(m, (grid.size,) + m.shape))

    @classmethod
    def identity(cls, dim, grid=2):
        return cls.constant(np.eye(dim), grid)

    # basic properties

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def n_points(self):
        return self.grid.size

    def __call__(self, s):
        """Interpolated value(s) at ``s``; returns ``(m, m)`` or ``(len(s), m, m)``."""
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        flat = self.samples.reshape(self.n_points, -1).T
        out = interpolate_rows(self.grid, flat, s).T.reshape(s.size, self.dim, self.dim)
        return out[0] if scalar else out

    def resample(self, grid):
        grid = np.asarray(grid, dtype=float)
        if grid.shape == self.grid.shape and np.array_equal(grid, self.grid):
            return self
        return MatrixPath(grid, self(grid))

    def refine(self):
        """Insert grid midpoints; the interpolant is unchanged."""
        n = self.n_points
        grid = np.empty(2 * n - 1)
        grid[0::2] = self.grid
        grid[1::2] = (self.grid[:-1] + self.grid[1:]) / 2
        samples = np.empty((2 * n - 1,) + self.samples.shape[1:], dtype=complex)
        samples[0::2] = self.samples
        samples[1::2] = (self.samples[:-1] + self.samples[1:]) / 2
        return MatrixPath(grid, samples)

    def map(self, f):
        """Apply a sample-wise function ``(N, m, m) -> (N, k, k)``."""
        return MatrixPath(self.grid, f(self.samples))

    def adjoint(self):
        return self.map(adjoint)

    def inv(self):
        return self.map(np.linalg.inv)

    def __matmul__(self, other):
        return path_multiply(self, other)

    def endpoint(self, which):
        return self.samples[0 if which == 0 else -1]

    def is_unitary_valued(self, tol=STRUCT_TOL):
        eye = np.eye(self.dim)
        return bool(np.all(op_norm(adjoint(self.samples) @ self.samples - eye) <= tol))

    def is_hermitian_valued(self, tol=STRUCT_TOL):
        scale = np.maximum(1.0, op_norm(self.samples))
        return bool(np.all(op_norm(self.samples - adjoint(self.samples)) <= tol * scale))

    def is_invertible_valued(self, tol=STRUCT_TOL):
        s = np.linalg.svd(self.samples, compute_uv=False)
        return bool(s.min() > tol)

    def sup_norm(self):
        return float(op_norm(self.samples).max())

    def dist_to_identity(self):
        return float(op_norm(self.samples - np.eye(self.dim)).max())


def _common(a, b):
    if a.dim != b.dim:
        raise DimMismatch(f"path dimensions differ: {a.dim} vs {b.dim}")
    grid = merge_grids(a.grid, b.grid)
    return a.resample(grid), b.resample(grid)


def path_multiply(a, b):
    """Pointwise product on the union grid."""
    a, b = _common(a, b)
    return MatrixPath(a.grid, a.samples @ b.samples)


def sup_distance(a, b, refine=False, tol=1e-7, max_points=MAX_POINTS):
    """Max over the union grid of the operator-norm distance.

    The value bounds the sup-norm distance of the interpolants from below.
    With ``refine=True`` the grid is doubled until two successive values
    agree within ``tol`` or ``max_points`` is reached.
    """
    a, b = _common(a, b)
    value = float(op_norm(a.samples - b.samples).max())
    while refine and a.n_points * 2 - 1 <= max_points:
        a, b = a.refine(), b.refine()
        new = float(op_norm(a.samples - b.samples).max())
        done = new - value <= tol
        value = new
        if done:
            break
    return value


def concatenate(a, b, tol=1e-9):
    """Run ``a`` on [0, 1/2] then ``b`` on [1/2, 1]; needs ``a(1) = b(0)``."""
    if a.dim != b.dim:
        raise DimMismatch("path dimensions differ")
    if op_norm(a.endpoint(1) - b.endpoint(0)) > tol:
        raise NotStructured("paths do not join: a(1) != b(0)")
    grid = np.concatenate([a.grid / 2, 0.5 + b.grid[1:] / 2])
    return MatrixPath(grid, np.concatenate([a.samples, b.samples[1:]]))


def reparametrize(a, phi, grid=None):
    """Path ``s -> a(phi(s))`` for a monotone ``phi`` of [0,1] onto itself."""
    grid = a.grid if grid is None else np.asarray(grid, dtype=float)
    return MatrixPath(grid, a(np.asarray([phi(s) for s in grid])))


# -- eigenvalue functions ----------------------------------------------------


@dataclass(frozen=True)
class EigenFunctions:
    """Real functions ``values[k]`` on ``grid``, pointwise ascending in ``k``."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if values.shape[1] != grid.size:
            raise NotStructured("values must have one column per grid point")
        if np.any(np.diff(values, axis=0) < -1e-12):
            raise NotStructured("eigenvalue functions must be pointwise ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_unsorted(cls, grid, values):
        return cls(grid, np.sort(np.atleast_2d(values), axis=0))

    @classmethod
    def from_functions(cls, fns, grid=DEFAULT_POINTS):
        if np.isscalar(grid):
            grid = uniform_grid(int(grid))
        grid = np.asarray(grid, dtype=float)
        return cls.from_unsorted(grid, np.array([[f(s) for s in grid] for f in fns]))

    @property
    def dim(self):
        return self.values.shape[0]

    def modulus(self):
        """Largest jump between adjacent samples."""
        if self.grid.size < 2:
            return 0.0
        return float(np.abs(np.diff(self.values, axis=1)).max())

    def __call__(self, s):
        return interpolate_rows(self.grid, self.values, s)

    def resample(self, grid):
        return EigenFunctions(grid, self(np.asarray(grid, dtype=float)))


def _align_frames(prev, new, vals, cluster_tol):
    """Rotate ``new`` columns within eigenvalue clusters towards ``prev``."""
    out = new.copy()
    m = vals.size
    used = np.zeros(m, dtype=bool)
    for k in range(m):
        if used[k]:
            continue
        members = np.flatnonzero(~used & (np.abs(vals - vals[k]) <= cluster_tol))
        used[members] = True
        overlap = adjoint(new[:, members]) @ prev[:, members]
        w, _, vh = np.linalg.svd(overlap)
        out[:, members] = new[:, members] @ (w @ vh)
    return out


def track_eigenfunctions(u, kind="unitary", tol=STRUCT_TOL, cluster_tol=1e-6):
    """Continuous eigenvalue functions and eigenframes of a normal path.

    For ``kind="unitary"`` the functions are continuously lifted arguments
    ``phi_k`` with ``u(s) = q(s) diag(exp(i phi(s))) q(s)^*``; for
    ``kind="selfadjoint"`` they are the eigenvalues themselves. Adjacent
    samples are matched by a minimum-cost assignment on squared
    eigenvalue distance (which never prefers crossing paths), with frame overlap as a tie-break, and the result is sorted
    pointwise at the end (the frame columns follow the sort).

    Returns ``(EigenFunctions, frame)`` where ``frame`` is a unitary path.
    """
    if kind not in ("unitary", "selfadjoint"):
        raise ValueError(f"unknown kind {kind!r}")
    if kind == "unitary" and not u.is_unitary_valued(tol):
        raise NotStructured("path is not unitary-valued")
    if kind == "selfadjoint" and not u.is_hermitian_valued(tol):
        raise NotStructured("path is not Hermitian-valued")
    n, m = u.n_points, u.dim
    vals = np.empty((n, m), dtype=complex)
    frames = np.empty((n, m, m), dtype=complex)
    vals[0], frames[0] = eig_normal(u.samples[0], tol)
    for i in range(1, n):
        lam, q = eig_normal(u.samples[i], tol)
        dist = np.abs(vals[i - 1][:, None] - lam[None, :]) ** 2
        overlap = np.abs(adjoint(frames[i - 1]) @ q)
        cost = dist + 1e-3 * tol * (1.0 - overlap)
        rows, cols = linear_sum_assignment(cost)
        perm = cols[np.argsort(rows)]
        _check_unambiguous(dist, perm, vals[i - 1], lam, tol, i)
        lam, q = lam[perm], q[:, perm]
        vals[i] = lam
        frames[i] = _align_frames(frames[i - 1], q, lam, cluster_tol)
    if kind == "unitary":
        phi = np.empty((n, m))
        phi[0] = principal_angle(vals[0])
        steps = np.angle(vals[1:] / vals[:-1])
        phi[1:] = phi[0] + np.cumsum(steps, axis=0)
    else:
        phi = vals.real.copy()
    order = np.argsort(phi, axis=1, kind="stable")
    phi_sorted = np.take_along_axis(phi, order, axis=1)
    frames_sorted = np.take_along_axis(frames, order[:, None, :], axis=2)
    return EigenFunctions(u.grid, phi_sorted.T), MatrixPath(u.grid, frames_sorted)


def _check_unambiguous(dist, perm, prev, lam, tol, index):
    """Flag a pair whose swapped matching costs about as much as the chosen one.

    With squared distances, exchanging the partners of ``a`` and ``b``
    changes the cost by ``2 Re((p_a - p_b) conj(l_b - l_a))``; it is only
    ambiguous when that is small next to ``|p_a - p_b| |l_a - l_b|``, i.e.
    the eigenvalues move across their separation rather than along it.
    Clusters below ``sqrt(tol)`` are exempt: any assignment inside them is
    equally valid.
    """
    m = perm.size
    base = dist[np.arange(m), perm]
    for a in range(m):
        for b in range(a + 1, m):
            gap_prev = abs(prev[a] - prev[b])
            gap_new = abs(lam[perm[a]] - lam[perm[b]])
            if min(gap_prev, gap_new) <= np.sqrt(tol):
                continue
            swapped = dist[a, perm[b]] + dist[b, perm[a]]
            if swapped - (base[a] + base[b]) <= AMBIGUITY_RATIO * gap_prev * gap_new:
                raise TrackingAmbiguous(
                    f"eigenvalue matching is ambiguous at sample {index}; refine the grid",
                    sample_index=index,
                )


def diag_exp_path(phi, imaginary=True):
    """Path ``diag(exp(i phi))`` (or ``diag(exp(phi))``) on ``phi.grid``."""
    vals = np.exp(1j * phi.values) if imaginary else np.exp(phi.values)
    m, n = vals.shape
    samples = np.zeros((n, m, m), dtype=complex)
    samples[:, np.arange(m), np.arange(m)] = vals.T
    return MatrixPath(phi.grid, samples)


def reconstruct(phi, frame, kind="unitary"):
    """``q diag(f(phi)) q^*`` from tracked eigenfunctions and frames."""
    d = diag_exp_path(phi) if kind == "unitary" else _diag_path(phi)
    d = d.resample(frame.grid)
    return MatrixPath(frame.grid, frame.samples @ d.samples @ adjoint(frame.samples))


def _diag_path(phi):
    m, n = phi.values.shape
    samples = np.zeros((n, m, m), dtype=complex)
    samples[:, np.arange(m), np.arange(m)] = phi.values.T
    return MatrixPath(phi.grid, samples)
