"""The de la Harpe-Skandalis determinant in M_n and on matrix paths.

For a piecewise smooth invertible path ``xi`` the raw determinant is

    (1 / 2 pi i) * integral_0^1 tau(xi'(t) xi(t)^-1) dt,

and on M_n it is well defined modulo ``tau(K_0) = (1/n) Z`` (normalized
trace) or ``Z`` (unnormalized trace). Since ``tau(xi' xi^-1)`` is the
logarithmic derivative of ``det(xi)^(1/n)``, the value of an invertible
``x`` reduces to a closed form in ``Log det x``, and it vanishes exactly
when ``det x = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import EndpointMismatch, NonConvergentQuadrature, Singular, SingularSample
from .matcore import as_matrix, op_norm

DET_TOL = 1e-8
QUAD_TOL = 1e-9

# 3-point Gauss-Legendre on [0, 1]
_GAUSS_NODES = np.array([0.5 - np.sqrt(0.15), 0.5, 0.5 + np.sqrt(0.15)])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


@dataclass(frozen=True)
class TraceFunctional:
    """``Tr / n`` (normalized) or ``Tr`` on M_n."""

    dim: int
    normalized: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def scale(self):
        return 1.0 / self.dim if self.normalized else 1.0

    @property
    def lattice_step(self):
        """Generator of the image of K_0 under the trace."""
        return self.scale

    def __call__(self, x):
        return self.scale * np.trace(np.asarray(x), axis1=-2, axis2=-1)


def reduce_mod(value, step):
    """Representative of ``value`` in ``[-step/2, step/2)``."""
    return (value + step / 2) % step - step / 2


@dataclass(frozen=True)
class DhsValue:
    """A determinant value with its lattice reduction."""

    raw: complex
    lattice_step: float
    residue: complex
    dist_to_zero: float
    tol: float = DET_TOL

    @classmethod
    def from_raw(cls, raw, lattice_step, tol=DET_TOL):
        raw = complex(raw)
        residue = complex(reduce_mod(raw.real, lattice_step), raw.imag)
        return cls(raw, float(lattice_step), residue, abs(residue), float(tol))

    @property
    def is_zero(self):
        return self.dist_to_zero <= self.tol

    @property
    def lattice_multiple(self):
        """The lattice point subtracted from ``raw.real``."""
        return self.raw.real - self.residue.real


def matrix_determinant_value(x, tau=None, tol=DET_TOL):
    """Closed-form determinant of an invertible matrix.

    ``raw = scale * (arg det x - i ln|det x|) / (2 pi)``, which is the path
    integral along any path from 1 to ``x`` up to a lattice element.
    """
    x = as_matrix(x)
    tau = TraceFunctional(x.shape[0]) if tau is None else tau
    sign, logabs = np.linalg.slogdet(x)
    if sign == 0 or not np.isfinite(logabs):
        raise Singular("determinant of a singular matrix")
    raw = tau.scale * (np.angle(sign) - 1j * logabs) / (2 * np.pi)
    return DhsValue.from_raw(raw, tau.lattice_step, tol)


def _segment_integrand(a, d, u):
    """``Tr(d (a + u d)^-1)`` for segment data ``a, d`` of shape (k, m, m)."""
    mat = a + u[:, None, None] * d
    try:
        sol = np.linalg.solve(mat, d)
    except np.linalg.LinAlgError as exc:
        raise SingularSample("path interpolant is singular inside a segment") from exc
    out = np.trace(sol, axis1=-2, axis2=-1)
    if not np.all(np.isfinite(out)):
        raise SingularSample("path interpolant is singular inside a segment")
    return out


def _gauss(a, d, lo, hi):
    h = hi - lo
    total = np.zeros(lo.shape, dtype=complex)
    for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
        total += weight * _segment_integrand(a, d, lo + node * h)
    return total * h


def _check_samples(xi):
    s = np.linalg.svd(xi.samples, compute_uv=False)
    bad = np.flatnonzero(s.min(axis=1) <= 1e-14 * np.maximum(1.0, s.max(axis=1)))
    if bad.size:
        raise SingularSample(f"path sample {bad[0]} is singular")


def path_determinant(xi, tau=None, tol=QUAD_TOL, max_depth=40, method="quadrature"):
    """Raw determinant ``(1/2 pi i) int tau(xi' xi^-1) dt`` of a sampled path.

    The integrand is that of the piecewise-linear interpolant, so on the
    segment from ``A`` to ``B`` it equals ``tr(D (A + uD)^-1)`` with
    ``D = B - A``. ``method="quadrature"`` integrates this by 3-point Gauss
    with adaptive bisection until the two-half estimate agrees with the
    whole within ``tol``. ``method="spectral"`` uses the exact value
    ``sum Log(1 + mu)`` over the eigenvalues ``mu`` of ``A^-1 D``.

    For unitary-valued paths the result is real (the imaginary part
    telescopes to ``ln|det|`` at the endpoints); this is checked.
    """
    tau = TraceFunctional(xi.dim) if tau is None else tau
    _check_samples(xi)
    a = xi.samples[:-1]
    d = xi.samples[1:] - a
    if method == "spectral":
        total = _spectral_sum(a, d)
    elif method == "quadrature":
        total = _adaptive(a, d, tol / max(1, a.shape[0]), max_depth)
    else:
        raise ValueError(f"unknown method {method!r}")
    value = tau.scale * total / (2j * np.pi)
    if xi.is_unitary_valued() and abs(value.imag) > 1e-8:
        raise NonConvergentQuadrature(
            f"unitary path gave imaginary part {value.imag:.3g}", iterations=max_depth
        )
    return complex(value)


def _spectral_sum(a, d):
    try:
        mu = np.linalg.eigvals(np.linalg.solve(a, d))
    except np.linalg.LinAlgError as exc:
        raise SingularSample("singular path sample") from exc
    w = 1.0 + mu
    # the chord from 1 to 1 + mu meets the negative axis only through 0
    if np.any(np.abs(w) <= 1e-14) or np.any((np.abs(w.imag) <= 1e-14) & (w.real < 0)):
        raise SingularSample("path interpolant passes through a singular matrix")
    return complex(np.log(w).sum())


def _adaptive(a, d, tol, max_depth):
    k = a.shape[0]
    seg = np.arange(k)
    lo = np.zeros(k)
    hi = np.ones(k)
    whole = _gauss(a, d, lo, hi)
    total = 0j
    for depth in range(max_depth):
        mid = (lo + hi) / 2
        left = _gauss(a[seg], d[seg], lo, mid)
        right = _gauss(a[seg], d[seg], mid, hi)
        refined = left + right
        done = np.abs(refined - whole) <= tol * np.maximum(hi - lo, 1e-3)
        total += refined[done].sum()
        if np.all(done):
            return total
        keep = ~done
        seg = np.concatenate([seg[keep], seg[keep]])
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    raise NonConvergentQuadrature("adaptive quadrature did not converge", iterations=max_depth)


def logdet_path_determinant(xi, tau=None):
    """Raw determinant from a branch-tracked ``log det`` along the samples.

    The grid is refined (by interpolation) until every segment turns
    ``det`` by less than pi/2; the result is independent of quadrature.
    """
    tau = TraceFunctional(xi.dim) if tau is None else tau
    _check_samples(xi)
    path = xi
    for _ in range(12):
        sign, logabs = np.linalg.slogdet(path.samples)
        steps = np.angle(sign[1:] / sign[:-1])
        if np.all(np.abs(steps) < np.pi / 2):
            winding = steps.sum()
            total = (logabs[-1] - logabs[0]) + 1j * winding
            return complex(tau.scale * total / (2j * np.pi))
        path = path.refine()
    raise NonConvergentQuadrature("determinant turns too fast to track", iterations=12)


class HomotopyDefect(NamedTuple):
    """Difference of two path determinants split into lattice and remainder."""

    residue: float
    lattice_multiple: float


def homotopy_defect(xi1, xi2, tau=None, tol=1e-8):
    """Compare the determinants of two paths with common endpoints.

    Returns the distance of ``Delta(xi1) - Delta(xi2)`` to the lattice and
    the nearest lattice point. Homotopic paths give ``(0, 0)``; loops that
    differ by a K_0 class give a zero residue and a nonzero multiple.
    """
    if xi1.dim != xi2.dim:
        raise EndpointMismatch("paths have different dimensions")
    for end in (0, 1):
        if op_norm(xi1.endpoint(end) - xi2.endpoint(end)) > tol * (1 + op_norm(xi1.endpoint(end))):
            raise EndpointMismatch(f"paths differ at s = {end}")
    tau = TraceFunctional(xi1.dim) if tau is None else tau
    diff = path_determinant(xi1, tau) - path_determinant(xi2, tau)
    value = DhsValue.from_raw(diff, tau.lattice_step)
    return HomotopyDefect(value.dist_to_zero, value.lattice_multiple)


def continuity_radius(eps, y, tau=None):
    """Radius ``delta`` with ``||x - y|| < delta => d(Delta(x), Delta(y)) < eps``.

    Writing ``x = y (1 + E)`` with ``||E|| <= ||y^-1|| ||x - y|| < eta``,
    every eigenvalue of ``1 + E`` has ``|Log| <= -ln(1 - eta)``, so the
    determinant moves by at most ``n * scale * (-ln(1 - eta)) / (2 pi)``.
    Choosing ``eta = 1 - exp(-2 pi eps / (n scale))`` gives the bound.
    """
    y = as_matrix(y)
    n = y.shape[0]
    tau = TraceFunctional(n) if tau is None else tau
    try:
        inv_norm = op_norm(np.linalg.inv(y))
    except np.linalg.LinAlgError as exc:
        raise Singular("continuity radius of a singular matrix") from exc
    eta = -np.expm1(-2 * np.pi * eps / (n * tau.scale))
    return float(eta / inv_norm)


def path_value(xi, tau=None, tol=DET_TOL):
    """:class:`DhsValue` of a path's raw determinant."""
    tau = TraceFunctional(xi.dim) if tau is None else tau
    return DhsValue.from_raw(path_determinant(xi, tau), tau.lattice_step, tol)


__all__ = [
    "DhsValue",
    "HomotopyDefect",
    "TraceFunctional",
    "continuity_radius",
    "homotopy_defect",
    "logdet_path_determinant",
    "matrix_determinant_value",
    "path_determinant",
    "path_value",
    "reduce_mod",
]
