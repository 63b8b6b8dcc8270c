"""Factorization results shared by the diagonal and matrix pipelines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import op_norm
from .pathfun import MatrixPath, merge_grids


@dataclass(frozen=True)
class Certificate:
    recon_err: float
    count: int
    max_factor_dist_to_1: float
    strategy: str = ""

    def as_dict(self):
        return {
            "recon_err": self.recon_err,
            "max_factor_dist_to_1": self.max_factor_dist_to_1,
            "count": self.count,
        }


def _as_path(v, grid):
    if isinstance(v, MatrixPath):
        return v.resample(grid)
    return MatrixPath.constant(v, grid)


def multiply_commutators(pairs, dim, residual=None):
    """Ordered product of the commutators (times ``residual`` on the right)."""
    is_path = any(p.is_path for p in pairs) or isinstance(residual, MatrixPath)
    if not is_path:
        out = np.eye(dim, dtype=complex)
        for p in pairs:
            out = out @ p.value()
        if residual is not None:
            out = out @ residual
        return out
    grids = [g for p in pairs for g in (p.x.grid, p.y.grid) if p.is_path]
    if isinstance(residual, MatrixPath):
        grids.append(residual.grid)
    grid = merge_grids(*grids) if grids else np.array([0.0, 1.0])
    out = np.broadcast_to(np.eye(dim, dtype=complex), (grid.size, dim, dim)).copy()
    for p in pairs:
        out = out @ _as_path(p.value(), grid).samples
    if residual is not None:
        out = out @ _as_path(residual, grid).samples
    return MatrixPath(grid, out)


def reconstruction_error(product, target):
    """Operator-norm (sup over the union grid for paths) distance."""
    if isinstance(product, MatrixPath) or isinstance(target, MatrixPath):
        grids = [v.grid for v in (product, target) if isinstance(v, MatrixPath)]
        grid = merge_grids(*grids)
        a, b = _as_path(product, grid), _as_path(target, grid)
        return float(op_norm(a.samples - b.samples).max())
    return float(op_norm(np.asarray(product) - np.asarray(target)))


@dataclass(frozen=True)
class CommutatorFactorization:
    """Ordered commutator pairs whose product (times ``residual``) is ``target``."""

    pairs: tuple
    certificate: Certificate
    residual: object = None
    target: object = field(default=None, repr=False, compare=False)
    dim: int = 0

    @classmethod
    def build(cls, pairs, target, strategy="", residual=None):
        pairs = tuple(pairs)
        dim = target.dim if isinstance(target, MatrixPath) else np.asarray(target).shape[-1]
        product = multiply_commutators(pairs, dim, residual)
        cert = Certificate(
            recon_err=reconstruction_error(product, target),
            count=len(pairs),
            max_factor_dist_to_1=max((p.max_dist_to_1 for p in pairs), default=0.0),
            strategy=strategy,
        )
        return cls(pairs, cert, residual, target, dim)

    @property
    def count(self):
        return len(self.pairs)

    @property
    def strategy(self):
        return self.certificate.strategy

    def product(self):
        return multiply_commutators(self.pairs, self.dim, self.residual)

    def conjugate(self, q, target=None):
        """Conjugate every pair (and residual) by the unitary ``q``."""
        pairs = [p.conjugate(q) for p in self.pairs]
        residual = self.residual
        if residual is not None:
            if isinstance(q, MatrixPath) or isinstance(residual, MatrixPath):
                grid = merge_grids(*[v.grid for v in (q, residual) if isinstance(v, MatrixPath)])
                qs = _as_path(q, grid)
                residual = MatrixPath(grid, qs.samples @ _as_path(residual, grid).samples @ qs.adjoint().samples)
            else:
                residual = q @ residual @ np.conj(q.T)
        return CommutatorFactorization.build(pairs, target, self.strategy, residual)
