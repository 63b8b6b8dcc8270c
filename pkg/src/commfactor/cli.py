"""Command-line front end: ``commfactor det|factor|verify|demo-descent``.

Exit codes: 0 ok, 1 parse or configuration error, 2 numeric failure,
3 determinant obstruction, 4 certificate mismatch.

Every flag also reads an environment variable ``COMMFACTOR_<FLAG>`` (for
example ``COMMFACTOR_STRATEGY``); an explicit flag wins over the
environment, which wins over the built-in default.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .dhsdet import DET_TOL, matrix_determinant_value, path_value
from .exceptions import CommFactorError, DeterminantObstruction
from .factorization import multiply_commutators, reconstruction_error
from .matcore import RECON_TOL, STRUCT_TOL, op_norm, polar
from .pathfun import MatrixPath, uniform_grid
from .pipeline import PATH_STRATEGIES, STRATEGIES, descent_demo, factor_matrix, factor_unitary_path

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC, EXIT_OBSTRUCTION, EXIT_MISMATCH = 0, 1, 2, 3, 4
PATH_RECON_TOL = 1e-5
REPRODUCE_TOL = 1e-9
DET_ONE_TOL = 1e-9
ALL_STRATEGIES = STRATEGIES + ("paper",)


class ConfigError(ValueError):
    """Invalid command-line or environment configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Settings of one command run."""

    struct_tol: float = STRUCT_TOL
    recon_tol: float = RECON_TOL
    tol: float = DET_TOL
    grid: int = None
    k: int = None
    strategy: str = None
    seed: int = 0
    input: str = "-"
    output: str = None

    def __post_init__(self):
        if not (self.struct_tol > 0 and self.recon_tol > 0 and self.tol > 0):
            raise ConfigError("tolerances must be positive")
        if self.grid is not None and self.grid < 2:
            raise ConfigError("--grid must be at least 2")
        if self.k is not None and self.k < 2:
            raise ConfigError("--k must be at least 2")
        if self.strategy is not None and self.strategy not in ALL_STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")

    def check_dim(self, n):
        if self.k is not None and self.k > n:
            raise ConfigError(f"--k {self.k} exceeds the input dimension {n}")


# -- argument handling -----------------------------------------------------------


def _env(name, cast):
    raw = os.environ.get(f"COMMFACTOR_{name.upper()}")
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"COMMFACTOR_{name.upper()}={raw!r} is invalid") from exc


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strategy", choices=ALL_STRATEGIES)
    common.add_argument("--k", type=int)
    common.add_argument("--grid", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")

    parser = argparse.ArgumentParser(prog="commfactor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("det", parents=[common], help="determinant value of a matrix or path")
    p.add_argument("input", help="matrix or path JSON file, '-' for stdin")
    p = sub.add_parser("factor", parents=[common], help="commutator factorization")
    p.add_argument("input", help="matrix or path JSON file, '-' for stdin")
    p = sub.add_parser("verify", parents=[common], help="re-check a factorization certificate")
    p.add_argument("factorization", help="factorization JSON file, '-' for stdin")
    p.add_argument("original", help="matrix or path JSON file that was factored")
    p = sub.add_parser("demo-descent", parents=[common], help="telescoping descent model")
    p.add_argument("--stages", type=int, default=6)
    return parser


def _config(args):
    def pick(name, cast):
        value = getattr(args, name, None)
        return value if value is not None else _env(name, cast)

    values = {
        "strategy": pick("strategy", str),
        "k": pick("k", int),
        "grid": pick("grid", int),
        "seed": pick("seed", int),
        "output": pick("out", str),
        "input": getattr(args, "input", None) or getattr(args, "factorization", "-"),
    }
    tol = pick("tol", float)
    if tol is not None:
        values["tol"] = tol
    if values["seed"] is None:
        values["seed"] = 0
    return RunConfig(**values)


def _read(path):
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise jsonio.FormatError(f"cannot read {path}: {exc}") from exc
    return jsonio.loads(text)


def _write(doc, path):
    text = jsonio.dumps(doc) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _resample_unitary(path, n_points):
    """Resample a unitary path with det 1 to ``n_points`` uniform points.

    Interpolated samples are projected back to the unitaries and then
    rescaled to determinant 1 with the root closest to 1.
    """
    p = path.resample(uniform_grid(n_points))
    out = np.empty_like(p.samples)
    for i, s in enumerate(p.samples):
        u, _ = polar(s)
        det = np.linalg.det(u)
        out[i] = u * np.exp(-1j * np.angle(det) / path.dim)
    return MatrixPath(p.grid, out)


# -- commands --------------------------------------------------------------------


def cmd_det(value, cfg):
    """Determinant value of a matrix or path; exit 0 iff it is trivial."""
    if isinstance(value, MatrixPath):
        if cfg.grid is not None:
            value = value.resample(uniform_grid(cfg.grid))
        dv = path_value(value, tol=cfg.tol)
    else:
        dv = matrix_determinant_value(value, tol=cfg.tol)
    _write(jsonio.dhs_to_json(dv), None)
    return EXIT_OK if dv.is_zero else EXIT_OBSTRUCTION


def cmd_factor(value, cfg):
    """Factor a matrix or unitary path and write the factorization."""
    strategy = cfg.strategy
    if isinstance(value, MatrixPath):
        strategy = {None: "paper", "paper_ldu": "paper"}.get(strategy, strategy)
        if strategy not in PATH_STRATEGIES:
            raise ConfigError(f"strategy {strategy!r} does not apply to paths")
        if cfg.grid is not None:
            value = _resample_unitary(value, cfg.grid)
        fac = factor_unitary_path(value, strategy, tol=cfg.struct_tol)
    else:
        strategy = {None: "paper_ldu", "paper": "paper_ldu"}.get(strategy, strategy)
        n = value.shape[0]
        cfg.check_dim(n)
        k = cfg.k if cfg.k is not None else min(4, n)
        fac = factor_matrix(value, strategy, k=k)
    _write(jsonio.factorization_to_json(fac), cfg.output)
    return EXIT_OK


def recompute_certificate(fac, original):
    """Re-multiply a factorization and compare against its recorded certificate.

    Returns ``(mismatched_fields, recomputed)``.
    """
    is_path = isinstance(original, MatrixPath)
    dim = original.dim if is_path else original.shape[0]
    fields = []
    if fac.dim not in (0, dim):
        return ["dim"], {"dim": fac.dim}
    product = multiply_commutators(fac.pairs, dim, fac.residual)
    recon = reconstruction_error(product, original)
    worst = max((p.max_dist_to_1 for p in fac.pairs), default=0.0)
    recomputed = {"recon_err": recon, "max_factor_dist_to_1": worst, "count": len(fac.pairs)}
    cert = fac.certificate
    if cert.count != len(fac.pairs):
        fields.append("count")
    limit = PATH_RECON_TOL if is_path else 1e-8 * max(1.0, float(op_norm(original)))
    if abs(recon - cert.recon_err) > REPRODUCE_TOL + 1e-6 * cert.recon_err or recon > limit:
        fields.append("recon_err")
    if abs(worst - cert.max_factor_dist_to_1) > REPRODUCE_TOL * max(1.0, worst):
        fields.append("max_factor_dist_to_1")
    dets = [np.linalg.det(p.value().samples if p.is_path else p.value()) for p in fac.pairs]
    det_err = max((float(np.abs(np.asarray(d) - 1).max()) for d in dets), default=0.0)
    recomputed["max_det_err"] = det_err
    if det_err > DET_ONE_TOL:
        fields.append("det")
    return fields, recomputed


def cmd_verify(fac, original, cfg):
    """Exit 0 iff every certificate field is reproduced."""
    fields, recomputed = recompute_certificate(fac, original)
    _write({"ok": not fields, "mismatched": fields, "recomputed": recomputed}, None)
    return EXIT_MISMATCH if fields else EXIT_OK


def cmd_demo_descent(stages, cfg):
    report = descent_demo(stages, seed=cfg.seed)
    doc = report.as_dict()
    doc["strategy"] = "descent"
    _write(doc, None)
    if cfg.output is not None:
        extra = {"strategy": "descent", "schedule": list(report.schedule)}
        _write(jsonio.factorization_to_json(report.factorization, extra), cfg.output)
    return EXIT_OK if report.recon_err <= 1e-6 else EXIT_NUMERIC


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        cfg = _config(args)
        if args.command == "det":
            value = jsonio.value_from_json(_read(args.input))
        elif args.command == "factor":
            value = jsonio.value_from_json(_read(args.input))
        elif args.command == "verify":
            fac = jsonio.factorization_from_json(_read(args.factorization))
            original = jsonio.value_from_json(_read(args.original))
    except (ValueError, CommFactorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.command == "det":
            return cmd_det(value, cfg)
        if args.command == "factor":
            return cmd_factor(value, cfg)
        if args.command == "verify":
            return cmd_verify(fac, original, cfg)
        return cmd_demo_descent(args.stages, cfg)
    except DeterminantObstruction as exc:
        print(f"obstruction: {exc} (residue {exc.residue})", file=sys.stderr)
        return EXIT_OBSTRUCTION
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (CommFactorError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
