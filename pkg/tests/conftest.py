"""Seeded generators shared by the test modules."""

import numpy as np
import pytest
from hypothesis import settings
from scipy.linalg import expm

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")


def rng_for(seed):
    return np.random.default_rng(seed)


def random_complex(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_hermitian(rng, n, trace_zero=False):
    z = random_complex(rng, n)
    a = (z + z.conj().T) / 2
    if trace_zero:
        a -= np.trace(a).real / n * np.eye(n)
    return a


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_special_unitary(rng, n):
    u = random_unitary(rng, n)
    return u * np.exp(-1j * np.angle(np.linalg.det(u)) / n)


def random_sl(rng, n):
    x = random_complex(rng, n)
    det = np.linalg.det(x)
    return x / (np.abs(det) ** (1 / n) * np.exp(1j * np.angle(det) / n))


def random_positive(rng, n, det_one=True):
    z = random_complex(rng, n)
    h = z @ z.conj().T / n + 0.5 * np.eye(n)
    h = (h + h.conj().T) / 2
    if det_one:
        h = h / np.linalg.det(h).real ** (1 / n)
    return h


def near_unitary(rng, n, dist):
    """``u h`` with ``||h - 1|| = dist`` and det 1."""
    u = random_special_unitary(rng, n)
    a = random_hermitian(rng, n, trace_zero=True)
    a *= np.log1p(dist) / np.abs(np.linalg.eigvalsh(a)).max()
    return u @ expm(a)


def smooth_unitary_path_fn(rng, m, scale=1.0):
    """``s -> exp(i (a s + b s^2))`` with trace-zero ``a, b``."""
    a = random_hermitian(rng, m, trace_zero=True)
    b = random_hermitian(rng, m, trace_zero=True)
    a *= scale / np.linalg.norm(a, 2)
    b *= scale / np.linalg.norm(b, 2)
    return lambda s: expm(1j * (a * s + b * s * s))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def zero_sum_phi(rng, m, amp, n_points=257, terms=3, positive_scale=False):
    """Sorted zero-sum smooth functions on a uniform grid with ``max |phi| = amp``."""
    from commfactor.pathfun import EigenFunctions, uniform_grid

    grid = uniform_grid(n_points)
    k = np.arange(1, terms + 1)
    coef = rng.normal(size=(m, terms)) / k
    phase = rng.uniform(0, 2 * np.pi, size=(m, terms))
    vals = (coef[:, :, None] * np.sin(k[None, :, None] * np.pi * grid + phase[:, :, None])).sum(axis=1)
    vals += rng.normal(size=(m, 1))
    vals -= vals.mean(axis=0)
    vals *= amp / np.abs(vals).max()
    return EigenFunctions.from_unsorted(grid, vals)


# -- acceptance report -------------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_c" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::test_c", 1)[1]
        number, _, label = name.partition("_")
        detail = dict(report.user_properties).get("detail", "")
        _ACCEPTANCE[int(number)] = (label.replace("_", " "), report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        label, outcome, detail = _ACCEPTANCE[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{number:2d} {status}  {label}" + (f": {detail}" if detail else ""))
