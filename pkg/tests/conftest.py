import numpy as np
import pytest

from lprboot.regression import standardize


def orthonormal_design(n, p, rng):
    """Centered columns with X'X/n = I exactly (up to rounding)."""
    z = rng.standard_normal((n, p))
    z -= z.mean(axis=0)
    q, _ = np.linalg.qr(z)
    return q * np.sqrt(n)


def random_instance(rng, n, p, s=3, noise=1.0):
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[rng.choice(p, size=min(s, p), replace=False)] = rng.uniform(1, 3, size=min(s, p))
    y = x @ beta + noise * rng.standard_normal(n)
    return standardize(x, y), beta


def kkt_residual(data, beta_std, lam):
    """Largest violation of the Lasso subgradient conditions."""
    g = data.x.T @ (data.y - data.x @ beta_std) / data.n
    on = beta_std != 0
    viol_on = np.abs(g[on] - lam * np.sign(beta_std[on]))
    viol_off = np.maximum(np.abs(g[~on]) - lam, 0.0)
    return max(np.max(viol_on, initial=0.0), np.max(viol_off, initial=0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# One line per acceptance criterion, printed after the run.
ACCEPTANCE = {}


def report(criterion, ok, detail):
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}")
