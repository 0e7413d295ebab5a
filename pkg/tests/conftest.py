import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scminimal.catalog import basic_family, opposite_sign_family  # noqa: E402
from scminimal.divisor import SymmetricDivisorSpec  # noqa: E402
from scminimal.theta import TorusParams  # noqa: E402
from scminimal.weierstrass import make_patch  # noqa: E402


@pytest.fixture(scope="session")
def torus():
    return TorusParams(1.0)


@pytest.fixture(scope="session")
def schwarz_p(torus):
    _, sd = basic_family(2, 4, 4)
    return SymmetricDivisorSpec(torus, sd.lower_points, sd.lower_exponents).expand()


@pytest.fixture(scope="session")
def iwp(torus):
    fam = opposite_sign_family(4, 4)
    return fam.divisor((1 / 6,), torus).expand()


@pytest.fixture(scope="session")
def p_patch(schwarz_p):
    return make_patch(schwarz_p, 32, 16)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
