import numpy as np
import pytest

from divlat.latcore import build_spec
from divlat.ldpc import SparseBinaryMatrix, gen_regular
from divlat.numfield import build_cubic_example, build_quadratic, prime_above_2

# Parity-check matrix of the small worked example (3 x 4, k = 1).
H_TOY = [[1, 0, 1, 0],
         [0, 1, 1, 1],
         [1, 0, 0, 1]]

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def q10():
    return build_quadratic(10)


@pytest.fixture(scope="session")
def q17():
    return build_quadratic(17)


@pytest.fixture(scope="session")
def cubic():
    return build_cubic_example()


@pytest.fixture(scope="session")
def h_toy():
    return SparseBinaryMatrix.from_dense(H_TOY)


@pytest.fixture(scope="session")
def spec_q10_toy(q10, h_toy):
    return build_spec(q10, prime_above_2(q10), h_toy)


@pytest.fixture(scope="session")
def spec_cubic_toy(cubic, h_toy):
    return build_spec(cubic, prime_above_2(cubic), h_toy)


@pytest.fixture(scope="session")
def mackay100():
    return gen_regular(100, 3, 6, seed=1)


@pytest.fixture(scope="session")
def spec_q10_100(q10, mackay100):
    return build_spec(q10, None, mackay100)


@pytest.fixture(scope="session")
def spec_cubic_100(cubic, mackay100):
    return build_spec(cubic, None, mackay100)


# FER sweeps shared by the acceptance criteria and the analysis examples:
# 100 error events per point, at most 10^6 frames, stop past FER 1e-3.
FER_GRID_DB = [5.0 + 2.5 * i for i in range(15)]
FER_SEED = 2024


def _curve(spec, **cfg):
    from divlat.analysis import SimConfig, fer_sim
    return fer_sim(spec, FER_GRID_DB, FER_SEED, SimConfig(**cfg), workers=1, stop_below=1e-3)


@pytest.fixture(scope="session")
def curves(spec_q10_100, spec_cubic_100):
    """Main decoder and the block-1 selection reference for n = 2 and n = 3."""
    return {
        (2, "max"): _curve(spec_q10_100),
        (2, "first"): _curve(spec_q10_100, selection="first"),
        (3, "max"): _curve(spec_cubic_100),
        (3, "first"): _curve(spec_cubic_100, selection="first"),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
