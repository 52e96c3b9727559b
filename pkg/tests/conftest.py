import numpy as np
import pytest

from csmimo.scene import RadarParams, sample_node_placement
from csmimo.waveform import generate_qpsk

# acceptance criterion number -> (name, passed, detail)
ACCEPTANCE_RESULTS = {}


def record_acceptance(number, name, passed, detail=""):
    ACCEPTANCE_RESULTS[number] = (name, bool(passed), detail)
    print(f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {name} | {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        name, passed, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"{number:2d} {'PASS' if passed else 'FAIL'}  {name}  ({detail})")


@pytest.fixture
def params():
    return RadarParams()


@pytest.fixture
def setup_30(params):
    """Default experiment geometry: M_t = 30, one receiver, raw QPSK waveforms."""
    placement = sample_node_placement(params, 30, 1, 7)
    x = generate_qpsk(params.snapshots_per_pulse, 30, rng_seed=8)
    return placement, x


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
