"""
Pytest configuration and fixtures for blurreg tests.
"""
import sys
from fractions import Fraction
from pathlib import Path
from typing import Tuple

import pytest
from loguru import logger

# Add the project root to the Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from blurreg.config.scenario import EXAMPLE_SIGNS
from blurreg.core.noise_baseline import NoiseSpec, apply_noise, difference_sequence
from blurreg.core.signal_model import (
    BlurModel,
    PiecewiseConstantSignal,
    QuantizedSequence,
    SamplingGrid,
    worked_example_signal,
)

FIXTURES = Path(__file__).parent / "fixtures"

EXAMPLE_SIGMA = 0.125
EXAMPLE_T0 = (-0.98, -0.4)
EXAMPLE_N = 13
GAMMA1 = (0, 144, 256, 256, -256, -256, 16, 256, 256, -256, -256, 0, 0)
GAMMA2 = (0, 256, 256, -205, -256, -256, 256, 256, -218, -256, -22, 0, 0)
EXPECTED_PAIRS = ((1, 1), (4, 3), (6, 6), (9, 8), (11, 10))

# Test configuration
TEST_CONFIG = {
    "BLURREG_LOG_LEVEL": "WARNING",
}


@pytest.fixture(autouse=True)
def setup_environment(monkeypatch, tmp_path):
    """Isolate environment settings and silence logging after each test."""
    for key, value in TEST_CONFIG.items():
        monkeypatch.setenv(key, value)
    monkeypatch.setenv("BLURREG_OUT_DIR", str(tmp_path / "out"))
    yield
    logger.remove()
    logger.disable("blurreg")


@pytest.fixture
def example_signal() -> PiecewiseConstantSignal:
    return worked_example_signal()


@pytest.fixture
def example_blur() -> BlurModel:
    return BlurModel.gaussian(EXAMPLE_SIGMA)


@pytest.fixture
def example_grids() -> Tuple[SamplingGrid, SamplingGrid]:
    return SamplingGrid(EXAMPLE_T0[0], EXAMPLE_N), SamplingGrid(EXAMPLE_T0[1], EXAMPLE_N)


@pytest.fixture
def example_gammas() -> Tuple[QuantizedSequence, QuantizedSequence]:
    return QuantizedSequence.from_numerators(GAMMA1), QuantizedSequence.from_numerators(GAMMA2)


@pytest.fixture
def example_signs():
    return tuple(NoiseSpec.from_pattern(0, p).signs for p in EXAMPLE_SIGNS)


def noisy_differences(gammas, signs, x: Fraction):
    """d1, d2 of the example at noise magnitude x."""
    return tuple(
        difference_sequence(apply_noise(g, NoiseSpec(x, signs=s))) for g, s in zip(gammas, signs)
    )
