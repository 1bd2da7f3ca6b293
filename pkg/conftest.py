from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
sys.path.append(str(ROOT / "src"))

from gibbs_discovery.data_sim.io import read_frequency_counts  # noqa: E402
from gibbs_discovery.gibbs_weights import PriorSpec  # noqa: E402

DATA = ROOT / "data"

# published empirical Bayes fits for the aerobic library
AEROBIC_PD = (0.669, 46.241)
AEROBIC_GG = (0.684, 334.334)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def aerobic():
    return read_frequency_counts(DATA / "aerobic.csv")


@pytest.fixture(scope="session")
def anaerobic():
    return read_frequency_counts(DATA / "anaerobic.csv")


@pytest.fixture(scope="session")
def aerobic_pd() -> PriorSpec:
    return PriorSpec.pd(*AEROBIC_PD)


@pytest.fixture(scope="session")
def aerobic_gg() -> PriorSpec:
    return PriorSpec.gg(*AEROBIC_GG)
