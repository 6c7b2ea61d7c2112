import numpy as np
import pytest

from datasets import DatasetId, builtin
from schemas.schema import FailureDataset, JmParams, SolverConfig

TRUE_PARAMS = JmParams(N=20.0, phi=0.01)


def exact_model(count: int, params: JmParams = TRUE_PARAMS) -> FailureDataset:
    """Failure times equal to the model MTBF, so every estimator can recover params exactly."""
    remaining = params.N - np.arange(count, dtype=float)
    return FailureDataset(name=f"exact-{count}", times=tuple(1.0 / (params.phi * remaining)))


@pytest.fixture
def cfg() -> SolverConfig:
    return SolverConfig()


@pytest.fixture
def jdm2() -> FailureDataset:
    return builtin(DatasetId.JDM2)


@pytest.fixture
def ntds() -> FailureDataset:
    return builtin(DatasetId.NTDS)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)
