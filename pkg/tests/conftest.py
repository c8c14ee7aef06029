import numpy as np
import pytest

from valleyfinder import MixtureComponent, sample_mixture

AOL_COMPONENTS = (
    MixtureComponent(mean=6.7, stddev=2.9, weight=0.70),
    MixtureComponent(mean=16.8, stddev=2.2, weight=0.30),
)


@pytest.fixture
def aol_components():
    return AOL_COMPONENTS


@pytest.fixture(scope="session")
def aol_samples_30k() -> np.ndarray:
    return sample_mixture(AOL_COMPONENTS, 30_000, seed=1234)
