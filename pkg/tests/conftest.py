import numpy as np
import pytest

from firenose import dataset as ds


@pytest.fixture(scope="session")
def paper_shape():
    """Default-shaped synthetic data: 1000 x 8, eight materials plus ambient."""
    recordings, data = ds.generate_synthetic(ds.SynthConfig(seed=7))
    return recordings, data


@pytest.fixture(scope="session")
def paper_dataset(paper_shape):
    return paper_shape[1]


@pytest.fixture(scope="session")
def small_dataset():
    """Fast fixture: 3 materials plus ambient over 5 sensors, 90 samples."""
    _, data = ds.generate_synthetic(
        ds.SynthConfig(
            n_classes=4,
            n_sensors=5,
            samples_per_material_class=20,
            ambient_samples=30,
            timesteps=40,
            seed=11,
        )
    )
    return data


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
