from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from sklearn.datasets import load_iris, load_wine

from firefly_bpnn.CONFIG import DATA_DIR, DATASET_FILES
from firefly_bpnn.tools.dataset_loader import load_builtin, min_max_normalize, to_labeled_set
from firefly_bpnn.tools.network import LabeledSet, Topology, WeightSet

IRIS_NAMES = np.array(["Iris-setosa", "Iris-versicolor", "Iris-virginica"])


def write_iris(path: Path):
    bunch = load_iris()
    frame = pd.DataFrame(bunch.data)
    frame["class"] = IRIS_NAMES[bunch.target]
    frame.to_csv(path, header=False, index=False, lineterminator="\n")


def write_wine(path: Path):
    bunch = load_wine()
    frame = pd.DataFrame(bunch.data)
    frame.insert(0, "class", bunch.target + 1)
    frame.to_csv(path, header=False, index=False, lineterminator="\n")


def write_liver_like(path: Path, seed=3):
    """345 rows shaped like bupa.data: 6 numeric fields and a 1/2 selector."""
    rng = np.random.default_rng(seed)
    selector = np.where(np.arange(345) < 145, 1, 2)
    rng.shuffle(selector)
    features = rng.normal(50.0, 15.0, size=(345, 6)).round(1) + 10.0 * selector[:, None]
    frame = pd.DataFrame(features)
    frame["selector"] = selector
    frame.to_csv(path, header=False, index=False, lineterminator="\n")


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("uci")
    write_iris(root / DATASET_FILES["iris"])
    write_wine(root / DATASET_FILES["wine"])
    write_liver_like(root / DATASET_FILES["liver"])
    return root


@pytest.fixture(scope="session")
def real_data_dir():
    """The checked-out data/ directory; tests needing the real Liver file skip without it."""
    if not (DATA_DIR / DATASET_FILES["liver"]).exists():
        pytest.skip(f"{DATASET_FILES['liver']} not present in {DATA_DIR}")
    return DATA_DIR


@pytest.fixture(scope="session")
def iris(data_dir):
    return to_labeled_set(min_max_normalize(load_builtin("iris", data_dir)))


@pytest.fixture(scope="session")
def wine(data_dir):
    return to_labeled_set(min_max_normalize(load_builtin("wine", data_dir)))


@pytest.fixture
def iris_topology():
    return Topology.build((4, 6, 3))


@pytest.fixture
def small_set():
    """Three patterns, one per class, for fast trainer tests."""
    inputs = np.array([[0.1, 0.9, 0.2, 0.1], [0.5, 0.4, 0.6, 0.5], [0.9, 0.2, 0.9, 0.8]])
    return LabeledSet(inputs, np.eye(3))


def linear_weights(weights, biases):
    """A single-layer purelin WeightSet from nested lists."""
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    topology = Topology((weights.shape[1], weights.shape[0]), ("purelin",))
    return WeightSet(topology, (weights,), (np.asarray(biases, dtype=float),))
