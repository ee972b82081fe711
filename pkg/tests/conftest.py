import csv

import numpy as np
import pytest
from sklearn.datasets import load_iris, load_wine

from appcluster.data import Dataset


@pytest.fixture(scope="session")
def iris() -> Dataset:
    d = load_iris()
    return Dataset(d.data.astype(float), d.target.astype(int), "iris",
                   list(d.target_names))


@pytest.fixture(scope="session")
def wine() -> Dataset:
    d = load_wine()
    return Dataset(d.data.astype(float), d.target.astype(int), "wine",
                   list(d.target_names))


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory, iris):
    path = tmp_path_factory.mktemp("data") / "iris.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(iris.objects, iris.gold):
            writer.writerow([f"{v}" for v in row] + [iris.categories[label]])
    return path


def make_blobs(centers, per_blob, spread=0.1, seed=0):
    """Tight gaussian blobs around the given centers."""
    rng = np.random.default_rng(seed)
    points, labels = [], []
    for label, center in enumerate(centers):
        pts = np.asarray(center) + spread * rng.standard_normal((per_blob, len(center)))
        points.append(pts)
        labels.extend([label] * per_blob)
    return np.vstack(points), np.array(labels)
