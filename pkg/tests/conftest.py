import os

import numpy as np
import pytest

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def prox_oracle():
    return np.load(os.path.join(DATA_DIR, "prox_oracle.npz"))


@pytest.fixture(scope="session")
def fista_oracle():
    return np.load(os.path.join(DATA_DIR, "fista_oracle.npz"))
