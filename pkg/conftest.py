import numpy as np
import pytest

from hermitian_core import HermitianMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def pauli_x():
    return HermitianMatrix([[0, 1], [1, 0]])


@pytest.fixture
def pauli_y():
    return HermitianMatrix([[0, -1j], [1j, 0]])


@pytest.fixture
def pauli_z():
    return HermitianMatrix([[1, 0], [0, -1]])


@pytest.fixture
def matrix_file(tmp_path):
    """Write a matrix document and return its path."""
    import json

    from utils import matrix_to_json

    def write(g: HermitianMatrix, name: str = "g.json"):
        path = tmp_path / name
        path.write_text(json.dumps(matrix_to_json(g)), encoding="utf-8")
        return path

    return write
