import numpy as np
import pytest

from qflicker.noise_spectra import RateDistribution

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@pytest.fixture
def pink_dist():
    """The default rate law: log-uniform over eight decades."""
    return RateDistribution(alpha=1.0, gamma_min=1e-4, gamma_max=1e4)


@pytest.fixture
def brown_dist():
    return RateDistribution(alpha=2.0, gamma_min=1e-4, gamma_max=1e4)


def random_bell_diagonal(rng):
    """Bloch correlation triple (c1, c2, c3) of a valid Bell-diagonal state."""
    while True:
        c = rng.uniform(-1.0, 1.0, size=3)
        eigs = np.array(
            [
                1 - c[0] - c[1] - c[2],
                1 - c[0] + c[1] + c[2],
                1 + c[0] - c[1] + c[2],
                1 + c[0] + c[1] - c[2],
            ]
        ) / 4.0
        if np.all(eigs >= 0.0):
            return c


def bell_diagonal_matrix(c1, c2, c3):
    m = np.eye(4, dtype=complex)
    for coef, pauli in zip((c1, c2, c3), ("x", "y", "z")):
        m = m + coef * np.kron(PAULI[pauli], PAULI[pauli])
    return m / 4.0


def random_local_unitary(rng):
    """Haar-ish U_A (x) U_B from QR decompositions of Ginibre matrices."""
    def one(r):
        z = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
        q, rr = np.linalg.qr(z)
        return q * (np.diag(rr) / np.abs(np.diag(rr)))

    return np.kron(one(rng), one(rng))
