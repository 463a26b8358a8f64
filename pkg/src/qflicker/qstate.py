"""Two-qubit state containers and the linear-algebra primitives shared by
every other module: partial transpose, partial trace and von Neumann entropy.

Basis convention, used everywhere in the package: the computational product
basis is ordered {|00>, |01>, |10>, |11>} with qubit A as the left tensor
factor.  All logarithms are base 2, so entropies are in bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "InvalidStateError",
    "TwoQubitDensityMatrix",
    "BellMixture",
    "PHI_PLUS",
    "PSI_PLUS",
    "bell_mixture_to_matrix",
    "partial_transpose",
    "partial_trace",
    "von_neumann_entropy",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10

_SQRT_HALF = 1.0 / np.sqrt(2.0)

#: |phi+> = (|00> + |11>)/sqrt(2)
PHI_PLUS = np.array([_SQRT_HALF, 0.0, 0.0, _SQRT_HALF], dtype=complex)
#: |psi+> = (|01> + |10>)/sqrt(2)
PSI_PLUS = np.array([0.0, _SQRT_HALF, _SQRT_HALF, 0.0], dtype=complex)
PHI_PLUS.setflags(write=False)
PSI_PLUS.setflags(write=False)


class InvalidStateError(ValueError):
    """Raised when a matrix fails the density-matrix invariants."""


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, TwoQubitDensityMatrix):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


@dataclass(frozen=True)
class TwoQubitDensityMatrix:
    """A validated 4x4 density matrix in the computational product basis.

    Construction checks hermiticity and unit trace to 1e-12 and positivity up
    to eigenvalue round-off of -1e-10.  The wrapped array is made read-only,
    so instances are safe to share between concurrent tasks.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidStateError(f"expected a 4x4 matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise InvalidStateError("matrix is not Hermitian to 1e-12")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise InvalidStateError("matrix trace differs from 1 by more than 1e-12")
        if np.min(np.linalg.eigvalsh(m)) < POSITIVITY_TOL:
            raise InvalidStateError("matrix has an eigenvalue below -1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class BellMixture:
    """Mixture (1/2)[(1+x)|phi+><phi+| + (1-x)|psi+><psi+|] of the two
    triplet Bell states, parameterized by the single real coefficient x.

    The Bloch correlation vector of the mixture is (1, -x, x).  Coefficients
    within 1e-12 of the boundary are snapped to +-1; anything further outside
    [-1, 1] is rejected, since it would not correspond to a positive state.
    """

    coeff: float

    def __post_init__(self):
        x = float(self.coeff)
        if not np.isfinite(x) or abs(x) > 1.0 + 1e-12:
            raise ValueError(f"Bell-mixture coefficient {x!r} outside [-1, 1]")
        object.__setattr__(self, "coeff", min(1.0, max(-1.0, x)))


def bell_mixture_to_matrix(state: BellMixture) -> TwoQubitDensityMatrix:
    """Expand a :class:`BellMixture` into its 4x4 density matrix.

    The only nonzero entries are (1+x)/4 on the |00>,|11> block and (1-x)/4
    on the |01>,|10> block.
    """
    x = state.coeff
    p = (1.0 + x) / 4.0
    q = (1.0 - x) / 4.0
    m = np.array(
        [
            [p, 0.0, 0.0, p],
            [0.0, q, q, 0.0],
            [0.0, q, q, 0.0],
            [p, 0.0, 0.0, p],
        ],
        dtype=complex,
    )
    return TwoQubitDensityMatrix(m)


def partial_transpose(rho, subsystem: str = "B") -> np.ndarray:
    """Transpose the indices of one qubit of a two-qubit operator.

    Parameters
    ----------
    rho : TwoQubitDensityMatrix or (4, 4) array
    subsystem : {'A', 'B'}
        Which tensor factor to transpose.

    Returns
    -------
    (4, 4) complex ndarray, Hermitian and trace preserving but in general not
    positive; its negative eigenvalues witness entanglement.
    """
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
    r = m.reshape(2, 2, 2, 2)
    if subsystem == "A":
        out = r.transpose(2, 1, 0, 3)
    elif subsystem == "B":
        out = r.transpose(0, 3, 2, 1)
    else:
        raise ValueError("subsystem must be 'A' or 'B'")
    return out.reshape(4, 4).copy()


def partial_trace(rho, keep: str = "A") -> np.ndarray:
    """Reduced 2x2 state of one qubit."""
    m = _as_matrix(rho).reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ikjk->ij", m)
    if keep == "B":
        return np.einsum("kikj->ij", m)
    raise ValueError("keep must be 'A' or 'B'")


def von_neumann_entropy(rho) -> float:
    """S(rho) = -Tr[rho log2(rho)] in bits, with the 0*log(0) := 0 convention.

    Eigenvalues in [-1e-10, 0) are treated as round-off and clamped to zero;
    anything more negative raises :class:`InvalidStateError`.
    """
    m = _as_matrix(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    ev = np.linalg.eigvalsh(m)
    if ev.min() < POSITIVITY_TOL:
        raise InvalidStateError(f"eigenvalue {ev.min():.3e} below -1e-10")
    ev = np.clip(ev, 0.0, None)
    nz = ev[ev > 0.0]
    # eigenvalues a round-off above 1 would otherwise leak tiny negatives
    return max(0.0, float(-np.sum(nz * np.log2(nz))))
