"""Operators on the truncated dot-cavity Hilbert space.

The space is a two-level system tensored with a Fock ladder truncated at
``n_max`` photons, dimension ``2 * (n_max + 1)``.  The two-level index is the
slow (leftmost) tensor factor: basis state ``|qd, n>`` sits at flat index
``qd * (n_max + 1) + n`` with ``qd = 0`` the ground state.  Everything is a
dense complex128 ndarray; no sparse formats.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_SLACK = 1e-8


def annihilation(n_max: int) -> np.ndarray:
    """Photon annihilation operator on a Fock ladder truncated at ``n_max``.

    ``<n-1| a |n> = sqrt(n)``; the returned matrix is ``(n_max+1) x (n_max+1)``.
    """
    if n_max < 1:
        raise ValueError(f"fock cutoff must be >= 1, got {n_max}")
    op = np.zeros((n_max + 1, n_max + 1), dtype=np.complex128)
    for n in range(1, n_max + 1):
        op[n - 1, n] = np.sqrt(n)
    return op


def qd_lowering() -> np.ndarray:
    """Two-level lowering operator |g><e| in the (g, e) basis."""
    op = np.zeros((2, 2), dtype=np.complex128)
    op[0, 1] = 1.0
    return op


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def tensor(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor as the slow index."""
    return np.kron(left, right)


def lift_qd(op: np.ndarray, n_max: int) -> np.ndarray:
    """Embed a 2x2 dot operator into the full space (acts as identity on photons)."""
    return tensor(op, identity(n_max + 1))


def lift_cavity(op: np.ndarray, n_max: int) -> np.ndarray:
    """Embed a cavity operator into the full space (identity on the dot)."""
    if op.shape != (n_max + 1, n_max + 1):
        raise ValueError(f"cavity operator shape {op.shape} does not match cutoff {n_max}")
    return tensor(identity(2), op)


def basis_index(qd: int, photon: int, n_max: int) -> int:
    """Flat index of basis state |qd, photon>."""
    if qd not in (0, 1):
        raise ValueError("qd index must be 0 (ground) or 1 (excited)")
    if not 0 <= photon <= n_max:
        raise ValueError(f"photon number {photon} outside [0, {n_max}]")
    return qd * (n_max + 1) + photon


def ground_state_density(n_max: int) -> np.ndarray:
    """|g, 0><g, 0| on the full space."""
    dim = 2 * (n_max + 1)
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    return rho


def validate_density_matrix(rho: np.ndarray, context: str = "density matrix") -> None:
    """Check Hermiticity, unit trace and positivity; raise ``ValueError`` if violated.

    Hermiticity and trace are enforced to 1e-10; eigenvalues may undershoot
    zero by at most 1e-8 to allow for round-off.
    """
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{context}: not a square matrix, shape {rho.shape}")
    scale = max(1.0, float(np.linalg.norm(rho)))
    herm = float(np.linalg.norm(rho - rho.conj().T))
    if herm > HERMITICITY_TOL * scale:
        raise ValueError(f"{context}: not Hermitian (defect {herm:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{context}: trace {tr!r} differs from 1 beyond tolerance")
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if float(eigs.min()) < -POSITIVITY_SLACK:
        raise ValueError(f"{context}: negative eigenvalue {eigs.min():.3e}")
