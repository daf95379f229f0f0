"""Bosonic operators on a truncated Fock space.

Operators are plain ``complex128`` arrays of shape ``(d, d)`` with
``d = n_max + 1``; the basis is ``|0>, |1>, ..., |n_max>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock space with photon-number cutoff ``n_max``."""

    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def projector(self, m: int, n: int) -> np.ndarray:
        """Return the matrix unit ``|m><n|``."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        out[m, n] = 1.0
        return out

    def check(self, op: np.ndarray) -> np.ndarray:
        op = np.asarray(op)
        if op.shape != (self.dim, self.dim):
            raise ValueError(
                f"operator has shape {op.shape}, expected {(self.dim, self.dim)}"
            )
        return op


def annihilation(space: FockSpace) -> np.ndarray:
    """Annihilation operator with ``<n-1|a|n> = sqrt(n)``."""
    return np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1).astype(complex)


def creation(space: FockSpace) -> np.ndarray:
    return annihilation(space).conj().T


def number(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dim, dtype=float)).astype(complex)


def kerr_energies(space: FockSpace, omega0: float, u: float) -> np.ndarray:
    """Fock-state energies ``E_n = omega0 * n + (u / 2) * n**2``."""
    n = np.arange(space.dim, dtype=float)
    return omega0 * n + 0.5 * u * n**2


def kerr_hamiltonian(space: FockSpace, omega0: float, u: float) -> np.ndarray:
    return np.diag(kerr_energies(space, omega0, u)).astype(complex)


def is_hermitian(op: np.ndarray, atol: float = 1e-12) -> bool:
    return bool(np.allclose(op, op.conj().T, rtol=0.0, atol=atol))
