"""Lindblad generators as dense superoperators.

Vectorization is column stacking: ``vec(X)[m + d*n] = X[m, n]`` so that
``vec(A @ X @ B) = kron(B.T, A) @ vec(X)``. Every superoperator in the
package is a ``(d**2, d**2)`` complex array in this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SymmetryViolationError
from .fock import FockSpace, annihilation, creation, kerr_hamiltonian

SYMMETRY_TOL = 1e-10


def vec(op: np.ndarray) -> np.ndarray:
    return np.asarray(op).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> A X``."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> X B``."""
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``X -> A X B``."""
    return np.kron(b.T, a)


@dataclass(frozen=True)
class VdpParams:
    """Parameters of the driven-dissipative Kerr (quantum van der Pol) oscillator.

    ``gamma`` is the two-photon loss rate, ``gamma * r`` the single-photon pump
    rate. Energies are in the same units as ``gamma``.
    """

    omega0: float = 0.0
    u: float = 0.0
    gamma: float = 1.0
    r: float = 1.0
    n_max: int = 15

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.r < 0:
            raise ValueError(f"r must be non-negative, got {self.r}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.n_max)


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus a list of ``(jump_operator, rate)`` pairs on one Fock space."""

    space: FockSpace
    hamiltonian: np.ndarray
    jumps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.space.check(self.hamiltonian)
        jumps = tuple((self.space.check(op), float(rate)) for op, rate in self.jumps)
        for _, rate in jumps:
            if rate < 0:
                raise ValueError(f"jump rates must be non-negative, got {rate}")
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self) -> int:
        return self.space.dim


def build_vdp(params: VdpParams) -> LindbladModel:
    """Kerr oscillator with incoherent pump ``a^dag`` (rate r*gamma) and two-photon loss ``a a`` (rate gamma)."""
    if not params.gamma > 0:
        raise ValueError(f"gamma must be positive, got {params.gamma}")
    space = params.space
    a = annihilation(space)
    return LindbladModel(
        space=space,
        hamiltonian=kerr_hamiltonian(space, params.omega0, params.u),
        jumps=((creation(space), params.r * params.gamma), (a @ a, params.gamma)),
    )


def hamiltonian_superop(h: np.ndarray) -> np.ndarray:
    return -1j * (spre(h) - spost(h))


def dissipator(jumps, dim: int) -> np.ndarray:
    """Sum of ``rate * (L X L^dag - {L^dag L, X}/2)`` as a superoperator."""
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for op, rate in jumps:
        if rate == 0:
            continue
        ldl = op.conj().T @ op
        out += rate * (sprepost(op, op.conj().T) - 0.5 * spre(ldl) - 0.5 * spost(ldl))
    return out


def liouvillian(model: LindbladModel) -> np.ndarray:
    return hamiltonian_superop(model.hamiltonian) + dissipator(model.jumps, model.dim)


def adjoint_liouvillian(model: LindbladModel) -> np.ndarray:
    """Heisenberg-picture generator ``X -> i[H, X] + sum rate (L^dag X L - {L^dag L, X}/2)``.

    Assembled from the operators rather than by transposing
    :func:`liouvillian`, so the two can be checked against each other.
    """
    h = model.hamiltonian
    out = 1j * (spre(h) - spost(h))
    for op, rate in model.jumps:
        if rate == 0:
            continue
        ldl = op.conj().T @ op
        out = out + rate * (
            sprepost(op.conj().T, op) - 0.5 * spre(ldl) - 0.5 * spost(ldl)
        )
    return out


def lindblad_rhs(model: LindbladModel, x: np.ndarray) -> np.ndarray:
    """Evaluate the generator on an operator with matrix products only (no vectorization)."""
    h = model.hamiltonian
    out = -1j * (h @ x - x @ h)
    for op, rate in model.jumps:
        if rate == 0:
            continue
        opd = op.conj().T
        ldl = opd @ op
        out = out + rate * (op @ x @ opd - 0.5 * (ldl @ x + x @ ldl))
    return out


def charges(space: FockSpace) -> np.ndarray:
    """U(1) charge ``m - n`` of each vectorized basis element ``|m><n|``."""
    d = space.dim
    m, n = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return vec(m - n).real.astype(int)


def charge_superoperator(space: FockSpace) -> np.ndarray:
    """Superoperator of ``X -> [n, X]``; diagonal with eigenvalue ``m - n`` on ``|m><n|``."""
    return np.diag(charges(space).astype(complex))


@dataclass(frozen=True)
class Block:
    k: int
    indices: np.ndarray  # vectorized basis indices of |n+k><n|, ordered by n
    matrix: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        """Column index ``n`` of each basis element ``|n+k><n|`` in the block."""
        return np.arange(max(0, -self.k), max(0, -self.k) + self.indices.size)


@dataclass(frozen=True)
class BlockDecomposition:
    space: FockSpace
    charge_of_basis: np.ndarray
    blocks: dict

    def __iter__(self):
        return (self.blocks[k] for k in sorted(self.blocks))

    def __getitem__(self, k: int) -> Block:
        return self.blocks[k]

    def assemble(self) -> np.ndarray:
        d2 = self.space.dim**2
        out = np.zeros((d2, d2), dtype=complex)
        for blk in self:
            out[np.ix_(blk.indices, blk.indices)] = blk.matrix
        return out


def charge_indices(space: FockSpace, k: int) -> np.ndarray:
    d = space.dim
    n = np.arange(max(0, -k), d - max(0, k))
    return (n + k) + d * n


def block_decompose(
    superop: np.ndarray, space: FockSpace, tol: float = SYMMETRY_TOL
) -> BlockDecomposition:
    """Split a U(1)-symmetric superoperator into dense charge blocks.

    Raises
    ------
    SymmetryViolationError
        If an entry coupling different charges exceeds ``tol * max|L|``.
    """
    d = space.dim
    if superop.shape != (d * d, d * d):
        raise ValueError(f"superoperator shape {superop.shape} does not match d={d}")
    q = charges(space)
    cross = q[:, None] != q[None, :]
    scale = np.abs(superop).max() or 1.0
    worst = np.abs(superop[cross]).max(initial=0.0)
    if worst > tol * scale:
        raise SymmetryViolationError(
            f"cross-charge entry {worst:.3e} exceeds {tol:g} * max|L| = {tol * scale:.3e}"
        )
    blocks = {}
    for k in range(-space.n_max, space.n_max + 1):
        idx = charge_indices(space, k)
        blocks[k] = Block(k=k, indices=idx, matrix=superop[np.ix_(idx, idx)].copy())
    return BlockDecomposition(space=space, charge_of_basis=q, blocks=blocks)
