"""Biorthonormal eigendecomposition of a U(1)-symmetric Liouvillian.

Each charge block is diagonalized on its own. Right eigenvectors come from
the block, left eigenvectors from its conjugate transpose; the two sets are
paired by matching ``lambda`` with ``conj(mu)`` and then biorthonormalized so
that ``tr(l_a^dag r_b) = delta_ab``.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp
from scipy.optimize import linear_sum_assignment

from .errors import DefectiveSpectrumError, DegenerateSteadyStateError, IntegrationError
from .fock import FockSpace
from .lindblad import (
    BlockDecomposition,
    LindbladModel,
    VdpParams,
    block_decompose,
    build_vdp,
    charges,
    lindblad_rhs,
    liouvillian,
    unvec,
    vec,
)

log = logging.getLogger(__name__)

TOL_ZERO = 1e-9
TOL_DEG = 1e-8
# smallest singular value of a unit-normalized Gram cluster before the block is declared defective
GRAM_TOL = 1e-13


@dataclass(frozen=True)
class EigenMode:
    k: int
    eigenvalue: complex
    right: np.ndarray
    left: np.ndarray


@dataclass(frozen=True)
class LiouvilleSpectrum:
    """All ``d**2`` eigentriples of a Liouvillian, grouped by charge.

    ``rights[a]`` and ``lefts[a]`` are ``(d, d)`` operators. Modes are stored
    block by block (``k`` ascending) and, inside a block, by ``Im lambda``
    ascending with ties broken by ``Re lambda`` descending.
    """

    space: FockSpace
    eigenvalues: np.ndarray
    charges: np.ndarray
    rights: np.ndarray
    lefts: np.ndarray
    steady_index: int | None

    def __len__(self):
        return self.eigenvalues.size

    @property
    def modes(self) -> list[EigenMode]:
        return [
            EigenMode(int(k), complex(lam), r, l)
            for k, lam, r, l in zip(self.charges, self.eigenvalues, self.rights, self.lefts)
        ]

    @property
    def rho_s(self) -> np.ndarray:
        if self.steady_index is None:
            raise DegenerateSteadyStateError("spectrum was built without a unique steady state")
        return self.rights[self.steady_index]

    def block(self, k: int) -> np.ndarray:
        """Mode indices belonging to charge ``k``."""
        return np.flatnonzero(self.charges == k)

    def biorthogonality_error(self) -> float:
        """``max_ab |tr(l_a^dag r_b) - delta_ab|``."""
        lm = _vec_stack(self.lefts)
        rm = _vec_stack(self.rights)
        return float(np.abs(lm.conj().T @ rm - np.eye(len(self))).max())

    def completeness_residual(self) -> float:
        """``max |sum_a vec(r_a) vec(l_a)^dag - P|``, ``P`` projecting on the diagonalized sectors.

        For a full spectrum ``P`` is the identity on the vectorized space.
        """
        lm = _vec_stack(self.lefts)
        rm = _vec_stack(self.rights)
        inside = np.isin(charges(self.space), np.unique(self.charges))
        return float(np.abs(rm @ lm.conj().T - np.diag(inside.astype(float))).max())


def _vec_stack(ops: np.ndarray) -> np.ndarray:
    # columns are vec(op) in the column-stacking convention
    return np.stack([vec(op) for op in ops], axis=1)


def _eig_block(matrix: np.ndarray):
    lam, right = scipy.linalg.eig(matrix, check_finite=True)
    mu, left = scipy.linalg.eig(matrix.conj().T)
    return lam, right, mu, left


def _pair(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Permutation ``p`` such that ``conj(mu[p[i]])`` matches ``lam[i]``."""
    cost = np.abs(lam[:, None] - mu.conj()[None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty_like(cols)
    perm[rows] = cols
    return perm


def _clusters(lam: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage groups of eigenvalues closer than ``tol``."""
    n = lam.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.abs(lam[:, None] - lam[None, :]) < tol
    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in sorted(groups.values())]


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    """Unit-normalize columns and make the largest entry of each real positive."""
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    pivot = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(vecs.shape[1])]
    return vecs * (np.abs(pivot) / pivot)


def _biorthonormalize(lam, right, left, tol_deg):
    right = _fix_phase(right)
    left = left / np.linalg.norm(left, axis=0)
    for cluster in _clusters(lam, tol_deg):
        rc = right[:, cluster]
        lc = left[:, cluster]
        gram = lc.conj().T @ rc
        smin = np.linalg.svd(gram, compute_uv=False).min()
        if smin < GRAM_TOL:
            raise DefectiveSpectrumError(
                f"singular Gram matrix (sigma_min={smin:.2e}) for eigenvalue cluster "
                f"near {lam[cluster[0]]:.6g}; the block is not diagonalizable"
            )
        left[:, cluster] = lc @ np.linalg.inv(gram).conj().T
    return right, left


def _block_order(lam: np.ndarray) -> np.ndarray:
    return np.lexsort((-lam.real, lam.imag))


def diagonalize(
    blocks: BlockDecomposition,
    tol_zero: float = TOL_ZERO,
    tol_deg: float = TOL_DEG,
    require_steady: bool = True,
    workers: int | None = None,
    sectors=None,
) -> LiouvilleSpectrum:
    """Eigendecompose every charge block and assemble a biorthonormal spectrum.

    Parameters
    ----------
    blocks : BlockDecomposition
        Output of :func:`liouvspec.lindblad.block_decompose`.
    tol_zero, tol_deg : float
        Relative (to ``max|lambda|``) thresholds for identifying the zero mode
        and for grouping degenerate eigenvalues.
    require_steady : bool
        If true, raise unless the ``k=0`` block has exactly one zero mode.
    workers : int, optional
        Thread count for the per-block eigensolves. The result does not
        depend on it.
    sectors : iterable of int, optional
        Charges to diagonalize (default: all). Green's functions of ``a``
        need only ``k = 0`` and ``k = 1``; restricting to them also skips
        blocks that may be defective without affecting those quantities.

    Returns
    -------
    LiouvilleSpectrum
        With the steady mode normalized so that ``r_0 = rho_s`` (unit trace)
        and ``l_0`` the identity.
    """
    space = blocks.space
    d = space.dim
    ordered = list(blocks)
    if sectors is not None:
        wanted = set(int(k) for k in sectors)
        if require_steady:
            wanted.add(0)
        ordered = [b for b in ordered if b.k in wanted]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(lambda b: _eig_block(b.matrix), ordered))
    else:
        raw = [_eig_block(b.matrix) for b in ordered]

    scale = max(np.abs(lam).max() for lam, *_ in raw) or 1.0

    eigenvalues, charge, rights, lefts = [], [], [], []
    for blk, (lam, right, mu, left) in zip(ordered, raw):
        left = left[:, _pair(lam, mu)]
        right, left = _biorthonormalize(lam, right, left, tol_deg * scale)
        order = _block_order(lam)
        lam, right, left = lam[order], right[:, order], left[:, order]
        for j in range(lam.size):
            r = np.zeros(d * d, dtype=complex)
            l = np.zeros(d * d, dtype=complex)
            r[blk.indices] = right[:, j]
            l[blk.indices] = left[:, j]
            rights.append(unvec(r, d))
            lefts.append(unvec(l, d))
        eigenvalues.append(lam)
        charge.append(np.full(lam.size, blk.k))

    eigenvalues = np.concatenate(eigenvalues)
    charge = np.concatenate(charge)
    rights = np.array(rights)
    lefts = np.array(lefts)

    zero = np.flatnonzero((charge == 0) & (np.abs(eigenvalues) < tol_zero * scale))
    steady_index = None
    if zero.size == 1:
        steady_index = int(zero[0])
        trace = np.trace(rights[steady_index])
        rights[steady_index] = rights[steady_index] / trace
        lefts[steady_index] = lefts[steady_index] * np.conj(trace)
        eigenvalues[steady_index] = 0.0
    else:
        msg = f"found {zero.size} zero modes in the k=0 block (|lambda| < {tol_zero * scale:.2e})"
        if require_steady:
            raise DegenerateSteadyStateError(msg)
        log.warning(msg)

    return LiouvilleSpectrum(
        space=space,
        eigenvalues=eigenvalues,
        charges=charge,
        rights=rights,
        lefts=lefts,
        steady_index=steady_index,
    )


def compute_spectrum(model: LindbladModel, **kwargs) -> LiouvilleSpectrum:
    """Liouvillian -> charge blocks -> biorthonormal spectrum."""
    blocks = block_decompose(liouvillian(model), model.space)
    return diagonalize(blocks, **kwargs)


def vdp_spectrum(params: VdpParams, **kwargs) -> LiouvilleSpectrum:
    return compute_spectrum(build_vdp(params), **kwargs)


def steady_state(spectrum: LiouvilleSpectrum, tol: float = 1e-10) -> np.ndarray:
    """Return the steady-state density matrix after checking it is physical.

    Positivity is checked, never enforced: eigenvalues below ``-tol`` raise.
    """
    if spectrum.steady_index is None:
        raise DegenerateSteadyStateError("no unique zero mode in the spectrum")
    rho = spectrum.rho_s
    if not np.allclose(rho, rho.conj().T, rtol=0.0, atol=tol):
        raise ValueError("steady state is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    pmin = np.linalg.eigvalsh(rho).min()
    if pmin < -tol:
        raise ValueError(f"steady state has negative eigenvalue {pmin:.3e}")
    return rho


def decay_mode_expansion(spectrum: LiouvilleSpectrum, rho0: np.ndarray) -> np.ndarray:
    """Coefficients ``c_a = tr(l_a^dag rho0)`` of ``rho0`` in the right eigenbasis."""
    rho0 = spectrum.space.check(rho0)
    return np.einsum("aij,ij->a", spectrum.lefts.conj(), rho0)


def reconstruct(spectrum: LiouvilleSpectrum, coeffs: np.ndarray, t) -> np.ndarray:
    """``rho(t) = sum_a c_a exp(lambda_a t) r_a``; ``t`` may be a scalar or 1-d array."""
    t = np.asarray(t, dtype=float)
    phases = np.exp(np.multiply.outer(t, spectrum.eigenvalues)) * coeffs
    return np.tensordot(phases, spectrum.rights, axes=(-1, 0))


def propagate_oracle(
    model: LindbladModel,
    x0: np.ndarray,
    t_grid,
    rtol: float = 1e-10,
    atol: float = 1e-13,
) -> np.ndarray:
    """Integrate ``dX/dt = L(X)`` with an adaptive 8th-order Runge-Kutta scheme.

    The right-hand side is evaluated with matrix products, independent of the
    vectorized generator, so this serves as a check on ``exp(t L)``.
    Returns an array of shape ``(len(t_grid), d, d)``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be a strictly increasing 1-d array of t >= 0")
    d = model.dim
    x0 = model.space.check(x0).astype(complex)

    def rhs(_t, y):
        return lindblad_rhs(model, y.reshape(d, d)).ravel()

    out = np.empty((t_grid.size, d, d), dtype=complex)
    start = 0
    if t_grid[0] == 0.0:
        out[0] = x0
        start = 1
    if start == t_grid.size:
        return out
    sol = solve_ivp(
        rhs,
        (0.0, t_grid[-1]),
        x0.ravel(),
        method="DOP853",
        t_eval=t_grid[start:],
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise IntegrationError(f"propagation failed: {sol.message}")
    out[start:] = sol.y.T.reshape(-1, d, d)
    return out


def cutoff_shift(params: VdpParams, n_extra: int = 5, count: int = 10, k: int = 1) -> float:
    """Largest change of the ``count`` block-``k`` eigenvalues with smallest ``|Im lambda|``
    when the cutoff grows from ``n_max`` to ``n_max + n_extra``.

    Eigenvalues are matched to their nearest neighbour at the larger cutoff.
    """
    from dataclasses import replace

    def smallest(p):
        model = build_vdp(p)
        blk = block_decompose(liouvillian(model), model.space)[k]
        lam = scipy.linalg.eigvals(blk.matrix)
        return lam[np.argsort(np.abs(lam.imag), kind="stable")]

    base = smallest(params)[:count]
    big = smallest(replace(params, n_max=params.n_max + n_extra))
    return float(max(np.abs(big - lam).min() for lam in base))


def write_eigenvalues_csv(spectrum: LiouvilleSpectrum, path, gamma: float = 1.0) -> None:
    """Write ``k,re_lambda,im_lambda`` rows (eigenvalues in units of ``gamma``)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "re_lambda", "im_lambda"])
        for k, lam in zip(spectrum.charges, spectrum.eigenvalues):
            w.writerow([int(k), f"{lam.real / gamma:.12e}", f"{lam.imag / gamma:.12e}"])
