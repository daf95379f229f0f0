"""Perturbation theory in the dissipator around the closed Kerr oscillator.

The unperturbed generator is ``-i[H, .]`` with ``H`` diagonal in the Fock
basis; its eigenmodes are the matrix units ``|i><j|`` with eigenvalues
``-i (E_i - E_j)``. The dissipator ``D`` is the perturbation. U(1) symmetry
keeps the charge sectors apart, so non-degenerate formulas apply inside the
``k=1`` sector as long as ``U != 0``.

Two conventions are carried side by side and selected by ``source``:

``"trace_formula"``
    first-order quantities evaluated directly from matrix elements of ``D``;
``"closed_form"``
    the closed forms ``Gamma = 2 gamma n^2 + r gamma (2n+3)`` and the matching
    eigenvector mixing coefficients, which are exactly twice the trace values.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .fock import FockSpace, annihilation, creation, kerr_energies
from .greens import PoleData, spectral_function
from .lindblad import LindbladModel, VdpParams, build_vdp, dissipator

SOURCES = ("trace_formula", "closed_form")


def _check_source(source: str) -> None:
    if source not in SOURCES:
        raise ValueError(f"linewidth_source must be one of {SOURCES}, got {source!r}")


@dataclass(frozen=True)
class ZerothMode:
    i: int
    j: int
    eigenvalue: complex

    def operator(self, space: FockSpace) -> np.ndarray:
        """``|i><j|``, which is both the right and the left eigenoperator."""
        return space.projector(self.i, self.j)


@dataclass(frozen=True)
class PerturbativeMode:
    """First-order data of the coherence ``|n+1><n|``.

    ``right_mix`` / ``left_mix`` map the lower index ``m`` of another
    coherence ``|m+1><m|`` to its admixture coefficient.
    """

    n: int
    energy: float
    linewidth: float
    right_mix: dict = field(default_factory=dict)
    left_mix: dict = field(default_factory=dict)


def _diagonal_energies(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    off = h - np.diag(np.diag(h))
    if np.abs(off).max(initial=0.0) > 0:
        raise ValueError("zeroth-order modes need a Hamiltonian diagonal in the Fock basis")
    return np.diag(h).real.copy()


def zeroth_order_modes(space: FockSpace, h: np.ndarray) -> list[ZerothMode]:
    energies = _diagonal_energies(space.check(h))
    d = space.dim
    return [ZerothMode(i, j, -1j * (energies[i] - energies[j])) for j in range(d) for i in range(d)]


def _index(d: int, i: int, j: int) -> int:
    return i + d * j


def first_order_eigenvalue(model: LindbladModel, i: int, j: int) -> complex:
    """``tr[(l^(0))^dag D(r^(0))]`` for the mode ``|i><j|``."""
    d = model.dim
    idx = _index(d, i, j)
    dmat = dissipator(model.jumps, model.dim)
    return complex(dmat[idx, idx])


def closed_form_linewidth(n: int, r: float, gamma: float) -> float:
    return 2.0 * gamma * n**2 + r * gamma * (2 * n + 3)


def resonance_energy(n: int, omega0: float, u: float) -> float:
    return omega0 + 0.5 * u + u * n


def trace_linewidth(n: int, r: float, gamma: float, n_max: int | None = None) -> float:
    """``-Re lambda^(1)`` of ``|n+1><n|`` from the trace formula.

    Evaluated on a space large enough (``n + 3`` by default) that the cutoff
    does not touch the matrix elements involved.
    """
    if n_max is None:
        n_max = n + 3
    model = build_vdp(VdpParams(u=0.0, gamma=gamma, r=r, n_max=n_max))
    return -first_order_eigenvalue(model, n + 1, n).real


def linewidths(params: VdpParams, source: str = "trace_formula") -> np.ndarray:
    """``Gamma_{n+1,n}`` for ``n = 0 .. n_max-1``."""
    _check_source(source)
    ns = np.arange(params.n_max)
    if source == "closed_form":
        return np.array([closed_form_linewidth(n, params.r, params.gamma) for n in ns])
    model = build_vdp(VdpParams(u=0.0, gamma=params.gamma, r=params.r, n_max=params.n_max + 3))
    dmat = dissipator(model.jumps, model.dim)
    d = model.dim
    return np.array([-dmat[_index(d, n + 1, n), _index(d, n + 1, n)].real for n in ns])


def golden_rule_rate(n: int, r: float, gamma: float) -> float:
    """Sum of Golden-rule decay rates of ``|n>`` and ``|n+1>`` under pump and two-photon loss."""
    space = FockSpace(n + 3)
    ad = creation(space)
    a2 = annihilation(space) @ annihilation(space)

    def out_rate(op, state):
        return float(np.sum(np.abs(op[:, state]) ** 2))

    return r * gamma * (out_rate(ad, n) + out_rate(ad, n + 1)) + gamma * (
        out_rate(a2, n) + out_rate(a2, n + 1)
    )


def lifetime_spectral_function(
    params: VdpParams,
    populations,
    omega,
    linewidth_source: str = "trace_formula",
) -> np.ndarray:
    """Sum of Lorentzians at ``E_{n+1,n}`` with widths ``Gamma_{n+1,n}``.

    ``A = (1/pi) sum_n Gamma (n+1) (p_n - p_{n+1}) / ((omega - E)^2 + Gamma^2)``,
    summed for ``n = 0 .. n_max-1``.
    """
    p = np.asarray(populations, dtype=float)
    omega = np.asarray(omega, dtype=float)[..., None]
    ns = np.arange(params.n_max)
    gam = linewidths(params, linewidth_source)
    energy = resonance_energy(ns, params.omega0, params.u)
    weight = (ns + 1) * (p[:-1] - p[1:])
    return (gam * weight / ((omega - energy) ** 2 + gam**2)).sum(axis=-1) / np.pi


def _k1_zeroth_eigenvalues(energies: np.ndarray) -> np.ndarray:
    return -1j * (energies[1:] - energies[:-1])


def _trace_mixing(model: LindbladModel, n: int):
    energies = _diagonal_energies(model.hamiltonian)
    lam0 = _k1_zeroth_eigenvalues(energies)
    d = model.dim
    dmat = dissipator(model.jumps, model.dim)
    alpha = _index(d, n + 1, n)
    right, left = {}, {}
    for m in range(d - 1):
        if m == n:
            continue
        beta = _index(d, m + 1, m)
        num_r = dmat[beta, alpha]
        num_l = np.conj(dmat[alpha, beta])
        if num_r == 0 and num_l == 0:
            continue
        gap = lam0[n] - lam0[m]
        if gap == 0:
            raise ValueError(
                f"modes ({n + 1},{n}) and ({m + 1},{m}) are degenerate at zeroth order; "
                "first-order eigenvector corrections need U != 0"
            )
        if num_r != 0:
            right[m] = complex(num_r / gap)
        if num_l != 0:
            left[m] = complex(num_l / np.conj(gap))
    return right, left


def closed_form_mixing(n: int, r: float, gamma: float, u: float, n_max: int | None = None):
    """Closed-form first-order admixtures of ``|n+1><n|`` (keys are lower indices ``m``).

    Coherences that fall outside ``0 <= m < n_max`` are dropped.
    """
    if u == 0:
        raise ValueError("first-order eigenvector corrections need U != 0")
    right = {
        n + 1: -1j * (r * gamma / u) * 2.0 * np.sqrt((n + 2) * (n + 1)),
        n - 2: 1j * (gamma / u) * n * np.sqrt(max(n * n - 1, 0)),
    }
    left = {
        n - 1: -1j * (r * gamma / u) * 2.0 * np.sqrt((n + 1) * n),
        n + 2: 1j * (gamma / u) * (n + 2) * np.sqrt((n + 1) * (n + 3)),
    }

    def keep(mix):
        return {
            m: complex(c)
            for m, c in mix.items()
            if m >= 0 and (n_max is None or m < n_max) and c != 0
        }

    return keep(right), keep(left)


def first_order_eigenvectors(
    model: LindbladModel, n: int, source: str = "trace_formula", params: VdpParams | None = None
) -> PerturbativeMode:
    """First-order correction of the ``|n+1><n|`` mode.

    ``source="trace_formula"`` evaluates the general sums over zeroth-order
    modes with ``D`` on the model's truncated space; ``"closed_form"`` uses
    the closed forms and needs ``params``.
    """
    _check_source(source)
    energies = _diagonal_energies(model.hamiltonian)
    lam0 = _k1_zeroth_eigenvalues(energies)
    if np.unique(lam0).size < lam0.size:
        raise ValueError("degenerate k=1 transition energies (U = 0): perturbation scheme invalid")
    lam1 = first_order_eigenvalue(model, n + 1, n)
    if source == "trace_formula":
        right, left = _trace_mixing(model, n)
        linewidth = -lam1.real
    else:
        if params is None:
            raise ValueError("closed_form needs the VdpParams")
        right, left = closed_form_mixing(n, params.r, params.gamma, params.u, n_max=model.dim - 1)
        linewidth = closed_form_linewidth(n, params.r, params.gamma)
    return PerturbativeMode(
        n=n,
        energy=float(energies[n + 1] - energies[n]),
        linewidth=float(linewidth),
        right_mix=right,
        left_mix=left,
    )


def first_order_k1_eigenvalues(params: VdpParams, source: str = "trace_formula") -> np.ndarray:
    """``lambda^(0) + lambda^(1)`` of every ``|n+1><n|`` mode on the truncated space."""
    _check_source(source)
    model = build_vdp(params)
    energies = _diagonal_energies(model.hamiltonian)
    lam0 = _k1_zeroth_eigenvalues(energies)
    if source == "closed_form":
        gam = linewidths(params, source)
        return lam0 - gam
    dmat = dissipator(model.jumps, model.dim)
    d = model.dim
    lam1 = np.array([dmat[_index(d, n + 1, n), _index(d, n + 1, n)] for n in range(d - 1)])
    return lam0 + lam1


def perturbative_poles(
    params: VdpParams,
    rho_s,
    linewidth_source: str = "trace_formula",
    eigenvectors: bool = True,
) -> PoleData:
    """Pole data of ``G^R`` with first-order eigenvalues and (optionally) eigenvectors.

    ``rho_s`` is the exact steady state, or its Fock populations.
    """
    _check_source(linewidth_source)
    rho = np.asarray(rho_s)
    if rho.ndim == 1:
        rho = np.diag(rho).astype(complex)
    model = build_vdp(params)
    space = model.space
    a = annihilation(space)
    ad = creation(space)
    comm = ad @ rho - rho @ ad
    energies = kerr_energies(space, params.omega0, params.u)
    gam = linewidths(params, linewidth_source)

    lams, weights = [], []
    for n in range(params.n_max):
        r_op = space.projector(n + 1, n)
        l_op = r_op.copy()
        if eigenvectors:
            mode = first_order_eigenvectors(model, n, linewidth_source, params)
            for m, c in mode.right_mix.items():
                r_op[m + 1, m] += c
            for m, c in mode.left_mix.items():
                l_op[m + 1, m] += c
        lams.append(-1j * (energies[n + 1] - energies[n]) - gam[n])
        weights.append(np.trace(a @ r_op) * np.sum(l_op.conj() * comm))
    return PoleData(np.array(lams), np.array(weights))


def beyond_lifetime_spectral_function(
    params: VdpParams,
    rho_s,
    omega,
    linewidth_source: str = "trace_formula",
    eigenvectors: bool = True,
) -> np.ndarray:
    """Spectral function with first-order eigenmode corrections (complex weights).

    With ``eigenvectors=False`` it coincides with :func:`lifetime_spectral_function`.
    """
    poles = perturbative_poles(params, rho_s, linewidth_source, eigenvectors)
    return spectral_function(poles, omega)


def write_perturbative_csv(path, omega, a_lifetime, a_beyond, a_exact) -> None:
    """``omega,a_lifetime,a_beyond,a_exact`` side by side (units of gamma)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "a_lifetime", "a_beyond", "a_exact"])
        for row in zip(omega, a_lifetime, a_beyond, a_exact):
            w.writerow([f"{x:.12e}" for x in row])
