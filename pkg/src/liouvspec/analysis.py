"""Population oracle, inversion and negative-density-of-states detection, phase diagrams."""

from __future__ import annotations

import csv
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateSteadyStateError, InversionUndefinedError
from .greens import GF_SECTORS, default_omega_grid, pole_weights, spectral_function
from .lindblad import VdpParams
from .perturbation import lifetime_spectral_function
from .spectrum import vdp_spectrum

log = logging.getLogger(__name__)

EPS_POP = 1e-10
OMEGA_MIN = 1e-3
TAU_NEG = 1e-6
METHODS = ("exact", "lifetime")


def rate_matrix(n_max: int, r: float, gamma: float = 1.0) -> np.ndarray:
    """Generator ``W`` of ``dp/dt = W p`` for Fock populations.

    Gain ``n -> n+1`` at ``r gamma (n+1)`` (absent from the top level, as in
    the truncated pump operator) and two-photon loss ``n -> n-2`` at
    ``gamma n (n-1)``.
    """
    d = n_max + 1
    w = np.zeros((d, d))
    for n in range(d):
        if n < n_max:
            gain = r * gamma * (n + 1)
            w[n + 1, n] += gain
            w[n, n] -= gain
        if n >= 2:
            loss = gamma * n * (n - 1)
            w[n - 2, n] += loss
            w[n, n] -= loss
    return w


@dataclass(frozen=True)
class PopulationOracle:
    p: np.ndarray
    r: float

    @property
    def n_max(self) -> int:
        return self.p.size - 1


def classical_steady_state(n_max: int, r: float, gamma: float = 1.0) -> PopulationOracle:
    """Null vector of the classical population rate matrix, normalized to unit sum."""
    w = rate_matrix(n_max, r, gamma)
    null = scipy.linalg.null_space(w, rcond=1e-12)
    if null.shape[1] != 1:
        raise DegenerateSteadyStateError(
            f"population rate matrix has a {null.shape[1]}-dimensional null space at r={r}"
        )
    p = null[:, 0] / null[:, 0].sum()
    if p.min() < -1e-12:
        raise ValueError(f"oracle populations not non-negative (min {p.min():.3e})")
    p = np.clip(p, 0.0, None)
    return PopulationOracle(p=p / p.sum(), r=r)


def detect_inversion(p, energies=None, eps: float = EPS_POP) -> bool:
    """True if some higher level is more populated than the one below it.

    ``energies`` (optional) are the level energies; inversion is undefined,
    and raises, when they are all equal (``U = omega0 = 0``).
    """
    p = np.asarray(p, dtype=float)
    if energies is not None:
        energies = np.asarray(energies, dtype=float)
        if np.ptp(energies) == 0:
            raise InversionUndefinedError("all levels are degenerate; inversion is undefined")
        if np.any(np.diff(energies) <= 0):
            raise ValueError("detect_inversion expects energies increasing with n")
    return bool(np.any(p[1:] > p[:-1] + eps))


@dataclass(frozen=True)
class NdosResult:
    negative: bool
    interval: tuple | None
    min_value: float

    def __bool__(self):
        return self.negative


def detect_ndos(
    a,
    omega,
    omega_min: float = OMEGA_MIN,
    tau: float = TAU_NEG,
    u: float | None = None,
    n_max: int | None = None,
) -> NdosResult:
    """Look for ``A(omega) < -tau * max|A|`` at ``omega > omega_min``.

    The witness interval is the contiguous run of negative samples around
    the minimum. Passing ``u`` (and ``n_max``) enables grid-coverage and
    resolution warnings.
    """
    a = np.asarray(a, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if u:
        step = np.diff(omega).max()
        if step > abs(u) / 10.0:
            warnings.warn(f"frequency step {step:.3g} under-resolves resonance spacing U={u:g}")
        if n_max is not None and omega[-1] < abs(u) * (n_max - 1):
            warnings.warn(f"grid ends at {omega[-1]:.3g} < U (n_max - 1) = {abs(u) * (n_max - 1):.3g}")
    mask = omega > omega_min
    if not mask.any():
        raise ValueError("frequency grid has no points above omega_min")
    thresh = -tau * np.abs(a).max()
    vals = a[mask]
    om = omega[mask]
    i = int(np.argmin(vals))
    if vals[i] >= thresh:
        return NdosResult(False, None, float(vals[i]))
    neg = vals < thresh
    lo = i
    while lo > 0 and neg[lo - 1]:
        lo -= 1
    hi = i
    while hi < vals.size - 1 and neg[hi + 1]:
        hi += 1
    return NdosResult(True, (float(om[lo]), float(om[hi])), float(vals[i]))


def spectral_function_for(
    params: VdpParams,
    method: str = "exact",
    omega=None,
    linewidth_source: str = "trace_formula",
):
    """``(omega, A)`` for one parameter point by the exact or the lifetime route."""
    if omega is None:
        omega = default_omega_grid(params)
    if method == "exact":
        spec = vdp_spectrum(params, sectors=GF_SECTORS)
        return omega, spectral_function(pole_weights(spec), omega)
    if method == "lifetime":
        p = classical_steady_state(params.n_max, params.r, params.gamma).p
        return omega, lifetime_spectral_function(params, p, omega, linewidth_source)
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def ndos_at(params: VdpParams, method: str = "exact", points: int = 4001, **kwargs) -> bool:
    omega, a = spectral_function_for(params, method, default_omega_grid(params, points), **kwargs)
    return detect_ndos(a, omega).negative


def _between(lo: float, hi: float) -> float:
    return math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)


def threshold_uc(
    r: float,
    method: str = "exact",
    u_range=(0.5, 200.0),
    n_max: int = 15,
    gamma: float = 1.0,
    rel_tol: float = 1e-3,
    scan_points: int = 40,
    points: int = 4001,
    **kwargs,
) -> float | None:
    """Smallest ``U`` at which NDoS appears, at fixed ``r``.

    Bisects assuming NDoS is monotone in ``U``. If both ends of ``u_range``
    agree, scans ``scan_points`` log-spaced values and bisects around the
    first onset. Returns None (with a logged diagnostic) when no onset lies
    inside the range.
    """

    def flag(u):
        return ndos_at(VdpParams(u=u, r=r, gamma=gamma, n_max=n_max), method, points, **kwargs)

    lo, hi = float(u_range[0]), float(u_range[1])
    f_lo, f_hi = flag(lo), flag(hi)
    if f_lo == f_hi:
        grid = np.geomspace(lo, hi, scan_points) if lo > 0 else np.linspace(lo, hi, scan_points)
        flags = [f_lo] + [flag(u) for u in grid[1:-1]] + [f_hi]
        if flags[0]:
            log.info("r=%g (%s): NDoS already at U=%g; threshold below range", r, method, lo)
            return None
        onsets = [i for i in range(1, len(flags)) if flags[i] and not flags[i - 1]]
        if not onsets:
            log.info("r=%g (%s): no NDoS in U range [%g, %g]", r, method, lo, hi)
            return None
        i = onsets[0]
        lo, hi = float(grid[i - 1]), float(grid[i])
    elif f_lo:
        log.info("r=%g (%s): NDoS at lower end only; range does not bracket an onset", r, method)
        return None
    while (hi - lo) > rel_tol * hi:
        mid = _between(lo, hi)
        if flag(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class PhaseDiagram:
    r_grid: np.ndarray
    u_grid: np.ndarray
    inversion: np.ndarray  # (len(r_grid),)
    ndos_exact: np.ndarray  # (len(r_grid), len(u_grid))
    ndos_lifetime: np.ndarray
    u_c_exact: list
    u_c_lifetime: list
    errors: dict


def default_r_grid(points: int = 40) -> np.ndarray:
    return np.geomspace(0.2, 8.0, points)


def default_u_grid(points: int = 40) -> np.ndarray:
    return np.geomspace(0.5, 200.0, points)


def _cell(args):
    r, u, n_max, gamma, points = args
    params = VdpParams(u=u, r=r, gamma=gamma, n_max=n_max)
    try:
        return (ndos_at(params, "exact", points), ndos_at(params, "lifetime", points), None)
    except Exception as exc:  # per-cell failures are reported, the sweep goes on
        return (False, False, f"{type(exc).__name__}: {exc}")


def _threshold(args):
    r, method, u_range, n_max, gamma, points = args
    try:
        return threshold_uc(r, method, u_range, n_max=n_max, gamma=gamma, points=points), None
    except Exception as exc:
        return None, f"{type(exc).__name__}: {exc}"


def phase_diagram(
    r_grid=None,
    u_grid=None,
    n_max: int = 15,
    gamma: float = 1.0,
    workers: int = 1,
    points: int = 4001,
    thresholds: bool = True,
) -> PhaseDiagram:
    """NDoS flags on an ``(r, U/gamma)`` grid by the exact and lifetime routes.

    Cells are independent; with ``workers > 1`` they run in a process pool.
    Results are collected in input order, so the output does not depend on
    the worker count.
    """
    r_grid = default_r_grid() if r_grid is None else np.asarray(r_grid, dtype=float)
    u_grid = default_u_grid() if u_grid is None else np.asarray(u_grid, dtype=float)
    cells = [(float(r), float(u), n_max, gamma, points) for r in r_grid for u in u_grid]
    u_range = (float(u_grid.min()), float(u_grid.max()))
    jobs = [
        (float(r), m, u_range, n_max, gamma, points) for r in r_grid for m in METHODS
    ] if thresholds else []

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cell_out = list(pool.map(_cell, cells, chunksize=8))
            thr_out = list(pool.map(_threshold, jobs))
    else:
        cell_out = [_cell(c) for c in cells]
        thr_out = [_threshold(j) for j in jobs]

    shape = (r_grid.size, u_grid.size)
    exact = np.array([c[0] for c in cell_out], dtype=bool).reshape(shape)
    lifetime = np.array([c[1] for c in cell_out], dtype=bool).reshape(shape)
    errors = {(c[0], c[1]): out[2] for c, out in zip(cells, cell_out) if out[2]}
    for job, (_, err) in zip(jobs, thr_out):
        if err:
            errors[(job[0], job[1])] = err

    inversion = np.array(
        [detect_inversion(classical_steady_state(n_max, r, gamma).p) if r > 0 else False for r in r_grid]
    )
    if thresholds:
        u_c_exact = [thr_out[2 * i][0] for i in range(r_grid.size)]
        u_c_lifetime = [thr_out[2 * i + 1][0] for i in range(r_grid.size)]
    else:
        u_c_exact = u_c_lifetime = [None] * r_grid.size
    return PhaseDiagram(r_grid, u_grid, inversion, exact, lifetime, u_c_exact, u_c_lifetime, errors)


def _opt(x) -> str:
    return "" if x is None else f"{x:.12e}"


def write_phase_csv(diagram: PhaseDiagram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u_over_gamma", "inversion", "ndos_exact", "ndos_lifetime"])
        for i, r in enumerate(diagram.r_grid):
            for j, u in enumerate(diagram.u_grid):
                w.writerow(
                    [
                        f"{r:.12e}",
                        f"{u:.12e}",
                        int(diagram.inversion[i]),
                        int(diagram.ndos_exact[i, j]),
                        int(diagram.ndos_lifetime[i, j]),
                    ]
                )


def write_threshold_csv(diagram: PhaseDiagram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u_c_exact", "u_c_lifetime"])
        for r, ue, ul in zip(diagram.r_grid, diagram.u_c_exact, diagram.u_c_lifetime):
            w.writerow([f"{r:.12e}", _opt(ue), _opt(ul)])
