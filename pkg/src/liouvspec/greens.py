"""Two-time correlators and single-particle Green's functions from Liouvillian eigenmodes.

Every frequency-domain quantity here is a sum of simple poles

    F(omega) = sum_a  w_a / (omega - i lambda_a),

with ``lambda_a`` the ``k=1`` eigenvalues (``Re lambda_a < 0``). The retarded
function uses ``w_a = tr(a r_a) tr(l_a^dag [a^dag, rho_s])``; the greater and
lesser fluctuation spectra use ``a^dag rho_s`` and ``rho_s a^dag`` in the same
slot. Only the ``k=1`` block couples to ``a``, so the sums are restricted to it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .fock import annihilation, creation
from .lindblad import VdpParams
from .spectrum import LiouvilleSpectrum

EPS_MASK = 1e-6
# charge sectors that single-particle Green's functions depend on
GF_SECTORS = (0, 1)


@dataclass(frozen=True)
class PoleData:
    """Complex poles ``lambda`` and residues ``w`` of a pole sum."""

    eigenvalues: np.ndarray
    weights: np.ndarray
    k: int = 1

    def __len__(self):
        return self.eigenvalues.size

    @property
    def total_weight(self) -> complex:
        return complex(self.weights.sum())

    def replace_weights(self, weights) -> "PoleData":
        return PoleData(self.eigenvalues, np.asarray(weights, dtype=complex), self.k)


@dataclass(frozen=True)
class SpectralResult:
    omega: np.ndarray
    gr: np.ndarray
    a: np.ndarray
    gk_im: np.ndarray
    t_eff: np.ndarray
    poles: PoleData
    s_greater: np.ndarray
    s_lesser: np.ndarray

    @property
    def sum_rule(self) -> complex:
        return self.poles.total_weight


def _trace_with(op: np.ndarray, modes: np.ndarray) -> np.ndarray:
    # tr(op @ m) for every mode m
    return np.einsum("ij,aji->a", op, modes)


def _overlap(lefts: np.ndarray, x: np.ndarray) -> np.ndarray:
    # tr(l^dag x) for every left mode l
    return np.einsum("aij,aij->a", lefts.conj(), np.broadcast_to(x, lefts.shape))


def correlator(
    spectrum: LiouvilleSpectrum,
    a_op: np.ndarray,
    b_op: np.ndarray,
    t,
    connected: bool = False,
) -> np.ndarray:
    """Steady-state correlator ``<A(t) B(0)>`` for ``t >= 0`` from the eigenmode sum.

    With ``connected=True`` the ``lambda = 0`` term, equal to ``<A><B>``, is dropped.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("correlator needs t >= 0; use <A(-t)B> = conj(<B^dag(t) A^dag>) instead")
    rho = spectrum.rho_s
    left_factor = _trace_with(a_op, spectrum.rights)
    right_factor = _overlap(spectrum.lefts, b_op @ rho)
    coeff = left_factor * right_factor
    if connected:
        coeff = coeff.copy()
        coeff[spectrum.steady_index] = 0.0
    return np.exp(np.multiply.outer(t, spectrum.eigenvalues)) @ coeff


def selection_rule_residual(spectrum: LiouvilleSpectrum) -> dict[int, float]:
    """``max_a |tr(a r_a)|`` per charge block; nonzero only for ``k = 1`` in a U(1) model."""
    amp = np.abs(_trace_with(annihilation(spectrum.space), spectrum.rights))
    return {int(k): float(amp[spectrum.charges == k].max()) for k in np.unique(spectrum.charges)}


def _poles_for(spectrum: LiouvilleSpectrum, x: np.ndarray, k: int = 1) -> PoleData:
    idx = spectrum.block(k)
    a = annihilation(spectrum.space)
    w = _trace_with(a, spectrum.rights[idx]) * _overlap(spectrum.lefts[idx], x)
    return PoleData(spectrum.eigenvalues[idx].copy(), w, k)


def pole_weights(spectrum: LiouvilleSpectrum) -> PoleData:
    """Poles and residues of the retarded Green's function ``G^R``."""
    rho = spectrum.rho_s
    ad = creation(spectrum.space)
    return _poles_for(spectrum, ad @ rho - rho @ ad)


def greater_poles(spectrum: LiouvilleSpectrum) -> PoleData:
    rho = spectrum.rho_s
    return _poles_for(spectrum, creation(spectrum.space) @ rho)


def lesser_poles(spectrum: LiouvilleSpectrum) -> PoleData:
    rho = spectrum.rho_s
    return _poles_for(spectrum, rho @ creation(spectrum.space))


def pole_sum(poles: PoleData, omega, eta: float = 0.0) -> np.ndarray:
    """``sum_a w_a / (omega + Im lambda_a - i (Re lambda_a - eta))``."""
    omega = np.asarray(omega)
    lam = poles.eigenvalues
    denom = omega[..., None] - 1j * lam + 1j * eta
    return (poles.weights / denom).sum(axis=-1)


def retarded_gf(poles: PoleData, omega, eta: float = 0.0) -> np.ndarray:
    """Retarded Green's function on real (or complex) frequencies.

    ``eta`` widens every pole; it is meant for plotting near-closed systems
    only and is never used by the sum rule.
    """
    return pole_sum(poles, omega, eta)


def spectral_function(poles: PoleData, omega, eta: float = 0.0) -> np.ndarray:
    return -retarded_gf(poles, omega, eta).imag / np.pi


def spectral_function_z(poles: PoleData, omega) -> np.ndarray:
    """Same as :func:`spectral_function`, written as Lorentzian plus dispersive parts.

    ``A = -(1/pi) sum z_a(omega) Re(l) / ((omega + Im l)^2 + Re(l)^2)`` with
    ``z_a = Re w + Im w (omega + Im l) / Re l``.
    """
    omega = np.asarray(omega, dtype=float)[..., None]
    lr = poles.eigenvalues.real
    li = poles.eigenvalues.imag
    w = poles.weights
    z = w.real + w.imag * (omega + li) / lr
    return -(z * lr / ((omega + li) ** 2 + lr**2)).sum(axis=-1) / np.pi


def fluctuation_spectra(spectrum: LiouvilleSpectrum, omega, eta: float = 0.0):
    """Greater and lesser spectra ``S_>(omega)``, ``S_<(omega)``.

    ``S_>`` is the Fourier transform of ``<a(t) a^dag(0)>``, ``S_<`` that of
    ``<a^dag(0) a(t)>``, both over the whole time axis.
    """
    s_gt = -2.0 * pole_sum(greater_poles(spectrum), omega, eta).imag
    s_lt = -2.0 * pole_sum(lesser_poles(spectrum), omega, eta).imag
    return s_gt, s_lt


def keldysh_gf(spectrum: LiouvilleSpectrum, omega, eta: float = 0.0) -> np.ndarray:
    """Imaginary part of ``G^K(omega) = -i (S_> + S_<)``; ``G^K`` itself is purely imaginary."""
    s_gt, s_lt = fluctuation_spectra(spectrum, omega, eta)
    return -(s_gt + s_lt)


def effective_temperature(a, gk_im, omega, eps_mask: float = EPS_MASK) -> np.ndarray:
    """Frequency-resolved temperature from ``G^K / (-2 pi i A) = coth(omega / 2 T)``.

    Undefined points (``|A|`` below ``eps_mask * max|A|`` or ``|X| <= 1``) are NaN.
    """
    a = np.asarray(a, dtype=float)
    gk_im = np.asarray(gk_im, dtype=float)
    omega = np.asarray(omega, dtype=float)
    out = np.full(omega.shape, np.nan)
    ok = np.abs(a) >= eps_mask * np.abs(a).max()
    x = np.full(omega.shape, np.nan)
    x[ok] = -gk_im[ok] / (2.0 * np.pi * a[ok])
    ok &= np.abs(x) > 1.0
    arcoth = 0.5 * np.log((x[ok] + 1.0) / (x[ok] - 1.0))
    out[ok] = omega[ok] / (2.0 * arcoth)
    return out


def window_mass(poles: PoleData, lo: float, hi: float) -> complex:
    """Exact integral of the pole-sum spectral function over ``[lo, hi]``.

    Uses the antiderivative ``w log(omega - i lambda)``; ``omega - i lambda``
    stays in the upper half plane, where the principal log is continuous.
    Over the whole real axis the result is ``sum Re w``.
    """
    lam = poles.eigenvalues
    w = poles.weights
    delta = np.log(hi - 1j * lam) - np.log(lo - 1j * lam)
    return float(-(w * delta).sum().imag / np.pi)


def grid_integral(values, omega, poles: PoleData | None = None):
    """Trapezoidal integral of ``values`` over ``omega``.

    If ``poles`` is given, the exact mass outside the grid window is returned
    as a second value, so ``integral + tail`` estimates the full-axis integral.
    """
    omega = np.asarray(omega, dtype=float)
    integral = float(np.trapezoid(values, omega))
    if poles is None:
        return integral
    total = float(poles.weights.real.sum())
    tail = total - window_mass(poles, omega[0], omega[-1])
    return integral, tail


def default_omega_grid(params: VdpParams, points: int = 4001) -> np.ndarray:
    """Uniform grid wide enough to hold every ``k=1`` resonance of the Kerr ladder.

    Resonances sit near ``omega0 + u/2 + u*n``; the window extends to
    ``1.5 * u * n_max`` on the right, ``0.5 * u * n_max`` on the left, padded
    by ``20 * gamma * max(1, r)`` for the linewidths.
    """
    pad = 20.0 * params.gamma * max(1.0, params.r)
    span = abs(params.u) * params.n_max
    lo = params.omega0 - 0.5 * span - pad
    hi = params.omega0 + 1.5 * span + pad
    return np.linspace(lo, hi, points)


def compute_spectral_result(
    spectrum: LiouvilleSpectrum, omega, eta: float = 0.0, eps_mask: float = EPS_MASK
) -> SpectralResult:
    omega = np.asarray(omega, dtype=float)
    poles = pole_weights(spectrum)
    gr = retarded_gf(poles, omega, eta)
    a = -gr.imag / np.pi
    s_gt, s_lt = fluctuation_spectra(spectrum, omega, eta)
    gk_im = -(s_gt + s_lt)
    return SpectralResult(
        omega=omega,
        gr=gr,
        a=a,
        gk_im=gk_im,
        t_eff=effective_temperature(a, gk_im, omega, eps_mask),
        poles=poles,
        s_greater=s_gt,
        s_lesser=s_lt,
    )


def _fmt(x: float) -> str:
    return "" if np.isnan(x) else f"{x:.12e}"


def write_spectrum_csv(result: SpectralResult, path, gamma: float = 1.0) -> None:
    """``omega,a_omega,re_gr,im_gr,im_gk,t_eff`` with frequencies in units of ``gamma``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "a_omega", "re_gr", "im_gr", "im_gk", "t_eff"])
        for row in zip(
            result.omega / gamma,
            result.a * gamma,
            result.gr.real * gamma,
            result.gr.imag * gamma,
            result.gk_im * gamma,
            result.t_eff / gamma,
        ):
            w.writerow([_fmt(x) for x in row])


def write_poles_csv(poles: PoleData, path, gamma: float = 1.0) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "re_lambda", "im_lambda", "re_w", "im_w"])
        for lam, wt in zip(poles.eigenvalues, poles.weights):
            w.writerow(
                [poles.k, _fmt(lam.real / gamma), _fmt(lam.imag / gamma), _fmt(wt.real), _fmt(wt.imag)]
            )
