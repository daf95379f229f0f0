"""Steady states, Liouvillian spectra and Green's functions of driven-dissipative bosonic modes."""

__version__ = "0.1.0"

from .fock import FockSpace, annihilation, creation, kerr_hamiltonian, number
from .lindblad import LindbladModel, VdpParams, build_vdp, liouvillian
from .spectrum import LiouvilleSpectrum, diagonalize, steady_state, vdp_spectrum

__all__ = [
    "FockSpace",
    "LindbladModel",
    "LiouvilleSpectrum",
    "VdpParams",
    "annihilation",
    "build_vdp",
    "creation",
    "diagonalize",
    "kerr_hamiltonian",
    "liouvillian",
    "number",
    "steady_state",
    "vdp_spectrum",
]
