"""Full-diversity 1-level LDPC lattices from totally real number fields.

Submodules: ``numfield`` (fields, primes above 2), ``ldpc`` (binary codes
and BP), ``latcore`` (lattice construction), ``clp`` (closest point search),
``channel`` (block fading), ``decoder`` (two-stage decoding), ``analysis``
(outage, sphere bound, FER) and ``cli``.
"""
from .analysis import FerCurve, SimConfig, diversity_slope, fer_sim, poltyrev_outage, slb
from .channel import sample_fading, transmit
from .decoder import full_decode, mi_ml
from .errors import DivlatError
from .latcore import LatticeSpec, build_spec, det_scaled, disc_gamma, encode, membership
from .ldpc import SparseBinaryMatrix, gen_regular, parse_alist, systematize, write_alist
from .numfield import build_cubic_example, build_quadratic, prime_above_2

__all__ = [
    "DivlatError", "FerCurve", "LatticeSpec", "SimConfig", "SparseBinaryMatrix",
    "build_cubic_example", "build_quadratic", "build_spec", "det_scaled", "disc_gamma",
    "diversity_slope", "encode", "fer_sim", "full_decode", "gen_regular", "membership",
    "mi_ml", "parse_alist", "poltyrev_outage", "prime_above_2", "sample_fading", "slb",
    "systematize", "transmit", "write_alist",
]
