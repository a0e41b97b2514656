"""
Building a full-diversity LDPC lattice
======================================

A lattice from a small binary code and a totally real cubic field: the
field, its prime above 2, the parity-check pattern H (x) I_3, and a few
encoded points checked for membership.
"""
import numpy as np

from divlat import build_cubic_example, build_spec, encode, membership
from divlat.latcore import det_scaled, disc_gamma
from divlat.ldpc import SparseBinaryMatrix
from divlat.numfield import factor_mod2_linear, prime_above_2

##############################################################################
# The field is Q(a) with a a root of x^3 - x^2 - 3x + 1. All three roots are
# real, so every nonzero element has three nonzero conjugates.

K = build_cubic_example()
print("roots:", np.round(K.roots, 6))
print("d_K =", K.disc_dK)
print("x^3 - x^2 - 3x + 1 mod 2:", factor_mod2_linear(K.minpoly))

##############################################################################
# 2 is totally ramified, so there is one prime P above 2 with residue field
# F_2. D holds integral-basis coordinates of a Z-basis of P.

P = prime_above_2(K)
print("D =\n", P.D)

##############################################################################
# A (4, 1) code with three checks. The lattice parity-check matrix repeats
# every check once per conjugate.

H = SparseBinaryMatrix.from_dense([[1, 0, 1, 0], [0, 1, 1, 1], [1, 0, 0, 1]])
spec = build_spec(K, P, H)
print(spec.H_lat.to_dense())
print(f"k = {spec.k}, disc = {disc_gamma(spec):,}, det of 2*Gamma = {det_scaled(spec):.6g}")

##############################################################################
# Encoding adds a prime-ideal element to every code symbol. Points built this
# way are lattice members; shifting one coordinate breaks membership.

rng = np.random.default_rng(0)
pt = encode(spec, [1], rng.integers(-2, 3, spec.dim))
print("c =", pt.c, " member:", membership(spec, pt.x))
x = pt.x.copy()
x[0] += 0.5
print("perturbed member:", membership(spec, x))
