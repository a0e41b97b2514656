"""Full-diversity 1-level LDPC lattices (Construction A over O_K).

The lattice is Gamma_C = {x in O_K^N : x mod P in C} for a prime P | 2 of
residue degree 1, embedded componentwise by the canonical embedding. Points
are row vectors of length nN laid out block by block: the n conjugates of
the first code symbol, then the n conjugates of the second, and so on.
The code is used in its systematic column order (``code.col_perm``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ArithmeticOverflow, ConstructionError, InvalidInput
from .ldpc import SparseBinaryMatrix, SystematicCode, encode_bits, systematize
from .numfield import (PrimeIdealAbove2, RealNumberField, prime_above_2,
                       residues_mod_prime)

DISC_BITS_CAP = 512
DET_REL_TOL = 1e-6
COORD_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LatticeSpec:
    field: RealNumberField
    prime: PrimeIdealAbove2
    code: SystematicCode
    M_C: np.ndarray
    H_lat: SparseBinaryMatrix

    @property
    def n(self) -> int:
        return self.field.degree

    @property
    def N(self) -> int:
        return self.code.N

    @property
    def k(self) -> int:
        return self.code.k

    @property
    def dim(self) -> int:
        return self.n * self.N

    def descriptor(self) -> dict:
        return {"field": self.field.descriptor,
                "prime_root": int(self.prime.gen_linear_root),
                "code": {"alist_rows": [list(r) for r in self.code.H.row_adj],
                         "N": self.N}}

    def spec_hash(self) -> str:
        return fnv1a_64(canonical_json(self.descriptor()))


class LatticePoint(NamedTuple):
    x: np.ndarray
    c: np.ndarray
    z: np.ndarray


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def fnv1a_64(text: str) -> str:
    h = 0xcbf29ce484222325
    for b in text.encode():
        h ^= b
        h = (h * 0x100000001b3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def kron_pattern(h: SparseBinaryMatrix, n: int) -> SparseBinaryMatrix:
    """H tensor I_n as a sparse matrix."""
    rows = []
    for r in h.row_adj:
        for s in range(n):
            rows.append([j * n + s for j in r])
    return SparseBinaryMatrix.from_rows(rows, h.cols * n)


def generator_matrix(field: RealNumberField, prime: PrimeIdealAbove2, code: SystematicCode) -> np.ndarray:
    """[[I_k (x) M, A (x) M], [0, I_{N-k} (x) DM]] in the row-vector convention."""
    n, N, k = field.degree, code.N, code.k
    M = np.asarray(field.embed_M, dtype=float)
    DM = np.asarray(prime.embed_DM, dtype=float)
    G = np.zeros((n * N, n * N))
    G[:n * k, :n * k] = np.kron(np.eye(k), M)
    G[:n * k, n * k:] = np.kron(code.A.astype(float), M)
    G[n * k:, n * k:] = np.kron(np.eye(N - k), DM)
    return G


def build_spec(field: RealNumberField, prime: PrimeIdealAbove2 | None, code) -> LatticeSpec:
    """Assemble the lattice and check |det M_C|^2 against the discriminant formula.

    ``code`` may be a SystematicCode or a parity-check SparseBinaryMatrix.
    """
    if prime is None:
        prime = prime_above_2(field)
    if prime.residue_degree != 1:
        raise InvalidInput("prime must have residue degree 1")
    if isinstance(code, SparseBinaryMatrix):
        code = systematize(code)
    M_C = generator_matrix(field, prime, code)
    M_C.setflags(write=False)
    spec = LatticeSpec(field=field, prime=prime, code=code, M_C=M_C,
                       H_lat=kron_pattern(code.H, field.degree))
    sign, logdet = np.linalg.slogdet(M_C)
    expected = log_disc_gamma(spec) / 2
    if sign == 0 or abs(logdet - expected) > DET_REL_TOL * max(1.0, abs(expected)):
        raise ConstructionError(
            f"log|det M_C| = {logdet:.12g} but the discriminant formula gives {expected:.12g}")
    return spec


def spec_from_descriptor(field_desc: dict, code_desc, prime_root: int | None = None,
                         base_dir=None) -> LatticeSpec:
    from .ldpc import code_from_descriptor
    from .numfield import field_from_descriptor

    field = field_from_descriptor(field_desc)
    prime = prime_above_2(field, prime_root)
    return build_spec(field, prime, code_from_descriptor(code_desc, base_dir))


def disc_gamma(spec: LatticeSpec) -> int:
    """d_K^N * 4^(N-k) as an exact integer."""
    d = abs(spec.field.disc_dK) ** spec.N * 4 ** (spec.N - spec.k)
    if d.bit_length() > DISC_BITS_CAP:
        raise ArithmeticOverflow(f"discriminant needs {d.bit_length()} bits (cap {DISC_BITS_CAP})")
    return d


def log_disc_gamma(spec: LatticeSpec) -> float:
    return spec.N * math.log(abs(spec.field.disc_dK)) + 2 * (spec.N - spec.k) * math.log(2)


def det_scaled(spec: LatticeSpec) -> float:
    """|det| of the channel lattice 2*Gamma_C: 2^(nN + N - k) d_K^(N/2)."""
    return math.exp(log_det_scaled(spec))


def log_det_scaled(spec: LatticeSpec) -> float:
    return (spec.dim + spec.N - spec.k) * math.log(2) + 0.5 * spec.N * math.log(abs(spec.field.disc_dK))


def encode(spec: LatticeSpec, msg, z) -> LatticePoint:
    """x = c (x) (1,...,1) + per-block z_i @ DM."""
    n, N = spec.n, spec.N
    msg = np.asarray(msg, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    if msg.shape[-1] != spec.k or z.shape[-1] != n * N:
        raise InvalidInput("msg must have length k and z length nN")
    c = encode_bits(spec.code, msg)
    zb = z.reshape(z.shape[:-1] + (N, n))
    x = c[..., :, None].astype(float) + zb.astype(float) @ spec.prime.embed_DM
    return LatticePoint(x=x.reshape(z.shape[:-1] + (n * N,)), c=c, z=z)


def lattice_coords(spec: LatticeSpec, x) -> np.ndarray | None:
    """Integral-basis coordinates of every block, or None if any is non-integral."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise InvalidInput(f"expected a vector of length {spec.dim}")
    blocks = x.reshape(spec.N, spec.n)
    u = np.linalg.solve(spec.field.embed_M.T, blocks.T).T
    ui = np.rint(u)
    if not np.all(np.abs(u - ui) <= COORD_TOL):
        return None
    return ui.astype(np.int64)


def membership(spec: LatticeSpec, x) -> bool:
    """True iff x is a point of the (unscaled) lattice."""
    u = lattice_coords(spec, x)
    if u is None:
        return False
    # (x H_lat^t) per check, evaluated on O_K coordinates, then reduced mod P
    s = np.zeros((spec.H_lat.rows // spec.n, spec.n), dtype=np.int64)
    for i, r in enumerate(spec.code.H.row_adj):
        s[i] = u[list(r)].sum(axis=0)
    return not residues_mod_prime(spec.prime, s).any()


def reduce_bits(spec: LatticeSpec, x) -> np.ndarray | None:
    """Per-block residues of a lattice-coordinate vector (the pre-image codeword)."""
    u = lattice_coords(spec, x)
    return None if u is None else residues_mod_prime(spec.prime, u)


def parity_identity_ok(spec: LatticeSpec) -> bool:
    """Every generator row reduces to a codeword, i.e. M_C H_lat^t = 0 mod P."""
    return all(membership(spec, row) for row in spec.M_C)
