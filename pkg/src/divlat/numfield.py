"""Totally real monogenic number fields and their primes above 2.

Only the arithmetic needed to build Construction A lattices over a field
K = Q(theta) with O_K = Z[theta] lives here: embeddings, the field
discriminant, reduction of the minimal polynomial modulo 2, and Z-bases of
the primes P | 2 with O_K / P = F_2.

All element coordinates are with respect to the power basis
{1, theta, ..., theta^(n-1)}, which is also the integral basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    ArithmeticOverflow,
    InvalidInput,
    NoLinearFactor,
    NotSeparable,
    NotTotallyReal,
    UnusableField,
)

MAX_DEGREE = 5
MAX_COEFF = 10**6
_INT64_MAX = 2**63 - 1


def _check_int64(values) -> None:
    for v in values:
        if abs(v) > _INT64_MAX:
            raise ArithmeticOverflow(f"integer {v} does not fit in 64 bits")


@dataclass(frozen=True)
class IntegerPoly:
    """Monic integer polynomial, coefficients lowest degree first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise InvalidInput("polynomial degree must be at least 1")
        if coeffs[-1] != 1:
            raise InvalidInput("polynomial must be monic")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}{mono}"
            terms.append(("-" if c < 0 else "+") + s)
        out = "".join(terms)
        return out[1:] if out.startswith("+") else out


def poly_discriminant(f: IntegerPoly) -> int:
    """Exact discriminant of a monic polynomial via the Sylvester resultant."""
    n = f.degree
    if n == 1:
        return 1
    p = list(reversed(f.coeffs))  # highest degree first
    dp = [c * (n - i) for i, c in enumerate(p[:-1])]
    size = 2 * n - 1
    rows = []
    for i in range(n - 1):
        rows.append([0] * i + p + [0] * (size - len(p) - i))
    for i in range(n):
        rows.append([0] * i + dp + [0] * (size - len(dp) - i))
    res = _det_exact(rows)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    return sign * res


def _det_exact(rows: list[list[int]]) -> int:
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                q = a[r][c] / a[c][c]
                a[r] = [x - q * y for x, y in zip(a[r], a[c])]
    assert det.denominator == 1
    return int(det)


@dataclass(frozen=True, eq=False)
class RealNumberField:
    """Degree-n totally real field with power integral basis.

    ``embed_M[i, j]`` is the j-th real embedding of the i-th basis element,
    embeddings ordered by ascending root of the minimal polynomial.
    """

    minpoly: IntegerPoly
    roots: np.ndarray
    basis_coords: tuple[tuple[Fraction, ...], ...]
    embed_M: np.ndarray
    disc_dK: int
    descriptor: dict = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    n = degree

    def trace_gram(self) -> np.ndarray:
        return self.embed_M @ self.embed_M.T

    def embed(self, coords: Sequence[int]) -> np.ndarray:
        """Canonical embedding of the element with the given coordinates."""
        return np.asarray(coords, dtype=float) @ self.embed_M

    def coords_of(self, x: np.ndarray) -> np.ndarray:
        """Real coordinates of an embedded vector (inverse of ``embed``)."""
        return np.linalg.solve(self.embed_M.T, np.asarray(x, dtype=float).T).T


@dataclass(frozen=True, eq=False)
class PrimeIdealAbove2:
    """Prime P | 2 of residue degree 1; rows of ``D`` are a Z-basis of P."""

    gen_linear_root: int
    D: np.ndarray
    embed_DM: np.ndarray
    ram_index: int
    residue_degree: int = 1


@dataclass(frozen=True)
class Mod2Factorization:
    linear: tuple[tuple[int, int], ...]  # (root bit, multiplicity)
    residual: int

    def multiplicity(self, bit: int) -> int:
        return dict(self.linear).get(bit, 0)


def _polish_roots(f: IntegerPoly, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    p = np.array(list(reversed(f.coeffs)), dtype=float)
    dp = np.polyder(p)
    r = roots.copy()
    for _ in range(steps):
        d = np.polyval(dp, r)
        ok = d != 0
        r[ok] -= np.polyval(p, r[ok]) / d[ok]
    return r


def _check_limits(f: IntegerPoly) -> None:
    if f.degree > MAX_DEGREE:
        raise InvalidInput(f"degree {f.degree} exceeds the supported maximum {MAX_DEGREE}")
    if max(abs(c) for c in f.coeffs) > MAX_COEFF:
        raise InvalidInput("coefficient magnitude exceeds 10^6")


def build_from_poly(f: IntegerPoly | Sequence[int], descriptor: dict | None = None) -> RealNumberField:
    """Field generated by a root of ``f``, assuming Z[theta] is the maximal order.

    Monogenicity is the caller's responsibility; only reality, separability
    and (for degree <= 3) the absence of rational roots are checked.
    """
    if not isinstance(f, IntegerPoly):
        f = IntegerPoly(tuple(f))
    _check_limits(f)
    n = f.degree
    if n <= 3 and n > 1:
        c0 = f.coeffs[0]
        cands = {0} if c0 == 0 else {d for k in range(1, abs(c0) + 1) if c0 % k == 0 for d in (k, -k)}
        if any(f(r) == 0 for r in cands):
            raise InvalidInput(f"{f} has a rational root and is reducible")
    disc = poly_discriminant(f)
    if disc == 0:
        raise NotSeparable(f"{f} has a repeated root")

    if n == 1:
        roots = np.array([-float(f.coeffs[0])])
    else:
        comp = np.zeros((n, n))
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = [-c for c in f.coeffs[:-1]]
        eig = np.linalg.eigvals(comp)
        scale = np.maximum(1.0, np.abs(eig))
        if np.any(np.abs(eig.imag) > 1e-7 * scale):
            raise NotTotallyReal(f"{f} has non-real roots")
        roots = np.sort(_polish_roots(f, eig.real))

    if disc < 0:  # odd number of complex pairs; eigen test above should already have caught it
        raise NotTotallyReal(f"{f} has negative discriminant")

    basis = tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    M = np.vander(roots, n, increasing=True).T.copy()
    M.setflags(write=False)
    roots.setflags(write=False)
    desc = descriptor if descriptor is not None else {"kind": "poly", "coeffs": list(f.coeffs)}
    return RealNumberField(minpoly=f, roots=roots, basis_coords=basis, embed_M=M,
                           disc_dK=disc, descriptor=desc)


def _is_squarefree(m: int) -> bool:
    k = 2
    while k * k <= m:
        if m % (k * k) == 0:
            return False
        k += 1
    return True


def build_quadratic(m: int) -> RealNumberField:
    """Q(sqrt m) for square-free m > 1 having a prime above 2 of degree 1."""
    if m <= 1 or not _is_squarefree(m):
        raise InvalidInput(f"m={m} must be a square-free integer > 1")
    if m % 8 == 5:
        raise UnusableField(
            f"Q(sqrt {m}): m = 5 mod 8, so (m-1)/4 is odd and 2 stays inert; "
            "no prime above 2 has residue field F_2")
    if m % 4 in (2, 3):
        f = IntegerPoly((-m, 0, 1))
    else:
        f = IntegerPoly((-(m - 1) // 4, -1, 1))
    return build_from_poly(f, descriptor={"kind": "quadratic", "m": m})


def build_cubic_example() -> RealNumberField:
    """The totally real cubic field of discriminant 148, x^3 - x^2 - 3x + 1."""
    return build_from_poly(IntegerPoly((1, -3, -1, 1)), descriptor={"kind": "cubic-example"})


def field_from_descriptor(desc: dict) -> RealNumberField:
    kind = desc.get("kind")
    if kind == "quadratic":
        return build_quadratic(int(desc["m"]))
    if kind == "cubic-example":
        return build_cubic_example()
    if kind == "poly":
        return build_from_poly(IntegerPoly(tuple(desc["coeffs"])))
    if kind == "rational":
        return trivial_field()
    raise InvalidInput(f"unknown field descriptor {desc!r}")


def monogenic_disc_check(f: IntegerPoly | Sequence[int]) -> int:
    """Discriminant of x^3 + ax + b or x^4 + ax + b by the closed forms."""
    if not isinstance(f, IntegerPoly):
        f = IntegerPoly(tuple(f))
    c = f.coeffs
    if f.degree == 3 and c[2] == 0:
        a, b = c[1], c[0]
        return -4 * a**3 - 27 * b**2
    if f.degree == 4 and c[2] == 0 and c[3] == 0:
        a, b = c[1], c[0]
        return -27 * a**4 + 256 * b**3
    raise InvalidInput(f"{f} is not of shape x^3+ax+b or x^4+ax+b")


def factor_mod2_linear(f: IntegerPoly | Sequence[int]) -> Mod2Factorization:
    """Multiplicities of x and x+1 in f mod 2; the rest is reported as residual degree."""
    if not isinstance(f, IntegerPoly):
        f = IntegerPoly(tuple(f))
    poly = [c % 2 for c in f.coeffs]
    linear = []
    for bit in (0, 1):
        mult = 0
        while len(poly) > 1 and _eval_mod2(poly, bit) == 0:
            poly = _divide_linear_mod2(poly, bit)
            mult += 1
        if mult:
            linear.append((bit, mult))
    return Mod2Factorization(tuple(linear), len(poly) - 1)


def _eval_mod2(poly: list[int], x: int) -> int:
    return poly[0] % 2 if x == 0 else sum(poly) % 2


def _divide_linear_mod2(poly: list[int], root: int) -> list[int]:
    # synthetic division of poly (ascending) by (x + root) over F_2
    n = len(poly) - 1
    q = [0] * n
    q[n - 1] = poly[n]
    for k in range(n - 1, 0, -1):
        q[k - 1] = (poly[k] + root * q[k]) % 2
    return q


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> np.ndarray:
    """Lower-triangular HNF of the lattice spanned by integer ``rows``.

    The result has positive diagonal entries and, below the diagonal,
    entries reduced into [0, pivot) of their column. It is unique for the
    lattice, hence independent of the ordering of ``rows``.
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        raise InvalidInput("empty generator set")
    n = len(a[0])
    pivots: list[list[int] | None] = [None] * n
    work = a
    for j in range(n - 1, -1, -1):
        # gcd-combine column j across the working rows
        while True:
            nz = [r for r in work if r[j] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda r: abs(r[j]))
            p = nz[0]
            for r in nz[1:]:
                q = r[j] // p[j]
                for t in range(n):
                    r[t] -= q * p[t]
            _check_int64(x for r in nz for x in r)
        nz = [r for r in work if r[j] != 0]
        if not nz:
            raise InvalidInput("generators do not span a full-rank lattice")
        p = nz[0]
        if p[j] < 0:
            p[:] = [-x for x in p]
        pivots[j] = p
        work = [r for r in work if r is not p]
    D = [list(p) for p in pivots]
    for i in range(n):
        for j in range(i - 1, -1, -1):
            q = D[i][j] // D[j][j]
            if q:
                D[i] = [x - q * y for x, y in zip(D[i], D[j])]
    _check_int64(x for r in D for x in r)
    return np.array(D, dtype=np.int64)


def mul_in_OK(field: RealNumberField, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Product of two elements given by power-basis coordinates."""
    n = field.degree
    if len(a) != n or len(b) != n:
        raise InvalidInput("coordinate vectors must have length n")
    # multiplication by b as a matrix: rows are b * theta^i, built with the companion shift
    f = field.minpoly.coeffs
    row = [int(x) for x in b]
    acc = [0] * n
    for ai in a:
        ai = int(ai)
        if ai:
            acc = [s + ai * r for s, r in zip(acc, row)]
        top = row[-1]
        row = [0] + row[:-1]
        if top:
            row = [r - top * c for r, c in zip(row, f[:-1])]
        _check_int64(acc)
        _check_int64(row)
    return tuple(acc)


def prime_above_2(field: RealNumberField, root_bit: int | None = None) -> PrimeIdealAbove2:
    """Z-basis of P = 2 O_K + (theta + root_bit) O_K in Hermite normal form.

    With ``root_bit=None`` the smallest available root of f mod 2 is used.
    """
    fac = factor_mod2_linear(field.minpoly)
    if root_bit is None:
        if not fac.linear:
            raise NoLinearFactor(f"{field.minpoly} has no linear factor mod 2")
        root_bit = fac.linear[0][0]
    e = fac.multiplicity(root_bit)
    if e == 0:
        raise NoLinearFactor(f"x + {root_bit} does not divide {field.minpoly} mod 2")
    n = field.degree
    gens = []
    # coordinates of theta + root_bit
    gen = [root_bit, 1] + [0] * (n - 2) if n > 1 else [root_bit - field.minpoly.coeffs[0]]
    for i in range(n):
        w = [int(i == j) for j in range(n)]
        gens.append([2 * x for x in w])
        gens.append(list(mul_in_OK(field, gen, w)))
    D = hermite_normal_form(gens)
    det = round(abs(np.linalg.det(D.astype(float))))
    if det != 2:
        raise UnusableField(f"ideal index {det} != 2 for root bit {root_bit}")
    D.setflags(write=False)
    DM = D.astype(float) @ field.embed_M
    DM.setflags(write=False)
    return PrimeIdealAbove2(gen_linear_root=root_bit, D=D, embed_DM=DM, ram_index=e)


def residue_mod_prime(field: RealNumberField, prime: PrimeIdealAbove2, v: Sequence[int]) -> int:
    """Image in O_K / P = F_2 of the element with integer coordinates ``v``."""
    n = field.degree
    if len(v) != n:
        raise InvalidInput("coordinate vector must have length n")
    r = [int(x) for x in v]
    D = prime.D
    for j in range(n - 1, -1, -1):
        q = r[j] // int(D[j, j])
        if q:
            r = [x - q * int(y) for x, y in zip(r, D[j])]
    # exactly one pivot equals 2; the remainder sits in that coordinate
    return int(sum(r) % 2)


def residues_mod_prime(prime: PrimeIdealAbove2, coords: np.ndarray) -> np.ndarray:
    """Vectorized ``residue_mod_prime`` over the last axis of an integer array."""
    r = np.array(coords, dtype=np.int64, copy=True)
    D = prime.D
    n = D.shape[0]
    for j in range(n - 1, -1, -1):
        q = np.floor_divide(r[..., j], D[j, j])
        r -= q[..., None] * D[j]
    return (r.sum(axis=-1) % 2).astype(np.uint8)


def trivial_field() -> RealNumberField:
    """K = Q, used to recover binary Construction A."""
    roots = np.array([0.0])
    M = np.array([[1.0]])
    roots.setflags(write=False)
    M.setflags(write=False)
    return RealNumberField(minpoly=IntegerPoly((0, 1)), roots=roots,
                           basis_coords=((Fraction(1),),), embed_M=M, disc_dK=1,
                           descriptor={"kind": "rational"})


def sqrt_abs_disc(field: RealNumberField) -> float:
    return math.sqrt(abs(field.disc_dK))
