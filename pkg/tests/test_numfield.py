import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divlat.errors import (ArithmeticOverflow, InvalidInput, NoLinearFactor, NotSeparable,
                           NotTotallyReal, UnusableField)
from divlat.numfield import (IntegerPoly, build_cubic_example, build_from_poly, build_quadratic,
                             factor_mod2_linear, field_from_descriptor, hermite_normal_form,
                             monogenic_disc_check, mul_in_OK, poly_discriminant, prime_above_2,
                             residue_mod_prime, residues_mod_prime, trivial_field)


def test_quadratic_10(q10):
    assert q10.n == 2 and q10.disc_dK == 40
    s = math.sqrt(10)
    # ascending roots: -sqrt10 first
    np.testing.assert_allclose(q10.embed_M, [[1, 1], [-s, s]], rtol=1e-14)
    assert np.linalg.det(q10.embed_M) ** 2 == pytest.approx(40, rel=1e-12)
    P = prime_above_2(q10, 0)
    assert P.D.tolist() == [[2, 0], [0, 1]]
    assert P.ram_index == 2 and P.residue_degree == 1


def test_quadratic_unusable_and_invalid():
    with pytest.raises(UnusableField):
        build_quadratic(5)
    with pytest.raises(UnusableField):
        build_quadratic(13)
    with pytest.raises(InvalidInput):
        build_quadratic(12)
    with pytest.raises(InvalidInput):
        build_quadratic(1)


def test_quadratic_17_splits(q17):
    assert q17.minpoly.coeffs == (-4, -1, 1)
    assert q17.disc_dK == 17
    fac = factor_mod2_linear(q17.minpoly)
    assert fac.linear == ((0, 1), (1, 1)) and fac.residual == 0
    for bit in (0, 1):
        P = prime_above_2(q17, bit)
        assert P.ram_index == 1 and P.residue_degree == 1
        assert round(abs(np.linalg.det(P.D))) == 2
    assert prime_above_2(q17).gen_linear_root == 0


def test_cubic_example(cubic):
    np.testing.assert_allclose(cubic.roots, [-1.4812, 0.311107, 2.170086], atol=5e-5)
    assert cubic.disc_dK == 148
    P = prime_above_2(cubic, 1)
    # same lattice as the basis {2, x+1, x^2-x-2}
    ref = hermite_normal_form([[2, 0, 0], [1, 1, 0], [-2, -1, 1]])
    assert P.D.tolist() == ref.tolist()
    assert round(abs(np.linalg.det(P.D))) == 2
    assert P.ram_index == 3


def test_build_from_poly_matches_named_fields(q10, cubic):
    f = build_from_poly([-10, 0, 1])
    np.testing.assert_allclose(f.embed_M, q10.embed_M)
    assert f.disc_dK == q10.disc_dK
    g = build_from_poly(IntegerPoly((1, -3, -1, 1)))
    np.testing.assert_allclose(g.embed_M, cubic.embed_M)


def test_build_from_poly_errors():
    with pytest.raises(NotTotallyReal):
        build_from_poly([2, 3, 0, 1])
    with pytest.raises(NotSeparable):
        build_from_poly([0, 0, 0, 0, 1])  # x^4
    with pytest.raises(InvalidInput):
        build_from_poly([-1, 0, 1])  # x^2 - 1 is reducible


def test_monogenic_disc_check():
    # closed form gives -4*27 - 27*4 = -216
    assert monogenic_disc_check([2, 3, 0, 1]) == -216
    assert monogenic_disc_check([0, 1, 0, 1]) == -4
    assert monogenic_disc_check([1, 1, 0, 0, 1]) == 229
    for f in ([2, 3, 0, 1], [1, 1, 0, 0, 1], [5, -7, 0, 1]):
        assert monogenic_disc_check(f) == poly_discriminant(IntegerPoly(tuple(f)))
    with pytest.raises(InvalidInput):
        monogenic_disc_check([1, 1, 1, 1])


def test_factor_mod2():
    assert factor_mod2_linear([-10, 0, 1]).linear == ((0, 2),)
    fac = factor_mod2_linear([1, -3, -1, 1])
    assert fac.linear == ((1, 3),) and fac.residual == 0
    fac = factor_mod2_linear([1, 1, 0, 1])
    assert fac.linear == () and fac.residual == 3
    with pytest.raises(NoLinearFactor):
        prime_above_2(build_from_poly([1, -3, 0, 1]), None)  # x^3-3x+1 is irreducible mod 2


def test_residue_examples(q10, cubic):
    P = prime_above_2(q10)
    for row in P.D:
        assert residue_mod_prime(q10, P, row) == 0
    assert residue_mod_prime(q10, P, [1, 0]) == 1
    assert residue_mod_prime(q10, P, [3, 1]) == 1
    Pc = prime_above_2(cubic)
    assert residue_mod_prime(cubic, Pc, [1, 0, 0]) == 1
    assert all(residue_mod_prime(cubic, Pc, r) == 0 for r in Pc.D)


def test_residue_is_ring_homomorphism(cubic, rng):
    P = prime_above_2(cubic)
    for _ in range(100):
        a, b = rng.integers(-5, 6, 3), rng.integers(-5, 6, 3)
        ra, rb = residue_mod_prime(cubic, P, a), residue_mod_prime(cubic, P, b)
        assert residue_mod_prime(cubic, P, a + b) == (ra + rb) % 2
        assert residue_mod_prime(cubic, P, mul_in_OK(cubic, a, b)) == ra * rb


def test_vectorized_residues(cubic, rng):
    P = prime_above_2(cubic)
    v = rng.integers(-20, 21, (50, 3))
    assert residues_mod_prime(P, v).tolist() == [residue_mod_prime(cubic, P, r) for r in v]


def test_mul_examples(q10, cubic):
    assert mul_in_OK(q10, (1, 0), (0, 1)) == (0, 1)
    assert mul_in_OK(q10, (0, 1), (0, 1)) == (10, 0)
    assert mul_in_OK(cubic, (0, 1, 0), (0, 0, 1)) == (-1, 3, 1)


def test_mul_commutative_associative(cubic, rng):
    for _ in range(100):
        a, b, c = (tuple(rng.integers(-5, 6, 3)) for _ in range(3))
        assert mul_in_OK(cubic, a, b) == mul_in_OK(cubic, b, a)
        assert mul_in_OK(cubic, mul_in_OK(cubic, a, b), c) == mul_in_OK(cubic, a, mul_in_OK(cubic, b, c))


def test_mul_matches_embedding(cubic, rng):
    for _ in range(20):
        a, b = rng.integers(-5, 6, 3), rng.integers(-5, 6, 3)
        prod = cubic.embed(mul_in_OK(cubic, a, b))
        np.testing.assert_allclose(prod, cubic.embed(a) * cubic.embed(b), rtol=1e-9, atol=1e-9)


def test_mul_overflow(q10):
    big = 2 ** 40
    with pytest.raises(ArithmeticOverflow):
        mul_in_OK(q10, (big, big), (big, big))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=7),
       st.randoms(use_true_random=False))
def test_hnf_independent_of_row_order(rows, rnd):
    if np.linalg.matrix_rank(np.array(rows, dtype=float)) < 3:
        return
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    assert hermite_normal_form(rows).tolist() == hermite_normal_form(shuffled).tolist()


@pytest.mark.parametrize("make", [lambda: build_quadratic(10), lambda: build_quadratic(17),
                                  lambda: build_quadratic(3), lambda: build_quadratic(2),
                                  build_cubic_example])
def test_field_invariants(make):
    K = make()
    assert abs(np.linalg.det(K.embed_M)) == pytest.approx(math.sqrt(abs(K.disc_dK)), rel=1e-9)
    G = K.trace_gram()
    np.testing.assert_allclose(G, np.rint(G), atol=1e-9)
    fac = factor_mod2_linear(K.minpoly)
    assert sum(e for _, e in fac.linear) + fac.residual == K.n
    P = prime_above_2(K)
    np.testing.assert_allclose(P.embed_DM, P.D @ K.embed_M, atol=1e-12)
    # embedded prime basis pulled back lands in P
    back = np.rint(K.coords_of(P.embed_DM)).astype(int)
    assert residues_mod_prime(P, back).tolist() == [0] * K.n


def test_descriptors():
    assert field_from_descriptor({"kind": "quadratic", "m": 10}).disc_dK == 40
    assert field_from_descriptor({"kind": "cubic-example"}).disc_dK == 148
    assert field_from_descriptor({"kind": "poly", "coeffs": [1, -3, -1, 1]}).disc_dK == 148
    assert field_from_descriptor({"kind": "rational"}).n == 1
    with pytest.raises(InvalidInput):
        field_from_descriptor({"kind": "quartic"})


def test_trivial_field_prime():
    P = prime_above_2(trivial_field())
    assert P.D.tolist() == [[2]]


def test_limits():
    with pytest.raises(InvalidInput):
        build_from_poly([1, 0, 0, 0, 0, 0, 1])  # degree 6
    with pytest.raises(InvalidInput):
        build_from_poly([-(10 ** 7), 0, 1])


def test_integer_poly_must_be_monic():
    with pytest.raises(InvalidInput):
        IntegerPoly((1, 2))
