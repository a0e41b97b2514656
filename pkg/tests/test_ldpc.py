import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divlat.errors import InvalidInput, MalformedAlist
from divlat.ldpc import (SparseBinaryMatrix, bp_decode, bp_decode_batch, code_from_descriptor,
                         encode_bits, gen_regular, parse_alist, read_alist, syndrome, systematize,
                         write_alist)

HAMMING = [[1, 1, 0, 1, 1, 0, 0],
           [1, 0, 1, 1, 0, 1, 0],
           [0, 1, 1, 1, 0, 0, 1]]


def codebook(code):
    msgs = np.array(list(itertools.product([0, 1], repeat=code.k)))
    return encode_bits(code, msgs)


def test_alist_round_trip_toy(h_toy):
    text = write_alist(h_toy)
    assert text.splitlines()[:4] == ["4 3", "2 3", "2 1 2 2", "2 3 2"]
    assert parse_alist(text) == h_toy
    assert parse_alist(text).row_adj == ((0, 2), (1, 2, 3), (0, 3))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(1, 10), st.data())
def test_alist_round_trip_random(r, N, data):
    bits = data.draw(st.lists(st.lists(st.integers(0, 1), min_size=N, max_size=N), min_size=r, max_size=r))
    # every row and column needs at least one entry for the alist to be well formed
    for i in range(r):
        bits[i][i % N] = 1
    for j in range(N):
        bits[j % r][j] = 1
    h = SparseBinaryMatrix.from_dense(bits)
    assert parse_alist(write_alist(h)) == h


@pytest.mark.parametrize("text", [
    "",
    "0 3\n0 0\n",
    "4 3\n2 3\n2 1 2 2\n2 3 2\n1 3\n2 0\n1 2\n",            # truncated
    "4 3\n2 3\n2 1 2 2\n2 3 3\n1 3\n2 0\n1 2\n2 3\n1 3 0\n2 3 4\n1 4 0\n",  # degree totals differ
    "4 3\n2 3\n2 1 2 2\n2 3 2\n1 3\n2 0\n1 2\n2 3\n1 3 0\n2 3 4\n1 4 0\n9\n",  # trailing data
    "4 3\n2 3\n2 1 2 2\n2 3 2\n1 3\n2 0\n1 2\n2 3\n1 2 0\n2 3 4\n1 4 0\n",  # row/col lists disagree
    "4 3\n2 3\n2 1 2 2\n2 3 2\n1 x\n",
])
def test_alist_malformed(text):
    with pytest.raises(MalformedAlist):
        parse_alist(text)


def test_read_alist_file(tmp_path, h_toy):
    p = tmp_path / "toy.alist"
    p.write_text(write_alist(h_toy))
    assert read_alist(p) == h_toy
    assert code_from_descriptor({"alist": "toy.alist"}, tmp_path) == h_toy
    assert code_from_descriptor(str(p)) == h_toy


def test_systematize_toy(h_toy):
    code = systematize(h_toy)
    assert code.k == 1
    assert code.col_perm == (0, 1, 2, 3)
    assert encode_bits(code, [1]).tolist() == [1, 0, 1, 1]
    assert sorted(map(tuple, codebook(code).tolist())) == [(0, 0, 0, 0), (1, 0, 1, 1)]
    assert not syndrome(code.H, codebook(code)).any()


def test_systematize_rank_deficient():
    # third row is the sum of the first two
    h = SparseBinaryMatrix.from_dense([[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 1, 0]])
    code = systematize(h)
    assert code.k == 2 and code.H.rows == 2
    words = codebook(code)
    assert not syndrome(code.H, words).any()
    assert len({tuple(w) for w in words.tolist()}) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(2, 9), st.data())
def test_systematize_null_space(r, N, data):
    bits = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=N, max_size=N),
                                       min_size=r, max_size=r)), dtype=np.uint8)
    h = SparseBinaryMatrix.from_dense(bits)
    code = systematize(h)
    rank = code.N - code.k
    assert rank == code.H.rows
    words = codebook(code)
    # codewords in permuted order satisfy the original checks once un-permuted
    orig = np.zeros_like(words)
    orig[:, list(code.col_perm)] = words
    assert not syndrome(h, orig).any()
    # exhaustive null space of the original matrix has the same size
    all_words = np.array(list(itertools.product([0, 1], repeat=N)))
    assert int((~syndrome(h, all_words).any(axis=1)).sum()) == 2 ** code.k


def test_gen_regular_properties():
    h = gen_regular(100, 3, 6, seed=1)
    assert h.shape == (50, 100)
    assert set(h.col_weights()) == {3} and set(h.row_weights()) == {6}
    assert h.count_4cycles() == 0
    assert gen_regular(100, 3, 6, seed=1) == h
    assert gen_regular(100, 3, 6, seed=2) != h


def test_gen_regular_invalid():
    with pytest.raises(InvalidInput):
        gen_regular(10, 3, 4, seed=0)


def test_count_4cycles():
    h = SparseBinaryMatrix.from_dense([[1, 1, 0], [1, 1, 1]])
    assert h.count_4cycles() == 1
    assert SparseBinaryMatrix.from_dense(HAMMING).count_4cycles() == 3


def test_bp_noiseless_all_codewords():
    code = systematize(SparseBinaryMatrix.from_dense(HAMMING))
    words = codebook(code)
    llr = 20.0 * (2.0 * words - 1.0)
    bits, conv, iters, _ = bp_decode_batch(code.H, llr)
    assert conv.all() and (bits == words).all()
    assert iters.max() <= 1


def test_bp_zero_llr_not_converged():
    h = SparseBinaryMatrix.from_dense(HAMMING)
    res = bp_decode(h, np.zeros(7), max_iter=5)
    assert not res.converged
    assert res.bits.tolist() == [0] * 7


def test_bp_corrects_single_erasure_like_error():
    code = systematize(SparseBinaryMatrix.from_dense(HAMMING))
    w = encode_bits(code, [1, 0, 1, 1])
    llr = 4.0 * (2.0 * w - 1.0)
    llr[2] = -llr[2] * 0.25  # one weakly flipped bit
    res = bp_decode(code.H, llr)
    assert res.converged and res.bits.tolist() == w.tolist()


def test_bp_input_validation(h_toy):
    with pytest.raises(InvalidInput):
        bp_decode(h_toy, np.zeros(5))
    with pytest.raises(InvalidInput):
        bp_decode(h_toy, [np.nan, 0, 0, 0])


def test_bp_extreme_llrs_are_clipped(h_toy):
    res = bp_decode(h_toy, [1e300, -1e300, 1e300, 1e300])
    assert res.converged and res.bits.tolist() == [1, 0, 1, 1]
