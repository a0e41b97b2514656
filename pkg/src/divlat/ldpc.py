"""Binary LDPC codes: alist I/O, regular code generation, encoding, BP decoding.

LLRs follow the convention log(P(bit=1) / P(bit=0)), so a positive value
favours a one. The sum-product decoder converts to the textbook
log(P0/P1) form internally.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numba
import numpy as np

from .errors import InvalidInput, MalformedAlist

LLR_CLIP = 50.0
TANH_CLAMP = 19.0
DEFAULT_MAX_ITER = 50


@dataclass(frozen=True, eq=False)
class SparseBinaryMatrix:
    """r x N binary matrix stored as row and column adjacency lists."""

    rows: int
    cols: int
    row_adj: tuple[tuple[int, ...], ...]
    col_adj: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.row_adj) != self.rows or len(self.col_adj) != self.cols:
            raise InvalidInput("adjacency list lengths do not match the shape")
        for adj in (self.row_adj, self.col_adj):
            for lst in adj:
                if list(lst) != sorted(set(lst)):
                    raise InvalidInput("adjacency lists must be sorted without duplicates")
        edges_r = {(i, j) for i, lst in enumerate(self.row_adj) for j in lst}
        edges_c = {(i, j) for j, lst in enumerate(self.col_adj) for i in lst}
        if edges_r != edges_c:
            raise InvalidInput("row and column adjacency lists disagree")

    @classmethod
    def from_rows(cls, row_adj: Sequence[Sequence[int]], cols: int) -> "SparseBinaryMatrix":
        rows = [tuple(sorted(set(int(j) for j in r))) for r in row_adj]
        col_adj = [[] for _ in range(cols)]
        for i, r in enumerate(rows):
            for j in r:
                if not 0 <= j < cols:
                    raise InvalidInput(f"column index {j} out of range")
                col_adj[j].append(i)
        return cls(len(rows), cols, tuple(rows), tuple(tuple(c) for c in col_adj))

    @classmethod
    def from_dense(cls, dense) -> "SparseBinaryMatrix":
        a = np.asarray(dense) % 2
        if a.ndim != 2:
            raise InvalidInput("dense matrix must be 2-D")
        return cls.from_rows([np.flatnonzero(row).tolist() for row in a], a.shape[1])

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.row_adj):
            a[i, list(r)] = 1
        return a

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row_weights(self) -> list[int]:
        return [len(r) for r in self.row_adj]

    def col_weights(self) -> list[int]:
        return [len(c) for c in self.col_adj]

    def permute_columns(self, perm: Sequence[int]) -> "SparseBinaryMatrix":
        """Matrix whose column i is column ``perm[i]`` of this one."""
        inv = np.empty(self.cols, dtype=np.int64)
        inv[np.asarray(perm)] = np.arange(self.cols)
        return SparseBinaryMatrix.from_rows([[int(inv[j]) for j in r] for r in self.row_adj], self.cols)

    def select_rows(self, idx: Sequence[int]) -> "SparseBinaryMatrix":
        return SparseBinaryMatrix.from_rows([self.row_adj[i] for i in idx], self.cols)

    def __eq__(self, other):
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and self.row_adj == other.row_adj

    def __hash__(self):
        return hash((self.shape, self.row_adj))

    def count_4cycles(self) -> int:
        """Number of column pairs sharing two or more rows."""
        a = self.to_dense().astype(np.int64)
        overlap = a.T @ a
        iu = np.triu_indices(self.cols, 1)
        pairs = overlap[iu]
        return int(np.sum(pairs * (pairs - 1) // 2))


# ---------------------------------------------------------------- alist

def write_alist(h: SparseBinaryMatrix) -> str:
    """MacKay alist text (1-based indices, zero padded)."""
    cw = h.col_weights()
    rw = h.row_weights()
    mcw, mrw = max(cw, default=0), max(rw, default=0)
    lines = [f"{h.cols} {h.rows}", f"{mcw} {mrw}",
             " ".join(map(str, cw)), " ".join(map(str, rw))]
    for c in h.col_adj:
        idx = [i + 1 for i in c] + [0] * (mcw - len(c))
        lines.append(" ".join(map(str, idx)))
    for r in h.row_adj:
        idx = [j + 1 for j in r] + [0] * (mrw - len(r))
        lines.append(" ".join(map(str, idx)))
    return "\n".join(lines) + "\n"


def parse_alist(text: str) -> SparseBinaryMatrix:
    try:
        tok = [int(t) for t in text.split()]
    except ValueError as exc:
        raise MalformedAlist(f"non-integer token: {exc}") from None
    pos = 0

    def take(k):
        nonlocal pos
        if pos + k > len(tok):
            raise MalformedAlist("unexpected end of alist data")
        out = tok[pos:pos + k]
        pos += k
        return out

    N, M = take(2)
    if N <= 0 or M <= 0:
        raise MalformedAlist(f"degenerate dimensions {N} x {M}")
    mcw, mrw = take(2)
    cw = take(N)
    rw = take(M)
    if max(cw) != mcw or max(rw) != mrw:
        raise MalformedAlist("maximum degrees disagree with the degree lists")
    if sum(cw) != sum(rw):
        raise MalformedAlist("column and row degree totals differ")
    col_adj = []
    for j in range(N):
        idx = take(mcw)
        ent = [i for i in idx if i != 0]
        if len(ent) != cw[j] or any(i < 1 or i > M for i in ent) or any(idx[len(ent):]):
            raise MalformedAlist(f"column {j + 1} list inconsistent with its degree")
        col_adj.append(sorted(i - 1 for i in ent))
    row_adj = []
    for i in range(M):
        idx = take(mrw)
        ent = [j for j in idx if j != 0]
        if len(ent) != rw[i] or any(j < 1 or j > N for j in ent) or any(idx[len(ent):]):
            raise MalformedAlist(f"row {i + 1} list inconsistent with its degree")
        row_adj.append(sorted(j - 1 for j in ent))
    if pos != len(tok):
        raise MalformedAlist("trailing data after alist body")
    try:
        h = SparseBinaryMatrix(M, N, tuple(map(tuple, row_adj)), tuple(map(tuple, col_adj)))
    except InvalidInput as exc:
        raise MalformedAlist(str(exc)) from None
    return h


def read_alist(path) -> SparseBinaryMatrix:
    return parse_alist(Path(path).read_text())


# ---------------------------------------------------------------- generation

def gen_regular(N: int, wc: int, wr: int, seed: int, attempts: int = 100) -> SparseBinaryMatrix:
    """Random (wc, wr)-regular parity-check matrix of length N.

    Columns are filled one at a time, choosing rows with the most spare
    capacity and avoiding rows that would close a 4-cycle. Up to
    ``attempts`` draws are made and the first one without 4-cycles (or the
    one with the fewest) is kept.
    """
    if wc < 2 or wr < 2 or N < wr:
        raise InvalidInput("need wc >= 2, wr >= 2 and N >= wr")
    if (N * wc) % wr:
        raise InvalidInput(f"N*wc = {N * wc} is not divisible by wr = {wr}")
    M = N * wc // wr
    if wc > M:
        raise InvalidInput("column weight exceeds the number of rows")
    rng = np.random.default_rng(seed)
    best, best_cycles = None, None
    for _ in range(attempts):
        h = _draw_regular(N, M, wc, wr, rng)
        cyc = h.count_4cycles()
        if best is None or cyc < best_cycles:
            best, best_cycles = h, cyc
        if cyc == 0:
            break
    return best


def _draw_regular(N, M, wc, wr, rng) -> SparseBinaryMatrix:
    cap = np.full(M, wr, dtype=np.int64)
    nbr = np.zeros((M, M), dtype=bool)  # rows already sharing a column
    rows_of_col = []
    for _ in range(N):
        chosen: list[int] = []
        for _ in range(wc):
            free = np.ones(M, dtype=bool)
            free[chosen] = False
            clean = free.copy()
            for r in chosen:
                clean &= ~nbr[r]
            pool = None
            for mask in (clean & (cap > 0), free & (cap > 0), free):
                if mask.any():
                    pool = np.flatnonzero(mask)
                    break
            top = pool[cap[pool] == cap[pool].max()]
            r = int(rng.choice(top))
            chosen.append(r)
            cap[r] -= 1
        for a in chosen:
            for b in chosen:
                if a != b:
                    nbr[a, b] = True
        rows_of_col.append(chosen)
    row_adj = [[] for _ in range(M)]
    for j, rs in enumerate(rows_of_col):
        for r in rs:
            row_adj[r].append(j)
    return SparseBinaryMatrix.from_rows(row_adj, N)


# ---------------------------------------------------------------- systematic form

@dataclass(frozen=True, eq=False)
class SystematicCode:
    """Code with generator [I_k | A] in the column order ``col_perm``.

    ``H`` holds a maximal independent subset of the original parity checks,
    with columns permuted so that position i is original column col_perm[i].
    """

    N: int
    k: int
    A: np.ndarray
    col_perm: tuple[int, ...]
    H: SparseBinaryMatrix

    @property
    def generator(self) -> np.ndarray:
        return np.hstack([np.eye(self.k, dtype=np.uint8), self.A]).astype(np.uint8)


def _rank_rows(dense: np.ndarray) -> list[int]:
    """Indices of a maximal linearly independent subset of rows, greedy in order."""
    basis: dict[int, int] = {}  # leading bit -> reduced row
    keep = []
    for i, row in enumerate(dense):
        v = int("".join(map(str, row.tolist())) or "0", 2)
        while v:
            lead = v.bit_length() - 1
            if lead in basis:
                v ^= basis[lead]
            else:
                basis[lead] = v
                keep.append(i)
                break
    return keep


def systematize(h: SparseBinaryMatrix) -> SystematicCode:
    """Gaussian elimination over F_2 with pivots taken from the rightmost columns."""
    dense = h.to_dense()
    N = h.cols
    keep = _rank_rows(dense)
    work = dense[keep].copy()
    r = work.shape[0]
    pivots = []
    row = 0
    for col in range(N - 1, -1, -1):
        if row == r:
            break
        cand = np.flatnonzero(work[row:, col]) + row
        if cand.size == 0:
            continue
        p = cand[0]
        if p != row:
            work[[row, p]] = work[[p, row]]
        others = np.flatnonzero(work[:, col])
        others = others[others != row]
        work[others] ^= work[row]
        pivots.append((col, row))
        row += 1
    pivots.sort()
    parity_cols = [c for c, _ in pivots]
    pivot_rows = [rw for _, rw in pivots]
    info_cols = [c for c in range(N) if c not in set(parity_cols)]
    perm = tuple(info_cols + parity_cols)
    B = work[pivot_rows][:, info_cols]
    A = np.ascontiguousarray(B.T.astype(np.uint8))
    H = h.select_rows(keep).permute_columns(perm)
    return SystematicCode(N=N, k=len(info_cols), A=A, col_perm=perm, H=H)


def encode_bits(code: SystematicCode, msg) -> np.ndarray:
    m = np.asarray(msg, dtype=np.int64) % 2
    if m.shape[-1] != code.k:
        raise InvalidInput(f"message length {m.shape[-1]} != k = {code.k}")
    parity = (m @ code.A.astype(np.int64)) % 2
    return np.concatenate([m, parity], axis=-1).astype(np.uint8)


def syndrome(h: SparseBinaryMatrix, bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64) % 2
    return ((b @ h.to_dense().T.astype(np.int64)) % 2).astype(np.uint8)


# ---------------------------------------------------------------- belief propagation

class BPResult(NamedTuple):
    bits: np.ndarray
    converged: bool
    iterations: int


class _Graph(NamedTuple):
    edge_var: np.ndarray
    check_ptr: np.ndarray
    var_ptr: np.ndarray
    var_edges: np.ndarray


_graph_cache: "weakref.WeakKeyDictionary[SparseBinaryMatrix, _Graph]" = weakref.WeakKeyDictionary()


def _tanner(h: SparseBinaryMatrix) -> _Graph:
    hit = _graph_cache.get(h)
    if hit is not None:
        return hit
    edge_var = np.array([j for r in h.row_adj for j in r], dtype=np.int64)
    check_ptr = np.zeros(h.rows + 1, dtype=np.int64)
    check_ptr[1:] = np.cumsum(h.row_weights())
    order = np.argsort(edge_var, kind="stable")
    var_ptr = np.zeros(h.cols + 1, dtype=np.int64)
    var_ptr[1:] = np.cumsum(np.bincount(edge_var, minlength=h.cols))
    g = _Graph(edge_var, check_ptr, var_ptr, order.astype(np.int64))
    _graph_cache[h] = g
    return g


def bp_decode(h: SparseBinaryMatrix, llr, max_iter: int = DEFAULT_MAX_ITER) -> BPResult:
    """Flooding sum-product decoding of one frame.

    ``converged`` is set when the hard decision satisfies every check and no
    posterior is exactly zero (undecided); bits with zero posterior decode
    to 0.
    """
    llr = np.asarray(llr, dtype=float)
    if llr.shape != (h.cols,):
        raise InvalidInput(f"llr length {llr.shape} does not match N = {h.cols}")
    bits, conv, iters, _ = bp_decode_batch(h, llr[None, :], max_iter)
    return BPResult(bits[0], bool(conv[0]), int(iters[0]))


def bp_decode_batch(h: SparseBinaryMatrix, llr, max_iter: int = DEFAULT_MAX_ITER):
    """Decode F frames at once.

    Returns ``(bits, converged, iterations, posterior)`` with arrays of
    shape (F, N), (F,), (F,), (F, N); posteriors use the package LLR sign.
    """
    llr = np.ascontiguousarray(np.atleast_2d(np.asarray(llr, dtype=float)))
    if llr.shape[1] != h.cols:
        raise InvalidInput("llr width does not match the code length")
    if not np.all(np.isfinite(llr)):
        raise InvalidInput("llr entries must be finite")
    g = _tanner(h)
    F = llr.shape[0]
    bits = np.empty((F, h.cols), dtype=np.uint8)
    conv = np.empty(F, dtype=np.bool_)
    iters = np.empty(F, dtype=np.int64)
    post = np.empty((F, h.cols))
    _bp_kernel(np.clip(-llr, -LLR_CLIP, LLR_CLIP), g.edge_var, g.check_ptr, g.var_ptr,
               g.var_edges, max_iter, bits, conv, iters, post)
    return bits, conv, iters, -post


@numba.njit(cache=True)
def _hard_ok(post, edge_var, check_ptr, bits):
    n = post.shape[0]
    for j in range(n):
        if post[j] == 0.0:
            bits[j] = 0
        else:
            bits[j] = 1 if post[j] < 0.0 else 0
    for c in range(check_ptr.shape[0] - 1):
        s = 0
        for e in range(check_ptr[c], check_ptr[c + 1]):
            s ^= bits[edge_var[e]]
        if s:
            return False
    for j in range(n):
        if post[j] == 0.0:
            return False
    return True


@numba.njit(cache=True)
def _bp_kernel(L, edge_var, check_ptr, var_ptr, var_edges, max_iter,
               bits_out, conv_out, iters_out, post_out):
    # L in log(P0/P1) convention
    F, n = L.shape
    E = edge_var.shape[0]
    v2c = np.empty(E)
    c2v = np.empty(E)
    th = np.empty(E)
    post = np.empty(n)
    bits = np.empty(n, np.uint8)
    lim = np.tanh(TANH_CLAMP)
    for f in range(F):
        Lf = L[f]
        for j in range(n):
            post[j] = Lf[j]
        ok = _hard_ok(post, edge_var, check_ptr, bits)
        it = 0
        if not ok:
            for e in range(E):
                v2c[e] = Lf[edge_var[e]]
            while it < max_iter:
                it += 1
                for e in range(E):
                    x = 0.5 * v2c[e]
                    if x > TANH_CLAMP:
                        x = TANH_CLAMP
                    elif x < -TANH_CLAMP:
                        x = -TANH_CLAMP
                    th[e] = np.tanh(x)
                for c in range(check_ptr.shape[0] - 1):
                    a, b = check_ptr[c], check_ptr[c + 1]
                    for e in range(a, b):
                        p = 1.0
                        for e2 in range(a, b):
                            if e2 != e:
                                p *= th[e2]
                        if p > lim:
                            p = lim
                        elif p < -lim:
                            p = -lim
                        m = 2.0 * np.arctanh(p)
                        if m > LLR_CLIP:
                            m = LLR_CLIP
                        elif m < -LLR_CLIP:
                            m = -LLR_CLIP
                        c2v[e] = m
                for j in range(n):
                    s = Lf[j]
                    for q in range(var_ptr[j], var_ptr[j + 1]):
                        s += c2v[var_edges[q]]
                    post[j] = s
                for j in range(n):
                    for q in range(var_ptr[j], var_ptr[j + 1]):
                        e = var_edges[q]
                        m = post[j] - c2v[e]
                        if m > LLR_CLIP:
                            m = LLR_CLIP
                        elif m < -LLR_CLIP:
                            m = -LLR_CLIP
                        v2c[e] = m
                ok = _hard_ok(post, edge_var, check_ptr, bits)
                if ok:
                    break
        bits_out[f, :] = bits
        conv_out[f] = ok
        iters_out[f] = it
        post_out[f, :] = post


# ---------------------------------------------------------------- descriptors

def code_from_descriptor(desc, base_dir: Path | None = None) -> SparseBinaryMatrix:
    """Parity-check matrix from a config descriptor.

    Accepted forms: ``{"regular": {"N":..,"wc":..,"wr":..,"seed":..}}``,
    ``{"alist": path}``, ``{"dense": [[...], ...]}`` or a bare path string.
    """
    if isinstance(desc, (str, Path)):
        desc = {"alist": str(desc)}
    if "regular" in desc:
        p = desc["regular"]
        return gen_regular(int(p["N"]), int(p["wc"]), int(p["wr"]), int(p["seed"]))
    if "alist" in desc:
        path = Path(desc["alist"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return read_alist(path)
    if "dense" in desc:
        return SparseBinaryMatrix.from_dense(desc["dense"])
    raise InvalidInput(f"unknown code descriptor {desc!r}")
