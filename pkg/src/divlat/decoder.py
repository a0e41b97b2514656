"""Two-stage decoder: per-symbol prime-ideal search (MI-ML) followed by BP.

Stage 1 recovers, for every code symbol i, the element p_i of the prime
ideal from the n received components of that symbol. The search runs in
the lattice spanned by 2 P R'^t, where P = embed_DM and R' is the
noise-reduction matrix permuted so that its privileged row sits on the
strongest block. Stage 2 turns one selected component per symbol into an
LLR for the binary code and runs sum-product decoding.

Received vectors follow the transmit equation y' = 2 h x - 1 + noise. With
perfect CSI the decoder first re-centres to y_c = y' + 1 - h, which equals
h (2x - 1) + noise, so that both the stage-1 target and the selected
channel value carry the code bit as +-h.
"""
from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np

from .clp import TIE_TOL, _se_one
from .errors import AllBlocksFaded, InvalidInput
from .ldpc import LLR_CLIP, bp_decode_batch, DEFAULT_MAX_ITER

DEEP_FADE = 1e-12
WEIGHT_FLOOR = 1e-8
METRICS = ("weighted", "euclidean")
SELECTIONS = ("max", "first")


def noise_reduction_matrix(n: int) -> np.ndarray:
    """Identity with first column (1, -1, ..., -1)."""
    R = np.eye(n, dtype=np.int64)
    R[1:, 0] = -1
    return R


def rcp(R, j: int) -> np.ndarray:
    """Swap rows 1 and j, then columns 1 and j (1-based j)."""
    R = np.array(R, copy=True)
    n = R.shape[0]
    if not 1 <= j <= n:
        raise InvalidInput(f"RCP index {j} outside 1..{n}")
    R[[0, j - 1]] = R[[j - 1, 0]]
    R[:, [0, j - 1]] = R[:, [j - 1, 0]]
    return R


def pseudo_inv(h) -> np.ndarray:
    """diag(1/h_j), with 0 where h_j is a deep fade."""
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    live = h > DEEP_FADE
    out[live] = 1.0 / h[live]
    return np.diag(out)


class MimlOutput(NamedTuple):
    y_hat: np.ndarray       # (F, N) selected channel values
    h_hat: np.ndarray       # (F, N) selected gains
    p_hat_sel: np.ndarray   # (F, N) selected component of 2 z P
    z_hat: np.ndarray       # (F, nN) prime-ideal coordinates
    p_hat_full: np.ndarray  # (F, nN) 2 z P per block (scaled domain)
    i0: np.ndarray          # (F,) 0-based strongest block
    i_m: np.ndarray         # (F, N) 0-based selected component


class DecodeResult(NamedTuple):
    c_hat: np.ndarray       # (F, N) decoded code bits
    z_hat: np.ndarray       # (F, nN)
    x_hat: np.ndarray       # (F, nN) unscaled lattice point estimate
    converged: np.ndarray   # (F,) BP convergence flags
    llr: np.ndarray         # (F, N)
    miml: MimlOutput


def _as_frames(y, h, n):
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    h2 = np.atleast_2d(h)
    if h2.shape[-1] != n or y2.shape[-1] % n:
        raise InvalidInput("fading vector length must equal n and divide len(y)")
    if h2.shape[0] != y2.shape[0]:
        raise InvalidInput("one fading vector per frame is required")
    if np.any(h2 < 0):
        raise InvalidInput("fading magnitudes must be non-negative")
    if np.any(np.all(h2 <= DEEP_FADE, axis=1)):
        raise AllBlocksFaded("every block of a frame is in a deep fade")
    return np.ascontiguousarray(y2), np.ascontiguousarray(h2), single


def mi_ml(P, y, h, *, sigma2: float | None = None, R=None, selection: str = "max",
          metric: str = "weighted") -> MimlOutput:
    """Per-symbol search for the prime-ideal component (first decoding stage).

    Args:
        P: n x n row basis of the embedded prime ideal.
        y: received vector(s) y', shape (nN,) or (F, nN).
        h: fading magnitudes, shape (n,) or (F, n).
        sigma2: noise variance; required for ``metric="weighted"``.
        R: noise-reduction matrix (default: ``noise_reduction_matrix(n)``);
            pass the identity to disable it.
        selection: "max" picks the component with the largest residual,
            "first" always uses block 1 (reference decoder).
        metric: "euclidean" is the plain distance in the R domain;
            "weighted" scales each R-domain coordinate by the inverse of its
            noise-plus-offset variance, so faded coordinates act as erasures.
    """
    P = np.ascontiguousarray(np.asarray(P, dtype=float))
    n = P.shape[0]
    if metric not in METRICS:
        raise InvalidInput(f"metric must be one of {METRICS}")
    if selection not in SELECTIONS:
        raise InvalidInput(f"selection must be one of {SELECTIONS}")
    if metric == "weighted" and not (sigma2 is not None and sigma2 > 0):
        raise InvalidInput("the weighted metric needs sigma2 > 0")
    Rm = noise_reduction_matrix(n) if R is None else np.asarray(R)
    if Rm.shape != (n, n) or round(abs(np.linalg.det(Rm))) != 1:
        raise InvalidInput("R must be an n x n unimodular matrix")
    y2, h2, single = _as_frames(y, h, n)
    F, L = y2.shape
    N = L // n
    z = np.empty((F, L), dtype=np.int64)
    y_hat = np.empty((F, N))
    h_hat = np.empty((F, N))
    p_sel = np.empty((F, N))
    p_full = np.empty((F, L))
    i0 = np.empty(F, dtype=np.int64)
    i_m = np.empty((F, N), dtype=np.int64)
    _miml_kernel(P, np.ascontiguousarray(Rm, dtype=float), y2, h2,
                 float(sigma2) if sigma2 else 0.0, metric == "weighted",
                 selection == "first", TIE_TOL,
                 z, y_hat, h_hat, p_sel, p_full, i0, i_m)
    out = MimlOutput(y_hat, h_hat, p_sel, z, p_full, i0, i_m)
    if single:
        out = MimlOutput(*(a[0] for a in out))
    return out


@numba.njit(cache=True)
def _miml_kernel(P, R, Y, H, sigma2, weighted, first, tol,
                 z_out, y_hat, h_hat, p_sel, p_full, i0_out, im_out):
    F, L = Y.shape
    n = P.shape[0]
    N = L // n
    hinv = np.empty(n)
    Rp = np.empty((n, n))
    w = np.empty(n)
    B = np.empty((n, n))
    t = np.empty(n)
    yc = np.empty(n)
    best = np.empty(n, np.int64)
    zz = np.empty(n, np.int64)
    dz = np.empty(n, np.int64)
    cc = np.empty(n)
    dist = np.zeros(n + 1)
    rot = np.empty(n)
    for f in range(F):
        h = H[f]
        i0 = 0
        for j in range(n):
            hinv[j] = 1.0 / h[j] if h[j] > DEEP_FADE else 0.0
            if h[j] > h[i0]:
                i0 = j
        i0_out[f] = i0
        # RCP: swap index 0 and i0 on both sides
        for a in range(n):
            pa = i0 if a == 0 else (0 if a == i0 else a)
            for b in range(n):
                pb = i0 if b == 0 else (0 if b == i0 else b)
                Rp[a, b] = R[pa, pb]
        # per-coordinate variance of the R-domain target: noise plus the +-1 offset
        wmax = 0.0
        for a in range(n):
            if weighted:
                v = 0.0
                off = 0.0
                dead = False
                for l in range(n):
                    if Rp[a, l] != 0.0:
                        if hinv[l] == 0.0:
                            dead = True
                        v += Rp[a, l] * Rp[a, l] * sigma2 * hinv[l] * hinv[l]
                        off += Rp[a, l]
                v += off * off
                w[a] = 0.0 if dead or v == 0.0 else 1.0 / v
            else:
                w[a] = 1.0
            if w[a] > wmax:
                wmax = w[a]
        for a in range(n):
            if w[a] < WEIGHT_FLOOR * wmax:
                w[a] = WEIGHT_FLOOR * wmax
            w[a] = np.sqrt(w[a])
        # basis rows 2 P[r] R'^t, columns scaled by sqrt(w)
        for r in range(n):
            for a in range(n):
                s = 0.0
                for l in range(n):
                    s += P[r, l] * Rp[a, l]
                B[r, a] = 2.0 * s * w[a]
        Q, T = np.linalg.qr(B.T.copy())
        for a in range(n):
            if T[a, a] < 0:
                for b in range(n):
                    T[a, b] = -T[a, b]
                    Q[b, a] = -Q[b, a]
        for i in range(N):
            for j in range(n):
                yc[j] = Y[f, i * n + j] + 1.0 - h[j]
            for a in range(n):
                s = 0.0
                for l in range(n):
                    s += Rp[a, l] * yc[l] * hinv[l]
                t[a] = s * w[a]
            # rotate: y_rot = t @ Q
            for a in range(n):
                s = 0.0
                for b in range(n):
                    s += t[b] * Q[b, a]
                rot[a] = s
            _se_one(T, rot, best, zz, dz, cc, dist, tol)
            im = 0
            fmax = -1.0
            for j in range(n):
                s = 0.0
                for r in range(n):
                    s += best[r] * P[r, j]
                pj = 2.0 * s
                z_out[f, i * n + j] = best[j]
                p_full[f, i * n + j] = pj
                fj = abs(yc[j] - h[j] * pj)
                if fj > fmax:
                    fmax = fj
                    im = j
            if first:
                im = 0
            im_out[f, i] = im
            p_sel[f, i] = p_full[f, i * n + im]
            y_hat[f, i] = yc[im] - h[im] * p_sel[f, i]
            h_hat[f, i] = h[im]


def form_llr(out: MimlOutput, sigma2: float) -> np.ndarray:
    """gamma = 2 h_hat y_hat / sigma2, clipped; positive favours bit 1."""
    if not sigma2 > 0:
        raise InvalidInput("sigma2 must be positive")
    return np.clip(2.0 * np.asarray(out.h_hat) * np.asarray(out.y_hat) / sigma2, -LLR_CLIP, LLR_CLIP)


def full_decode(spec, y, h, sigma2: float, max_iter: int = DEFAULT_MAX_ITER, *,
                R=None, selection: str = "max", metric: str = "weighted") -> DecodeResult:
    """Stage 1, LLR formation, BP, and reconstruction of the lattice point.

    ``x_hat`` is the unscaled point c_hat (x) (1,...,1) + z_hat-block @ DM,
    i.e. (x_hat_scaled + 1) / 2 for x_hat_scaled = (2c_hat - 1) (x) 1 + 2 z P.
    """
    P = spec.prime.embed_DM
    n, N = spec.n, spec.N
    y2 = np.atleast_2d(np.asarray(y, dtype=float))
    single = np.asarray(y).ndim == 1
    if y2.shape[-1] != n * N:
        raise InvalidInput(f"received vector must have length {n * N}")
    out = mi_ml(P, y2, np.atleast_2d(h), sigma2=sigma2, R=R, selection=selection, metric=metric)
    llr = form_llr(out, sigma2)
    bits, conv, _, _ = bp_decode_batch(spec.code.H, llr, max_iter)
    F = y2.shape[0]
    x_hat = bits.astype(float)[:, :, None] + out.p_hat_full.reshape(F, N, n) / 2.0
    res = DecodeResult(bits, out.z_hat, x_hat.reshape(F, n * N), conv, llr, out)
    if single:
        res = DecodeResult(bits[0], out.z_hat[0], res.x_hat[0], bool(conv[0]), llr[0],
                           MimlOutput(*(a[0] for a in out)))
    return res


def stage_errors(res: DecodeResult, c, z) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame error flags against ground truth.

    Stage 1 fails when the prime-ideal coordinates differ; stage 2 when
    they are right but the code bits are not. A frame is in error iff
    exactly one of the two flags is set.
    """
    z_hat = np.atleast_2d(res.z_hat)
    c_hat = np.atleast_2d(res.c_hat)
    s1 = np.any(z_hat != np.atleast_2d(z), axis=1)
    s2 = np.any(c_hat != np.atleast_2d(c), axis=1) & ~s1
    return s1, s2
