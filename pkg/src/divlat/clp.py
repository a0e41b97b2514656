"""Closest lattice point search in small dimension.

Bases are given by rows: the lattice is {z @ B : z integer}. The exact
solver is a Schnorr-Euchner enumeration over the QR factor of B^T whose
radius starts at the Babai (nearest plane) distance. Candidates whose
squared distances agree to within a relative 1e-12 are resolved in favour
of the lexicographically smaller coordinate vector, so results are fully
deterministic.
"""
from __future__ import annotations

import itertools

import numba
import numpy as np

from .errors import InvalidInput, SingularBasis, Unsupported

MAX_DIM = 16
TIE_TOL = 1e-12


class LatticeBasis:
    """Row basis with its QR factorization cached for repeated searches."""

    def __init__(self, B):
        B = np.array(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise InvalidInput("basis must be a square matrix")
        d = B.shape[0]
        if d == 0 or d > MAX_DIM:
            raise Unsupported(f"dimension {d} outside 1..{MAX_DIM}")
        sv = np.linalg.svd(B, compute_uv=False)
        if not np.all(np.isfinite(sv)) or sv[-1] <= 1e-10 * sv[0]:
            raise SingularBasis("basis is rank deficient")
        Q, R = np.linalg.qr(B.T)
        s = np.sign(np.diag(R))
        s[s == 0] = 1.0
        self.B = B
        self.d = d
        self.Q = np.ascontiguousarray(Q * s)
        self.R = np.ascontiguousarray(R * s[:, None])
        self.B.setflags(write=False)

    def rotate(self, targets: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(np.asarray(targets, dtype=float) @ self.Q)

    def closest_points(self, targets) -> np.ndarray:
        """Exact closest points for a (T, d) array of targets."""
        t = np.atleast_2d(np.asarray(targets, dtype=float))
        if t.shape[-1] != self.d:
            raise InvalidInput("target dimension does not match the basis")
        out = np.empty(t.shape, dtype=np.int64)
        _se_batch(self.R, self.rotate(t), out, TIE_TOL)
        return out

    def babai_points(self, targets) -> np.ndarray:
        t = np.atleast_2d(np.asarray(targets, dtype=float))
        out = np.empty(t.shape, dtype=np.int64)
        _babai_batch(self.R, self.rotate(t), out)
        return out


def _as_basis(basis) -> LatticeBasis:
    return basis if isinstance(basis, LatticeBasis) else LatticeBasis(basis)


def closest_point(basis, target) -> np.ndarray:
    """Integer coordinates z minimizing ||target - z @ B||^2."""
    return _as_basis(basis).closest_points(np.asarray(target, dtype=float)[None, :])[0]


def babai(basis, target) -> np.ndarray:
    """Nearest-plane estimate of the closest point."""
    return _as_basis(basis).babai_points(np.asarray(target, dtype=float)[None, :])[0]


def brute_force_closest(basis, target, box_radius: int | None = None,
                        max_candidates: int = 2_000_000) -> np.ndarray:
    """Exhaustive search over an integer box around the Babai point.

    With ``box_radius=None`` the box is certified: any point at least as
    close as the Babai point satisfies |z_k - u_k| <= r * ||B^-1 e_k||,
    where u are the real coordinates of the target and r the Babai distance.
    """
    lb = _as_basis(basis)
    if lb.d > 4:
        raise Unsupported("brute force search is limited to d <= 4")
    t = np.asarray(target, dtype=float)
    center = babai(lb, t)
    if box_radius is None:
        binv = np.linalg.inv(lb.B)
        r = np.sqrt(squared_distance(lb, t, center)) + 1e-9
        u = t @ binv
        half = r * np.linalg.norm(binv, axis=0)
        ranges = [range(int(np.floor(u[k] - half[k])), int(np.ceil(u[k] + half[k])) + 1)
                  for k in range(lb.d)]
        if np.prod([float(len(r)) for r in ranges]) > max_candidates:
            raise Unsupported("certified search box too large; basis is badly conditioned")
        cands = np.array(list(itertools.product(*ranges)), dtype=np.int64)
    else:
        offsets = np.array(list(itertools.product(range(-box_radius, box_radius + 1), repeat=lb.d)))
        cands = center + offsets
    dist = np.sum((t - cands @ lb.B) ** 2, axis=1)
    best = dist.min()
    tied = cands[dist <= best + TIE_TOL * (1.0 + best)]
    return np.array(min(map(tuple, tied)), dtype=np.int64)


def squared_distance(basis, target, z) -> float:
    lb = _as_basis(basis)
    r = np.asarray(target, dtype=float) - np.asarray(z, dtype=float) @ lb.B
    return float(r @ r)


@numba.njit(cache=True)
def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] < b[i]:
            return True
        if a[i] > b[i]:
            return False
    return False


@numba.njit(cache=True)
def _babai_one(R, y, z):
    d = y.shape[0]
    dist = 0.0
    for k in range(d - 1, -1, -1):
        s = y[k]
        for j in range(k + 1, d):
            s -= R[k, j] * z[j]
        c = s / R[k, k]
        z[k] = np.int64(np.floor(c + 0.5))
        diff = (c - z[k]) * R[k, k]
        dist += diff * diff
    return dist


@numba.njit(cache=True)
def _babai_batch(R, Y, out):
    z = np.empty(Y.shape[1], np.int64)
    for t in range(Y.shape[0]):
        _babai_one(R, Y[t], z)
        out[t, :] = z


@numba.njit(cache=True)
def _se_one(R, y, best, z, dz, c, dist, tol):
    """Schnorr-Euchner search for one rotated target; result left in ``best``."""
    d = y.shape[0]
    bestd = _babai_one(R, y, z)
    best[:] = z
    radius = bestd + tol * (1.0 + bestd)

    k = d - 1
    c[k] = y[k] / R[k, k]
    z[k] = np.int64(np.floor(c[k] + 0.5))
    dz[k] = 1 if c[k] >= z[k] else -1
    dist[d] = 0.0
    while True:
        diff = (c[k] - z[k]) * R[k, k]
        nd = dist[k + 1] + diff * diff
        if nd <= radius:
            if k == 0:
                slack = tol * (1.0 + bestd)
                if nd < bestd - slack or (nd <= bestd + slack and _lex_less(z, best)):
                    best[:] = z
                    bestd = nd
                    radius = bestd + tol * (1.0 + bestd)
                z[0] += dz[0]
                dz[0] = -dz[0] - (1 if dz[0] > 0 else -1)
            else:
                dist[k] = nd
                k -= 1
                s = y[k]
                for j in range(k + 1, d):
                    s -= R[k, j] * z[j]
                c[k] = s / R[k, k]
                z[k] = np.int64(np.floor(c[k] + 0.5))
                dz[k] = 1 if c[k] >= z[k] else -1
        else:
            k += 1
            if k == d:
                break
            z[k] += dz[k]
            dz[k] = -dz[k] - (1 if dz[k] > 0 else -1)
    return bestd


@numba.njit(cache=True)
def _se_batch(R, Y, out, tol):
    T, d = Y.shape
    z = np.empty(d, np.int64)
    best = np.empty(d, np.int64)
    dz = np.empty(d, np.int64)
    c = np.empty(d)
    dist = np.zeros(d + 1)
    for t in range(T):
        _se_one(R, Y[t], best, z, dz, c, dist, tol)
        out[t, :] = best
