"""Monte-Carlo baselines and FER measurement.

Poltyrev outage and the sphere lower bound are estimated over fading draws;
``fer_sim`` runs the full encode / channel / decode chain. Every estimator
reports a standard error. Random streams are keyed by (seed, point, chunk),
so results do not depend on how chunks are spread over worker processes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaincc, gammaln

from .channel import RNG_NAME, make_rng, sample_fading, transmit
from .errors import InsufficientData, InvalidInput
from .latcore import LatticeSpec, encode, log_det_scaled
from .ldpc import DEFAULT_MAX_ITER

TWO_PI_E = 2 * math.pi * math.e
MIN_SLOPE_ERRORS = 50


class Estimate(NamedTuple):
    p: np.ndarray
    stderr: np.ndarray


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(rho):
    return 10.0 * np.log10(np.asarray(rho, dtype=float))


def package_version() -> str:
    try:
        from importlib.metadata import version
        return "divlat " + version("artifact")
    except Exception:  # not installed
        return "divlat unknown"


# ---------------------------------------------------------------- outage and SLB

def poltyrev_threshold(detG: float, dim: int) -> float:
    """Largest noise variance the lattice tolerates: |det|^(2/dim) / (2 pi e)."""
    if not detG > 0:
        raise InvalidInput("determinant must be positive")
    return math.exp(2.0 * math.log(detG) / dim) / TWO_PI_E


def outage_gain_threshold(log_det: float, n: int, N: int, rho) -> np.ndarray:
    """(2 pi e)^n / (|det|^(2/N) rho^n), the bound on prod h_j^2 below which the frame is in outage."""
    rho = np.asarray(rho, dtype=float)
    return np.exp(n * math.log(TWO_PI_E) - 2.0 * log_det / N - n * np.log(rho))


def poltyrev_outage(spec: LatticeSpec, rho, trials: int, m: float = 1.0,
                    rng: np.random.Generator | None = None, h=None) -> Estimate:
    """Pr(prod h^2 < (2 pi e)^n / (det^(2/N) rho^n)) for the channel lattice.

    The same fading draws are reused for every rho, so the estimate is
    monotone in rho. ``h`` (shape (trials, n) or (n,)) replaces sampling.
    """
    return outage_from_log_det(log_det_scaled(spec), spec.n, spec.N, rho, trials, m, rng, h)


def outage_from_log_det(log_det: float, n: int, N: int, rho, trials: int, m: float = 1.0,
                        rng=None, h=None) -> Estimate:
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    if h is None:
        if rng is None:
            raise InvalidInput("either rng or h is required")
        h = sample_fading(n, m, rng, trials)
    h = np.atleast_2d(np.asarray(h, dtype=float))
    log_gain = np.sort(2.0 * np.sum(np.log(h), axis=1))
    thr = np.log(outage_gain_threshold(log_det, n, N, np.atleast_1d(rho)))
    p = np.searchsorted(log_gain, thr, side="left") / len(log_gain)
    se = np.sqrt(p * (1 - p) / len(log_gain))
    if np.ndim(rho) == 0:
        return Estimate(p[0], se[0])
    return Estimate(p, se)


def slb_radius2(n: int, detM: float, h) -> np.ndarray:
    """R(h)^2 = (Gamma(n/2 + 1) detM prod h)^(2/n) / pi."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    log_vol = gammaln(n / 2 + 1) + math.log(detM) + np.sum(np.log(h), axis=1)
    return np.exp(2.0 * log_vol / n) / math.pi


def slb(n: int, N: int, detM: float, rho, trials: int, m: float = 1.0,
        rng: np.random.Generator | None = None, h=None) -> Estimate:
    """Sphere lower bound 1 - E[(1 - Q(n/2, R(h)^2 rho / 2))^N].

    ``detM`` is the volume of the n-dimensional per-symbol lattice, e.g.
    det_scaled(spec) ** (1 / N) for a whole-frame comparison.
    """
    if not detM > 0:
        raise InvalidInput("detM must be positive")
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    if h is None:
        if rng is None:
            raise InvalidInput("either rng or h is required")
        h = sample_fading(n, m, rng, trials)
    r2 = slb_radius2(n, detM, h)
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    q = gammaincc(n / 2.0, r2[None, :] * rho_arr[:, None] / 2.0)
    frame = -np.expm1(N * np.log1p(-np.minimum(q, 1.0)))
    p = frame.mean(axis=1)
    se = frame.std(axis=1, ddof=1) / math.sqrt(frame.shape[1]) if frame.shape[1] > 1 else np.zeros_like(p)
    if np.ndim(rho) == 0:
        return Estimate(p[0], se[0])
    return Estimate(p, se)


# ---------------------------------------------------------------- FER simulation

@dataclass(frozen=True)
class FerPoint:
    rho_db: float
    trials: int
    frame_errors: int
    stage1_errors: int
    stage2_errors: int

    def __post_init__(self):
        if not 0 <= self.frame_errors <= self.trials:
            raise InvalidInput("frame_errors must lie in [0, trials]")

    @property
    def rho(self) -> float:
        return float(db_to_linear(self.rho_db))

    @property
    def fer(self) -> float:
        return self.frame_errors / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        p = self.fer
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else float("nan")


@dataclass
class FerCurve:
    points: list[FerPoint]
    meta: dict = field(default_factory=dict)

    @property
    def rho_db(self) -> np.ndarray:
        return np.array([p.rho_db for p in self.points])

    @property
    def fer(self) -> np.ndarray:
        return np.array([p.fer for p in self.points])

    def nearest(self, target_fer: float) -> FerPoint:
        """Point whose FER is closest to ``target_fer`` on a log scale (nonzero FER only)."""
        cands = [p for p in self.points if p.frame_errors > 0]
        if not cands:
            raise InsufficientData("curve has no error events")
        return min(cands, key=lambda p: abs(math.log(p.fer / target_fer)))

    CSV_COLUMNS = ("rho_db", "rho_linear", "trials", "frame_errors", "fer",
                   "stage1_errors", "stage2_errors", "stderr")

    def csv_body(self) -> str:
        lines = [",".join(self.CSV_COLUMNS)]
        for p in self.points:
            lines.append(f"{p.rho_db:.6g},{p.rho:.10g},{p.trials},{p.frame_errors},{p.fer:.10g},"
                         f"{p.stage1_errors},{p.stage2_errors},{p.stderr:.10g}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        head = "".join(f"# {k}={v}\n" for k, v in sorted(self.meta.items()))
        return head + self.csv_body()


@dataclass(frozen=True)
class SimConfig:
    """Knobs of ``fer_sim``; every field is recorded in the output metadata."""

    nakagami_m: float = 1.0
    target_errors: int = 100
    max_frames: int = 1_000_000
    chunk_frames: int = 1000
    z_box: int = 2
    max_iter: int = DEFAULT_MAX_ITER
    metric: str = "weighted"
    selection: str = "max"
    use_r: bool = True

    def __post_init__(self):
        if self.target_errors < 1 or self.max_frames < 1 or self.chunk_frames < 1:
            raise InvalidInput("target_errors, max_frames and chunk_frames must be >= 1")
        if self.z_box < 0:
            raise InvalidInput("z_box must be >= 0")
        if self.metric not in ("weighted", "euclidean"):
            raise InvalidInput(f"unknown metric {self.metric!r}")
        if self.selection not in ("max", "first"):
            raise InvalidInput(f"unknown selection {self.selection!r}")


class ChunkCounts(NamedTuple):
    trials: int
    frame_errors: int
    stage1_errors: int
    stage2_errors: int


def simulate_chunk(spec: LatticeSpec, rho_db: float, cfg: SimConfig, seed: int,
                   point: int, chunk: int) -> ChunkCounts:
    """One chunk of frames with its own random stream."""
    from .decoder import full_decode, stage_errors

    rng = make_rng(seed, point, chunk)
    F = cfg.chunk_frames
    sigma2 = 1.0 / float(db_to_linear(rho_db))
    msg = rng.integers(0, 2, size=(F, spec.k))
    z = rng.integers(-cfg.z_box, cfg.z_box + 1, size=(F, spec.dim))
    pt = encode(spec, msg, z)
    h = sample_fading(spec.n, cfg.nakagami_m, rng, F)
    y = transmit(pt.x, h, sigma2, rng)
    R = None if cfg.use_r else np.eye(spec.n, dtype=np.int64)
    res = full_decode(spec, y, h, sigma2, cfg.max_iter, R=R,
                      selection=cfg.selection, metric=cfg.metric)
    s1, s2 = stage_errors(res, pt.c, z)
    return ChunkCounts(F, int(np.sum(s1 | s2)), int(s1.sum()), int(s2.sum()))


def _chunk_job(args):
    return simulate_chunk(*args)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("DIVLAT_WORKERS", "1"))
    if workers < 1:
        raise InvalidInput("workers must be >= 1")
    return workers


def fer_sim(spec: LatticeSpec, rho_db: Sequence[float], seed: int, cfg: SimConfig | None = None,
            workers: int | None = None, progress=None, stop_below: float | None = None) -> FerCurve:
    """Frame error rate at each rho (dB).

    A point stops at the first chunk boundary where ``target_errors`` frame
    errors or ``max_frames`` frames are reached. Chunks are merged in index
    order and surplus chunks from parallel execution are discarded, so the
    counts are the same for any worker count.

    ``stage1_errors`` counts frames with a wrong prime-ideal estimate;
    ``stage2_errors`` frames where only the code bits are wrong. With
    ``stop_below`` the sweep ends after the first point whose FER is
    below that level.
    """
    cfg = cfg or SimConfig()
    rho_db = [float(r) for r in rho_db]
    if not rho_db:
        raise InvalidInput("rho grid is empty")
    workers = resolve_workers(workers)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    points = []
    try:
        for ip, r in enumerate(rho_db):
            acc = np.zeros(4, dtype=np.int64)
            chunk = 0
            done = False
            while not done:
                batch = [(spec, r, cfg, seed, ip, chunk + i) for i in range(max(1, 2 * workers))]
                chunk += len(batch)
                results = pool.map(_chunk_job, batch) if pool else map(_chunk_job, batch)
                for cnt in results:
                    acc += np.asarray(cnt, dtype=np.int64)
                    if acc[1] >= cfg.target_errors or acc[0] >= cfg.max_frames:
                        done = True
                        break
            pt = FerPoint(r, int(acc[0]), int(acc[1]), int(acc[2]), int(acc[3]))
            points.append(pt)
            if progress is not None:
                progress(pt)
            if stop_below is not None and pt.fer < stop_below:
                break
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    meta = {"spec_hash": spec.spec_hash(), "seed": seed, "rng": RNG_NAME, "workers": workers,
            "version": package_version(), "n": spec.n, "N": spec.N, "k": spec.k,
            **({"stop_below": stop_below} if stop_below is not None else {}),
            **{f"cfg.{k}": v for k, v in sorted(vars(cfg).items())}}
    return FerCurve(points, meta)


# ---------------------------------------------------------------- slopes

def diversity_slope(curve: FerCurve, window: tuple[float, float] | None = None) -> float:
    """-(log P2 - log P1) / (log rho2 - log rho1) between two curve points.

    ``window`` gives the two rho values in dB; by default the first and last
    points are used. Both points need at least 50 error events.
    """
    pts = {round(p.rho_db, 9): p for p in curve.points}
    if window is None:
        a, b = curve.points[0], curve.points[-1]
    else:
        try:
            a, b = pts[round(window[0], 9)], pts[round(window[1], 9)]
        except KeyError as exc:
            raise InvalidInput(f"no curve point at {exc.args[0]} dB") from None
    for p in (a, b):
        if p.frame_errors < MIN_SLOPE_ERRORS:
            raise InsufficientData(f"{p.frame_errors} errors at {p.rho_db} dB (< {MIN_SLOPE_ERRORS})")
    if a.rho_db == b.rho_db:
        raise InvalidInput("window points must differ")
    s = -(math.log(b.fer) - math.log(a.fer)) / (math.log(b.rho) - math.log(a.rho))
    return s + 0.0


def slope_between(rho, p, targets=(1e-2, 1e-4)) -> tuple[float, float, float]:
    """Log-log slope between the grid points where ``p`` is closest to each target.

    Returns (slope, rho_1, rho_2); zero estimates are skipped.
    """
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    ok = p > 0
    idx = np.flatnonzero(ok)
    if idx.size < 2:
        raise InsufficientData("fewer than two nonzero estimates")
    sel = [idx[np.argmin(np.abs(np.log(p[idx] / t)))] for t in targets]
    if sel[0] == sel[1]:
        raise InsufficientData("both targets map to the same grid point")
    i, j = sel
    s = (math.log(p[j]) - math.log(p[i])) / (math.log(rho[j]) - math.log(rho[i]))
    return s, float(rho[i]), float(rho[j])
