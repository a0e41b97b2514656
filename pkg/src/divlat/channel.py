"""Real block-fading channel with n fading blocks and AWGN.

Component j of every n-block of a frame sees the same gain h_j. The
transmit equation is that of the scaled lattice, y' = 2 h x - 1 + noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

RNG_NAME = "numpy.random.Philox"


@dataclass(frozen=True)
class ChannelParams:
    sigma2: float
    nakagami_m: float = 1.0
    rng_seed: int | None = None

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise InvalidInput("sigma2 must be positive")
        if not self.nakagami_m > 0:
            raise InvalidInput("nakagami_m must be positive")


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based generator for the stream identified by ``key``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def sample_fading(n: int, m: float, rng: np.random.Generator, frames: int | None = None) -> np.ndarray:
    """Nakagami-m magnitudes with unit mean power: h = sqrt(Gamma(m, 1/m)).

    Returns shape (n,) or (frames, n). m = 1 is Rayleigh.
    """
    if not m > 0:
        raise InvalidInput("Nakagami shape m must be positive")
    shape = (n,) if frames is None else (frames, n)
    return np.sqrt(rng.gamma(m, 1.0 / m, size=shape))


def expand_gains(h, N: int) -> np.ndarray:
    """Per-component gains: h of shape (..., n) tiled to (..., nN)."""
    h = np.asarray(h, dtype=float)
    return np.tile(h, (1,) * (h.ndim - 1) + (N,))


def transmit(x, h, sigma2: float, rng: np.random.Generator | None = None, noise=None) -> np.ndarray:
    """y' = 2 h_j x - 1 + nu per component, nu ~ N(0, sigma2).

    ``x`` has shape (..., nN) and ``h`` shape (..., n). Pass ``noise`` to
    replay a fixed realization instead of drawing from ``rng``.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    n = h.shape[-1]
    if x.shape[-1] % n:
        raise InvalidInput("length of x is not a multiple of the number of blocks")
    if np.any(h < 0):
        raise InvalidInput("fading magnitudes must be non-negative")
    N = x.shape[-1] // n
    gains = expand_gains(h, N)
    if noise is None:
        if rng is None:
            raise InvalidInput("either rng or noise is required")
        noise = rng.normal(0.0, np.sqrt(sigma2), size=x.shape)
    return 2.0 * gains * x - 1.0 + noise
