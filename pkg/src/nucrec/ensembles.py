"""Seeded generators for isotropic subgaussian measurement ensembles,
Gaussian noise vectors, and low-rank test signals.

All randomness goes through the counter-based Philox generator so that
draws are reproducible and independent streams can be derived for
parallel Monte Carlo trials.
"""

from dataclasses import dataclass

import numpy as np

from nucrec.operators import MeasurementOperator


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_seed(seed, index):
    """Deterministic per-trial seed stream, independent of scheduling."""
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class EnsembleSpec:
    """Which random operator ensemble to draw and at what size.

    kind: 'gaussian' (i.i.d. N(0,1) entries) or 'rademacher' (i.i.d. +-1).
    normalize=True pre-scales every entry by 1/sqrt(m).
    """

    kind: str
    n1: int
    n2: int
    m: int
    seed: int = 0
    normalize: bool = False

    def __post_init__(self):
        if self.kind not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if min(self.n1, self.n2, self.m) < 1:
            raise ValueError("dimensions must be positive")


def draw_operator(spec):
    """Draw a measurement operator per ``spec``; deterministic in the seed."""
    rng = _rng(spec.seed)
    shape = (spec.m, spec.n1, spec.n2)
    if spec.kind == "gaussian":
        entries = rng.standard_normal(shape)
    else:
        entries = rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    if spec.normalize:
        entries /= np.sqrt(spec.m)
    return MeasurementOperator(matrices=entries)


def draw_gaussian_noise(m, sigma, seed):
    """i.i.d. N(0, sigma^2) vector of length m, seed-deterministic."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return np.zeros(m)
    return sigma * _rng(seed).standard_normal(m)


def draw_low_rank_signal(n1, n2, r, scale, seed):
    """Rank-r matrix L R^T with Gaussian factors, rescaled to ||X||_F = scale."""
    if not 1 <= r <= min(n1, n2):
        raise ValueError(f"rank r={r} out of range [1, {min(n1, n2)}]")
    rng = _rng(seed)
    left = rng.standard_normal((n1, r))
    right = rng.standard_normal((n2, r))
    x = left @ right.T
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        raise RuntimeError("degenerate zero draw")
    return x * (scale / nrm)
