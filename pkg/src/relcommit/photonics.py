"""Phase-randomised weak-coherent source and the lossy, noisy channel to Bob.

Every emitted photon is lost or kept independently, so the count Bob
receives is Poisson with mean ``mu * eta``. Bit flips hit rounds measured
in the preparation basis with probability ``q``; rounds measured in the
other basis give a uniform outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special


@dataclass(frozen=True)
class SourceParams:
    mu: float
    eta: float = 1.0
    q: float = 0.0
    dark_rate: float = 0.0

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError("mu must be non-negative")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if not 0.0 <= self.q <= 0.5:
            raise ValueError("q must lie in [0, 1/2]")
        if not 0.0 <= self.dark_rate < 1.0:
            raise ValueError("dark_rate must lie in [0, 1)")


def p_r(mu: float, eta: float, r: int) -> float:
    """Probability that exactly ``r`` photons reach Bob's detector."""
    if mu < 0 or not 0.0 <= eta <= 1.0 or r < 0:
        raise ValueError("need mu >= 0, eta in [0, 1], r >= 0")
    lam = mu * eta
    if lam == 0.0:
        return 1.0 if r == 0 else 0.0
    return math.exp(r * math.log(lam) - lam - math.lgamma(r + 1))


def p_multi(mu: float) -> float:
    """Probability that a pulse carries two or more photons, 1 - e^-mu (1 + mu)."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if mu == 0.0:
        return 0.0
    # regularised lower incomplete gamma P(2, mu) == Pr[Poisson(mu) >= 2], no cancellation
    return float(special.gammainc(2, mu))


def p_detect(mu: float, eta: float, dark_rate: float = 0.0) -> float:
    """Per-pulse click probability including dark counts."""
    return 1.0 - math.exp(-mu * eta) * (1.0 - dark_rate)


@dataclass(frozen=True)
class PhotonCountDist:
    mu_eff: float

    @classmethod
    def of(cls, mu: float, eta: float = 1.0) -> "PhotonCountDist":
        return cls(mu * eta)

    def pmf(self, r: int) -> float:
        return p_r(self.mu_eff, 1.0, r)


@dataclass(frozen=True)
class RoundRecord:
    """Ground truth for one pulse. ``y`` is None when Bob registered no click."""

    index: int
    x: int
    theta: int
    photons_emitted: int
    photons_detected: int
    detected: bool
    y: Optional[int]

    def __post_init__(self):
        if (self.y is not None) != self.detected:
            raise ValueError("outcome must be present iff the round was detected")


@dataclass
class RoundBatch:
    """Column-wise round records; ``y`` is -1 on rounds without a click."""

    x: np.ndarray
    theta: np.ndarray
    photons_emitted: np.ndarray
    photons_detected: np.ndarray
    detected: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.x)

    def record(self, k: int) -> RoundRecord:
        det = bool(self.detected[k])
        return RoundRecord(
            index=k,
            x=int(self.x[k]),
            theta=int(self.theta[k]),
            photons_emitted=int(self.photons_emitted[k]),
            photons_detected=int(self.photons_detected[k]),
            detected=det,
            y=int(self.y[k]) if det else None,
        )


def sample_rounds(
    params: SourceParams,
    x,
    theta,
    bob_basis,
    rng: np.random.Generator,
    basis_efficiency=(1.0, 1.0),
) -> RoundBatch:
    """Sample emission, loss, clicks and outcomes for a batch of pulses.

    ``bob_basis`` may be a scalar or per-round array. ``basis_efficiency``
    scales ``eta`` for the detector used in each basis; (1, 1) is the
    balanced hardware assumed by the security analysis.
    """
    x = np.asarray(x, dtype=np.uint8)
    theta = np.asarray(theta, dtype=np.uint8)
    n = len(x)
    basis = np.broadcast_to(np.asarray(bob_basis, dtype=np.uint8), (n,))

    # numpy draws Poisson by multiplication below mean 10, PTRS above
    emitted = rng.poisson(params.mu, size=n)
    eff = params.eta * np.asarray(basis_efficiency, dtype=float)[basis]
    surviving = rng.binomial(emitted, eff)
    dark = rng.random(n) < params.dark_rate if params.dark_rate > 0 else np.zeros(n, dtype=bool)
    detected = (surviving > 0) | dark

    flips = rng.random(n) < params.q
    coins = rng.integers(0, 2, size=n, dtype=np.uint8)
    matched = (basis == theta) & (surviving > 0)
    y = np.where(matched, x ^ flips.astype(np.uint8), coins).astype(np.int8)
    y[~detected] = -1
    return RoundBatch(x, theta, emitted, surviving, detected, y)


def sample_round(
    params: SourceParams, x: int, theta: int, bob_basis: int, rng: np.random.Generator
) -> RoundRecord:
    """Single-pulse version of :func:`sample_rounds`."""
    batch = sample_rounds(params, [x], [theta], bob_basis, rng)
    return batch.record(0)
