"""Cheating strategies for a dishonest Bob and a dense-matrix oracle for the bound.

The oracle builds the cross-game operators for small ``n`` explicitly in
the 2**n dimensional space of Alice's purified qubits and diagonalises
them; it never uses the product eigenbasis the closed form relies on.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np

from .protocol import sifted_errors, within_allowance
from .security import ProtocolParams, eps_exact, floor_count, coin_guess_max
from .states import StateFamily, bb84_family, cross_mixture, lambda1_of, lambda_table

MAX_ORACLE_N = 8


class CheatKind(str, enum.Enum):
    MULTI_PHOTON_SPLIT = "multi_photon_split"
    DISCARD_SINGLES = "discard_singles"
    BASIS_GUESS = "basis_guess"


@dataclass(frozen=True)
class CheatStrategy:
    """Which ingredients of the attack Bob uses.

    * multi_photon_split - measure one photon of each multi-photon pulse in
      each basis, answering both openings without error;
    * discard_singles - backreport only as many pulses as Alice requires,
      multi-photon ones first;
    * basis_guess - measure single photons in the intermediate basis,
      guessing ``x`` with probability lambda0 whichever basis is opened.
      Without it single photons are measured in a random BB84 basis.
    """

    kinds: FrozenSet[CheatKind] = field(default_factory=lambda: frozenset(CheatKind))

    def uses(self, kind: CheatKind) -> bool:
        return kind in self.kinds


@dataclass(frozen=True)
class CrossGameInstance:
    n: int
    delta: float
    y: tuple
    z: tuple
    family: StateFamily = field(default_factory=bb84_family)

    def __post_init__(self):
        if len(self.y) != self.n or len(self.z) != self.n:
            raise ValueError("y and z must have length n")


def _check_size(n: int):
    if n > MAX_ORACLE_N:
        raise ValueError(f"dense oracle limited to n <= {MAX_ORACLE_N}, got {n}")
    if n < 1:
        raise ValueError("n must be positive")


def relaxed_operators_by_weight(family: StateFamily, y, z) -> list:
    """``W[w] = sum over x with |x| = w of the tensor product of rho_{x_k^y_k, x_k^z_k}``.

    Built position by position; the relaxed cross-game operator for an
    allowance of ``K`` errors is ``sum(W[:K + 1])``.
    """
    n = len(y)
    _check_size(n)
    rho = {(b, c): cross_mixture(family, b, c) for b in (0, 1) for c in (0, 1)}
    layers = [np.ones((1, 1), dtype=complex)]
    for k in range(n):
        r0 = rho[(y[k], z[k])]
        r1 = rho[(1 - y[k], 1 - z[k])]
        nxt = []
        for w in range(k + 2):
            acc = 0
            if w <= k:
                acc = acc + np.kron(layers[w], r0)
            if w >= 1:
                acc = acc + np.kron(layers[w - 1], r1)
            nxt.append(acc)
        layers = nxt
    return layers


def relaxed_norms(family: StateFamily, y, z) -> np.ndarray:
    """Largest eigenvalue of the relaxed operator for every allowance K = 0..n."""
    layers = relaxed_operators_by_weight(family, y, z)
    acc = np.zeros_like(layers[0])
    out = []
    for w in layers:
        acc = acc + w
        out.append(np.linalg.eigvalsh(acc)[-1])
    return np.array(out)


def _product_state(family: StateFamily, x, theta) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for xk, tk in zip(x, theta):
        v = np.kron(v, family.state(xk, tk))
    return v


def exact_cross_operator(inst: CrossGameInstance) -> np.ndarray:
    """Basis-averaged cross-game operator with separate S/T error constraints."""
    n = inst.n
    _check_size(n)
    strings = list(itertools.product((0, 1), repeat=n))
    y = np.array(inst.y)
    z = np.array(inst.z)
    total = np.zeros((2**n, 2**n), dtype=complex)
    for theta in strings:
        th = np.array(theta)
        s_mask, t_mask = th == 0, th == 1
        n_s, n_t = int(s_mask.sum()), int(t_mask.sum())
        for x in strings:
            xa = np.array(x)
            err_s = int(np.count_nonzero(xa[s_mask] != y[s_mask]))
            err_t = int(np.count_nonzero(xa[t_mask] != z[t_mask]))
            if within_allowance(err_s, n_s, inst.delta) and within_allowance(err_t, n_t, inst.delta):
                v = _product_state(inst.family, x, theta)
                total += np.outer(v, v.conj())
    return total / 2**n


def cross_game_norm_oracle(inst: CrossGameInstance, average_bases: bool = False) -> float:
    """Operator norm of the cross-game operator for target answers (y, z).

    By default returns the norm of the relaxed operator, where only the
    total error weight is constrained. ``average_bases=True`` instead
    builds the exact operator averaged over Alice's basis strings.
    """
    if average_bases:
        return float(np.linalg.eigvalsh(exact_cross_operator(inst))[-1])
    k = min(floor_count(inst.delta, inst.n), inst.n)
    return float(relaxed_norms(inst.family, inst.y, inst.z)[k])


def cheat_bound_check(n: int, delta: float, family: Optional[StateFamily] = None) -> bool:
    """True if no pair of target answers beats the closed-form bound."""
    family = family or bb84_family()
    _check_size(n)
    lam1 = lambda1_of(family)
    bound = 1.0 if delta >= 1 else eps_exact(n, delta, lam1)
    k = min(floor_count(delta, n), n)
    worst = 0.0
    for y in itertools.product((0, 1), repeat=n):
        for z in itertools.product((0, 1), repeat=n):
            worst = max(worst, relaxed_norms(family, y, z)[k])
    return worst <= bound + 1e-9


def coin_guess_bruteforce(table, n: int) -> list:
    """Exhaustive coin game value for every mistake allowance K = 0..n.

    Maximises over the coin string and the guessed string; Bob never sees
    an outcome before choosing, so deterministic non-adaptive strategies
    suffice. Exact when ``table`` holds Fractions.
    """
    _check_size(n)
    strings = list(itertools.product((0, 1), repeat=n))
    zero = table[0][0] * 0
    best = [zero] * (n + 1)
    for coins in strings:
        probs = []
        for x in strings:
            p = zero + 1
            for xk, ck in zip(x, coins):
                p *= table[xk][ck]
            probs.append(p)
        for z in strings:
            by_dist = [zero] * (n + 1)
            for x, p in zip(strings, probs):
                by_dist[sum(a != b for a, b in zip(x, z))] += p
            acc = zero
            for k in range(n + 1):
                acc += by_dist[k]
                if acc > best[k]:
                    best[k] = acc
    return best


def best_single_photon_guess(family: StateFamily, n: int, delta) -> float:
    """Success of measuring every photon in the eigenbasis of the cross mixture."""
    return coin_guess_max(lambda_table(family), n, delta)


def simulate_multiphoton_attack(
    params: ProtocolParams,
    rng: np.random.Generator,
    trials: int = 1,
    strategy: Optional[CheatStrategy] = None,
) -> np.ndarray:
    """Per-trial indicator that Bob could open both values of his commitment.

    Dishonest Bob has perfect hardware, so photon numbers are Poisson(mu)
    at his lab. Pulses are exchangeable, so each trial draws the counts of
    vacuum, single and multi-photon pulses and then samples Alice's
    ``x``/``theta`` only for the declared rounds. Both openings are
    judged by the honest verify rule.
    """
    strategy = strategy or CheatStrategy()
    n, mu = params.n, params.mu
    m_req = params.m_min
    lam0 = 1 - params.lambda1
    p0 = math.exp(-mu)
    p1 = mu * math.exp(-mu)
    split = strategy.uses(CheatKind.MULTI_PHOTON_SPLIT)

    out = np.zeros(trials, dtype=bool)
    for i in range(trials):
        n_vac = int(rng.binomial(n, p0))
        n_single = int(rng.binomial(n - n_vac, p1 / (1 - p0))) if p0 < 1 else 0
        n_multi = n - n_vac - n_single

        if strategy.uses(CheatKind.DISCARD_SINGLES):
            d_multi = n_multi
            d_single = min(n_single, max(m_req - d_multi, 0))
            d_vac = min(n_vac, max(m_req - d_multi - d_single, 0))
        else:
            d_multi, d_single, d_vac = n_multi, n_single, 0
        m = d_multi + d_single + d_vac
        if m < m_req:
            continue

        x = rng.integers(0, 2, size=m, dtype=np.uint8)
        theta = rng.integers(0, 2, size=m, dtype=np.uint8)
        kind = np.repeat(np.array([2, 1, 0], dtype=np.int8), [d_multi, d_single, d_vac])
        if not split:
            kind[kind == 2] = 1

        answers = []
        if strategy.uses(CheatKind.BASIS_GUESS):
            guess = x ^ (rng.random(m) >= lam0).astype(np.uint8)
            per_basis = (guess, guess)
        else:
            meas = rng.integers(0, 2, size=m, dtype=np.uint8)
            coin = rng.integers(0, 2, size=m, dtype=np.uint8)
            outcome = np.where(meas == theta, x, coin).astype(np.uint8)
            per_basis = (outcome, outcome)
        vac_guess = rng.integers(0, 2, size=m, dtype=np.uint8)
        for b in (0, 1):
            y = per_basis[b].copy()
            multi = kind == 2
            y[multi] = x[multi]  # photon measured in basis b answers every sifted round
            y[kind == 0] = vac_guess[kind == 0]
            answers.append(y)

        valid = np.arange(m)
        ok = True
        for b in (0, 1):
            n_sifted, n_err = sifted_errors(x, theta, valid, answers[b], b)
            ok = ok and within_allowance(n_err, n_sifted, params.delta)
        out[i] = ok
    return out
