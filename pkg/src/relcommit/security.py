"""Security bounds for fault-tolerant relativistic bit commitment with backreporting.

Everything here is a pure function of the protocol parameters:

* ``eps_exact`` - the cross-game value for ``n`` single-photon rounds,
  a binomial lower tail at the error threshold ``lambda1``;
* ``eps_chernoff`` - its Chernoff relaxation;
* ``asymptotic_rhs`` / ``feasible_region`` - the n -> infinity
  robustness and security conditions;
* ``eps_finite`` - the finite-size bound obtained by conditioning on the
  number of multi-photon pulses.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .photonics import p_multi
from .states import StateFamily, bb84_family, lambda1_of

@dataclass(frozen=True)
class ProtocolParams:
    n: int
    mu: float
    eta: float
    q: float
    delta: float
    gamma: float
    family: StateFamily = field(default_factory=bb84_family)
    r_balance: float = 1.0
    dark_rate: float = 0.0
    basis_efficiency: tuple = (1.0, 1.0)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.mu < 0 or not 0 <= self.eta <= 1 or not 0 <= self.q <= 0.5:
            raise ValueError("need mu >= 0, eta in [0, 1], q in [0, 1/2]")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < self.r_balance <= 1:
            raise ValueError("r_balance must lie in (0, 1]")
        if not 0 <= self.dark_rate < 1:
            raise ValueError("dark_rate must lie in [0, 1)")

    @property
    def lambda1(self) -> float:
        return lambda1_of(self.family)

    @property
    def m_min(self) -> int:
        """Smallest valid-set size Alice accepts, ceil(gamma * n)."""
        return ceil_count(self.gamma, self.n)


@dataclass
class SecurityReport:
    lambda0: float
    lambda1: float
    robust_ok: bool
    secure_ok: bool
    feasible_ok: bool
    collapsed_ok: bool
    security_lhs: float
    asymptotic_rhs: float
    asymptotic_rhs_observed: float
    eps_exact: Optional[float] = None
    eps_chernoff: Optional[float] = None
    eps_finite: Optional[float] = None
    k_t: Optional[float] = None
    e_nm: Optional[float] = None
    delta_eff: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def floor_count(frac, n: int) -> int:
    """floor(frac * n), exact for Fractions and robust to float noise otherwise."""
    if isinstance(frac, Fraction):
        return math.floor(frac * n)
    return math.floor(frac * n + 1e-9)


def ceil_count(frac, n: int) -> int:
    if isinstance(frac, Fraction):
        return math.ceil(frac * n)
    return math.ceil(frac * n - 1e-9)


def log_binomial_lower_tail(n: int, kmax: int, p: float) -> float:
    """log Pr[Bin(n, p) <= kmax], summed in the log domain."""
    if kmax < 0:
        return -math.inf
    kmax = min(kmax, n)
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 0.0 if kmax >= n else -math.inf
    k = np.arange(kmax + 1, dtype=float)
    logs = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) + k * math.log(p) + (n - k) * math.log1p(-p)
    top = float(logs.max())
    # fsum is exactly rounded; terms are summed smallest-first for determinism
    return top + math.log(math.fsum(np.sort(np.exp(logs - top))))


def eps_exact(n: int, delta: float, lambda1: float) -> float:
    """Cross-game winning probability for ``n`` single-photon rounds.

    Sum over k <= floor(delta n) of C(n, k) lambda0^(n-k) lambda1^k.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if not 0 <= delta < 1:
        raise ValueError("delta must lie in [0, 1)")
    if not 0 < lambda1 <= 0.5:
        raise ValueError("lambda1 must lie in (0, 1/2]")
    return min(1.0, math.exp(log_binomial_lower_tail(int(n), floor_count(delta, int(n)), lambda1)))


def eps_chernoff(n: float, delta: float, lambda1: float) -> float:
    """Chernoff upper bound on :func:`eps_exact`; 1 when ``delta >= lambda1``.

    ``n`` may be real (the finite-size bound feeds in gamma*n - k).
    """
    if delta >= lambda1 or n <= 0:
        return 1.0
    mean = lambda1 * n
    root = math.sqrt(mean)
    return math.exp(-0.5 * (root - delta * n / root) ** 2)


def chernoff_tails(mu: float, s: float) -> tuple:
    """(lower, upper) bounds on Pr[X < s] and Pr[X > s] for a sum of Bernoullis with mean ``mu``."""
    if mu <= 0:
        raise ValueError("mean must be positive")
    if s < 0:
        raise ValueError("threshold must be non-negative")
    lower = math.exp(-0.5 * (math.sqrt(mu) - s / math.sqrt(mu)) ** 2) if s < mu else 1.0
    upper = math.exp(s * math.log(mu / s) + s - mu) if s > mu else 1.0
    return lower, upper


def asymptotic_rhs(mu: float, qber: float, lambda1: float) -> float:
    """Minimum detection probability for asymptotic security; ``inf`` when ``qber >= lambda1``."""
    if mu < 0:
        raise ValueError("mu must be non-negative")
    if qber >= lambda1:
        return math.inf
    return p_multi(mu) / (1 - qber / lambda1)


def boundary_curve(mu_grid: Sequence[float], qber: float, lambda1: float) -> list:
    return [(float(mu), asymptotic_rhs(mu, qber, lambda1)) for mu in mu_grid]


def effective_delta(n: int, gamma: float, delta: float, n_multi: int) -> float:
    """Error allowance per single-photon round once ``n_multi`` rounds are won for free."""
    m = ceil_count(gamma, n)
    if n_multi >= m:
        return math.inf
    return delta * gamma * n / (m - n_multi)


def feasible_region(params: ProtocolParams) -> SecurityReport:
    """Evaluate the three asymptotic inequalities (and their collapsed form)."""
    lam1 = params.lambda1
    mu, eta, q, delta, gamma = params.mu, params.eta, params.q, params.delta, params.gamma
    vacuum_or_single = math.exp(-mu) * (1 + mu)

    robust = bool(math.exp(-mu * eta) + gamma < 1) and bool(q < delta)
    security_lhs = float(vacuum_or_single + (1 - delta / lam1) * gamma)
    collapsed = bool(vacuum_or_single + (1 - q / lam1) * (1 - math.exp(-mu * eta)) > 1)
    secure = security_lhs > 1
    return SecurityReport(
        lambda0=1 - lam1,
        lambda1=lam1,
        robust_ok=robust,
        secure_ok=secure,
        feasible_ok=robust and secure,
        collapsed_ok=collapsed,
        security_lhs=security_lhs,
        asymptotic_rhs=asymptotic_rhs(mu, delta, lam1),
        asymptotic_rhs_observed=asymptotic_rhs(mu, q, lam1),
    )


def multiphoton_threshold(params: ProtocolParams) -> float:
    """k_t: the multi-photon count at and above which no security is left."""
    return params.gamma * params.n * (1 - params.delta / params.lambda1)


def eps_finite(params: ProtocolParams) -> float:
    """Finite-size bound on Bob winning the cross-game.

    Conditions on the Poisson number of multi-photon pulses N_m: below
    k_t each term is bounded by the Chernoff form for the remaining
    single-photon rounds, at and above k_t by 1. The second part is the
    exact Poisson survival function, so nothing is truncated.
    """
    lam1 = params.lambda1
    gn = params.gamma * params.n
    if gn < 1:
        raise ValueError("gamma * n must be at least 1")
    if params.delta >= lam1:
        return 1.0

    mean = p_multi(params.mu) * params.n
    k_t = multiphoton_threshold(params)
    if mean == 0.0:
        return eps_chernoff(gn, params.delta, lam1)

    k_first_free = math.ceil(k_t)  # smallest k with no security left
    k = np.arange(k_first_free, dtype=float)
    log_pmf = k * math.log(mean) - mean - gammaln(k + 1)
    singles = (gn - k) * lam1
    root = np.sqrt(singles)
    log_cond = -0.5 * (root - params.delta * gn / root) ** 2
    with np.errstate(under="ignore"):
        secure_part = np.exp(log_pmf + log_cond)
    free_part = float(stats.poisson.sf(k_first_free - 1, mean))
    return min(1.0, math.fsum(np.sort(secure_part)) + free_part)


def security_report(params: ProtocolParams) -> SecurityReport:
    """Feasibility booleans plus every finite-size quantity for ``params``."""
    rep = feasible_region(params)
    m = params.m_min
    lam1 = rep.lambda1
    if lam1 > 0:
        rep.eps_exact = eps_exact(m, params.delta, lam1)
    rep.eps_chernoff = eps_chernoff(m, params.delta, lam1)
    rep.eps_finite = eps_finite(params)
    rep.k_t = multiphoton_threshold(params)
    rep.e_nm = p_multi(params.mu) * params.n
    rep.delta_eff = effective_delta(params.n, params.gamma, params.delta, int(round(rep.e_nm)))
    return rep


def _coin_entries(table):
    rows = [[table[b][c] for c in (0, 1)] for b in (0, 1)]
    exact = all(isinstance(v, (Fraction, int)) for row in rows for v in row)
    for c in (0, 1):
        col = rows[0][c] + rows[1][c]
        if any(not 0 <= rows[b][c] <= 1 for b in (0, 1)):
            raise ValueError("coin probabilities must lie in [0, 1]")
        if (col != 1) if exact else abs(col - 1) > 1e-9:
            raise ValueError(f"coin {c} probabilities do not sum to 1")
    return rows, exact


def coin_guess_max(lambdas, n: int, delta) -> float:
    """Best probability of guessing n coin flips with at most floor(delta n) mistakes.

    ``lambdas[b][c]`` is the probability of outcome ``b`` for coin ``c``.
    The optimum picks the most biased coin and its likelier face every
    round. Fraction inputs give an exact Fraction result.
    """
    rows, exact = _coin_entries(lambdas)
    lam0 = max(v for row in rows for v in row)
    lam1 = 1 - lam0
    kmax = min(floor_count(delta, n), n)
    if exact:
        lam0, lam1 = Fraction(lam0), Fraction(lam1)
        return sum((math.comb(n, k) * lam0 ** (n - k) * lam1**k for k in range(kmax + 1)), Fraction(0))
    return min(1.0, math.exp(log_binomial_lower_tail(n, kmax, float(lam1))))
