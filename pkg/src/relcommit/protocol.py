"""Honest execution of the backreporting commitment and Alice's verify rule.

A run goes through four phases:

1. quantum exchange - Alice (Anne) sends ``n`` pulses; Bob measures
   every pulse in his random basis ``b`` and backreports the valid set M;
2. commit - at ``t_c`` both of Bob's agents send ``b' = b xor a`` to the
   neighbouring agents of Alice;
3. open - each of Bob's agents reveals ``(b, a, y)``;
4. verify - Alice checks the opening against her encoding and the
   light-cone schedule.

Alice's private data (``x``, ``theta``) travels with the transcript so
that verification can be replayed.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .photonics import RoundBatch, RoundRecord, SourceParams, sample_rounds
from .security import ProtocolParams
from .spacetime import (
    DEFAULT_SIMULTANEITY_S,
    SiteLayout,
    SpacetimeEvent,
    check_open_window,
    seconds_to_ns,
    window_verdict,
)

__all__ = [
    "Reason",
    "RoundRecord",
    "Opening",
    "Transcript",
    "VerifyOutcome",
    "hamming_distance",
    "delayed_choice_commit",
    "balance_detections",
    "run_commit_phase",
    "commit",
    "open_commitment",
    "open_and_verify",
    "run_protocol",
    "run_three_agent_variant",
    "sifted_errors",
    "transcript_records",
    "write_transcript",
    "bits_to_hex",
    "hex_to_bits",
]


class Reason(str, enum.Enum):
    OK = "ok"
    DETECTION_BELOW_GAMMA = "detection_below_gamma"
    VALUE_MISMATCH = "value_mismatch"
    STRING_MISMATCH = "string_mismatch"
    QBER_EXCEEDED = "qber_exceeded"
    LIGHTCONE_VIOLATION = "lightcone_violation"
    INDEX_OUT_OF_RANGE = "index_out_of_range"


@dataclass(frozen=True)
class VerifyOutcome:
    accepted: bool
    reason: Reason
    observed_qber: float = float("nan")
    n_sifted: int = 0
    n_err: int = 0


@dataclass
class Opening:
    b: int
    a: int
    y: np.ndarray


@dataclass
class Transcript:
    params: ProtocolParams
    x: np.ndarray
    theta: np.ndarray
    valid: np.ndarray
    b: int
    bob_y: np.ndarray
    rounds: Optional[RoundBatch] = None
    a: Optional[int] = None
    b_prime: Optional[int] = None
    commit_bits: Dict[str, int] = field(default_factory=dict)
    openings: Dict[str, Opening] = field(default_factory=dict)
    events: Dict[str, SpacetimeEvent] = field(default_factory=dict)
    verdict: Optional[VerifyOutcome] = None
    variant: str = "two_agent"
    j: Optional[int] = None

    @property
    def m(self) -> int:
        return len(self.valid)

    @property
    def p_det(self) -> float:
        return self.m / self.params.n

    @property
    def y(self) -> Optional[np.ndarray]:
        op = self.openings.get("B1")
        return None if op is None else op.y

    @property
    def y_prime(self) -> Optional[np.ndarray]:
        op = self.openings.get("B2")
        return None if op is None else op.y

    @property
    def aborted(self) -> bool:
        return self.verdict is not None and self.verdict.reason is Reason.DETECTION_BELOW_GAMMA


def hamming_distance(x, y) -> float:
    """Fraction of positions where two equal-length bit strings differ."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size == 0:
        raise ValueError("strings must be non-empty")
    return float(np.count_nonzero(x != y)) / x.size


def delayed_choice_commit(b: int, a: int) -> int:
    return int(b) ^ int(a)


def balance_detections(detected, bases, r: float, rng: np.random.Generator, favored_basis: int = 0):
    """Keep clicks in ``favored_basis`` with probability ``r``; others always.

    One uniform is drawn per round whether or not it clicked, so the random
    stream consumed does not depend on the outcome pattern.
    """
    if not 0 < r <= 1:
        raise ValueError("r must lie in (0, 1]")
    detected = np.asarray(detected, dtype=bool)
    bases = np.broadcast_to(np.asarray(bases), detected.shape)
    u = rng.random(detected.shape)
    drop = (bases == favored_basis) & (u >= r)
    return detected & ~drop


def _favored_basis(params: ProtocolParams) -> int:
    e0, e1 = params.basis_efficiency
    return 1 if e1 > e0 else 0


def run_commit_phase(params: ProtocolParams, rng: np.random.Generator, b: Optional[int] = None) -> Transcript:
    """Quantum exchange, Bob's measurement in basis ``b`` and backreporting.

    ``b`` defaults to a uniformly random basis. The transcript carries an
    abort verdict when fewer than ceil(gamma n) rounds were declared.
    """
    if b is None:
        b = int(rng.integers(0, 2))
    n = params.n
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    theta = rng.integers(0, 2, size=n, dtype=np.uint8)
    src = SourceParams(params.mu, params.eta, params.q, params.dark_rate)
    batch = sample_rounds(src, x, theta, b, rng, basis_efficiency=params.basis_efficiency)
    declared = balance_detections(batch.detected, b, params.r_balance, rng, _favored_basis(params))

    valid = np.flatnonzero(declared)
    t = Transcript(
        params=params,
        x=x,
        theta=theta,
        valid=valid,
        b=int(b),
        bob_y=batch.y[valid].astype(np.uint8),
        rounds=batch,
    )
    if t.m < params.m_min:
        t.verdict = VerifyOutcome(False, Reason.DETECTION_BELOW_GAMMA)
    return t


def commit(t: Transcript, a: int, layout: SiteLayout, t_c_ns: int = 0) -> Transcript:
    """Both of Bob's agents send b' = b xor a at ``t_c_ns``."""
    t.a = int(a)
    t.b_prime = delayed_choice_commit(t.b, a)
    for site in ("B1", "B2"):
        t.commit_bits[site] = t.b_prime
        t.events[f"commit:{site}"] = layout.event(site, t_c_ns)
    return t


def open_commitment(t: Transcript, layout: SiteLayout, open_delay_ns: Optional[int] = None) -> Transcript:
    """Both agents reveal (b, a, y) ``open_delay_ns`` after the commitment.

    The default opens 2 us before the light-cone deadline.
    """
    if t.a is None:
        raise ValueError("commit before opening")
    if open_delay_ns is None:
        open_delay_ns = layout.commitment_duration_ns - 2 * seconds_to_ns(DEFAULT_SIMULTANEITY_S)
    t_c = min(t.events["commit:B1"].time_ns, t.events["commit:B2"].time_ns)
    for site in ("B1", "B2"):
        t.openings[site] = Opening(t.b, t.a, t.bob_y.copy())
        t.events[f"open:{site}"] = layout.event(site, t_c + open_delay_ns)
    return t


def sifted_errors(x, theta, valid, y, b: int) -> Tuple[int, int]:
    """(n_sifted, n_err) on the valid rounds Alice prepared in basis ``b``."""
    valid = np.asarray(valid)
    y = np.asarray(y)
    sift = np.asarray(theta)[valid] == b
    n_sifted = int(np.count_nonzero(sift))
    n_err = int(np.count_nonzero(np.asarray(x)[valid][sift] != y[sift]))
    return n_sifted, n_err


def within_allowance(n_err: int, n_sifted: int, delta: float) -> bool:
    # empty sifted set: distance taken as 0
    return n_err <= delta * n_sifted + 1e-9


def _check_opening(t: Transcript, delta: float) -> VerifyOutcome:
    if t.verdict is not None and t.verdict.reason is Reason.DETECTION_BELOW_GAMMA:
        return t.verdict
    o1, o2 = t.openings["B1"], t.openings["B2"]
    for op in (o1, o2):
        if len(op.y) != t.m:
            raise ValueError("opened string does not cover the valid set")

    c1, c2 = t.commit_bits.get("B1"), t.commit_bits.get("B2")
    if c1 is None or c2 is None:
        raise ValueError("transcript has no commitment")
    if (o1.b, o1.a) != (o2.b, o2.a) or c1 != c2 or (o1.b ^ o1.a) != c1:
        return VerifyOutcome(False, Reason.VALUE_MISMATCH)
    if not np.array_equal(o1.y, o2.y):
        return VerifyOutcome(False, Reason.STRING_MISMATCH)

    n_sifted, n_err = sifted_errors(t.x, t.theta, t.valid, o1.y, o1.b)
    qber = n_err / n_sifted if n_sifted else 0.0
    if not within_allowance(n_err, n_sifted, delta):
        return VerifyOutcome(False, Reason.QBER_EXCEEDED, qber, n_sifted, n_err)
    return VerifyOutcome(True, Reason.OK, qber, n_sifted, n_err)


def open_and_verify(
    t: Transcript,
    delta: float,
    layout: SiteLayout,
    tolerance_s: float = DEFAULT_SIMULTANEITY_S,
) -> VerifyOutcome:
    """Alice's acceptance test. Failure causes are checked in a fixed order:
    detection, value, string, error rate, light cone."""
    out = _check_opening(t, delta)
    if out.accepted:
        if t.variant == "three_agent":
            lc = window_verdict(
                t.events["commit:B0"].time_ns, (t.events["open:B1"], t.events["open:B2"]), tolerance_s
            )
        else:
            lc = check_open_window(
                layout,
                (t.events["commit:B1"], t.events["commit:B2"]),
                (t.events["open:B1"], t.events["open:B2"]),
                tolerance_s,
            )
        if not lc.ok:
            out = replace(out, accepted=False, reason=Reason.LIGHTCONE_VIOLATION)
    t.verdict = out
    return out


def run_protocol(
    params: ProtocolParams,
    layout: SiteLayout,
    rng: np.random.Generator,
    a: Optional[int] = None,
    b: Optional[int] = None,
    t_c_ns: int = 0,
    open_delay_ns: Optional[int] = None,
) -> Transcript:
    """One complete honest commitment; the verdict is stored on the transcript."""
    t = run_commit_phase(params, rng, b)
    if a is None:
        a = int(rng.integers(0, 2))
    commit(t, a, layout, t_c_ns)
    if t.aborted:
        return t
    open_commitment(t, layout, open_delay_ns)
    open_and_verify(t, params.delta, layout)
    return t


def run_three_agent_variant(
    params: ProtocolParams,
    layout: SiteLayout,
    j_index: int,
    rng: np.random.Generator,
    n_preshared: int = 1,
    a: Optional[int] = None,
    t_c_ns: int = 0,
    open_delay_ns: Optional[int] = None,
    equidistance_tol_m: float = 1000.0,
) -> Transcript:
    """Commitment made by a third agent B0 midway between B1 and B2.

    The agents preshare ``n_preshared`` measured strings with bases
    ``b_j``. B0 commits ``a`` by sending (b_j xor a, j) to A0 at
    ``t_c_ns``; B1 and B2 unveil (b_j, y_j) before the light-cone deadline
    counted from B0's commitment.
    """
    for site in ("A0", "B0"):
        if site not in layout.sites:
            raise ValueError(f"three-agent layout needs site {site}")
    d1, d2 = layout.distance("B0", "B1"), layout.distance("B0", "B2")
    if abs(d1 - d2) > equidistance_tol_m:
        raise ValueError(f"B0 is not equidistant from B1 and B2 ({d1:.0f} m vs {d2:.0f} m)")

    preshared = [run_commit_phase(params, rng) for _ in range(n_preshared)]
    if a is None:
        a = int(rng.integers(0, 2))
    if not 0 <= j_index < n_preshared:
        t = preshared[0]
        t.variant, t.j, t.a = "three_agent", j_index, int(a)
        t.verdict = VerifyOutcome(False, Reason.INDEX_OUT_OF_RANGE)
        return t

    t = preshared[j_index]
    t.variant, t.j = "three_agent", j_index
    t.a = int(a)
    t.b_prime = delayed_choice_commit(t.b, a)
    # A0 relays (b', j) to A1 and A2 for the cross-check
    t.commit_bits = {"B1": t.b_prime, "B2": t.b_prime}
    t.events["commit:B0"] = layout.event("B0", t_c_ns)
    if t.aborted:
        return t
    if open_delay_ns is None:
        open_delay_ns = layout.commitment_duration_ns - 2 * seconds_to_ns(DEFAULT_SIMULTANEITY_S)
    for site in ("B1", "B2"):
        t.openings[site] = Opening(t.b, t.a, t.bob_y.copy())
        t.events[f"open:{site}"] = layout.event(site, t_c_ns + open_delay_ns)
    open_and_verify(t, params.delta, layout)
    return t


# -- serialisation -----------------------------------------------------------


def bits_to_hex(bits) -> str:
    """Hex string of a bit array, first element in the most significant bit."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return ""
    return np.packbits(bits).tobytes().hex()


def hex_to_bits(s: str, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.unpackbits(np.frombuffer(bytes.fromhex(s), dtype=np.uint8))[:length]


def _record(phase: str, site: str, time_ns: Optional[int], payload: dict) -> dict:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return {
        "phase": phase,
        "site": site,
        "time_ns": time_ns,
        "digest": hashlib.sha256(blob).hexdigest(),
        "payload": payload,
    }


def transcript_records(t: Transcript) -> List[dict]:
    """One record per phase event. Quantum-phase times are not modelled (null)."""
    recs = [
        _record("quantum", "A1", None, {"n": t.params.n}),
        _record("backreport", "A1", None, {"m": t.m, "valid": [int(k) for k in t.valid]}),
    ]
    for key in sorted(t.events):
        phase, site = key.split(":")
        ev = t.events[key]
        if phase == "commit":
            payload = {"b_prime": t.b_prime}
            if t.j is not None:
                payload["j"] = t.j
        else:
            op = t.openings[site]
            payload = {"b": op.b, "a": op.a, "m": len(op.y), "y": bits_to_hex(op.y)}
        recs.append(_record(phase, site, ev.time_ns, payload))
    if t.verdict is not None:
        v = t.verdict
        last = max((e.time_ns for e in t.events.values()), default=None)
        recs.append(
            _record(
                "verify",
                "A1",
                last,
                {
                    "accepted": v.accepted,
                    "reason": v.reason.value,
                    "n_sifted": v.n_sifted,
                    "n_err": v.n_err,
                },
            )
        )
    return recs


def write_transcript(t: Transcript, fp) -> None:
    for rec in transcript_records(t):
        fp.write(json.dumps(rec, sort_keys=True) + "\n")
