"""Agent locations, timed events and light-cone checks.

Geometry uses a spherical Earth. Event times are held as integer
nanoseconds so that ordering and equality are exact; the public
accessors speak seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Tuple

import numpy as np

EARTH_RADIUS_M = 6_371_000.0
SPEED_OF_LIGHT = 299_792_458.0
MAX_POSITION_NORM_M = 7.0e6
COLOCATION_TOLERANCE_M = 100.0
DEFAULT_SIMULTANEITY_S = 1.0e-6

Geodetic = Tuple[float, ...]  # (lat_deg, lon_deg) or (lat_deg, lon_deg, alt_m)


def seconds_to_ns(t: float) -> int:
    return int(round(t * 1e9))


def _check_geodetic(g: Geodetic) -> Tuple[float, float, float]:
    if len(g) not in (2, 3):
        raise ValueError(f"geodetic point needs (lat, lon[, alt]), got {g!r}")
    lat, lon = float(g[0]), float(g[1])
    alt = float(g[2]) if len(g) == 3 else 0.0
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ValueError(f"longitude {lon} outside [-180, 180]")
    return lat, lon, alt


def geodetic_to_cartesian(g: Geodetic) -> np.ndarray:
    """Earth-centred Cartesian coordinates (m) of a point on the sphere."""
    lat, lon, alt = _check_geodetic(g)
    phi, lam = math.radians(lat), math.radians(lon)
    r = EARTH_RADIUS_M + alt
    return np.array(
        [r * math.cos(phi) * math.cos(lam), r * math.cos(phi) * math.sin(lam), r * math.sin(phi)]
    )


def chord_distance(a: Geodetic, b: Geodetic) -> float:
    """Straight-line distance through the Earth between two geodetic points."""
    return float(np.linalg.norm(geodetic_to_cartesian(a) - geodetic_to_cartesian(b)))


def commitment_duration(d: float) -> float:
    """Time (s) a light signal needs to cover half of ``d`` metres."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    return d / (2.0 * SPEED_OF_LIGHT)


@dataclass(frozen=True)
class SpacetimeEvent:
    position: Tuple[float, float, float]
    time_ns: int

    def __post_init__(self):
        pos = tuple(float(p) for p in self.position)
        if len(pos) != 3 or not all(math.isfinite(p) for p in pos):
            raise ValueError(f"position must be a finite 3-vector, got {self.position!r}")
        if math.hypot(*pos) > MAX_POSITION_NORM_M:
            raise ValueError("event position is not on or near the Earth's surface")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "time_ns", int(self.time_ns))

    @classmethod
    def at(cls, position, time_s: float) -> "SpacetimeEvent":
        return cls(tuple(position), seconds_to_ns(time_s))

    @property
    def time(self) -> float:
        return self.time_ns * 1e-9

    def distance_to(self, other: "SpacetimeEvent") -> float:
        return math.dist(self.position, other.position)


@dataclass(frozen=True)
class LightConeVerdict:
    ok: bool
    slack_s: float
    violating_pair: Optional[Tuple[SpacetimeEvent, SpacetimeEvent]] = None


@dataclass(frozen=True)
class SiteLayout:
    """Named agent sites, each given as (lat_deg, lon_deg, alt_m)."""

    sites: Mapping[str, Tuple[float, float, float]] = field(default_factory=dict)

    def __post_init__(self):
        norm = {k: _check_geodetic(tuple(v)) for k, v in self.sites.items()}
        object.__setattr__(self, "sites", norm)
        for i in ("1", "2"):
            if f"B{i}" not in norm:
                raise ValueError(f"layout is missing site B{i}")
        for i in ("0", "1", "2"):
            a, b = f"A{i}", f"B{i}"
            if a in norm and b in norm:
                sep = chord_distance(norm[a], norm[b])
                if sep > COLOCATION_TOLERANCE_M:
                    raise ValueError(f"{a} and {b} are {sep:.1f} m apart (limit {COLOCATION_TOLERANCE_M} m)")

    def position(self, site: str) -> np.ndarray:
        try:
            return geodetic_to_cartesian(self.sites[site])
        except KeyError:
            raise ValueError(f"unknown site {site!r}") from None

    @cached_property
    def chord_distance_m(self) -> float:
        return float(np.linalg.norm(self.position("B1") - self.position("B2")))

    @property
    def commitment_duration_s(self) -> float:
        return commitment_duration(self.chord_distance_m)

    @property
    def commitment_duration_ns(self) -> int:
        return seconds_to_ns(self.commitment_duration_s)

    def event(self, site: str, time_ns: int) -> SpacetimeEvent:
        return SpacetimeEvent(tuple(self.position(site)), time_ns)

    def distance(self, a: str, b: str) -> float:
        return float(np.linalg.norm(self.position(a) - self.position(b)))

    def locate(self, ev: SpacetimeEvent, site: str) -> bool:
        return math.dist(ev.position, tuple(self.position(site))) <= COLOCATION_TOLERANCE_M


def window_verdict(
    commit_ns: int,
    open_events: Tuple[SpacetimeEvent, SpacetimeEvent],
    tolerance_s: float = DEFAULT_SIMULTANEITY_S,
    transfer_s: float = 0.0,
) -> LightConeVerdict:
    """Deadline part of the open-window check, for a commitment made at ``commit_ns``.

    Both openings must land before half the light travel time between
    them has elapsed, and no point at or after the commitment may reach
    both opening events at speed <= c.
    """
    o1, o2 = open_events
    if min(o1.time_ns, o2.time_ns) < commit_ns:
        raise ValueError("open events must not precede the commitment")
    d = o1.distance_to(o2)
    half_ns = seconds_to_ns(commitment_duration(d))
    tol_ns = seconds_to_ns(tolerance_s)
    xfer_ns = seconds_to_ns(transfer_s)

    deadline_ns = commit_ns + half_ns - tol_ns
    slack_each = [deadline_ns - (o.time_ns + xfer_ns) for o in (o1, o2)]
    # A common signalling point after commit_ns exists iff
    # c*(t1 - tc) + c*(t2 - tc) >= |P1 - P2|.
    slack_cone = (2 * half_ns - 2 * tol_ns) - (o1.time_ns + o2.time_ns + 2 * xfer_ns - 2 * commit_ns)
    slack_ns = min(*slack_each, slack_cone)
    ok = slack_ns >= 0
    return LightConeVerdict(ok=ok, slack_s=slack_ns * 1e-9, violating_pair=None if ok else (o1, o2))


def check_open_window(
    layout: SiteLayout,
    commit_events: Tuple[SpacetimeEvent, SpacetimeEvent],
    open_events: Tuple[SpacetimeEvent, SpacetimeEvent],
    tolerance_s: float = DEFAULT_SIMULTANEITY_S,
    transfer_s: float = 0.0,
) -> LightConeVerdict:
    """Decide whether a two-site commit/open schedule binds Bob.

    ``commit_events`` and ``open_events`` are ordered (B1, B2). The
    reported slack is the smallest margin on the opening deadlines; when
    the commitments are not simultaneous the verdict fails with the
    (negative) simultaneity margin instead.
    """
    for pair, what in ((commit_events, "commit"), (open_events, "open")):
        for ev, site in zip(pair, ("B1", "B2")):
            if not layout.locate(ev, site):
                raise ValueError(f"{what} event is not located at site {site}")

    c1, c2 = commit_events
    t_c = min(c1.time_ns, c2.time_ns)
    verdict = window_verdict(t_c, open_events, tolerance_s, transfer_s)

    skew_margin_ns = seconds_to_ns(tolerance_s) - abs(c1.time_ns - c2.time_ns)
    if skew_margin_ns < 0:
        return LightConeVerdict(
            ok=False,
            slack_s=min(verdict.slack_s, skew_margin_ns * 1e-9),
            violating_pair=(c1, c2),
        )
    return verdict
