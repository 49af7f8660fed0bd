"""Whitney-type interval covers of the complement of a compact 1D set.

Each gap of the working domain gets geometric ladders of intervals marching
toward its set-adjacent ends, radius proportional to distance (ratio 1/4),
stopping at the truncation depth d_min.  The comparability and overlap
constants are measured on the constructed cover, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..jets import CompactSet1D

RADIUS_RATIO = 0.25      # r_i = d(x_i) / 4
LADDER_STEP = 1.5        # geometric spacing of ladder distances
OVERLAP_C = 1.5          # support inflation factor c


@dataclass(frozen=True)
class WhitneyCover1D:
    E: CompactSet1D
    balls: tuple                      # of (center, radius)
    c: float
    a: float                          # measured: a r_i <= d(x) on B(x_i, c r_i)
    b: float                          # measured: d(x) <= b r_i
    n0: int                           # measured overlap bound
    d_min: float
    margin: float
    working: tuple                    # (lo, hi)
    degenerate_gaps: tuple = ()

    def covers(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        hit = np.zeros(len(x), dtype=bool)
        for cx, r in self.balls:
            hit |= np.abs(x - cx) < r
        return hit

    def to_rows(self):
        return {"center": np.array([b[0] for b in self.balls]),
                "radius": np.array([b[1] for b in self.balls])}


def whitney_cover(E: CompactSet1D, d_min: float = 1e-6,
                  margin: float = 2.0) -> WhitneyCover1D:
    """Cover of {x in working domain : d(x, E) >= d_min} by open intervals.

    Verifies coverage on a probe grid, measures the distance-comparability
    constants (a, b) and the overlap count n0 of the c-inflated intervals,
    and returns them with the cover.
    """
    if d_min <= 0:
        raise ValueError("d_min must be positive")
    lo_E, hi_E = E.hull
    lo, hi = lo_E - margin, hi_E + margin
    balls: list[tuple[float, float]] = []
    degenerate = []
    for (g0, g1, left_is_e, right_is_e) in E.gaps(lo, hi):
        length = g1 - g0
        if not left_is_e and not right_is_e:
            continue
        if length < 4.0 * d_min and left_is_e and right_is_e:
            # short interior gap: a single central interval suffices
            center = 0.5 * (g0 + g1)
            d_c = float(E.distance(center)[0])
            if d_c >= d_min:
                balls.append((center, max(d_c * RADIUS_RATIO, length / 8.0)))
                degenerate.append((g0, g1))
            continue
        half = 0.5 * length
        interior = left_is_e and right_is_e
        # interior ladders only need to reach the central interval's window
        cover_until = (1.0 - RADIUS_RATIO) * half if interior else length
        if left_is_e:
            _ladder(balls, origin=g0, direction=+1.0,
                    cover_until=cover_until, d_min=d_min)
        if right_is_e:
            _ladder(balls, origin=g1, direction=-1.0,
                    cover_until=cover_until, d_min=d_min)
        if interior:
            center = 0.5 * (g0 + g1)
            balls.append((center, half * RADIUS_RATIO))
    balls.sort()
    cover = _measure(E, tuple(balls), d_min, margin, (lo, hi), tuple(degenerate))
    return cover


def _ladder(balls, origin: float, direction: float, cover_until: float,
            d_min: float):
    """Geometric ladder at distances d_min * step^j.

    Each interval covers distances (0.75 d, 1.25 d); consecutive rungs
    overlap since the step 1.5 is below 1.25/0.75.  Marches until coverage
    reaches cover_until."""
    dist = d_min
    while True:
        balls.append((origin + direction * dist, dist * RADIUS_RATIO))
        if dist * (1.0 + RADIUS_RATIO) >= cover_until:
            break
        dist *= LADDER_STEP


def _measure(E: CompactSet1D, balls, d_min, margin, working, degenerate) -> WhitneyCover1D:
    lo, hi = working
    a_meas, b_meas = math.inf, 0.0
    for (cx, r) in balls:
        edge = OVERLAP_C * r
        probes = np.linspace(cx - edge, cx + edge, 17)
        probes = probes[(probes > lo) & (probes < hi)]
        d = E.distance(probes)
        ratios = d / r
        a_meas = min(a_meas, float(ratios.min()))
        b_meas = max(b_meas, float(ratios.max()))
    n0 = 0
    arr = np.array(balls)
    for i, (cx, r) in enumerate(balls):
        li, hi_i = cx - OVERLAP_C * r, cx + OVERLAP_C * r
        inter = np.sum((arr[:, 0] - OVERLAP_C * arr[:, 1] < hi_i)
                       & (arr[:, 0] + OVERLAP_C * arr[:, 1] > li))
        n0 = max(n0, int(inter))  # count includes the ball itself
    cov = WhitneyCover1D(E, tuple(balls), OVERLAP_C, a_meas, b_meas, n0,
                         d_min, margin, working, degenerate)
    _verify_coverage(cov)
    return cov


def _verify_coverage(cov: WhitneyCover1D, n_probes: int = 1000):
    lo, hi = cov.working
    xs = np.linspace(lo + 1e-12, hi - 1e-12, n_probes)
    d = cov.E.distance(xs)
    need = d >= cov.d_min
    missed = need & ~cov.covers(xs)
    if np.any(missed):
        raise AssertionError(
            f"cover misses {np.count_nonzero(missed)} probes, first at "
            f"x={xs[missed][0]:.6g} (d={d[missed][0]:.3g})")
