"""Tail estimation for sums over a stored prefix.

The descendant construction and every decision check need values of
``sum_{j >= k} 1/nu_j`` while only ``j <= K`` is stored.  Two estimators
cover the sequences we meet:

* power-law fit ``log(1/nu_j) ~ log a - b log j + sum_q c_q j^{-q}`` on the
  tail half of the prefix, summed past K with Hurwitz zeta values (after
  expanding the exponential of the correction series to matching order);
* a geometric bracket from the last quotient, for super-power decay where
  the log-log fit has no meaning.

The estimator is chosen by fit quality; the returned error bar combines the
model-order and window sensitivities and is empirically conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import TailUnreliable

FIT_ORDERS = 4
RESID_GOOD = 1e-7


@dataclass(frozen=True)
class TailEstimate:
    beyond: float          # estimate of sum_{j > K} of the sequence
    err_bar: float         # absolute uncertainty of `beyond`
    method: str            # "powerlaw" | "geometric" | "none"
    fitted_decay: float    # exponent b of j^-b, or +inf for geometric


def _powerlaw_fit(vals: np.ndarray, K: int, orders: int, lo_frac: float):
    j = np.arange(1, K + 1, dtype=float)
    w = slice(int(lo_frac * K), K)
    jw = j[w]
    yw = np.log(vals[w])
    cols = [np.ones_like(jw), np.log(jw)] + [(K / jw) ** q for q in range(1, orders + 1)]
    X = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(X, yw, rcond=None)
    resid = float(np.abs(X @ coef - yw).max())
    b = -coef[1]
    if not np.isfinite(b) or b <= 1.05:
        return None
    # c[q]: coefficient of j^-q; exponential expansion to the same order
    c = np.zeros(orders + 1)
    for q in range(1, orders + 1):
        c[q] = coef[2 + q - 1] * K ** q
    e = np.zeros(orders + 1)
    e[0] = 1.0
    for n in range(1, orders + 1):
        e[n] = sum(m * c[m] * e[n - m] for m in range(1, n + 1)) / n
    if np.max(np.abs(e[1:]) * (1.0 / K) ** np.arange(1, orders + 1)) > 0.5:
        return None  # corrections too large on the window: not power-law data
    a = math.exp(min(coef[0], 700.0))
    try:
        est = a * sum(float(e[q]) * float(mpmath.zeta(b + q, K + 1))
                      for q in range(0, orders + 1))
    except (ValueError, OverflowError):
        return None
    if not np.isfinite(est) or est < 0:
        return None
    return est, resid


def estimate_tail(vals: np.ndarray, *, positive: bool = True) -> TailEstimate:
    """Estimate sum_{j > K} v_j from samples v_1..v_K of a decaying sequence."""
    vals = np.asarray(vals, dtype=float)
    K = len(vals)
    if K < 16 or np.any(vals <= 0):
        return TailEstimate(0.0, float("inf"), "none", float("nan"))

    fits = {}
    for orders, frac in [(FIT_ORDERS, 0.5), (FIT_ORDERS - 1, 0.5), (FIT_ORDERS, 0.75)]:
        fits[(orders, frac)] = _powerlaw_fit(vals, K, orders, frac)
    main = fits[(FIT_ORDERS, 0.5)]

    ratios = vals[-8:] / vals[-9:-1]
    r = float(ratios[-1])
    geo_ok = np.all(ratios < 0.999) and r < 0.999
    geo = vals[-1] * r / (1.0 - r) if geo_ok else float("inf")

    if main is not None and main[1] < RESID_GOOD:
        est, resid = main
        alt1 = fits[(FIT_ORDERS - 1, 0.5)]
        alt2 = fits[(FIT_ORDERS, 0.75)]
        spread = sum(abs(est - a[0]) for a in (alt1, alt2) if a is not None)
        err = 4.0 * spread + 3.0 * resid * est + 1e-15 * est
        return TailEstimate(float(est), float(err), "powerlaw",
                            float(-np.log(vals[-1] / vals[-2]) / np.log(K / (K - 1.0))))
    if geo_ok:
        # quotients of a log-convex nu give decreasing ratios: geometric sum
        # with the last ratio is an upper bracket, one extra term the lower
        lo = vals[-1] * r
        return TailEstimate(float(geo), float(abs(geo - lo)), "geometric", float("inf"))
    return TailEstimate(0.0, float("inf"), "none", float("nan"))


def tail_sums(vals: np.ndarray, *, rel_cap: float | None = 0.01,
              what: str = "sum 1/nu") -> tuple[np.ndarray, TailEstimate]:
    """All suffix sums ``T_k = sum_{j >= k} v_j`` (1-based k) with tail.

    Raises TAIL_UNRELIABLE when the tail estimate (plus its error bar)
    exceeds ``rel_cap`` times the full partial sum.
    """
    vals = np.asarray(vals, dtype=float)
    est = estimate_tail(vals)
    beyond = est.beyond if np.isfinite(est.err_bar) else 0.0
    suffix = np.cumsum(vals[::-1])[::-1] + beyond
    if rel_cap is not None:
        total = float(suffix[0])
        bound = beyond + (est.err_bar if np.isfinite(est.err_bar) else 0.0)
        if not np.isfinite(est.err_bar) and est.method == "none":
            # undetectable decay: treat the last term as the scale of the tail
            bound = float(vals[-1] * len(vals))
        if bound > rel_cap * total:
            raise TailUnreliable(
                f"tail bound {bound:.3e} exceeds {rel_cap:.0%} of partial {what} {total:.3e}")
    return suffix, est


def log_suffix_sums(log_vals: np.ndarray, *, rel_cap: float | None = 0.01,
                    what: str = "sum 1/nu") -> tuple[np.ndarray, TailEstimate]:
    """log of the suffix sums of exp(log_vals), safe far below double range.

    Values within double range delegate to :func:`tail_sums`; otherwise the
    running sums accumulate with logaddexp and the tail past the prefix is
    bounded geometrically from the last log-decrements.
    """
    log_vals = np.asarray(log_vals, dtype=float)
    if np.min(log_vals) > -700.0:
        suffix, est = tail_sums(np.exp(log_vals), rel_cap=rel_cap, what=what)
        return np.log(suffix), est
    steps = np.diff(log_vals[-8:])
    q = float(np.exp(steps[-1]))
    if np.any(steps > -1e-12) or q >= 0.999:
        if rel_cap is not None:
            raise TailUnreliable(
                f"no decay detected in deep-underflow regime for {what}")
        log_beyond = float(log_vals[-1])  # crude: one more comparable term
        est = TailEstimate(0.0, float("inf"), "none", float("nan"))
    else:
        log_beyond = (float(log_vals[-1] + math.log(q / (1.0 - q)))
                      if q > 0.0 else -math.inf)
        est = TailEstimate(0.0, 0.0, "geometric-log", float("inf"))
    rev = np.concatenate([[log_beyond], log_vals[::-1]])
    acc = np.logaddexp.accumulate(rev)[1:]
    return acc[::-1], est
