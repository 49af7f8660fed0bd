"""Controlled-derivative cutoff functions as exact splines.

A cutoff phi_{eps,t} is an iterated box-convolution of an indicator: the
box widths come from a two-regime sequence alpha_k^p ((2p)^k up to order p,
then a multiple of the growth row), chosen so that the width sum stays
below 1 and the k-th derivative is bounded by eps^k Ndot_k over the
h-function of the descendant at scale eps (t - 1).

Everything is verified numerically after construction; the constants
(A, delta, B) are searched or computed, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..descend import Descendant
from ..errors import CutoffError
from ..seqcalc import WeightSequence, log_h_assoc
from .ppoly import DEDUP_REL_TOL, PiecewisePolynomial, indicator

WIDTH_FLOOR_REL = 1e-14


@dataclass(frozen=True)
class AlphaSequence:
    p: int
    A: float
    log_alpha: np.ndarray      # indices 0..n
    ratio_sum: float           # sum_k alpha_k / alpha_{k+1} incl. tail bound
    valid: bool

    def widths(self, upto: int) -> np.ndarray:
        """d_k = alpha_{k-1}/alpha_k for k = 1..upto."""
        la = self.log_alpha
        n = min(upto, len(la) - 1)
        return np.exp(np.maximum(la[:n] - la[1 : n + 1], -745.0))


def alpha_sequence(D: Descendant, Ndot: WeightSequence, p: int, A: float,
                   n_terms: int | None = None) -> AlphaSequence:
    """The order-p interpolation sequence with constant A.

    alpha_k = (2p)^k for k <= p and (A / sigma*_{p+1})^k Ndot_k beyond;
    validity means the ratio sum sum_{k>=0} alpha_k/alpha_{k+1} (with a
    geometric tail bound past the stored prefix) stays at most 1.
    """
    if p < 1:
        raise ValueError("alpha_sequence needs p >= 1")
    K_avail = min(D.K_eff - 1, Ndot.K)
    p_used = min(p, K_avail - 1)
    n = K_avail if n_terms is None else min(n_terms, K_avail)
    k = np.arange(n + 1, dtype=float)
    log_np = np.cumsum(np.concatenate([[0.0], Ndot.log_mu]))[: n + 1]  # log Ndot_k
    log_sig_star_next = D.log_sigma_star[p_used]  # sigma*_{p+1} (0-based index p)
    log_alpha = np.where(
        k <= p_used,
        k * math.log(2.0 * p),
        k * (math.log(A) - log_sig_star_next) + log_np)
    ratios = np.exp(np.minimum(log_alpha[:-1] - log_alpha[1:], 700.0))
    tail = 0.0
    if n >= 2:
        q = ratios[-1] / max(ratios[-2], 1e-300)
        if q < 0.9:
            tail = ratios[-1] * q / (1.0 - q)
        else:
            tail = ratios[-1] * n  # no decay detected: crude cap, flags invalid
    total = float(np.sum(ratios) + tail)
    return AlphaSequence(p, A, log_alpha, total, total <= 1.0 + 1e-12)


@dataclass(frozen=True)
class CutoffFamily:
    """Shared data for all cutoffs built from one (descendant, growth row) pair."""

    D: Descendant              # descendant of the regularity row
    Ndot: WeightSequence       # growth row appearing in the derivative bounds
    A: float
    delta: float               # 1 / h_s(1/3)
    B: float                   # 1 / (6 delta A)
    conv_depth: int = 24
    p_cap: int = field(default=0)

    def __post_init__(self):
        if self.p_cap == 0:
            object.__setattr__(self, "p_cap", self.D.K_eff - 2)

    def log_h_small_s(self, t: float) -> float:
        return log_h_assoc(self.D.small_s, t)

    def log_derivative_bound(self, epsilon: float, t: float, k: int) -> float:
        """log of eps^k Ndot_k / h_s(B eps (t-1))."""
        log_nd = float(np.sum(self.Ndot.log_mu[:k])) if k else 0.0
        return (k * math.log(epsilon) + log_nd
                - self.log_h_small_s(self.B * epsilon * (t - 1.0)))


def make_cutoff_family(D: Descendant, Ndot: WeightSequence, conv_depth: int = 24,
                       probe_ps=(1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64)) -> CutoffFamily:
    """Search the smallest power-of-two A validating the ratio-sum bound for
    a spread of orders p, then freeze delta and B."""
    A = 1.0
    for _ in range(60):
        if all(alpha_sequence(D, Ndot, p, A).valid
               for p in probe_ps if p <= D.K_eff - 2):
            break
        A *= 2.0
    else:
        raise CutoffError("no A up to 2^60 validates the ratio sum", code="A_TOO_SMALL")
    delta = math.exp(min(-log_h_assoc(D.small_s, 1.0 / 3.0), 700.0))
    B = 1.0 / (6.0 * delta * A)
    return CutoffFamily(D, Ndot, A, delta, B, conv_depth)


@dataclass(frozen=True)
class CutoffResult:
    pp: PiecewisePolynomial
    epsilon: float
    t: float
    p: int
    n_convolutions: int
    widths: np.ndarray
    lattice_only: bool


def build_cutoff(fam: CutoffFamily, epsilon: float, t: float,
                 min_smoothness: int | None = None) -> CutoffResult:
    """phi_{eps,t}: 1 on [-1, 1], 0 outside (-t, t), derivative bounds per
    the family.

    The box widths are the alpha quotients scaled by (t - 1); the order p is
    the largest with sigma*_p <= 2A / (eps (t-1) / delta), clamped to the
    stored prefix.  Convolutions stop at the family depth or when widths
    fall below representable spacing; the declared smoothness order is the
    number of convolutions minus one, and callers needing derivative orders
    beyond that get DEPTH_INSUFFICIENT.
    """
    if t <= 1.0:
        raise ValueError("build_cutoff needs t > 1")
    if epsilon <= 0.0:
        raise ValueError("build_cutoff needs epsilon > 0")
    # Convolutions beyond the claimed smoothness only shrink the derivative
    # bounds we never assert; stopping there keeps the piece count linear in
    # the lattice regime and geometric only over claimed orders.
    depth_cap = fam.conv_depth if min_smoothness is None else min(
        fam.conv_depth, max(min_smoothness + 1, 2))
    lam = t - 1.0
    eta_t = epsilon * lam / fam.delta
    log_bound = math.log(2.0 * fam.A) - math.log(eta_t)
    if log_bound < 0.0:
        p = 1           # eta past the top of the scale: reuse the coarsest bump
    else:
        p = int(np.searchsorted(fam.D.log_sigma_star, log_bound, side="right"))
        p = max(1, min(p, fam.p_cap))
    alpha = alpha_sequence(fam.D, fam.Ndot, p, fam.A, n_terms=None)
    if not alpha.valid:
        raise CutoffError(f"ratio sum {alpha.ratio_sum:.4f} > 1 at p={p}, A={fam.A}",
                          code="A_TOO_SMALL")
    widths = lam * alpha.widths(depth_cap)
    if float(np.sum(widths)) > lam * (1.0 + 1e-9):
        raise CutoffError(
            f"width sum {np.sum(widths):.4f} exceeds budget t-1 = {lam:.4f}",
            code="WIDTH_BUDGET")
    floor = WIDTH_FLOOR_REL * 2.0 * t
    usable = int(np.argmax(widths < floor)) if np.any(widths < floor) else len(widths)
    if usable == 0:
        raise CutoffError("first box width below representable spacing",
                          code="DEPTH_INSUFFICIENT")
    n = usable
    if min_smoothness is not None and n - 1 < min_smoothness:
        raise CutoffError(
            f"only {n} convolutions representable (smoothness {n - 1} < "
            f"{min_smoothness}); enlarge conv_depth or lower the requested order",
            code="DEPTH_INSUFFICIENT")
    c0 = 0.5 * (t + 1.0)
    pp = indicator(-c0, c0)
    for w in widths[:n]:
        pp = pp.convolve_box(float(w))
    lo, hi = pp.span
    if not (-t - 1e-9 <= lo and hi <= t + 1e-9):
        raise CutoffError("support escaped (-t, t)", code="WIDTH_BUDGET")
    return CutoffResult(pp, epsilon, t, p, n, widths[:n], bool(p >= fam.conv_depth))


def verify_cutoff(fam: CutoffFamily, res: CutoffResult, orders, n_probes: int = 1000,
                  rng=None) -> dict:
    """Range, plateau, support, and derivative-bound checks on a probe grid.

    Derivative bounds are compared in the log domain: the right-hand side
    routinely exceeds double range.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    t = res.t
    xs = np.linspace(-t - 0.25, t + 0.25, n_probes)
    xs = np.concatenate([xs, rng.uniform(-t, t, n_probes // 4), [-1.0, 0.0, 1.0, -t, t]])
    vals = res.pp(xs)
    out = {
        "range_ok": bool(np.all(vals >= -1e-12) and np.all(vals <= 1.0 + 1e-12)),
        "plateau_ok": bool(np.all(np.abs(res.pp(xs[np.abs(xs) <= 1.0]) - 1.0) <= 1e-12)),
        "support_ok": bool(np.all(np.abs(vals[np.abs(xs) >= t]) <= 1e-12)),
        "orders": {},
    }
    sup = res.pp.support()
    out["support_window"] = sup
    out["support_exact"] = bool(sup[0] >= -t - 1e-12 and sup[1] <= t + 1e-12)
    for k in orders:
        if k > res.n_convolutions - 1:
            out["orders"][k] = {"checked": False, "reason": "beyond smoothness order"}
            continue
        dvals = np.abs(res.pp(xs, order=k))
        log_lhs = np.log(np.maximum(dvals, 1e-300))
        log_rhs = fam.log_derivative_bound(res.epsilon, t, k)
        viol = int(np.sum(log_lhs > log_rhs + 1e-9))
        out["orders"][k] = {
            "checked": True,
            "violations": viol,
            "max_log_margin": float(np.max(log_lhs - log_rhs)),
        }
    out["bound_ok"] = all(o.get("violations", 1) == 0
                          for o in out["orders"].values() if o["checked"])
    return out
