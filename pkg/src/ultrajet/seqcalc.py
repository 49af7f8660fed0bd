"""Weight sequences and their associated functions.

A weight sequence M is a positive log-convex sequence with M_0 = 1 whose
quotients mu_k = M_k / M_{k-1} increase from mu_0 = 1.  Everything is stored
and manipulated in the log domain: rows derived from weight functions reach
log M_k ~ 1e4 on a K = 512 prefix, far past double range.

Associated objects: h(t) = inf_k M_k t^k, the counting functions Gamma and
Sigma, and omega(t) = int_0^t Sigma(u)/u du, together with the growth checks
(moderate growth, mixed growth, non-quasianalyticity, equivalence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import PrefixExhausted, SequenceSpecError
from .report import (CheckReport, FAILS, HOLDS, INCONCLUSIVE,
                     report_from_log_witnesses, report_from_prefix_witnesses)

# Relative slack for monotonicity of quotients; absorbs rounding in rows that
# come out of numerical Young conjugation.
MU_MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class WeightSequence:
    """Finite prefix of a weight sequence, in log domain.

    ``log_M[k] = log M_k`` for ``0 <= k <= K`` with ``log_M[0] = 0``.
    """

    log_M: np.ndarray
    family_tag: str = "table"

    def __post_init__(self):
        arr = np.asarray(self.log_M, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "log_M", arr)

    @property
    def K(self) -> int:
        return len(self.log_M) - 1

    @property
    def log_mu(self) -> np.ndarray:
        """log mu_k for k = 1..K (index 0 of the array is k = 1)."""
        return np.diff(self.log_M)

    def mu(self, k: int) -> float:
        if k == 0:
            return 1.0
        return float(math.exp(min(self.log_M[k] - self.log_M[k - 1], 700.0)))

    @property
    def log_m_small(self) -> np.ndarray:
        """log m_k with m_k = M_k / k!."""
        k = np.arange(self.K + 1)
        return self.log_M - gammaln(k + 1)

    def value(self, k: int) -> float:
        return float(math.exp(min(self.log_M[k], 700.0)))

    def truncated(self, K_new: int) -> "WeightSequence":
        if K_new > self.K:
            raise PrefixExhausted(f"prefix has K={self.K}, asked for {K_new}")
        return WeightSequence(self.log_M[: K_new + 1].copy(), self.family_tag)

    def scaled(self, c: float) -> "WeightSequence":
        """The sequence c^k M_k (quotients shift by the constant factor c)."""
        k = np.arange(self.K + 1)
        return WeightSequence(self.log_M + k * math.log(c),
                              f"{self.family_tag}*scale({c:g})")

    def weight_trend_ok(self) -> bool:
        """Prefix trend for M_k^{1/k} -> infinity (reported, never enforced)."""
        k = np.arange(1, self.K + 1)
        root = self.log_M[1:] / k
        return root[-1] >= root[max(0, len(root) // 8)] + math.log(4.0)


def from_log_quotients(log_mu: np.ndarray, family_tag: str) -> WeightSequence:
    log_M = np.concatenate([[0.0], np.cumsum(log_mu)])
    return WeightSequence(log_M, family_tag)


def make_sequence(spec, K: int | None = None) -> WeightSequence:
    """Build a validated WeightSequence from a family descriptor.

    ``spec`` is either a dict ``{"family": ..., "params": {...}, "K": int}``
    or one of the convenience strings handled by :func:`builtin_family`.
    """
    if isinstance(spec, WeightSequence):
        return spec
    if not isinstance(spec, dict):
        raise SequenceSpecError(f"unsupported sequence spec: {spec!r}", code="NON_POSITIVE")
    family = spec.get("family")
    params = spec.get("params", {})
    K = int(spec.get("K", K if K is not None else 512))
    if K < 2:
        raise SequenceSpecError("prefix length K must be >= 2", code="NON_POSITIVE")
    k = np.arange(K + 1, dtype=float)
    if family == "gevrey":
        s = float(params["s"])
        log_M = s * gammaln(k + 1)
        tag = f"gevrey({s:g})"
    elif family == "qgevrey":
        q = float(params["q"])
        if q <= 1:
            raise SequenceSpecError("qgevrey needs q > 1", code="NON_POSITIVE")
        log_M = (k ** 2) * math.log(q)
        tag = f"qgevrey({q:g})"
    elif family == "powerlog":
        A = float(params["A"])
        p = float(params["p"])
        if A <= 1 or p < 1:
            raise SequenceSpecError("powerlog needs A > 1, p >= 1", code="NON_POSITIVE")
        log_M = (k ** p) * math.log(A)
        tag = f"powerlog({A:g},{p:g})"
    elif family == "table":
        vals = params.get("values")
        logs = params.get("log_values")
        if logs is not None:
            log_M = np.asarray(logs, dtype=float)
        else:
            vals = np.asarray(vals, dtype=float)
            if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
                bad = int(np.nonzero(~(vals > 0) | ~np.isfinite(vals))[0][0])
                raise SequenceSpecError(f"non-positive table entry at k={bad}",
                                        code="NON_POSITIVE")
            log_M = np.log(vals)
        tag = "table"
    else:
        raise SequenceSpecError(f"unknown family {family!r}", code="NON_POSITIVE")
    return validate_sequence(log_M, tag)


def validate_sequence(log_M: np.ndarray, family_tag: str) -> WeightSequence:
    log_M = np.asarray(log_M, dtype=float)
    if not np.all(np.isfinite(log_M)):
        raise SequenceSpecError("log M contains non-finite entries", code="NON_POSITIVE")
    if abs(log_M[0]) > 1e-12:
        raise SequenceSpecError("M_0 must be 1", code="NOT_NORMALIZED")
    log_mu = np.diff(log_M)
    scale = np.maximum(1.0, np.abs(log_mu[:-1]))
    drops = log_mu[1:] - log_mu[:-1] < -MU_MONOTONE_TOL * scale
    if log_mu.size and log_mu[0] < -MU_MONOTONE_TOL:
        raise SequenceSpecError("mu_1 < mu_0 = 1", code="NON_LOGCONVEX")
    if np.any(drops):
        k = int(np.nonzero(drops)[0][0]) + 2
        raise SequenceSpecError(f"quotients decrease at k={k}", code="NON_LOGCONVEX")
    return WeightSequence(log_M, family_tag)


# -- associated functions ----------------------------------------------------

def h_assoc(M: WeightSequence, t: float):
    """h(t) = inf_k M_k t^k on the prefix.

    Returns ``(value, attained_k, trusted)`` where ``trusted`` is False when
    the minimum sits at the prefix boundary (the true infimum may be smaller).
    Ties resolve to the smallest index.
    """
    if t <= 0:
        raise ValueError("h_assoc needs t > 0")
    log_t = math.log(t)
    vals = M.log_M + np.arange(M.K + 1) * log_t
    m = float(np.min(vals))
    tied = np.nonzero(vals <= m + 1e-12 * (1.0 + abs(m)))[0]
    k = int(tied[0])
    return math.exp(m), k, bool(k < M.K)


def log_h_assoc(M: WeightSequence, t: float) -> float:
    log_t = math.log(t)
    return float(np.min(M.log_M + np.arange(M.K + 1) * log_t))


def gamma_count(M: WeightSequence, t: float) -> int:
    """Gamma(t) = min{k : mu_{k+1} >= 1/t}, the index attaining h(t).

    At exact quotient points mu_{k+1} = 1/t the tie resolves downward (the
    smallest minimizing index), matched by a relative tolerance.
    """
    if t <= 0:
        raise ValueError("gamma_count needs t > 0")
    target = -math.log(t)  # log(1/t)
    target -= 1e-12 * max(1.0, abs(target))
    log_mu = M.log_mu
    if log_mu[-1] < target:
        raise PrefixExhausted(f"mu_K < 1/t (K={M.K}, t={t:g})")
    return int(np.searchsorted(log_mu, target, side="left"))


def sigma_count(M: WeightSequence, t: float) -> int:
    """Sigma(t) = #{k >= 1 : mu_k <= t} = max{k : mu_k <= t}."""
    log_mu = M.log_mu
    if t <= 0:
        return 0
    log_t = math.log(t)
    if log_t >= log_mu[-1]:
        raise PrefixExhausted(f"t >= mu_K (K={M.K}, t={t:g})")
    return int(np.searchsorted(log_mu, log_t, side="right"))


def omega_assoc(M: WeightSequence, t: float) -> float:
    """omega(t) = sum over mu_k <= t of log(t / mu_k) (exact piecewise form)."""
    if t <= 0:
        return 0.0
    n = sigma_count(M, t)
    if n == 0:
        return 0.0
    log_t = math.log(t)
    return float(np.sum(log_t - M.log_mu[:n]))


# -- growth checks -----------------------------------------------------------

def _pairwise_log_witness(log_v: np.ndarray) -> np.ndarray:
    """For condition V_{j+k} <= C^{j+k} V_j V_k: per-total-order log witness.

    Entry ``i`` (total order n = i + 2) is max over j + k = n of
    ``(log V_n - log V_j - log V_k) / n``.
    """
    K = len(log_v) - 1
    out = np.full(K - 1, -np.inf)
    for n in range(2, K + 1):
        j = np.arange(1, n // 2 + 1)
        w = (log_v[n] - log_v[j] - log_v[n - j]) / n
        out[n - 2] = float(np.max(w))
    return out


def check_moderate_growth(M: WeightSequence) -> dict[str, CheckReport]:
    """The six equivalent moderate-growth conditions, checked independently.

    Returns a map from condition id ``L2.2-0`` .. ``L2.2-5`` to a report.
    The verdicts are expected to agree on every builtin family; callers
    should treat disagreement as a diagnostic, not resolve it.
    """
    if M.K < 8:
        raise ValueError("moderate growth check needs K >= 8")
    K = M.K
    reports: dict[str, CheckReport] = {}

    reports["L2.2-0"] = report_from_log_witnesses(
        _pairwise_log_witness(M.log_m_small), K, note="m_{j+k} <= C^{j+k} m_j m_k")
    reports["L2.2-1"] = report_from_log_witnesses(
        _pairwise_log_witness(M.log_M), K, note="M_{j+k} <= C^{j+k} M_j M_k")

    k = np.arange(1, K + 1)
    w2 = M.log_mu - M.log_M[1:] / k
    reports["L2.2-2"] = report_from_log_witnesses(w2, K, note="mu_k <= C M_k^{1/k}")

    half = K // 2
    kk = np.arange(1, half + 1)
    w3 = M.log_M[2 * kk] - M.log_M[2 * kk - 1] - M.log_mu[kk - 1]
    reports["L2.2-3"] = report_from_log_witnesses(w3, K, note="mu_{2k} <= C mu_k")

    # (4): 2 Sigma(t) <= Sigma(Ct).  Binding t are the quotient points; the
    # smallest admissible C at t = mu_k is mu_{2k} / mu_k, evaluated here
    # through Sigma lookups to keep the route independent of (3).
    w4 = []
    log_mu = M.log_mu
    for kc in range(1, half + 1):
        t_log = log_mu[kc - 1]
        need = 2 * kc  # need Sigma(C t) >= 2k
        w4.append(log_mu[need - 1] - t_log)
    reports["L2.2-4"] = report_from_log_witnesses(
        np.asarray(w4), K, note="2 Sigma(t) <= Sigma(Ct)")

    reports["L2.2-5"] = _check_omega_doubling(M)
    return reports


def _omega_on_quotients(M: WeightSequence, upto: int) -> np.ndarray:
    """omega(mu_k) for k = 1..upto computed from the exact sum formula."""
    log_mu = M.log_mu[:upto]
    csum = np.cumsum(log_mu)
    k = np.arange(1, upto + 1)
    return k * log_mu - csum


def _check_omega_doubling(M: WeightSequence) -> CheckReport:
    """Condition (5): exists C with 2 omega(t) <= omega(Ct) + C for all t.

    The witness at prefix K' is the smallest log C on a half-unit grid that
    validates the inequality at every quotient point below the prefix edge;
    trend semantics then compare the half and full prefix witnesses.
    """
    K = M.K

    csum = np.concatenate([[0.0], np.cumsum(M.log_mu)])

    def smallest_logC(upto: int) -> tuple[float, int]:
        om = _omega_on_quotients(M, upto)
        log_mu = M.log_mu[:upto]
        bad = np.array([True])
        for logC in np.arange(0.0, 3 * 700.0, 0.5):
            # omega(C t) at t = mu_k: count quotients <= C t, exact sum.
            # Only quotient points with C t inside the stored range are
            # binding; past the edge omega(Ct) cannot be evaluated honestly.
            ct = log_mu + logC
            inside = ct <= M.log_mu[-1]
            if not np.any(inside):
                return logC, -1  # vacuous on the prefix; trend/cap decides
            n = np.searchsorted(M.log_mu, ct[inside], side="right")
            om_ct = n * ct[inside] - csum[n]
            bad = 2 * om[inside] > om_ct + math.exp(min(logC, 700.0))
            if not np.any(bad):
                return logC, -1
        return float("inf"), int(np.nonzero(bad)[0][0]) + 1

    w_half, _ = smallest_logC(K // 2)
    w_full, idx = smallest_logC(K)
    return report_from_prefix_witnesses(
        w_half, w_full, K,
        counterexample_index=None if math.isfinite(w_full) else max(idx, 1),
        note="2 omega(t) <= omega(Ct) + C")


def check_mixed_growth(M: WeightSequence, Mdot: WeightSequence) -> dict[str, CheckReport]:
    """Mixed growth of a pair: mu_{2k} <= C mudot_k and its consequences.

    Reports the witnesses for the quotient condition, for the two-sequence
    moderate-growth inequality M_{k+j} <= C^{k+j} Mdot_j Mdot_k, for the
    h-function form h_M(t) <= h_Mdot(Ct)^2, and the lambda < 1 of the
    counting-function form 2 Gamma_Mdot(t) <= Gamma_M(lambda t).
    """
    if M.K != Mdot.K:
        raise ValueError("sequences must share prefix length")
    K = M.K
    half = K // 2
    kk = np.arange(1, half + 1)
    w11 = (M.log_M[2 * kk] - M.log_M[2 * kk - 1]) - Mdot.log_mu[kk - 1]
    rep11 = report_from_log_witnesses(w11, K, note="mu_{2k} <= C mudot_k")

    # (2.14): M_{k+j} <= C^{k+j} Mdot_j Mdot_k, per total order
    out = np.full(K - 1, -np.inf)
    for n in range(2, K + 1):
        j = np.arange(0, n // 2 + 1)
        w = (M.log_M[n] - Mdot.log_M[j] - Mdot.log_M[n - j]) / n
        out[n - 2] = float(np.max(w))
    rep14 = report_from_log_witnesses(out, K, note="M_{k+j} <= C^{k+j} Mdot_j Mdot_k")

    # (2.12): h_M(t) <= h_Mdot(Ct)^2 on a trusted log grid of t
    t_grid = _trusted_t_grid(M, 64)
    def smallest_logC_12(upto_K: int) -> float:
        Mt = M.truncated(upto_K)
        Dt = Mdot.truncated(upto_K)
        for logC in np.arange(0.0, 2 * 700.0, 0.5):
            ok = True
            for lt in t_grid:
                lh = float(np.min(Mt.log_M + np.arange(upto_K + 1) * lt))
                lhd = float(np.min(Dt.log_M + np.arange(upto_K + 1) * (lt + logC)))
                if lh > 2 * lhd + 1e-9:
                    ok = False
                    break
            if ok:
                return logC
        return float("inf")

    rep12 = report_from_prefix_witnesses(
        smallest_logC_12(half), smallest_logC_12(K), K,
        counterexample_index=K, note="h_M(t) <= h_Mdot(Ct)^2")

    # (2.13): lambda < 1 with 2 Gamma_Mdot(t) <= Gamma_M(lambda t)
    lam = None
    for cand in [2.0 ** -e for e in range(1, 30)]:
        if _gamma_doubling_holds(M, Mdot, cand):
            lam = cand
            break
    if lam is not None:
        rep13 = CheckReport(HOLDS, K, witness_constant=lam,
                            note="2 Gamma_Mdot(t) <= Gamma_M(lambda t); witness is lambda")
    else:
        rep13 = CheckReport(FAILS, K, counterexample_index=K,
                            note="no lambda in {2^-1..2^-29} validates 2 Gamma_Mdot <= Gamma_M(lambda t)")
    return {"2.11": rep11, "2.12": rep12, "2.13": rep13, "2.14": rep14}


def _gamma_doubling_holds(M: WeightSequence, Mdot: WeightSequence, lam: float) -> bool:
    # binding t: just above 1/mudot_{k+1}, where Gamma_Mdot jumps to k+1
    log_lam = math.log(lam)
    for k1 in range(1, Mdot.K):
        log_t = -Mdot.log_mu[k1 - 1] + 1e-12  # Gamma_Mdot(t) = k1 at this t
        lt = log_t + log_lam
        if -lt > M.log_mu[-1]:
            return False  # lambda t fell off the prefix: cannot certify
        i = int(np.searchsorted(M.log_mu, -lt, side="left"))
        if 2 * k1 > i:
            return False
        if Mdot.log_mu[k1 - 1] > 0.5 * M.log_M[-1] / M.K:
            break  # deep enough; remaining t are tiny and fall off the prefix
    return True


def _trusted_t_grid(M: WeightSequence, n: int) -> np.ndarray:
    """Log-spaced log-t grid inside (1/mu_K, 1/mu_1), where h is trusted."""
    lo = -M.log_mu[-1] * 0.9
    hi = -M.log_mu[0] if M.log_mu[0] > 0 else -M.log_mu[max(1, M.K // 8)]
    hi = min(hi, -1e-3)
    if lo >= hi:
        lo = hi - 10.0
    return np.linspace(lo, hi, n)


def check_nonquasianalytic(N: WeightSequence) -> CheckReport:
    """Convergence trend for sum_k 1/nu_k.

    Log-log slope of 1/nu_k over the tail half of the prefix: slope <= -1.1
    reports HOLDS (witness = partial sum), slope >= -1.0 reports FAILS, in
    between is INCONCLUSIVE.  A prefix cannot prove convergence; thresholds
    are part of the contract.
    """
    if N.K < 8:
        raise ValueError("non-quasianalyticity check needs K >= 8")
    K = N.K
    k = np.arange(1, K + 1)
    log_inv = -N.log_mu  # log(1/nu_k)
    w = slice(K // 2 - 1, K)
    x = np.log(k[w])
    y = log_inv[w]
    slope = float(np.polyfit(x, y, 1)[0])
    partial = float(np.sum(np.exp(np.maximum(log_inv, -700.0))))
    if slope <= -1.1:
        return CheckReport(HOLDS, K, witness_constant=partial,
                           note=f"tail slope {slope:.3f} <= -1.1; witness is the partial sum")
    if slope >= -1.0:
        return CheckReport(FAILS, K, witness_constant=partial,
                           counterexample_index=K,
                           note=f"tail slope {slope:.3f} >= -1.0 (divergence trend)")
    return CheckReport(INCONCLUSIVE, K, witness_constant=partial,
                       note=f"tail slope {slope:.3f} in (-1.1, -1.0)")


def check_equivalence(M: WeightSequence, N: WeightSequence) -> dict[str, CheckReport]:
    """Witnesses for M_k^{1/k} <= C N_k^{1/k} in both directions.

    Also reports the stronger quotient relation mu ~ nu; equivalence of the
    root sequences follows from it.
    """
    if M.K != N.K:
        raise ValueError("sequences must share prefix length")
    K = M.K
    k = np.arange(1, K + 1)
    fwd = (M.log_M[1:] - N.log_M[1:]) / k
    bwd = -fwd
    rep_f = report_from_log_witnesses(fwd, K, note="M_k^{1/k} <= C N_k^{1/k}")
    rep_b = report_from_log_witnesses(bwd, K, note="N_k^{1/k} <= C M_k^{1/k}")
    qf = report_from_log_witnesses(M.log_mu - N.log_mu, K, note="mu_k <= C nu_k")
    qb = report_from_log_witnesses(N.log_mu - M.log_mu, K, note="nu_k <= C mu_k")
    both = HOLDS if rep_f.holds and rep_b.holds else (
        FAILS if FAILS in (rep_f.verdict, rep_b.verdict) else INCONCLUSIVE)
    summary = CheckReport(
        both, K,
        witness_constant=max(rep_f.witness_constant or 1.0, rep_b.witness_constant or 1.0),
        counterexample_index=(rep_f.counterexample_index or rep_b.counterexample_index)
        if both == FAILS else None,
        note="equivalence M^{1/k} ~ N^{1/k}")
    return {"forward": rep_f, "backward": rep_b,
            "quotient_forward": qf, "quotient_backward": qb,
            "equivalent": summary}


# -- convenience builders used across tests and the CLI ----------------------

def gevrey(s: float, K: int = 512) -> WeightSequence:
    return make_sequence({"family": "gevrey", "params": {"s": s}, "K": K})


def qgevrey(q: float, K: int = 512) -> WeightSequence:
    return make_sequence({"family": "qgevrey", "params": {"q": q}, "K": K})


def powerlog(A: float, p: float, K: int = 512) -> WeightSequence:
    return make_sequence({"family": "powerlog", "params": {"A": A, "p": p}, "K": K})
