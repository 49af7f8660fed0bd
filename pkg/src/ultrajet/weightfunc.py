"""Weight functions, Young conjugates, and associated weight matrices.

A weight function omega is a continuous increasing gauge vanishing on
[0, 1] whose composition phi(y) = omega(e^y) is convex.  Its Young
conjugate phi*(x) = sup_y (xy - phi(y)) generates a one-parameter family of
weight sequences log W_k^x = phi*(x k) / x, the associated weight matrix.

The closed-form family omega_s(t) = max(0, (log t)^s) has
phi_s*(x) = C_s x^r with r = s/(s-1) and C_s = (s-1) s^{-r}; rows built
from it use the closed form and are cross-checked against the numerical
conjugate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConjugateUnbounded, SequenceSpecError
from .report import (CheckReport, FAILS, HOLDS, INCONCLUSIVE, NOT_WITNESSED,
                     report_from_log_witnesses)
from .seqcalc import WeightSequence, check_nonquasianalytic, validate_sequence

TERNARY_REL_TOL = 1e-10
Y_MAX_CAP = 1e12

# Default parameter grid; geometric so that the (x, 4x) pairs needed by the
# matrix moderate-growth condition are always present.
DEFAULT_PARAMS = tuple(2.0 ** j for j in range(-3, 7))


@dataclass(frozen=True)
class WeightFunction:
    """Evaluatable weight function with cached property checks."""

    kind: str                 # "omega_s" | "table"
    s: float | None = None
    table_log_t: np.ndarray | None = None
    table_w: np.ndarray | None = None

    @property
    def tag(self) -> str:
        if self.kind == "omega_s":
            return f"omega_s({self.s:g})"
        return "omega_table"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "omega_s":
            out = np.where(t > 1.0, np.power(np.log(np.maximum(t, 1.0)), self.s), 0.0)
            return out if out.shape else float(out)
        # monotone piecewise-linear interpolation in log t; linear
        # extrapolation with the last segment's slope past the table
        lt = np.log(np.maximum(t, 1e-300))
        out = np.interp(lt, self.table_log_t, self.table_w)
        right = lt > self.table_log_t[-1]
        if np.any(right):
            sl = ((self.table_w[-1] - self.table_w[-2])
                  / (self.table_log_t[-1] - self.table_log_t[-2]))
            out = np.where(right, self.table_w[-1] + sl * (lt - self.table_log_t[-1]), out)
        out = np.where(t <= 1.0, np.minimum(out, _interp_at_one(self)), out)
        return out if out.shape else float(out)

    def phi(self, y):
        """phi(y) = omega(e^y); y may be any real."""
        y = np.asarray(y, dtype=float)
        if self.kind == "omega_s":
            out = np.where(y > 0.0, np.power(np.maximum(y, 0.0), self.s), 0.0)
            return out if out.shape else float(out)
        return self(np.exp(np.minimum(y, 700.0)))

    def props(self, grid_n: int = 400) -> dict[str, CheckReport]:
        """Qualitative requirements on a log grid: doubling, linear bound,
        log t = o(omega), and convexity of phi via second differences."""
        if self.kind == "omega_s":
            hi = 30.0
        else:
            hi = float(self.table_log_t[-1])
        y = np.linspace(0.25, hi, grid_n)
        w = self.phi(y)
        rep: dict[str, CheckReport] = {}
        rep["2.15"] = report_from_log_witnesses(
            np.log(np.maximum(self.phi(y + math.log(2.0)), 1e-300))
            - np.log(np.maximum(w, 1e-300)), grid_n, note="omega(2t) = O(omega(t))")
        rep["2.16"] = report_from_log_witnesses(
            np.log(np.maximum(w, 1e-300)) - y, grid_n, note="omega(t) = O(t)")
        ratio = w / np.maximum(y, 1e-300)
        tail = ratio[np.nonzero(w > 0)[0][0]:] if np.any(w > 0) else ratio
        verdict = HOLDS if tail[-1] >= 4.0 * tail[0] or tail[-1] > 50 else INCONCLUSIVE
        rep["2.17"] = CheckReport(verdict, grid_n, witness_constant=float(tail[-1]),
                                  note="log t = o(omega(t)) trend")
        d2 = w[2:] - 2 * w[1:-1] + w[:-2]
        ok = bool(np.all(d2 >= -1e-8 * (1 + np.abs(w[1:-1]))))
        rep["2.18"] = CheckReport(HOLDS if ok else FAILS, grid_n,
                                  witness_constant=float(np.min(d2)),
                                  counterexample_index=None if ok else int(np.argmin(d2)) + 1,
                                  note="phi(y) = omega(e^y) convex (second differences)")
        return rep


def _interp_at_one(w: WeightFunction) -> float:
    return float(np.interp(0.0, w.table_log_t, w.table_w))


def omega_s(s: float) -> WeightFunction:
    if s <= 1:
        raise SequenceSpecError("omega_s needs s > 1", code="NON_POSITIVE")
    return WeightFunction("omega_s", s=float(s))


def omega_table(points) -> WeightFunction:
    pts = sorted((float(t), float(v)) for t, v in points)
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(t <= 0) or np.any(v < 0) or np.any(np.diff(v) < 0):
        raise SequenceSpecError("omega table must be positive and nondecreasing",
                                code="NON_POSITIVE")
    return WeightFunction("table", table_log_t=np.log(t), table_w=v)


def omega_s_conjugate_exact(s: float, x) -> np.ndarray:
    """phi_s*(x) = C_s x^r with r = s/(s-1), C_s = (s-1) s^{-r}."""
    r = s / (s - 1.0)
    C_s = (s - 1.0) * s ** (-r)
    return C_s * np.power(np.asarray(x, dtype=float), r)


def young_conjugate(w: WeightFunction, x: float) -> float:
    """phi*(x) = sup_{y >= 0} (x y - phi(y)) by ternary search.

    The conjugand is concave in y (phi convex), so the search brackets the
    unique maximizer after doubling y_max until the slope turns negative.
    """
    if x < 0:
        raise ValueError("young_conjugate needs x >= 0")
    if x == 0.0:
        return 0.0
    f = lambda y: x * y - float(w.phi(y))
    # concavity: once f(2y) < f(y) the maximizer lies below 2y
    y_hi = 1.0
    while f(2.0 * y_hi) >= f(y_hi):
        y_hi *= 2.0
        if y_hi > Y_MAX_CAP:
            raise ConjugateUnbounded(
                f"x y - phi(y) still increasing at y = {y_hi:.2e}; "
                "omega grows too slowly (log t = o(omega) violated)")
    y_hi *= 2.0
    y_lo = 0.0
    while y_hi - y_lo > TERNARY_REL_TOL * max(1.0, y_hi):
        m1 = y_lo + (y_hi - y_lo) / 3.0
        m2 = y_hi - (y_hi - y_lo) / 3.0
        if f(m1) < f(m2):
            y_lo = m1
        else:
            y_hi = m2
    return max(0.0, f(0.5 * (y_lo + y_hi)))


@dataclass(frozen=True)
class WeightMatrix:
    """Parameter-indexed, pointwise-ordered family of weight sequences."""

    params: tuple
    rows: tuple            # of WeightSequence, same order as params
    origin: str = "manual"

    def __post_init__(self):
        if list(self.params) != sorted(self.params) or len(set(self.params)) != len(self.params):
            raise SequenceSpecError("matrix params must be strictly increasing",
                                    code="NON_POSITIVE")
        Ks = {r.K for r in self.rows}
        if len(Ks) != 1:
            raise SequenceSpecError("matrix rows must share prefix length",
                                    code="NON_POSITIVE")

    @property
    def K(self) -> int:
        return self.rows[0].K

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, i: int) -> WeightSequence:
        return self.rows[i]

    def pointwise_ordered(self) -> bool:
        tol = 1e-9
        for a, b in zip(self.rows[:-1], self.rows[1:]):
            if np.any(a.log_M > b.log_M + tol) or np.any(a.log_mu > b.log_mu + tol):
                return False
        return True


def associated_matrix(w: WeightFunction, params=DEFAULT_PARAMS, K: int = 512,
                      crosscheck: bool = True) -> WeightMatrix:
    """Rows log W_k^x = phi*(x k) / x for each parameter x.

    omega_s uses the closed form and (optionally) cross-checks a sample of
    entries against the numerical conjugate.  Rows inherit log-convexity
    from convexity of phi*; sub-rounding violations from the numerical
    conjugate are clamped and anything larger is an error.
    """
    params = tuple(sorted(float(p) for p in params))
    k = np.arange(K + 1, dtype=float)
    rows = []
    for x in params:
        if w.kind == "omega_s":
            log_row = omega_s_conjugate_exact(w.s, x * k) / x
            if crosscheck:
                for kk in (1, 2, 5, min(17, K)):
                    num = young_conjugate(w, x * kk) / x
                    if abs(num - log_row[kk]) > 1e-6 * max(1.0, abs(log_row[kk])):
                        raise SequenceSpecError(
                            f"closed-form/numeric conjugate mismatch at x={x}, k={kk}",
                            code="NON_POSITIVE")
        else:
            log_row = np.array([young_conjugate(w, x * kk) / x for kk in k])
            log_row = _clamp_tiny_quotient_dips(log_row)
        rows.append(validate_sequence(log_row, f"{w.tag}|x={x:g}"))
    return WeightMatrix(params, tuple(rows), origin=w.tag)


def _clamp_tiny_quotient_dips(log_row: np.ndarray) -> np.ndarray:
    """Round away quotient inversions below 1e-8 relative (conjugate noise)."""
    out = log_row.copy()
    for i in range(2, len(out)):
        lo = 2 * out[i - 1] - out[i - 2]  # convexity floor
        if out[i] < lo and out[i] > lo - 1e-8 * max(1.0, abs(lo)):
            out[i] = lo
    return out


def matrix_from_rows(rows, params=None, origin: str = "manual") -> WeightMatrix:
    rows = tuple(rows)
    if params is None:
        params = tuple(range(1, len(rows) + 1))
    return WeightMatrix(tuple(float(p) for p in params), rows, origin=origin)


# -- admissibility (Def of an admissible matrix) ------------------------------

def check_admissible_matrix(mat: WeightMatrix, check_43=None) -> dict[str, CheckReport]:
    """Five admissibility conditions on a sampled matrix.

    (1) pairwise quotient comparability; (2) non-quasianalyticity per row;
    (3) the quotient-regularity condition per row (delegated to the decision
    module and injected here to avoid an import cycle); (4) for each row N
    some row Ndot with nu_k <= C Ndot_k^{1/k}; (5) for each row some Ndot
    with nu_{2k} <= C nudot_k.  Existential clauses search the sample only:
    a missing witness is NOT_WITNESSED_IN_SAMPLE, never a disproof.
    """
    if check_43 is None:
        from .decide import check_43 as _c43
        check_43 = _c43
    K = mat.K
    out: dict[str, CheckReport] = {}

    worst = None
    for i, a in enumerate(mat.rows):
        for b in mat.rows[i + 1:]:
            fwd = report_from_log_witnesses(a.log_mu - b.log_mu, K)
            bwd = report_from_log_witnesses(b.log_mu - a.log_mu, K)
            best = fwd if (fwd.witness_constant or np.inf) <= (bwd.witness_constant or np.inf) else bwd
            if best.verdict != HOLDS:
                best = fwd if fwd.holds else bwd
            if worst is None or not best.holds:
                worst = best
            if not best.holds:
                break
    out["4.6-1"] = worst if worst is not None else CheckReport(
        HOLDS, K, witness_constant=1.0, note="single row")
    out["4.6-1"] = CheckReport(out["4.6-1"].verdict, K,
                               witness_constant=out["4.6-1"].witness_constant,
                               counterexample_index=out["4.6-1"].counterexample_index,
                               note="pairwise quotient comparability")

    nq = [check_nonquasianalytic(r) for r in mat.rows]
    bad = [r for r in nq if r.verdict != HOLDS]
    out["4.6-2"] = bad[0] if bad else CheckReport(
        HOLDS, K, witness_constant=max(r.witness_constant for r in nq),
        note="non-quasianalytic per row")

    c43 = [check_43(r) for r in mat.rows]
    bad = [r for r in c43 if r.verdict != HOLDS]
    out["4.6-3"] = bad[0] if bad else CheckReport(
        HOLDS, K, witness_constant=max(r.witness_constant for r in c43),
        note="quotient regularity (4.3) per row")

    out["4.6-4"] = _existential(mat, _root_domination_witness,
                                "nu_k <= C Ndot_k^{1/k} for some sampled row")
    out["4.6-5"] = _existential(mat, _doubling_domination_witness,
                                "nu_{2k} <= C nudot_k for some sampled row")
    return out


def _root_domination_witness(n: WeightSequence, nd: WeightSequence):
    k = np.arange(1, n.K + 1)
    return n.log_mu - nd.log_M[1:] / k


def _doubling_domination_witness(n: WeightSequence, nd: WeightSequence):
    half = n.K // 2
    kk = np.arange(1, half + 1)
    return (n.log_M[2 * kk] - n.log_M[2 * kk - 1]) - nd.log_mu[kk - 1]


def _existential(mat: WeightMatrix, witness_fn, note: str) -> CheckReport:
    """For each row, search the sample for a dotted partner; report the worst
    witnessed row.  Unwitnessed rows are listed in the note (sampling
    boundary, not a disproof)."""
    K = mat.K
    witnessed = {}
    missing = []
    for i, n in enumerate(mat.rows):
        best = None
        for j, nd in enumerate(mat.rows):
            rep = report_from_log_witnesses(witness_fn(n, nd), K)
            if rep.holds and (best is None or rep.witness_constant < best[1].witness_constant):
                best = (j, rep)
        if best is None:
            missing.append(i)
        else:
            witnessed[i] = best
    if not witnessed:
        return CheckReport(NOT_WITNESSED, K, note=note + "; no row witnessed")
    worst = max(witnessed.values(), key=lambda t: t[1].witness_constant)
    detail = {str(i): {"partner": j, "witness": rep.witness_constant}
              for i, (j, rep) in witnessed.items()}
    if missing and not _is_param_suffix(missing, len(mat.rows)):
        return CheckReport(
            NOT_WITNESSED, K, witness_constant=worst[1].witness_constant,
            note=note + f"; unwitnessed sampled rows {missing}",
            details={"witnessed": detail, "unwitnessed_rows": missing})
    note_sfx = (f"; top rows {missing} lack partners in the sample "
                "(sampling boundary)") if missing else ""
    return CheckReport(HOLDS, K, witness_constant=worst[1].witness_constant,
                       note=note + note_sfx,
                       details={"witnessed": detail, "boundary_rows": missing})


def _is_param_suffix(missing, n: int) -> bool:
    """Unwitnessed rows forming a suffix of the parameter order are the
    sampling boundary: their partners sit past the sampled grid."""
    return sorted(missing) == list(range(n - len(missing), n))


def check_omega_nonquasianalytic(w: WeightFunction, t_grid=None) -> dict[str, CheckReport]:
    """Integral non-quasianalyticity of omega and the averaged bound.

    * ``integral``: int_1^T omega(t)/t^2 dt with T doubling until the
      increment falls below 1e-8 (converged) or a linear-growth trend is
      detected (diverges).
    * ``averaged``: int_1^inf omega(t y)/y^2 dy <= A omega(t) + B on a
      t-grid, reporting a fitted (A, B) witness pair and whether the ratio
      flattens as t grows.
    """
    from scipy.integrate import quad
    reps: dict[str, CheckReport] = {}

    total = 0.0
    lo = 1.0
    T = 2.0
    # tables only support the verdict inside their data range; past it the
    # log-linear extrapolation would decide the asymptotics by fiat
    T_cap = math.exp(w.table_log_t[-1]) if w.kind == "table" else float("inf")
    increments = []
    for _ in range(60):
        val, _err = quad(lambda t: w(t) / t ** 2, lo, T, limit=200)
        total += val
        increments.append(val)
        if val < 1e-8 or T >= T_cap:
            break
        lo, T = T, T * 2.0
    converged = increments[-1] < 1e-8
    if converged:
        reps["integral"] = CheckReport(HOLDS, len(increments), witness_constant=total,
                                       note="int_1^inf omega(t)/t^2 dt converged")
    else:
        growing = len(increments) > 4 and increments[-1] > 0.5 * increments[-2]
        reps["integral"] = CheckReport(
            FAILS if growing else INCONCLUSIVE, len(increments),
            witness_constant=total, counterexample_index=len(increments) if growing else None,
            note="doubling increments not vanishing")

    if t_grid is None:
        t_grid = np.geomspace(4.0, 1e6, 25)
    vals = []
    for t in t_grid:
        # substitute y = e^u: int_0^inf omega(t e^u) e^{-u} du
        I, _err = quad(lambda u: float(w(t * math.exp(u))) * math.exp(-u), 0.0, 60.0,
                       limit=400)
        vals.append(I)
    vals = np.asarray(vals)
    om = np.asarray([float(w(t)) for t in t_grid])
    mask = om > 1.0
    if not np.any(mask):
        reps["averaged"] = CheckReport(INCONCLUSIVE, len(t_grid), note="omega too small on grid")
        return reps
    ratio = vals[mask] / om[mask]
    A = 2.0 ** math.ceil(math.log2(max(1.0, ratio.max())))
    B = float(np.max(np.maximum(0.0, vals - A * om)))
    n = len(ratio)
    flat = ratio[-n // 4:].max() <= 1.05 * ratio[: -n // 4].max() if n >= 8 else False
    verdict = HOLDS if (converged and flat) else (FAILS if not converged and
                                                  reps["integral"].verdict == FAILS else INCONCLUSIVE)
    reps["averaged"] = CheckReport(
        verdict, len(t_grid), witness_constant=A,
        counterexample_index=len(t_grid) if verdict == FAILS else None,
        note=f"int omega(ty)/y^2 dy <= A omega(t) + B with A={A:g}, B={B:.3g}",
        details={"A": A, "B": B, "ratio_last": float(ratio[-1])})
    return reps
