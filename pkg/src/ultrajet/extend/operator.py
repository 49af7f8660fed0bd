"""Partition of unity and the constructive extension operator.

The partition telescopes scaled cutoffs over a Whitney cover; the extension
glues per-interval Taylor polynomials of the jet, with per-interval degree
driven by the counting function of the descendant at scale L * distance.
Everything is assembled as exact splines and then verified at probe points:
boundary matching, the growth bound of the output row, and the two Taylor
estimates that power the construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ..descend import Descendant, descend
from ..errors import ExtensionError, PrefixExhausted
from ..jets import Jet, eval_taylor_deriv, fit_jet_constants, jet_norm_profile, taylor_coeffs_local
from ..report import HOLDS, report_from_log_witnesses
from ..seqcalc import WeightSequence, gamma_count, log_h_assoc
from ..weightfunc import WeightMatrix
from .cover import OVERLAP_C, WhitneyCover1D, whitney_cover
from .cutoffs import CutoffFamily, CutoffResult, build_cutoff, make_cutoff_family
from .ppoly import PiecewisePolynomial, constant_on, from_poly, shift_poly


# -- partition of unity --------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    cover: WhitneyCover1D
    epsilon: float
    functions: tuple              # of PiecewisePolynomial, one per ball
    leftover: PiecewisePolynomial  # 1 - sum(functions) on the working domain
    fam: CutoffFamily
    B1: float
    lemma410_A: float
    landing_small_s: WeightSequence


def partition_of_unity(cover: WhitneyCover1D, fam: CutoffFamily, epsilon: float,
                       min_smoothness: int | None = None,
                       landing_small_s: WeightSequence | None = None) -> Partition:
    """Telescoped family phi_j = psi_j prod_{k<j} (1 - psi_k).

    psi_i is the family cutoff at epsilon r_i / n0 rescaled to the ball;
    the running product is maintained as 1 - sum(phi) so each step is one
    local multiply and one local subtract.
    """
    lo, hi = cover.working
    prod = constant_on(lo, hi, 1.0)
    funcs = []
    cache: dict[float, CutoffResult] = {}
    for (cx, r) in cover.balls:
        eps_i = epsilon * r / cover.n0
        key = round(math.log(eps_i), 9)
        if key not in cache:
            cache[key] = build_cutoff(fam, eps_i, OVERLAP_C,
                                      min_smoothness=min_smoothness)
        psi = cache[key].pp.compose_affine(cx, r)
        phi = (psi * prod).trimmed()
        prod = prod - phi
        funcs.append(phi)
    A410 = lemma410_constant(fam.D.small_s,
                             landing_small_s if landing_small_s is not None
                             else fam.D.small_s, cover.n0)
    B1 = fam.B * (OVERLAP_C - 1.0) / (A410 * cover.n0 * cover.b)
    return Partition(cover, epsilon, tuple(funcs), prod, fam, B1,
                     A410, landing_small_s if landing_small_s is not None else fam.D.small_s)


def lemma410_constant(s_small: WeightSequence, s_land: WeightSequence,
                      n0: int) -> float:
    """Smallest power-of-two A with h_s(t) <= h_(s_land)(A t)^{n0} on a grid."""
    lo = -float(s_small.log_mu[-1]) * 0.9
    t_grid = np.linspace(lo, -1e-3, 48)
    A = 1.0
    for _ in range(60):
        ok = True
        for lt in t_grid:
            lh = log_h_assoc(s_small, math.exp(lt))
            lh_land = log_h_assoc(s_land, math.exp(min(lt + math.log(A), 0.0)))
            if lh > n0 * lh_land + 1e-9:
                ok = False
                break
        if ok:
            return A
        A *= 2.0
    raise ExtensionError("no A up to 2^60 satisfies the h-power inequality",
                         code="ROW_CHAIN_UNAVAILABLE")


def verify_partition(part: Partition, orders=(0, 1, 2, 3, 4),
                     n_probes: int = 1000, rng=None) -> dict:
    """Sum-to-one, range, support containment, and the derivative bound
    |phi_i^(b)| <= eps^b Ndot_b / h(B1 eps d(x)) in log domain."""
    rng = np.random.default_rng(0) if rng is None else rng
    cov = part.cover
    lo, hi = cov.working
    xs = np.linspace(lo, hi, n_probes)
    covered = cov.covers(xs) & (cov.E.distance(xs) >= cov.d_min)
    s = sum(f(xs) for f in part.functions)
    out = {
        "sum_max_err": float(np.max(np.abs(s[covered] - 1.0))) if np.any(covered) else 0.0,
        "range_ok": all(bool(np.all((f(xs) >= -1e-12) & (f(xs) <= 1 + 1e-12)))
                        for f in part.functions),
    }
    sup_ok = True
    for f, (cx, r) in zip(part.functions, cov.balls):
        slo, shi = f.support()
        if slo < cx - cov.c * r - 1e-12 or shi > cx + cov.c * r + 1e-12:
            sup_ok = False
    out["support_ok"] = sup_ok

    worst = {k: -math.inf for k in orders}
    viol = {k: 0 for k in orders}
    d_all = cov.E.distance(xs)
    log_nd = np.concatenate([[0.0], np.cumsum(part.fam.Ndot.log_mu)])
    for f in part.functions:
        slo, shi = f.support()
        sel = (xs > slo) & (xs < shi) & (d_all > 0)
        if not np.any(sel):
            continue
        for k in orders:
            if k > max(f.smoothness_order, 0) + 1:
                continue
            lhs = np.log(np.maximum(np.abs(f(xs[sel], order=k)), 1e-300))
            rhs = np.array([
                k * math.log(part.epsilon) + log_nd[k]
                - log_h_assoc(part.landing_small_s,
                              part.B1 * part.epsilon * dv)
                for dv in d_all[sel]])
            viol[k] += int(np.sum(lhs > rhs + 1e-9))
            worst[k] = max(worst[k], float(np.max(lhs - rhs)))
    out["bound_violations"] = viol
    out["bound_margins"] = worst
    out["bound_ok"] = all(v == 0 for v in viol.values())
    return out


# -- the extension operator ------------------------------------------------------

@dataclass(frozen=True)
class ExtensionConfig:
    L: float | None = None          # None: searched from the fitted rho
    epsilon: float | None = None    # None: L * b * D / B1
    d_min: float = 1e-6
    margin: float = 2.0
    K_conv: int = 24
    p_max_eval: int = 8
    deg_floor: int = 4
    base_row: int = 0
    rho_grid: tuple = tuple(2.0 ** j for j in range(-3, 13))
    seed: int = 0
    L_cap: float = 2.0 ** 20


@dataclass(frozen=True)
class RowChain:
    base: WeightSequence
    dot: WeightSequence
    ddot: WeightSequence
    indices: tuple
    S: Descendant
    S_dot: Descendant
    S_ddot: Descendant


@dataclass(frozen=True)
class ExtensionResult:
    f: PiecewisePolynomial
    cover: WhitneyCover1D
    partition: Partition
    degrees: tuple
    constants: dict
    verification: dict
    chain: RowChain
    jet: Jet


def select_row_chain(mat: WeightMatrix, base_row: int, K_eff: int) -> RowChain:
    """base -> dot -> ddot with root domination and quotient doubling.

    Each link j satisfies nu_k <= C Nj_k^{1/k} and nu_{2k} <= C nuj_k on the
    prefix; singleton matrices link to themselves when they have moderate
    growth.  Raises ROW_CHAIN_UNAVAILABLE when the sample cannot provide the
    links.
    """
    def links_ok(n: WeightSequence, nd: WeightSequence) -> bool:
        K = n.K
        k = np.arange(1, K + 1)
        root = report_from_log_witnesses(n.log_mu - nd.log_M[1:] / k, K)
        half = K // 2
        kk = np.arange(1, half + 1)
        dbl = report_from_log_witnesses(
            (n.log_M[2 * kk] - n.log_M[2 * kk - 1]) - nd.log_mu[kk - 1], K)
        return root.holds and dbl.holds

    def find_link(i: int) -> int:
        for j in range(i, len(mat.rows)):
            if links_ok(mat.rows[i], mat.rows[j]):
                return j
        raise ExtensionError(
            f"no sampled row dominates row {i} (need root and doubling links)",
            code="ROW_CHAIN_UNAVAILABLE")

    i0 = base_row
    i1 = find_link(i0)
    i2 = find_link(i1)
    base, dot, ddot = mat.rows[i0], mat.rows[i1], mat.rows[i2]
    return RowChain(base, dot, ddot, (i0, i1, i2),
                    descend(base, K_eff=K_eff),
                    descend(dot, K_eff=K_eff),
                    descend(ddot, K_eff=K_eff))


def fit_rho(F: Jet, D: Descendant, rho_grid) -> tuple[float, float]:
    """(C, rho) for the starred-form jet bounds: the smallest grid rho whose
    C is within a factor 2 of the grid limit."""
    Cs = np.array([fit_jet_constants(F, D.log_sigma_star, r) for r in rho_grid])
    limit = Cs[-1]
    if limit == 0.0:
        return 0.0, float(rho_grid[0])
    ok = np.nonzero(Cs <= 2.0 * limit)[0]
    i = int(ok[0])
    return float(Cs[i]), float(rho_grid[i])


def search_lambda(S: Descendant, S_dot: Descendant) -> float:
    """lambda < 1 with 2 Gamma_sdot(t) <= Gamma_s(lambda t) on the prefix."""
    s = S.small_s
    sd = S_dot.small_s
    for lam in [2.0 ** -e for e in range(1, 30)]:
        ok = True
        for k1 in range(1, sd.K):
            log_t = -float(sd.log_mu[k1 - 1]) + 1e-12
            lt = log_t + math.log(lam)
            if -lt > s.log_mu[-1]:
                break  # deeper t fall off the prefix; checked as far as stored
            i = int(np.searchsorted(s.log_mu, -lt, side="left"))
            if 2 * k1 > i:
                ok = False
                break
        if ok:
            return lam
    raise ExtensionError("no lambda in 2^-1..2^-29 doubles the counting function",
                         code="ROW_CHAIN_UNAVAILABLE")


def search_h_square_constant(s_num: WeightSequence, s_den: WeightSequence) -> float:
    """Smallest power-of-two D with h_num(t) <= h_den(D t)^2 on a grid."""
    lo = -float(s_num.log_mu[-1]) * 0.9
    t_grid = np.linspace(lo, -1e-3, 48)
    D = 1.0
    for _ in range(60):
        if all(log_h_assoc(s_num, math.exp(lt))
               <= 2.0 * log_h_assoc(s_den, math.exp(min(lt + math.log(D), 0.0))) + 1e-9
               for lt in t_grid):
            return D
        D *= 2.0
    raise ExtensionError("no D up to 2^60 satisfies the h-square inequality",
                         code="ROW_CHAIN_UNAVAILABLE")


def taylor_degree(S_dot: Descendant, L: float, dist: float, cfg: ExtensionConfig,
                  cap: int) -> int:
    sd = S_dot.small_s
    t = L * dist
    try:
        g = gamma_count(sd, t)
    except PrefixExhausted:
        g = sd.K - 1
    return int(min(max(2 * g, cfg.deg_floor), cap))


def extend_jet(F: Jet, mat: WeightMatrix, cfg: ExtensionConfig = ExtensionConfig()) -> ExtensionResult:
    """Whitney extension of an ultradifferentiable jet through a weight matrix.

    Builds the cover and partition, assembles
    f = sum_i phi_i T_{xhat_i}^{p_i} F + (1 - sum phi_i) T_nearest F
    inside the distance-1/2 neighborhood of E (a global cutoff kills the
    rest), and verifies boundary matching, the output growth bound, and the
    two Taylor estimates at probe points.
    """
    K_eff = mat.K // 2
    chain = select_row_chain(mat, cfg.base_row, K_eff)
    prof = jet_norm_profile(F, chain.S.big_S)
    if prof.not_in_class_trend:
        raise ExtensionError(
            f"jet-norm profile diverges (order slope {prof.order_requirement_slope:.2f})",
            code="JET_NOT_IN_CLASS")
    C_fit, rho_fit = fit_rho(F, chain.S, cfg.rho_grid)

    lam = search_lambda(chain.S, chain.S_dot)
    Dconst = search_h_square_constant(chain.S_dot.small_s, chain.S_ddot.small_s)
    half = chain.S.K_eff // 2 - 1
    kk = np.arange(1, half)
    log_s = np.concatenate([[0.0], np.cumsum(chain.S.log_sigma_star)])
    log_sd = np.concatenate([[0.0], np.cumsum(chain.S_dot.log_sigma_star)])
    Bconst = float(np.exp(np.max(
        (log_s[2 * kk + 1] - 2.0 * log_sd[kk]) / (2 * kk + 1))))

    cover = whitney_cover(F.E, d_min=cfg.d_min, margin=cfg.margin)
    fam = make_cutoff_family(chain.S_dot, chain.ddot, conv_depth=cfg.K_conv)

    D1 = 4.0 / lam
    L = cfg.L if cfg.L is not None else max(D1 * max(rho_fit, 1.0), 1.0)
    checks = None
    while True:
        checks = _check_taylor_estimates(F, chain, C_fit, rho_fit, L, cover, cfg)
        if checks["5.4"]["violations"] == 0 and checks["5.5"]["violations"] == 0:
            break
        if cfg.L is not None or L >= cfg.L_cap:
            break
        L *= 2.0

    A410 = lemma410_constant(fam.D.small_s, chain.S_ddot.small_s, cover.n0)
    B1 = fam.B * (OVERLAP_C - 1.0) / (A410 * cover.n0 * cover.b)
    epsilon = cfg.epsilon if cfg.epsilon is not None else max(
        L * cover.b * Dconst / B1, 1e-6)
    part = partition_of_unity(cover, fam, epsilon,
                              min_smoothness=min(cfg.p_max_eval, cfg.K_conv - 2),
                              landing_small_s=chain.S_ddot.small_s)

    # Stable assembly: with base the nearest-anchor Taylor field (degree as
    # at d_min) and sum(phi) + leftover == 1 exactly by construction,
    #   sum_i phi_i T_i + leftover * base  ==  base + sum_i phi_i (T_i - base).
    # The right-hand form subtracts Taylor polynomials before multiplying by
    # the partition, whose derivatives near E are huge and cancel only
    # analytically; forming the differences first keeps evaluation noise at
    # the scale of the Whitney increments.
    cap = F.order_cap
    degrees = []
    base, anchors, cuts, p_col = _taylor_field(F, chain, L, cfg, cap, cover.working)
    f_inner = base
    for (cx, r), phi in zip(cover.balls, part.functions):
        xhat, dist = F.E.nearest_point(cx)
        p_i = taylor_degree(chain.S_dot, L, dist, cfg, cap)
        degrees.append(p_i)
        slo, shi = phi.support()
        if shi <= slo:
            continue
        diff = _taylor_difference(F, _nearest_carried(F, xhat), p_i,
                                  anchors, cuts, p_col, slo, shi)
        if diff is None:
            continue
        term = (phi * diff).trimmed()
        f_inner = f_inner + term
    gcut = _global_cutoff(F.E, fam, epsilon, cover, cfg)
    f = (f_inner * gcut).trimmed()

    constants = {
        "C": C_fit, "rho": rho_fit, "L": L, "epsilon": epsilon,
        "lambda": lam, "D": Dconst, "B_split": Bconst, "B1": part.B1,
        "D1": D1, "A": fam.A, "delta": fam.delta, "B": fam.B,
        "a": cover.a, "b": cover.b, "n0": cover.n0, "c": cover.c,
        "rows": chain.indices, "deg_floor": cfg.deg_floor,
        "degree_cap_hit": bool(any(d >= cap for d in degrees)),
    }
    verification = {
        "taylor_estimates": checks,
        "partition": verify_partition(part, orders=range(0, min(4, cfg.p_max_eval) + 1)),
        "boundary": _boundary_match(f, F, cfg),
        "growth": _growth_fit(f, F.E, chain.ddot, cfg),
        "assembly_consistency": _assembly_consistency(
            f, part, F, chain, degrees, gcut, L, cfg),
    }
    return ExtensionResult(f, cover, part, tuple(degrees), constants,
                           verification, chain, F)


def _taylor_field(F: Jet, chain: RowChain, L: float, cfg: ExtensionConfig,
                  cap: int, working):
    """Nearest-carried-anchor Taylor polynomial of F over the working domain,
    at the depth-d_min degree (pieces split at anchor midpoints)."""
    p_col = taylor_degree(chain.S_dot, L, cfg.d_min, cfg, cap)
    lo_w, hi_w = working
    anchors = F.carried()
    cuts = np.concatenate([[lo_w], 0.5 * (anchors[1:] + anchors[:-1]), [hi_w]])
    pieces = None
    for u, v, a in zip(cuts[:-1], cuts[1:], anchors):
        if v <= u:
            continue
        piece = from_poly(taylor_coeffs_local(F, float(a), p_col), float(a), u, v)
        pieces = piece if pieces is None else pieces + piece
    return pieces, anchors, cuts, p_col


def _taylor_difference(F: Jet, a_i: float, p_i: int, anchors, cuts, p_col: int,
                       slo: float, shi: float):
    """T_{a_i}^{p_i} F - base field on [slo, shi], subtracted about a_i.

    Coefficients are differenced about the common anchor before any
    re-anchoring, so regions where the summand equals the base contribute
    exact zeros instead of shift-path rounding residue (which the huge
    partition derivatives would otherwise amplify).
    """
    c_i = np.zeros(max(p_i, p_col) + 1)
    c_i[: p_i + 1] = taylor_coeffs_local(F, a_i, p_i)
    edges = np.concatenate([[slo], cuts[(cuts > slo) & (cuts < shi)], [shi]])
    pieces = None
    nonzero = False
    for u, v in zip(edges[:-1], edges[1:]):
        if v <= u:
            continue
        j = int(np.searchsorted(cuts, 0.5 * (u + v), side="right") - 1)
        a_b = float(anchors[min(max(j, 0), len(anchors) - 1)])
        if a_b == a_i and p_col == p_i:
            diff = np.zeros(1)
        else:
            cb = taylor_coeffs_local(F, a_b, p_col)
            if a_b != a_i:
                cb = shift_poly(cb, a_i - a_b)
            c_b = np.zeros(len(c_i))
            c_b[: len(cb)] = cb
            diff = c_i - c_b
            nonzero = True
        piece = from_poly(diff, a_i, u, v)
        pieces = piece if pieces is None else pieces + piece
    if pieces is None or not nonzero:
        return None
    return pieces


def _global_cutoff(E, fam: CutoffFamily, epsilon: float, cover: WhitneyCover1D,
                   cfg: ExtensionConfig) -> PiecewisePolynomial:
    """1 on {d <= 1/2}, 0 outside {d < 1}, from the same cutoff machinery."""
    comps = [(p, p) for p in E.points] + list(E.intervals)
    comps.sort()
    merged = []
    for lo, hi in comps:
        lo, hi = lo - 0.5, hi + 0.5
        if merged and lo <= merged[-1][1] + 1.0:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    total = None
    for lo, hi in merged:
        center = 0.5 * (lo + hi)
        R = 0.5 * (hi - lo)
        t = (R + 0.49) / R
        res = build_cutoff(fam, epsilon, t,
                           min_smoothness=min(cfg.p_max_eval, cfg.K_conv - 2))
        zeta = res.pp.compose_affine(center, R)
        total = zeta if total is None else total + zeta
    return total


def _check_taylor_estimates(F: Jet, chain: RowChain, C: float, rho: float,
                            L: float, cover: WhitneyCover1D,
                            cfg: ExtensionConfig, n_probes: int = 60) -> dict:
    """Spot checks of the two Taylor-polynomial estimates at probe points."""
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cover.working
    xs = rng.uniform(lo, hi, n_probes)
    log_S = chain.S.big_S.log_M
    log_s = np.concatenate([[0.0], np.cumsum(chain.S.log_sigma_star)])
    out = {"5.4": {"violations": 0, "max_log_margin": -math.inf, "checked": 0},
           "5.5": {"violations": 0, "max_log_margin": -math.inf, "checked": 0}}
    if C == 0.0:
        return out
    logC = math.log(C)
    for x in xs:
        xhat, dist = F.E.nearest_point(float(x))
        if dist <= 0:
            continue
        p = taylor_degree(chain.S_dot, L, dist, cfg, F.order_cap)
        for k in range(0, min(p, cfg.p_max_eval) + 1):
            val = eval_taylor_deriv(F, xhat, p, float(x), k)
            lhs = math.log(max(abs(val), 1e-300))
            rhs = logC + (k + 1) * math.log(2 * L) + log_S[k]
            out["5.4"]["checked"] += 1
            if lhs > rhs + 1e-9:
                out["5.4"]["violations"] += 1
            out["5.4"]["max_log_margin"] = max(out["5.4"]["max_log_margin"], lhs - rhs)
            if k < p:
                val2 = val - F.value(xhat, k)
                lhs2 = math.log(max(abs(val2), 1e-300))
                rhs2 = (logC + (k + 1) * math.log(2 * L) + gammaln(k + 1)
                        + log_s[k + 1] + math.log(max(dist, 1e-300)))
                out["5.5"]["checked"] += 1
                if lhs2 > rhs2 + 1e-9:
                    out["5.5"]["violations"] += 1
                out["5.5"]["max_log_margin"] = max(out["5.5"]["max_log_margin"],
                                                   lhs2 - rhs2)
    return out


def check_taylor_difference_bound(F: Jet, D: Descendant, a1: float, a2: float,
                                  p: int, k: int, x: float, C: float,
                                  rho: float) -> tuple[float, float]:
    """Both sides of the two-anchor Taylor difference estimate (n = 1)."""
    lhs = abs(eval_taylor_deriv(F, a1, p, x, k) - eval_taylor_deriv(F, a2, p, x, k))
    log_s = np.concatenate([[0.0], np.cumsum(D.log_sigma_star)])
    base = abs(a1 - x) + abs(a1 - a2)
    log_rhs = (math.log(max(C, 1e-300)) + (p + 1) * math.log(2 * rho)
               + gammaln(k + 1) + log_s[p + 1]
               + (p + 1 - k) * math.log(max(base, 1e-300)))
    return lhs, float(math.exp(min(log_rhs, 700.0)))


def _boundary_match(f: PiecewisePolynomial, F: Jet, cfg: ExtensionConfig,
                    n_levels: int = 12, d0: float = 1.28e-2) -> dict:
    """f^{(k)} along dyadic probe ladders approaching each carried point.

    The ladder starts inside the zone where the per-interval Taylor degrees
    have saturated; farther out, degree transitions legitimately produce
    large intermediate derivatives (allowed by the growth bound), which are
    reported separately as the transition-zone maximum at distance ~ 0.1.
    """
    out = {"points": {}, "monotone_ok": True, "final_max_err": 0.0,
           "transition_zone_max": 0.0}
    for a in F.E.points:
        ladders = {}
        for k in range(0, cfg.p_max_eval + 1):
            errs = []
            for j in range(n_levels):
                d = d0 * 2.0 ** -j
                err = max(abs(f(a + d, order=k) - F.value(a, k)),
                          abs(f(a - d, order=k) - F.value(a, k)))
                errs.append(err)
            errs = np.array(errs)
            dec_ok = bool(np.all(errs[1:] <= errs[:-1] * 1.10 + 1e-12))
            ladders[k] = {"errors": errs.tolist(), "monotone": dec_ok}
            out["monotone_ok"] &= dec_ok
            out["final_max_err"] = max(out["final_max_err"], float(errs[-1]))
            out["transition_zone_max"] = max(
                out["transition_zone_max"],
                float(abs(f(a + 0.1, order=k) - F.value(a, k))))
        out["points"][a] = ladders
    return out


def _growth_fit(f: PiecewisePolynomial, E, out_row: WeightSequence,
                cfg: ExtensionConfig, n_probes: int = 400) -> dict:
    """Smallest (C', rho') with |f^{(k)}| <= C' rho'^k N_k at all probes."""
    rng = np.random.default_rng(cfg.seed + 1)
    lo, hi = f.span
    xs = np.concatenate([np.linspace(lo, hi, n_probes),
                         rng.uniform(lo, hi, n_probes // 2)])
    log_N = np.concatenate([[0.0], np.cumsum(out_row.log_mu)])
    per_k = {}
    for k in range(0, cfg.p_max_eval + 1):
        m = float(np.max(np.abs(f(xs, order=k))))
        if m > 0:
            per_k[k] = math.log(m) - log_N[k]
    if not per_k:
        return {"C_prime": 0.0, "rho_prime": 1.0, "finite": True}
    rho_grid = [2.0 ** j for j in range(-2, 24)]
    Cs = [math.exp(min(max(w - k * math.log(r) for k, w in per_k.items()), 700.0))
          for r in rho_grid]
    limit = Cs[-1]
    i = next(idx for idx, c in enumerate(Cs) if c <= 2.0 * limit)
    return {"C_prime": Cs[i], "rho_prime": rho_grid[i],
            "finite": bool(np.isfinite(Cs[i]))}


def _nearest_carried(F: Jet, x: float) -> float:
    pts = F.carried()
    return float(pts[int(np.argmin(np.abs(pts - x)))])


def _assembly_consistency(f, part: Partition, F: Jet, chain: RowChain,
                          degrees, gcut, L: float, cfg: ExtensionConfig,
                          n_probes: int = 200) -> dict:
    """The spline f must reproduce the defining sum evaluated directly."""
    rng = np.random.default_rng(cfg.seed + 2)
    lo, hi = part.cover.working
    xs = rng.uniform(lo, hi, n_probes)
    p_col = taylor_degree(chain.S_dot, L, cfg.d_min, cfg, F.order_cap)
    worst = 0.0
    for x in xs:
        a0 = _nearest_carried(F, float(x))
        base = eval_taylor_deriv(F, a0, p_col, float(x), 0)
        direct = base
        for (ball, phi, p_i) in zip(part.cover.balls, part.functions, degrees):
            pv = phi(float(x))
            if pv != 0.0:
                xhat, _ = F.E.nearest_point(ball[0])
                a_i = _nearest_carried(F, xhat)
                direct += pv * (eval_taylor_deriv(F, a_i, p_i, float(x), 0) - base)
        direct *= gcut(float(x))
        worst = max(worst, abs(direct - f(float(x))))
    return {"max_abs_gap": worst}
