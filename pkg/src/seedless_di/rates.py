"""Constrained maximisation behind the output-length formulas and rate curves.

For estimation probability pE and statistic q0 the free parameters
(s, alpha0, alpha1, beta) are tied by two equality constraints,

    pR * sqrt(2)^(beta-1) * K_z(s) + pE * sqrt(2)^alpha_z = 1,   z = 0, 1

with K_z = mu_s -+ 4 nu_s in parity mode and 1 + mu_s -+ 4 nu_s in m-bit
mode. Both alphas are eliminated exactly, leaving a 2-D maximisation of

    wE * (q0 alpha0 + q1 alpha1) + wR * beta

over (s, u), where u in (0,1) positions sqrt(2)^(beta-1) inside its
feasible bracket (0, 1/(pR K_1)). The substitution makes every grid cell
feasible and pins the constraint residuals at machine precision. A coarse
geometric grid (clustered at both singular ends) is refined by
coordinate-wise golden section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

SQRT8 = 2.0 * math.sqrt(2.0)
_S_EPS = 1e-6  # matches the clamped shift interval used by the operator code
_U_EPS = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

Mode = Literal["xor", "mbit"]

Q0_MAX = (2.0 + math.sqrt(2.0)) / 4.0  # statistic at the quantum maximum


def coefficients(s: float | np.ndarray, mode: Mode):
    """Constraint coefficients (K0, K1) at shift parameter s."""
    root = np.sqrt(2.0 - np.square(s) / 4.0)
    mu = 2.0 / root
    nu = (np.asarray(s) / 4.0) / root
    base = 1.0 + mu if mode == "mbit" else mu
    return base - 4.0 * nu, base + 4.0 * nu


@dataclass(frozen=True)
class RateProblem:
    mode: Mode
    p_e: float
    q0: float

    def __post_init__(self):
        if self.mode not in ("xor", "mbit"):
            raise ValueError("mode must be 'xor' or 'mbit'")
        if not (0.0 < self.p_e < 1.0):
            raise ValueError("p_e must lie in (0, 1)")
        if not (0.0 <= self.q0 <= 1.0):
            raise ValueError("q0 must lie in [0, 1]")


@dataclass(frozen=True)
class RateSolution:
    s: float
    alpha0: float
    alpha1: float
    beta: float
    objective: float
    feasible: bool

    def constraint_residuals(self, p_e: float, mode: Mode) -> tuple[float, float]:
        """Residuals of the two defining equalities at this point."""
        p_r = 1.0 - p_e
        k0, k1 = coefficients(self.s, mode)
        t = math.sqrt(2.0) ** (self.beta - 1.0)
        r0 = p_r * t * k0 + p_e * math.sqrt(2.0) ** self.alpha0 - 1.0
        r1 = p_r * t * k1 + p_e * math.sqrt(2.0) ** self.alpha1 - 1.0
        return r0, r1


def _alphas_beta(s, u, p_e, mode):
    """Eliminated variables at grid position (s, u); arrays broadcast."""
    k0, k1 = coefficients(s, mode)
    ratio = k0 / k1
    a0 = 2.0 * np.log2((1.0 - u * ratio) / p_e)
    a1 = 2.0 * np.log2((1.0 - u) / p_e)
    p_r = 1.0 - p_e
    beta = 1.0 + 2.0 * np.log2(u / (p_r * k1))
    return a0, a1, beta


def _objective_scalar(s, u, p_e, q0, w_e, w_r, mode) -> float:
    if not (_U_EPS <= u <= 1.0 - _U_EPS):
        return -math.inf
    a0, a1, beta = _alphas_beta(s, u, p_e, mode)
    return float(w_e * (q0 * a0 + (1.0 - q0) * a1) + w_r * beta)


def _two_sided_geom(lo: float, hi: float, points: int) -> np.ndarray:
    """Grid mixing uniform coverage with geometric clustering at both ends."""
    half = points // 2
    span = hi - lo
    d = np.geomspace(span * 1e-9, span / 2.0, half // 2)
    ends = np.concatenate([lo + d, hi - d])
    return np.unique(np.concatenate([np.linspace(lo, hi, points - ends.size), ends]))


def _golden_max(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
    x = (a + b) / 2.0
    return x, f(x)


def maximize_weighted(
    mode: Mode,
    p_e: float,
    q0: float,
    w_e: float,
    w_r: float,
    *,
    coarse: tuple[int, int] = (128, 128),
    refine_passes: int = 3,
) -> RateSolution:
    """Best feasible (s, alpha0, alpha1, beta) for the weighted objective.

    Coarse grid over (s, u), then ``refine_passes`` rounds of golden
    section along each coordinate inside the bracketing grid cells.
    """
    if not (0.0 < p_e < 1.0):
        raise ValueError("p_e must lie in (0, 1)")
    q1 = 1.0 - q0
    s_vals = _two_sided_geom(2.0 + _S_EPS, SQRT8 - _S_EPS, coarse[0])
    u_vals = _two_sided_geom(_U_EPS, 1.0 - _U_EPS, coarse[1])

    k0, k1 = coefficients(s_vals, mode)
    ratio = (k0 / k1)[:, None]
    u = u_vals[None, :]
    a0 = 2.0 * np.log2((1.0 - u * ratio) / p_e)
    a1 = 2.0 * np.log2((1.0 - u_vals) / p_e)[None, :]
    beta = 1.0 + 2.0 * np.log2(u / ((1.0 - p_e) * k1[:, None]))
    vals = w_e * (q0 * a0 + q1 * a1) + w_r * beta
    flat = int(np.argmax(vals))
    i, j = np.unravel_index(flat, vals.shape)
    best_s, best_u = float(s_vals[i]), float(u_vals[j])
    best_val = float(vals[i, j])

    if not math.isfinite(best_val):
        return RateSolution(math.nan, math.nan, math.nan, math.nan, -math.inf, False)

    def bracket(grid: np.ndarray, idx: int) -> tuple[float, float]:
        lo = grid[max(idx - 1, 0)]
        hi = grid[min(idx + 1, grid.size - 1)]
        return float(lo), float(hi)

    s_lo, s_hi = bracket(s_vals, i)
    u_lo, u_hi = bracket(u_vals, j)
    for _ in range(refine_passes):
        cand_s, v1 = _golden_max(
            lambda x: _objective_scalar(x, best_u, p_e, q0, w_e, w_r, mode), s_lo, s_hi
        )
        if v1 > best_val:
            best_val, best_s = v1, cand_s
        cand_u, v2 = _golden_max(
            lambda x: _objective_scalar(best_s, x, p_e, q0, w_e, w_r, mode), u_lo, u_hi
        )
        if v2 > best_val:
            best_val, best_u = v2, cand_u
        s_width = (s_hi - s_lo) * 0.25
        u_width = (u_hi - u_lo) * 0.25
        s_lo = max(2.0 + _S_EPS, best_s - s_width)
        s_hi = min(SQRT8 - _S_EPS, best_s + s_width)
        u_lo = max(_U_EPS, best_u - u_width)
        u_hi = min(1.0 - _U_EPS, best_u + u_width)

    a0, a1, beta = _alphas_beta(best_s, best_u, p_e, mode)
    value = float(w_e * (q0 * a0 + q1 * a1) + w_r * beta)
    return RateSolution(
        s=float(best_s),
        alpha0=float(a0),
        alpha1=float(a1),
        beta=float(beta),
        objective=value,
        feasible=True,
    )


def reference_grid_max(
    mode: Mode, p_e: float, q0: float, w_e: float, w_r: float, points: int = 4096
) -> float:
    """Dense-grid evaluation used as the optimiser's regression reference."""
    s_vals = _two_sided_geom(2.0 + _S_EPS, SQRT8 - _S_EPS, points)
    u_vals = _two_sided_geom(_U_EPS, 1.0 - _U_EPS, points)
    a1 = 2.0 * np.log2((1.0 - u_vals) / p_e)[None, :]
    best = -math.inf
    for lo in range(0, s_vals.size, 256):  # chunked to bound peak memory
        s_chunk = s_vals[lo : lo + 256]
        k0, k1 = coefficients(s_chunk, mode)
        ratio = (k0 / k1)[:, None]
        u = u_vals[None, :]
        a0 = 2.0 * np.log2((1.0 - u * ratio) / p_e)
        beta = 1.0 + 2.0 * np.log2(u / ((1.0 - p_e) * k1[:, None]))
        vals = w_e * (q0 * a0 + (1.0 - q0) * a1) + w_r * beta
        best = max(best, float(np.max(vals)))
    return best


def solve(problem: RateProblem) -> RateSolution:
    """Asymptotic positive-yield objective pE(alpha0 q0 + alpha1 q1) + beta pR."""
    return maximize_weighted(problem.mode, problem.p_e, problem.q0, problem.p_e, 1.0 - problem.p_e)


def extraction_rate(p_e: float, q0: float, *, mode: Mode = "mbit") -> RateSolution:
    """Output bits per extractor-input bit: (pE/pR)(alpha0 q0 + alpha1 q1) + beta."""
    p_r = 1.0 - p_e
    return maximize_weighted(mode, p_e, q0, p_e / p_r, 1.0)


def extraction_rate_limit(chsh: float) -> float:
    """Closed-form supremum of the extraction rate at fixed CHSH value.

    Derived by eliminating the inner parameters and letting the
    estimation fraction tend to one: 1 - 2 log2(1 + sqrt(2 - chsh^2/4)).
    Approaches 1 exactly at maximal violation; used as an optimiser oracle.
    """
    if not (2.0 < chsh < SQRT8):
        raise ValueError("chsh must lie in (2, 2*sqrt(2))")
    return 1.0 - 2.0 * math.log2(1.0 + math.sqrt(2.0 - chsh * chsh / 4.0))


def min_chsh_curve(
    p_e_grid,
    *,
    mode: Mode = "xor",
    bisect_tol: float = 1e-5,
) -> list[dict]:
    """Smallest CHSH with non-negative asymptotic yield, per estimation probability.

    Bisects the monotone yield objective over q0 in [0.75, Q0_MAX]; rows
    where even the quantum maximum has negative objective report no yield.
    """
    rows = []
    for p_e in p_e_grid:
        if not (0.0 < p_e < 1.0):
            raise ValueError("p_e grid values must lie in (0, 1)")

        def yield_at(q0: float) -> float:
            return solve(RateProblem(mode, p_e, q0)).objective

        if yield_at(Q0_MAX) < 0.0:
            rows.append({"pE": float(p_e), "minCHSH": math.nan, "feasible": False})
            continue
        lo, hi = 0.75, Q0_MAX
        if yield_at(lo) >= 0.0:
            q_star = lo
        else:
            while hi - lo > bisect_tol:
                mid = (lo + hi) / 2.0
                if yield_at(mid) >= 0.0:
                    hi = mid
                else:
                    lo = mid
            q_star = hi
        rows.append({"pE": float(p_e), "minCHSH": 8.0 * q_star - 4.0, "feasible": True})
    return rows


_PE_DELTA_FLOOR = 1e-8  # estimation fraction searched up to 1 - floor


def _best_over_pe(q0: float, mode: Mode):
    """Maximise the extraction rate over the estimation probability.

    Returns (best extraction rate, inner solution, pE) and the separately
    maximised efficiency rate with its own pE. The supremum sits at the
    pE -> 1 boundary, so the scan runs over log-spaced 1 - pE and a golden
    pass refines in that coordinate.
    """
    deltas = np.geomspace(_PE_DELTA_FLOOR, 0.98, 48)

    cache: dict[float, float] = {}

    def rate(delta: float) -> float:
        key = float(delta)
        if key not in cache:
            p_e = 1.0 - key
            cache[key] = maximize_weighted(mode, p_e, q0, p_e / key, 1.0).objective
        return cache[key]

    ext_vals = np.array([rate(d) for d in deltas])
    i = int(np.argmax(ext_vals))
    lo = math.log(deltas[max(i - 1, 0)])
    hi = math.log(deltas[min(i + 1, deltas.size - 1)])
    d_ext, _ = _golden_max(lambda x: rate(math.exp(x)), lo, hi, iters=40)
    d_ext = math.exp(d_ext)
    if rate(d_ext) < ext_vals[i]:
        d_ext = float(deltas[i])

    eff_vals = np.array([d * rate(d) for d in deltas])
    j = int(np.argmax(eff_vals))
    lo = math.log(deltas[max(j - 1, 0)])
    hi = math.log(deltas[min(j + 1, deltas.size - 1)])
    d_eff, _ = _golden_max(lambda x: math.exp(x) * rate(math.exp(x)), lo, hi, iters=40)
    d_eff = math.exp(d_eff)
    if d_eff * rate(d_eff) < eff_vals[j]:
        d_eff = float(deltas[j])

    p_ext = 1.0 - d_ext
    sol = maximize_weighted(mode, p_ext, q0, p_ext / d_ext, 1.0)
    return sol, p_ext, d_eff * rate(d_eff), 1.0 - d_eff


def rate_curves(chsh_grid, *, mode: Mode = "mbit") -> list[dict]:
    """Maximum extraction and efficiency rates across CHSH values.

    Each row carries the extraction-rate argmax solution; the efficiency
    rate is maximised over its own estimation probability (reported as
    ``pE_eff``) since the two optima differ.
    """
    rows = []
    for chsh in chsh_grid:
        if not (2.0 < chsh < SQRT8):
            raise ValueError("chsh grid values must lie in (2, 2*sqrt(2))")
        q0 = (chsh + 4.0) / 8.0
        sol, p_ext, r_eff, p_eff = _best_over_pe(q0, mode)
        rows.append(
            {
                "chsh": float(chsh),
                "rExt": sol.objective,
                "rEff": r_eff,
                "pE_star": p_ext,
                "s_star": sol.s,
                "beta_star": sol.beta,
                "alpha0": sol.alpha0,
                "alpha1": sol.alpha1,
                "pE_eff": p_eff,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# CSV emission (12 significant digits, stable layout)


def format_sig(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


MIN_CHSH_COLUMNS = ("pE", "minCHSH", "feasible")
RATES_COLUMNS = (
    "chsh",
    "rExt",
    "rEff",
    "pE_star",
    "s_star",
    "beta_star",
    "alpha0",
    "alpha1",
)


def min_chsh_csv(rows: list[dict]) -> str:
    lines = [",".join(MIN_CHSH_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_sig(row[c]) for c in MIN_CHSH_COLUMNS))
    return "\n".join(lines) + "\n"


def rates_csv(rows: list[dict]) -> str:
    lines = [",".join(RATES_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_sig(row[c]) for c in RATES_COLUMNS))
    return "\n".join(lines) + "\n"
