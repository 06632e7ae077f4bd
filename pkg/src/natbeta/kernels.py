"""Hot numeric kernels: special functions, quadrature, and batch propagation.

Scalar routines (regularized incomplete beta/gamma, distribution tails,
adaptive quadrature) follow the classic Cephes/continued-fraction
constructions in double precision.  Batch routines exist in two variants:
an explicit-loop version compiled by numba and a vectorized NumPy version;
``NATBETA_NUMBA=0`` selects the NumPy path (see ``natbeta._backend``).
``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import math

import numpy as np

from ._backend import BACKEND, NUMBA_ENABLED, njit

__all__ = [
    "BACKEND",
    "NUMBA_ENABLED",
    "reg_inc_beta",
    "reg_upper_gamma",
    "normal_upper_tail",
    "student_t_two_sided",
    "student_t_cdf",
    "student_t_quantile",
    "f_upper_tail",
    "chi_square_upper_tail",
    "log_beta_weight_integral",
    "propagate_beta_draws",
    "equilibria_from_shocks",
]

_MACHEP = 2.220446049250313e-16
_MAX_CF_ITER = 300


@njit(cache=True)
def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for the incomplete beta integral, evaluated with
    # Lentz's algorithm.
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _MACHEP:
            break
    return h


@njit(cache=True)
def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # symmetry split keeps the continued fraction convergent
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


@njit(cache=True)
def reg_upper_gamma(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        # lower series, then complement
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(_MAX_CF_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _MACHEP:
                break
        ln_p = a * math.log(x) - x - math.lgamma(a)
        return 1.0 - total * math.exp(ln_p)
    # upper continued fraction (Lentz)
    tiny = 1e-300
    b0 = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b0
    h = d
    for i in range(1, _MAX_CF_ITER + 1):
        an = -i * (i - a)
        b0 += 2.0
        d = an * d + b0
        if abs(d) < tiny:
            d = tiny
        c = b0 + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _MACHEP:
            break
    ln_p = a * math.log(x) - x - math.lgamma(a)
    return math.exp(ln_p) * h


@njit(cache=True)
def normal_upper_tail(z: float) -> float:
    """P(Z > z) for a standard normal variate."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


@njit(cache=True)
def student_t_two_sided(t: float, df: float) -> float:
    """Two-sided p-value P(|T_df| > |t|)."""
    if t == 0.0:
        return 1.0
    return reg_inc_beta(0.5 * df, 0.5, df / (df + t * t))


@njit(cache=True)
def student_t_cdf(t: float, df: float) -> float:
    """CDF of the Student t distribution with df degrees of freedom."""
    p = student_t_two_sided(t, df)
    if t >= 0.0:
        return 1.0 - 0.5 * p
    return 0.5 * p


@njit(cache=True)
def student_t_quantile(p: float, df: float) -> float:
    """Inverse Student-t CDF by bracketed bisection on the CDF."""
    if p == 0.5:
        return 0.0
    # bracket the root, doubling outward from +/-1
    lo = -1.0
    hi = 1.0
    while student_t_cdf(lo, df) > p:
        lo *= 2.0
        if lo < -1e100:
            break
    while student_t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e100:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


@njit(cache=True)
def f_upper_tail(f: float, d1: float, d2: float) -> float:
    """P(F_{d1,d2} > f)."""
    if f <= 0.0:
        return 1.0
    return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f))


@njit(cache=True)
def chi_square_upper_tail(x: float, k: float) -> float:
    """P(chi2_k > x)."""
    if x <= 0.0:
        return 1.0
    return reg_upper_gamma(0.5 * k, 0.5 * x)


# ---------------------------------------------------------------------------
# Adaptive quadrature for the opportunity-cost weight ln(b)/(1+b^2).
#
# Substituting u = ln(b) turns the integrand into u / (2*cosh(u)), which is
# smooth on any finite interval; each half-domain [1/B, 1] and [1, B] is
# integrated separately so the cancellation between the two halves is a
# genuinely computed result rather than an artifact of symmetric nodes.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _cosh_weight(u: float) -> float:
    if u > 700.0 or u < -700.0:
        return 0.0
    return u / (math.exp(u) + math.exp(-u))


@njit(cache=True)
def _adaptive_simpson_cosh(a: float, b: float, tol: float) -> tuple[float, bool]:
    # Iterative adaptive Simpson with an explicit interval stack.
    max_depth = 2048
    stack_a = np.empty(max_depth)
    stack_b = np.empty(max_depth)
    stack_fa = np.empty(max_depth)
    stack_fm = np.empty(max_depth)
    stack_fb = np.empty(max_depth)
    stack_s = np.empty(max_depth)
    stack_tol = np.empty(max_depth)

    fa = _cosh_weight(a)
    fb = _cosh_weight(b)
    m = 0.5 * (a + b)
    fm = _cosh_weight(m)
    s = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    stack_a[0] = a
    stack_b[0] = b
    stack_fa[0] = fa
    stack_fm[0] = fm
    stack_fb[0] = fb
    stack_s[0] = s
    stack_tol[0] = tol
    top = 1

    total = 0.0
    evals = 0
    while top > 0:
        top -= 1
        a0 = stack_a[top]
        b0 = stack_b[top]
        fa0 = stack_fa[top]
        fm0 = stack_fm[top]
        fb0 = stack_fb[top]
        s0 = stack_s[top]
        tol0 = stack_tol[top]

        m0 = 0.5 * (a0 + b0)
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm = _cosh_weight(lm)
        frm = _cosh_weight(rm)
        evals += 2
        s_left = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        s_right = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        s2 = s_left + s_right
        err = s2 - s0
        if abs(err) <= 15.0 * tol0 or (b0 - a0) < 1e-14:
            total += s2 + err / 15.0
            continue
        if top + 2 > max_depth or evals > 2_000_000:
            return total, False
        half_tol = 0.5 * tol0
        stack_a[top] = a0
        stack_b[top] = m0
        stack_fa[top] = fa0
        stack_fm[top] = flm
        stack_fb[top] = fm0
        stack_s[top] = s_left
        stack_tol[top] = half_tol
        top += 1
        stack_a[top] = m0
        stack_b[top] = b0
        stack_fa[top] = fm0
        stack_fm[top] = frm
        stack_fb[top] = fb0
        stack_s[top] = s_right
        stack_tol[top] = half_tol
        top += 1
    return total, True


def log_beta_weight_integral(upper: float, tol: float) -> float:
    """Integral of ln(b)/(1+b^2) over [1/upper, upper] to absolute accuracy tol.

    Raises RuntimeError when the adaptive refinement fails to converge.
    """
    if upper == 1.0:
        return 0.0
    log_u = math.log(upper)
    quarter = 0.25 * tol
    left, ok_l = _adaptive_simpson_cosh(-log_u, 0.0, quarter)
    right, ok_r = _adaptive_simpson_cosh(0.0, log_u, quarter)
    if not (ok_l and ok_r):
        raise RuntimeError("adaptive quadrature did not converge")
    return left + right


# ---------------------------------------------------------------------------
# Batch propagation kernels (numba loop vs vectorized NumPy).
# ---------------------------------------------------------------------------


@njit(cache=True)
def _propagate_loop(betas, mean_ln_flow, mean_ln_price, beta_qm, r_m, out):
    n = betas.shape[0]
    for i in range(n):
        b = betas[i]
        lnb = np.log(b)
        y_e = lnb / (1.0 + b * b)
        x_e = -b * y_e
        ln_price = mean_ln_price + y_e
        ln_quantity = mean_ln_flow + x_e
        beta_xm = b * beta_qm
        out[i, 0] = ln_price
        out[i, 1] = ln_quantity
        out[i, 2] = ln_price + ln_quantity
        out[i, 3] = beta_xm
        out[i, 4] = beta_xm * r_m


def _propagate_numpy(betas, mean_ln_flow, mean_ln_price, beta_qm, r_m, out):
    lnb = np.log(betas)
    y_e = lnb / (1.0 + betas * betas)
    x_e = -betas * y_e
    out[:, 0] = mean_ln_price + y_e
    out[:, 1] = mean_ln_flow + x_e
    out[:, 2] = out[:, 0] + out[:, 1]
    out[:, 3] = betas * beta_qm
    out[:, 4] = out[:, 3] * r_m


def propagate_beta_draws(betas, mean_ln_flow, mean_ln_price, beta_qm, r_m):
    """Per-draw derived quantities, columns (ln_price, ln_quantity,
    ln_user_cost, beta_xm, r_x)."""
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    out = np.empty((betas.shape[0], 5))
    if NUMBA_ENABLED:
        _propagate_loop(betas, float(mean_ln_flow), float(mean_ln_price),
                        float(beta_qm), float(r_m), out)
    else:
        _propagate_numpy(betas, float(mean_ln_flow), float(mean_ln_price),
                         float(beta_qm), float(r_m), out)
    return out


@njit(cache=True)
def _equilibria_loop(beta, eps_s, eps_d, out_x, out_y):
    lnb = np.log(beta)
    denom = 1.0 + beta * beta
    for i in range(eps_s.shape[0]):
        y = (lnb + beta * eps_d[i] + eps_s[i]) / denom
        out_y[i] = y
        out_x[i] = -beta * y + eps_d[i]


def _equilibria_numpy(beta, eps_s, eps_d, out_x, out_y):
    lnb = np.log(beta)
    denom = 1.0 + beta * beta
    np.divide(lnb + beta * eps_d + eps_s, denom, out=out_y)
    np.multiply(out_y, -beta, out=out_x)
    out_x += eps_d


def equilibria_from_shocks(beta, eps_s, eps_d):
    """Solve the shocked supply/demand system for each shock pair.

    Returns (flow deviations, price deviations) before any re-centering.
    """
    eps_s = np.ascontiguousarray(eps_s, dtype=np.float64)
    eps_d = np.ascontiguousarray(eps_d, dtype=np.float64)
    out_x = np.empty_like(eps_d)
    out_y = np.empty_like(eps_d)
    if NUMBA_ENABLED:
        _equilibria_loop(float(beta), eps_s, eps_d, out_x, out_y)
    else:
        _equilibria_numpy(float(beta), eps_s, eps_d, out_x, out_y)
    return out_x, out_y
