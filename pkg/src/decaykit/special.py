"""Incomplete-gamma machinery and two scalar identities used by the norms.

The regularized lower incomplete gamma function is implemented directly
(series below the s+1 crossover, Lentz continued fraction above) rather than
imported, because the evolution closed forms need *differences* of gamma
values at arguments that can be astronomically small, astronomically close,
or deep in the saturated tail; those branches share the primitives here and
are cross-checked against a quadrature oracle that never touches this file.
"""

from __future__ import annotations

import math

from .logscalar import LogScalar, ZERO, ONE, one_minus_exp2_neg, pairwise_sum
from .quadrature import QuadratureSpec, quad_log2

_LN2 = math.log(2.0)

__all__ = [
    "lower_incomplete_gamma_reg",
    "gamma_lower_diff",
    "gamma_lower_log",
    "gamma_identity_residual",
    "uniform_dyadic_sum_bound",
    "geometric_grid",
]

_MAX_ITER = 500
_EPS = 1e-16


def _gser(s: float, x: float) -> float:
    """Series for P(s, x); reliable for x < s + 1."""
    if x == 0.0:
        return 0.0
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gcf_h(s: float, x: float) -> float:
    """Lentz continued fraction H with Q(s, x) = exp(-x + s ln x - lgamma s) * H."""
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def lower_incomplete_gamma_reg(s: float, x: float) -> float:
    """Regularized lower incomplete gamma P(s, x), relative error <= 1e-12."""
    if not s > 0:
        raise ValueError("lower_incomplete_gamma_reg requires s > 0")
    if x < 0:
        raise ValueError("lower_incomplete_gamma_reg requires x >= 0")
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _gser(s, x)
    logq = -x + s * math.log(x) - math.lgamma(s)
    if logq < -745.0:
        return 1.0
    return 1.0 - math.exp(logq) * _gcf_h(s, x)


def _log2_upper_q(s: float, x: float) -> float:
    """log2 of Q(s, x) via the continued fraction; requires x >= s + 1."""
    return (-x + s * math.log(x) - math.lgamma(s) + math.log(_gcf_h(s, x))) / _LN2


def gamma_lower_log(s: float, log2_x: float) -> LogScalar:
    """Unregularized lower gamma(s, x) for x = 2**log2_x, log-domain safe."""
    if not s > 0:
        raise ValueError("gamma_lower_log requires s > 0")
    x = 2.0 ** min(log2_x, 1020.0)
    if log2_x <= 1.0:
        # alternating series gamma(s,x) = sum (-1)^k x^(s+k) / (k! (s+k));
        # terms decay immediately for x <= 2 and every term is exact in logs
        terms: list[LogScalar] = []
        log2x = log2_x
        logfact = 0.0
        for k in range(80):
            if k > 0:
                logfact += math.log2(k)
            mag = (s + k) * log2x - logfact - math.log2(s + k)
            terms.append(LogScalar(1 if k % 2 == 0 else -1, mag))
            if k > 2 * x + 8 and mag < terms[0].log2_mag - 70.0:
                break
        return pairwise_sum(terms)
    if x < s + 1.0:
        return _gamma_ls(s) * LogScalar.from_float(_gser(s, x))
    # saturated side: gamma(s,x) = Gamma(s) (1 - Q)
    q_log2 = _log2_upper_q(s, x)
    return _gamma_ls(s) * (ONE - LogScalar.exp2(q_log2))


def _gamma_ls(s: float) -> LogScalar:
    return LogScalar(1, math.lgamma(s) / _LN2)


def _narrow_gl_diff(s: float, x_lo: float, dx: float) -> LogScalar:
    """int_{x_lo}^{x_lo+dx} u^(s-1) e^-u du by fixed Gauss-Legendre, log domain.

    Used when the interval is too narrow for stable P/Q differences; the
    integrand is smooth there so 32 nodes are far beyond machine accuracy.
    """
    from .quadrature import _leggauss  # fixed rule, cached nodes

    xs, ws = _leggauss(32)
    c = x_lo + 0.5 * dx
    h = 0.5 * dx
    vals = []
    for xi, wi in zip(xs, ws):
        u = c + h * xi
        mag = ((s - 1.0) * math.log(u) - u) / _LN2 + math.log2(wi * h)
        vals.append(LogScalar(1, mag))
    return pairwise_sum(vals)


def gamma_lower_diff(s: float, log2_x_lo: float | None,
                     gap_log2x: LogScalar | None) -> LogScalar:
    """gamma(s, x_hi) - gamma(s, x_lo), with log2(x_hi) = log2_x_lo + gap.

    ``log2_x_lo is None`` means x_lo = 0 (full lower gamma at x_hi given by
    the gap argument's log2 magnitude is not meaningful then; pass the upper
    bound via log2_x_lo of the reduced call).  The gap is carried separately
    because the two bounds may agree to far below float resolution of their
    logs.  Requires s > 0.
    """
    if not s > 0:
        raise ValueError("gamma_lower_diff requires s > 0")
    if log2_x_lo is None:
        raise ValueError("pass x_lo = 0 through gamma_lower_log instead")
    if gap_log2x is None or gap_log2x.sign <= 0:
        return ZERO
    gapf = gap_log2x.to_float()
    log2_x_hi = log2_x_lo + gapf

    if log2_x_hi <= 1.001:
        # difference series: sum (-1)^k x_hi^(s+k) E_k / (k! (s+k)),
        # E_k = 1 - 2^(-(s+k) gap), each factor stable for any gap size
        terms: list[LogScalar] = []
        logfact = 0.0
        x_hi = 2.0 ** log2_x_hi
        for k in range(80):
            if k > 0:
                logfact += math.log2(k)
            ek = one_minus_exp2_neg(gap_log2x.mul_pow2(math.log2(s + k)))
            if ek.is_zero:
                break
            mag = (s + k) * log2_x_hi - logfact - math.log2(s + k) + ek.log2_mag
            terms.append(LogScalar(1 if k % 2 == 0 else -1, mag))
            if k > 2 * x_hi + 8 and mag < terms[0].log2_mag - 70.0:
                break
        return pairwise_sum(terms)

    x_lo = 2.0 ** log2_x_lo
    x_hi = 2.0 ** min(log2_x_hi, 1020.0)
    dx = x_lo * math.expm1(gapf * _LN2)

    if gapf < 2.0 ** -10:
        return _narrow_gl_diff(s, x_lo, dx)

    if x_lo >= (s + 1.0) * (1.0 - 1e-9):
        # both in the Q tail; subtract in the log domain
        h_lo = _gcf_h(s, x_lo)
        h_hi = _gcf_h(s, x_hi) if log2_x_hi < 1020.0 else None
        dq_ln = -dx + s * gapf * _LN2
        if h_hi is not None:
            dq_ln += math.log(h_hi / h_lo)
        ratio_gap = LogScalar.from_float(-dq_ln / _LN2) if dq_ln < 0 else ZERO
        q_lo_log2 = (-x_lo + s * math.log(x_lo) - math.lgamma(s)
                     + math.log(h_lo)) / _LN2
        factor = one_minus_exp2_neg(ratio_gap) if not ratio_gap.is_zero else ZERO
        if factor.is_zero and dq_ln >= 0:
            return ZERO
        return _gamma_ls(s) * LogScalar.exp2(q_lo_log2) * factor

    if log2_x_lo < 0.998:
        # straddles the series region: split just below x = 2; the left
        # part re-enters the series branch, the right part cannot re-split
        left = gamma_lower_diff(s, log2_x_lo,
                                LogScalar.from_float(0.998 - log2_x_lo))
        right = gamma_lower_diff(s, 0.998,
                                 LogScalar.from_float(log2_x_hi - 0.998))
        return left + right
    mid = math.log2(s + 1.0)
    if log2_x_hi > mid + 1e-6 and log2_x_lo < mid - 1e-6:
        left = gamma_lower_diff(s, log2_x_lo,
                                LogScalar.from_float(mid - log2_x_lo))
        right = gamma_lower_diff(s, mid,
                                 LogScalar.from_float(log2_x_hi - mid))
        return left + right
    # mid range [2, ~s+1] with a non-narrow gap: plain P difference is stable
    p_hi = lower_incomplete_gamma_reg(s, x_hi)
    p_lo = lower_incomplete_gamma_reg(s, x_lo)
    return _gamma_ls(s) * LogScalar.from_float(p_hi - p_lo)


def gamma_identity_residual(alpha: float, sigma: float, c: float,
                            lam: float, spec: QuadratureSpec) -> float:
    """Relative residual of the time-integral identity

        int_0^inf t^(sigma/alpha) (c lam^(2 alpha))^(1+sigma/alpha)
                  exp(-c lam^(2 alpha) t) dt  =  Gamma(1 + sigma/alpha).

    The integral is evaluated by quadrature after substituting
    u = c lam^(2 alpha) t, which removes lam and c exactly; their values only
    fix the (irrelevant) time range mapped onto the fixed u range.
    """
    if not (alpha > 0 and sigma > 0 and c > 0 and lam > 0):
        raise ValueError("all parameters must be strictly positive")
    s = sigma / alpha

    def g(v: float):
        u = 2.0**v
        return LogScalar(1, (s + 1) * v - u / _LN2 + math.log2(_LN2))

    u_hi = math.log2(max(64.0, 30.0 * (s + 1.0)))
    q = quad_log2(g, -60.0, u_hi, spec)
    gam = _gamma_ls(1.0 + s)
    return ((q - gam).abs() / gam).to_float()


def geometric_grid(lo: float, hi: float, per_decade: int) -> list[float]:
    """Geometric grid of 10**k values from lo to hi inclusive."""
    if not (lo > 0 and hi > lo and per_decade >= 1):
        raise ValueError("need 0 < lo < hi and per_decade >= 1")
    d_lo, d_hi = math.log10(lo), math.log10(hi)
    n = int(round((d_hi - d_lo) * per_decade))
    return [10.0 ** (d_lo + (d_hi - d_lo) * i / n) for i in range(n + 1)]


def uniform_dyadic_sum_bound(alpha: float, sigma: float, c: float,
                             t_grid: list[float],
                             j_window: tuple[int, int]) -> float:
    """sup over the time grid of sum_j t^(sigma/alpha) 4^(j sigma) e^(-c t 4^(j alpha)).

    The window must be wide enough that both boundary terms stay below 1e-15
    of the sum at every grid time; otherwise truncation would masquerade as a
    finite supremum and the call fails.
    """
    if not (alpha > 0 and sigma > 0 and c > 0):
        raise ValueError("alpha, sigma, c must be positive")
    j_lo, j_hi = j_window
    if not j_lo < j_hi:
        raise ValueError("empty j window")
    sup = ZERO
    log2c = math.log2(c)
    for t in t_grid:
        log2t = math.log2(t)
        terms = []
        for j in range(j_lo, j_hi + 1):
            # exponent of e: -c t 4^(j alpha); compute its log2 first to
            # avoid overflowing the plain product
            e_log2 = log2c + log2t + 2.0 * j * alpha
            if e_log2 > 62.0:
                terms.append(ZERO)
                continue
            mag = (sigma / alpha) * log2t + 2.0 * j * sigma \
                - (2.0**e_log2) / _LN2
            terms.append(LogScalar(1, mag))
        total = pairwise_sum(terms)
        if total.is_zero:
            continue
        for edge in (terms[0], terms[-1]):
            if not edge.is_zero and (edge / total).to_float() > 1e-15:
                raise ValueError(
                    "truncation dominates: enlarge j_window "
                    f"(edge/sum = {(edge / total).to_float():.3e} at t = {t:g})"
                )
        if total > sup:
            sup = total
    return sup.to_float()
