"""Deterministic quadrature for radial integrals in the log-radius variable.

All radial integrals are computed after the substitution lambda = 2**u, so an
integrand supported on doubly-exponential scales becomes a function on a
moderate u-interval:

    int_a^b F(lambda) dlambda = ln2 * int g(u) du,   g(u) = F(2**u) * 2**u.

Integrand values may be returned as floats or LogScalars; accumulation is
always in the log domain with a pairwise reduction over a fixed node order,
so results do not depend on how panels might be scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .logscalar import LogScalar, ZERO, pairwise_sum

_LN2 = math.log(2.0)
_LOG2_LN2 = math.log2(_LN2)

__all__ = ["QuadratureSpec", "QuadratureError", "quad_radial", "quad_log2"]


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "gauss-legendre-composite"  # or "trapezoid-log"
    panels: int = 8
    nodes_per_panel: int = 12
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.rule not in ("gauss-legendre-composite", "trapezoid-log"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")
        if self.panels < 1 or self.nodes_per_panel < 2:
            raise ValueError("panels and nodes_per_panel must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x.tolist(), w.tolist()


def _as_logscalar(v) -> LogScalar:
    if isinstance(v, LogScalar):
        return v
    return LogScalar.from_float(float(v))


def _eval_once(g: Callable[[float], object], u_lo: float, u_hi: float,
               spec: QuadratureSpec, panels: int) -> LogScalar:
    """One composite pass with the given panel count over [u_lo, u_hi]."""
    width = (u_hi - u_lo) / panels
    contribs: list[LogScalar] = []
    if spec.rule == "gauss-legendre-composite":
        xs, ws = _leggauss(spec.nodes_per_panel)
        for p in range(panels):
            c = u_lo + (p + 0.5) * width
            h = 0.5 * width
            for x, w in zip(xs, ws):
                val = _as_logscalar(g(c + h * x))
                contribs.append(val.mul_pow2(math.log2(w * h)) if not val.is_zero else ZERO)
    else:  # trapezoid-log
        n = panels * spec.nodes_per_panel
        h = (u_hi - u_lo) / n
        for i in range(n + 1):
            val = _as_logscalar(g(u_lo + i * h))
            if val.is_zero:
                contribs.append(ZERO)
                continue
            weight = 0.5 * h if i in (0, n) else h
            contribs.append(val.mul_pow2(math.log2(weight)))
    return pairwise_sum(contribs)


def _rel_diff(a: LogScalar, b: LogScalar) -> float:
    """|a - b| relative to max(|a|, |b|); 0 when both are zero."""
    if a.is_zero and b.is_zero:
        return 0.0
    d = (a - b).abs()
    ref = a.abs() if a.abs() >= b.abs() else b.abs()
    return (d / ref).to_float()


_MAX_DOUBLINGS = 12


def quad_log2(g: Callable[[float], object], u_lo: float, u_hi: float,
              spec: QuadratureSpec) -> LogScalar:
    """Integral of g over the log2-radius interval [u_lo, u_hi].

    Panels are doubled until two successive estimates agree to spec.rel_tol.
    Raises QuadratureError with the last two estimates when the doubling cap
    is reached first.
    """
    if not (u_hi > u_lo):
        return ZERO
    panels = spec.panels
    prev = _eval_once(g, u_lo, u_hi, spec, panels)
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        cur = _eval_once(g, u_lo, u_hi, spec, panels)
        if _rel_diff(cur, prev) < spec.rel_tol:
            return cur
        prev = cur
    raise QuadratureError(
        "quadrature did not converge: last two estimates "
        f"{prev.to_float()!r} and {cur.to_float()!r} at {panels} panels"
    )


# How far below the upper bound a zero-left-endpoint integral is chased, in
# 16-octave blocks, before the remainder is declared negligible.
_ZERO_EDGE_CHUNK = 16.0
_ZERO_EDGE_MAX_CHUNKS = 80


def quad_radial(integrand: Callable[[float], object],
                interval: tuple[LogScalar, LogScalar],
                spec: QuadratureSpec) -> LogScalar:
    """Integral of integrand(lambda) over a radius interval.

    ``interval`` bounds are LogScalars; a zero lower bound means the integral
    starts at radius 0, which is handled by extending the log2 range downward
    in fixed chunks until a chunk contributes less than rel_tol of the total.
    The integrand is sampled at float radii 2**u, so it must tolerate severe
    underflow of lambda itself (it receives u = log2 lambda, not lambda).
    """
    lo, hi = interval
    if hi.sign <= 0 or (lo.sign > 0 and not lo < hi):
        raise ValueError("interval must satisfy 0 <= lo < hi")

    def g(u: float):
        v = _as_logscalar(integrand(u))
        if v.is_zero:
            return ZERO
        return v.mul_pow2(u + _LOG2_LN2)  # d(lambda) = 2**u ln2 du

    u_hi = hi.log2_mag
    if lo.sign > 0:
        return quad_log2(g, lo.log2_mag, u_hi, spec)

    total = ZERO
    top = u_hi
    for _ in range(_ZERO_EDGE_MAX_CHUNKS):
        bottom = top - _ZERO_EDGE_CHUNK
        chunk = quad_log2(g, bottom, top, spec)
        total = total + chunk
        if not total.is_zero and not chunk.is_zero:
            if (chunk.abs() / total.abs()).to_float() < spec.rel_tol / 16.0:
                return total
        elif total.is_zero and chunk.is_zero and top < u_hi - 4 * _ZERO_EDGE_CHUNK:
            return total
        top = bottom
    raise QuadratureError(
        "quadrature did not converge: lower-edge extension exhausted, "
        f"total so far {total.to_float()!r}"
    )
