"""Constructors for the reference data family driving every acceptance check.

Six families:

  v0          alternating dyadic annuli; the indicator oscillates between
              two finite positive limits, yet the decay character exists.
  u0log       a power law with a logarithmic amplitude correction; upper and
              lower characters agree but no decay character exists and every
              decay rate carries a log factor.
  w0          doubly-exponentially lacunary shells b_k = 2**(-2**k); the
              upper and lower characters split (r and 2r + n/2).
  pure_power  |fhat| = lambda^r0 on the unit ball; the textbook datum.
  annulus     spectrum bounded away from 0; super-algebraic decay.
  gaussian    sampled exp(-lambda^2/2) with a closed-form heat evolution.

Constructors return the profile and an ExampleMeta carrying structural radii
and the expected decay-character fields, so tests never re-derive them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .logscalar import LogScalar
from .profiles import (Component, PowerSegment, RadialProfile, SampledRadial,
                       make_radial_profile)

_LN2 = math.log(2.0)

__all__ = [
    "ExampleMeta",
    "example_v0",
    "example_u0_log",
    "example_w0",
    "pure_power",
    "annulus_datum",
    "gaussian_datum",
    "build_example",
    "FAMILIES",
]


@dataclass(frozen=True)
class ExampleMeta:
    family: str
    parameters: dict
    structural_radii: tuple[float, ...]   # log2 radii, sorted decreasing
    expected: dict


def example_v0(n: int, r: float, depth: int) -> tuple[RadialProfile, ExampleMeta]:
    """|fhat| = lambda^r on every second dyadic annulus below radius 1."""
    if r <= -n / 2.0:
        raise ValueError("need r > -n/2")
    if depth < 8:
        raise ValueError("need depth >= 8 for a resolvable tail")
    segs = []
    for j in range(0, -2 * depth - 1, -2):
        segs.append(PowerSegment(float(j - 1), float(j), 0.0, r))
    profile = make_radial_profile(n, [segs], f"v0(n={n},r={r},depth={depth})")
    radii = sorted((s.log2_a for s in segs), reverse=True)
    radii += sorted((s.log2_b for s in segs), reverse=True)
    meta = ExampleMeta(
        "v0", {"n": n, "r": r, "depth": depth},
        tuple(sorted(radii, reverse=True)),
        {"r_plus": r, "r_minus": r, "r_star": r, "sigma": r + n / 2.0,
         "indicator_ratio": 2.0 ** (2 * r + n), "log_correction": False})
    return profile, meta


def example_u0_log(n: int, r0: float, inner_cut: float = -4.0
                   ) -> tuple[RadialProfile, ExampleMeta]:
    """|fhat| = lambda^r0 * ln(1/lambda) near the origin, zero outside.

    Any bounded completion outside the cutoff changes no limit as rho -> 0,
    so the constructor simply stops the segment there.
    """
    if r0 <= -n / 2.0:
        raise ValueError("need r0 > -n/2")
    if inner_cut > -4.0:
        raise ValueError("inner cutoff must be at most 2**-4")
    seg = PowerSegment(None, float(inner_cut), 0.0, r0, log_power=1)
    profile = make_radial_profile(n, [[seg]],
                                  f"u0log(n={n},r0={r0},cut={inner_cut})")
    meta = ExampleMeta(
        "u0log", {"n": n, "r0": r0, "inner_cut": inner_cut},
        (float(inner_cut),),
        {"r_plus": r0, "r_minus": r0, "r_star": None, "sigma": None,
         "log_correction": True})
    return profile, meta


def example_w0(n: int, r: float, K: int) -> tuple[RadialProfile, ExampleMeta]:
    """K lacunary shells with b_k = 2**(-2**k) and shell masses eta_k chosen
    so that the cumulative spectral mass telescopes to omega_n * b_k^(2r+n).

    Shell widths fall to 2**(-n 2^k) of an octave, far below float
    resolution of the endpoints, so each segment carries its width as a
    separate log2_gap and the amplitudes are recovered in log space from

        h_k^2 = n eta_k / (b_k^n - a_k^n),    b_k^n - a_k^n = b_k^(2n),

    the last identity holding exactly by the construction of a_k (the float
    subtraction would cancel catastrophically from k = 6 on).
    """
    if r <= -n / 2.0:
        raise ValueError("need r > -n/2")
    if K < 12:
        raise ValueError("need K >= 12; smaller ladders never leave the "
                         "float-resolvable regime")
    beta = 2.0 * r + n
    if (2 * n + beta) * 2.0 ** (K - 1) > 2.0 ** 52:
        raise ValueError("capacity: shell exponents exceed the exact-integer "
                         "range of the log2 representation")
    segs = []
    radii: list[float] = []
    for k in range(K):
        log2_b = -(2.0 ** k)
        bn_log2 = n * log2_b
        # gap = log2(b) - log2(a) = -(1/n) log2(1 - b^n)
        if bn_log2 > -45.0:
            delta = -math.log1p(-(2.0 ** bn_log2)) / (n * _LN2)
            log2_gap = math.log2(delta)
        else:
            log2_gap = bn_log2 - math.log2(n * _LN2)
            delta = 0.0
        log2_a = log2_b - delta
        eta = LogScalar.exp2(beta * log2_b) - LogScalar.exp2(2.0 * beta * log2_b)
        log2_h = 0.5 * (math.log2(n) + eta.log2_mag - 2.0 * bn_log2)
        gap_field = None if (delta > 0.0 and log2_a < log2_b) else log2_gap
        segs.append(PowerSegment(log2_a, log2_b, log2_h, 0.0, 0, gap_field))
        radii += [log2_b, log2_a]
    profile = make_radial_profile(n, [segs], f"w0(n={n},r={r},K={K})")
    meta = ExampleMeta(
        "w0", {"n": n, "r": r, "K": K},
        tuple(sorted(radii, reverse=True)),
        {"r_plus": r, "r_minus": 2.0 * r + n / 2.0, "r_star": None,
         "sigma": None, "log_correction": False})
    return profile, meta


def pure_power(n: int, r0: float) -> tuple[RadialProfile, ExampleMeta]:
    """|fhat| = lambda^r0 on the unit ball."""
    if r0 <= -n / 2.0:
        raise ValueError("need r0 > -n/2")
    seg = PowerSegment(None, 0.0, 0.0, r0)
    profile = make_radial_profile(n, [[seg]], f"pure_power(n={n},r0={r0})")
    meta = ExampleMeta(
        "pure_power", {"n": n, "r0": r0}, (0.0,),
        {"r_plus": r0, "r_minus": r0, "r_star": r0, "sigma": r0 + n / 2.0,
         "log_correction": False})
    return profile, meta


def annulus_datum(n: int) -> tuple[RadialProfile, ExampleMeta]:
    """Plateau on radii [1/2, 1]: no low-frequency mass at all."""
    seg = PowerSegment(-1.0, 0.0, 0.0, 0.0)
    profile = make_radial_profile(n, [[seg]], f"annulus(n={n})")
    meta = ExampleMeta(
        "annulus", {"n": n}, (0.0, -1.0),
        {"r_plus": math.inf, "r_minus": math.inf, "r_star": math.inf,
         "sigma": math.inf, "log_correction": False})
    return profile, meta


def _gaussian_nodes(scale: float) -> list[float]:
    """Log2 nodes over [-30, 5], dense where the log-log curvature is large.

    The interpolation error of ln g for g = exp(-lambda^2/2) is about
    du^2 lambda^2 (ln 2)^2 / 4 per subinterval, so the spacing shrinks like
    1/lambda until the weight e^(-lambda^2) makes errors irrelevant.
    """
    target = 1.58e-3 / scale
    nodes = [-30.0]
    while nodes[-1] < 5.0:
        lam = 2.0 ** nodes[-1]
        if lam <= 6.5:
            du = min(0.25, target / lam)
        else:
            du = 0.125
        nodes.append(min(nodes[-1] + du, 5.0))
    return nodes


def gaussian_datum(n: int, density_scale: float = 1.0
                   ) -> tuple[RadialProfile, ExampleMeta]:
    """Sampled |fhat| = exp(-lambda^2/2) with slope continuation outside the
    node range; its heat evolution has the closed form
    ||e^(t Delta) f||_2 = pi^(n/4) (1+2t)^(-n/4) for n = 3."""
    nodes = _gaussian_nodes(density_scale)
    mags = tuple((-(2.0 ** (2 * u)) / 2.0) / _LN2 for u in nodes)
    sampled = SampledRadial(tuple(nodes), mags, extend="slope")
    profile = make_radial_profile(n, [sampled], f"gaussian(n={n})")
    meta = ExampleMeta(
        "gaussian", {"n": n, "nodes": len(nodes)}, (),
        {"r_plus": 0.0, "r_minus": 0.0, "r_star": 0.0, "sigma": n / 2.0,
         "log_correction": False})
    return profile, meta


FAMILIES = ("v0", "u0log", "w0", "pure_power", "annulus", "gaussian")


def build_example(family: str, **params) -> tuple[RadialProfile, ExampleMeta]:
    """Dispatch by family name; used by the command-line `example` command."""
    if family == "v0":
        return example_v0(int(params["n"]), float(params["r"]),
                          int(params.get("depth", 20)))
    if family == "u0log":
        return example_u0_log(int(params["n"]), float(params["r"]),
                              float(params.get("inner_cut", -4.0)))
    if family == "w0":
        return example_w0(int(params["n"]), float(params["r"]),
                          int(params.get("k", 40)))
    if family == "pure_power":
        return pure_power(int(params["n"]), float(params["r"]))
    if family == "annulus":
        return annulus_datum(int(params["n"]))
    if family == "gaussian":
        return gaussian_datum(int(params["n"]))
    raise ValueError(f"unknown example family {family!r}")
