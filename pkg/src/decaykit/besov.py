"""Dyadic (Littlewood-Paley) analysis: block norms, negative-order norms over
the window, and the two nonlinear block-lower-bound classifiers.

The localization bump is fixed once: a smooth cutoff chi equal to 1 below
3/4 and 0 above 4/3, built from the standard exp(-1/x) step, with
phi(v) = chi(v/2) - chi(v).  The telescoping construction makes the
partition of unity exact up to float rounding and keeps the support in
[3/4, 8/3], so at most two blocks overlap at any radius and the block
energies satisfy 1/2 <= sum phi^2 <= 1 pointwise.

All block integrals are evaluated in log2-radius space with log-sum-exp
accumulation, so lacunary shells with amplitudes like 2**(2**40) pass
through without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .logscalar import LogScalar, ZERO, pairwise_sum
from .profiles import Atom, RadialProfile, _atom_mass, omega_n

_LN2 = math.log(2.0)

__all__ = [
    "LPBump",
    "DyadicSpectrum",
    "BesovNorm",
    "SetVerdict",
    "bump",
    "lp_block_norm",
    "dyadic_spectrum",
    "besov_norm",
    "classify_sets",
    "C_FLOOR",
    "M_MAX",
]

C_FLOOR = 0.1   # a block is a witness when q_j >= C_FLOOR * sup q
M_MAX = 16      # largest admissible witness gap, in octaves

_SUPP_LO = math.log2(0.75)
_SUPP_HI = math.log2(8.0 / 3.0)
_KINKS = (math.log2(0.75), math.log2(4.0 / 3.0),
          math.log2(1.5), math.log2(8.0 / 3.0))
_THIN_GAP_LOG2 = -40.0


class LPBump:
    """The fixed dyadic bump; support [3/4, 8/3] in radius."""

    support = (0.75, 8.0 / 3.0)

    @staticmethod
    def chi(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[x <= 0.75] = 1.0
        mid = (x > 0.75) & (x < 4.0 / 3.0)
        if mid.any():
            t = (4.0 / 3.0 - x[mid]) / (4.0 / 3.0 - 0.75)
            a = np.exp(-1.0 / t)
            b = np.exp(-1.0 / (1.0 - t))
            out[mid] = a / (a + b)
        return out

    @classmethod
    def phi(cls, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return cls.chi(v / 2.0) - cls.chi(v)

    @classmethod
    def partition_residual(cls, n_radii: int = 1000) -> float:
        """max over log-spaced radii of |sum_j phi(lambda/2^j) - 1|."""
        u = np.linspace(-7.3, 7.7, n_radii)
        total = np.zeros_like(u)
        for j in range(-12, 13):
            total += cls.phi(2.0 ** (u - j))
        return float(np.max(np.abs(total - 1.0)))

    @classmethod
    def square_sum_range(cls, n_radii: int = 1000) -> tuple[float, float]:
        u = np.linspace(-7.3, 7.7, n_radii)
        total = np.zeros_like(u)
        for j in range(-12, 13):
            total += cls.phi(2.0 ** (u - j)) ** 2
        return float(total.min()), float(total.max())


bump = LPBump()


def _log2_phi_sq(u: np.ndarray, j: int) -> np.ndarray:
    p = LPBump.phi(2.0 ** (u - j))
    with np.errstate(divide="ignore"):
        return 2.0 * np.log2(p)


def _logsumexp2(vals: np.ndarray) -> float:
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return -math.inf
    m = float(vals.max())
    return m + math.log2(float(np.sum(2.0 ** (vals - m))))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _panel_log2(atom: Atom, n: int, j: int, u_lo: float, u_hi: float,
                panels: int) -> float:
    """log2 of int phi(lam/2^j)^2 g^2 lam^(n-1) dlam over [u_lo, u_hi]."""
    edges = np.linspace(u_lo, u_hi, panels + 1)
    c = 0.5 * (edges[1:] + edges[:-1])
    h = 0.5 * (edges[1:] - edges[:-1])
    u = (c[:, None] + h[:, None] * _GL_X[None, :]).ravel()
    w_log2 = np.log2(np.outer(h, _GL_W).ravel() * _LN2)
    m = atom.two_r + n
    vals = atom.log2_c2 + m * u + _log2_phi_sq(u, j) + w_log2
    if atom.log_power:
        ln_inv = np.maximum(-u * _LN2, 1e-300)
        vals = vals + 2.0 * atom.log_power * np.log2(ln_inv)
    return _logsumexp2(vals)


def _block_atom_log2(atom: Atom, n: int, j: int) -> float:
    """log2 contribution of one atom to the block-j energy (no omega)."""
    lo = atom.log2_lo if atom.log2_lo is not None else -math.inf
    hi = atom.log2_hi if atom.log2_hi is not None else math.inf
    u_lo = max(lo, j + _SUPP_LO)
    u_hi = min(hi, j + _SUPP_HI)
    if not u_lo < u_hi:
        if atom.gap is not None and (atom.gap.is_zero
                                     or atom.gap.log2() <= _THIN_GAP_LOG2):
            # shell thinner than float resolution: a point mass in radius
            if atom.log2_c2 is None:
                return -math.inf
            v = 2.0 ** (atom.log2_hi - j)
            if not (0.75 < v < 8.0 / 3.0):
                return -math.inf
            ph2 = float(LPBump.phi(v)) ** 2
            if ph2 == 0.0:
                return -math.inf
            return _atom_mass(atom, n).log2() + math.log2(ph2)
        return -math.inf
    if atom.log2_c2 is None:
        return -math.inf
    if atom.gap is not None and atom.gap.log2() <= _THIN_GAP_LOG2:
        v = 2.0 ** (atom.log2_hi - j)
        ph2 = float(LPBump.phi(v)) ** 2
        if ph2 == 0.0:
            return -math.inf
        return _atom_mass(atom, n).log2() + math.log2(ph2)
    if not atom.structural and atom.log_power == 0:
        # interpolation piece: narrow, one fixed panel is exact
        return _panel_log2(atom, n, j, u_lo, u_hi, 1)
    # segment-scale atom: split at the bump transition kinks, then refine
    cuts = sorted({u_lo, u_hi, *(j + k for k in _KINKS
                                 if u_lo < j + k < u_hi)})
    prev = None
    panels = 2
    for _ in range(8):
        total = _logsumexp2(np.array([
            _panel_log2(atom, n, j, a, b, panels)
            for a, b in zip(cuts, cuts[1:])]))
        if prev is not None:
            if total == prev == -math.inf:
                return total
            if abs(total - prev) <= 1e-11:
                return total
        prev = total
        panels *= 2
    return prev


def lp_block_norm(profile: RadialProfile, j: int) -> LogScalar:
    """||Delta_j f||_2 for the fixed bump."""
    n = profile.dimension
    logs = [_block_atom_log2(a, n, j) for a in profile.atoms]
    vals = [LogScalar.exp2(v) for v in logs if v != -math.inf]
    if not vals:
        return ZERO
    e2 = pairwise_sum(vals).mul_pow2(math.log2(omega_n(n)))
    return e2.sqrt()


@dataclass(frozen=True)
class DyadicSpectrum:
    j_min: int
    j_max: int
    e: tuple[LogScalar, ...]       # e[k] = ||Delta_(j_min+k) f||_2
    dimension: int
    l2: LogScalar                  # ||f||_2 of the profile
    coverage: bool                 # window captures essentially all mass
    label: str = ""

    def block(self, j: int) -> LogScalar:
        if not self.j_min <= j <= self.j_max:
            raise IndexError(f"block {j} outside window")
        return self.e[j - self.j_min]

    def js(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def energy_ratio(self) -> float:
        """sum e_j^2 / ||f||_2^2 (meaningful when coverage is True)."""
        tot = pairwise_sum([x * x for x in self.e])
        if self.l2.is_zero:
            return 0.0
        return (tot / (self.l2 * self.l2)).to_float()


def dyadic_spectrum(profile: RadialProfile, j_min: int, j_max: int,
                    label: str | None = None) -> DyadicSpectrum:
    if not j_min < j_max:
        raise ValueError("need j_min < j_max")
    e = tuple(lp_block_norm(profile, j) for j in range(j_min, j_max + 1))
    total = profile.l2_squared
    inner = profile.spectral_mass(j_max - 0.415) \
        - profile.spectral_mass(j_min + 1.415)
    outside = (total - inner).abs()
    coverage = total.is_zero or \
        (outside / total).to_float() <= 1e-9
    return DyadicSpectrum(j_min, j_max, e, profile.dimension,
                          profile.l2_squared.sqrt(), coverage,
                          label if label is not None else profile.label)


@dataclass(frozen=True)
class BesovNorm:
    value: LogScalar
    q: float
    s: float
    arg_j: int | None          # maximizing block for q = inf
    edge_attained: bool        # sup sits against the window edge


def besov_norm(spectrum: DyadicSpectrum, s: float, q: float) -> BesovNorm:
    """Windowed homogeneous norm: l^q over j of 2^(js) ||Delta_j f||_2.

    q = inf reports the maximizing j and flags attainment at the window
    edge, where the windowed sup is only a lower bound for the true norm.
    """
    if q not in (1, 2, math.inf):
        raise ValueError("q must be 1, 2 or inf")
    terms = [e.mul_pow2(s * j) if not e.is_zero else ZERO
             for j, e in zip(spectrum.js(), spectrum.e)]
    if q == math.inf:
        best, arg = ZERO, None
        for j, t in zip(spectrum.js(), terms):
            if t > best:
                best, arg = t, j
        edge = arg is not None and (arg <= spectrum.j_min + 1
                                    or arg >= spectrum.j_max - 1)
        return BesovNorm(best, q, s, arg, edge)
    if q == 1:
        return BesovNorm(pairwise_sum(terms), q, s, None, False)
    return BesovNorm(pairwise_sum([t * t for t in terms]).sqrt(), q, s,
                     None, False)


# ---------------------------------------------------------------------------
# the two block-lower-bound classifiers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetVerdict:
    sigma: float
    in_B: bool
    in_A_ring: bool
    in_A_cal: bool
    besov_value: LogScalar         # windowed sup of q_j = 2^(-sigma j) e_j
    c_lower: LogScalar             # min witness level (tail)
    C_upper: LogScalar             # sup level over the window
    ring_gap: int | None           # smallest admissible M for the ring set
    cal_gap: int | None            # max witness gap toward -inf
    witnesses: tuple[int, ...]     # tail witness blocks, deepest first
    diagnostics: str

    def to_json(self) -> dict:
        return {
            "sigma": self.sigma,
            "in_B": self.in_B,
            "in_A_ring": self.in_A_ring,
            "in_A_cal": self.in_A_cal,
            "besov_sup_log2": _j(self.besov_value.log2()),
            "c_lower_log2": _j(self.c_lower.log2()),
            "C_upper_log2": _j(self.C_upper.log2()),
            "ring_gap": self.ring_gap,
            "cal_gap": self.cal_gap,
            "witnesses": list(self.witnesses),
            "diagnostics": self.diagnostics,
        }


def _j(x: float):
    return "-inf" if x == -math.inf else ("+inf" if x == math.inf else x)


class WindowTooShallow(RuntimeError):
    pass


_TRUNCATION_SPAN = 24  # occupied octaves above a zero tail = truncated ladder


def _window_verdicts(js: np.ndarray, q_log2: np.ndarray):
    """(in_B, in_A_ring, in_A_cal, details) on one window."""
    j_min, j_max = int(js.min()), int(js.max())
    finite = np.isfinite(q_log2)
    if not finite.any():
        return True, False, False, {"sup": -math.inf, "witnesses": [],
                                    "ring_gap": None, "cal_gap": None,
                                    "why": "zero spectrum"}
    sup = float(q_log2[finite].max())

    # A wide occupied span over an identically-zero deep tail means the
    # input is a truncated ladder: the zero tail is a construction artifact
    # and the deep anchor for gap/growth checks is the support bottom.
    occ_lo = int(js[finite].min())
    occ_hi = int(js[finite].max())
    why = ""
    if occ_lo > j_min and occ_hi - occ_lo >= _TRUNCATION_SPAN:
        anchor = occ_lo
        why = f"zero tail below j={occ_lo} treated as truncation"
    else:
        anchor = j_min

    # bounded above: the deepest decades of q must not climb
    tail_mask = (js <= min(0, j_max)) & (js >= anchor)
    tj, tq = js[tail_mask], q_log2[tail_mask]
    decs = []
    for k in range(3):
        dm = (tj >= anchor + 10 * k) & (tj < anchor + 10 * (k + 1))
        if dm.any():
            vals = tq[dm][np.isfinite(tq[dm])]
            decs.append(float(vals.max()) if vals.size else -math.inf)
    if len(decs) < 3:
        raise WindowTooShallow("window too shallow: fewer than 3 tail decades")
    in_b = not (decs[0] > decs[1] + 1e-9 and decs[1] > decs[2] + 1e-9)

    floor = sup + math.log2(C_FLOOR)
    wit_all = js[finite & (q_log2 >= floor)]
    pads = np.concatenate([[anchor - 1], wit_all, [j_max + 1]])
    ring_gap = int(np.diff(pads).max()) if wit_all.size else None
    in_ring = in_b and ring_gap is not None and ring_gap <= M_MAX

    t_finite = np.isfinite(tq)
    if t_finite.any():
        sup_t = float(tq[t_finite].max())
        floor_t = sup_t + math.log2(C_FLOOR)
        wit_t = tj[t_finite & (tq >= floor_t)]
    else:
        wit_t = np.array([], dtype=int)
    if wit_t.size:
        pads_t = np.concatenate([[anchor - 1], wit_t])
        cal_gap = int(np.diff(pads_t).max())
    else:
        cal_gap = None
    in_cal = in_b and cal_gap is not None and cal_gap <= M_MAX
    if in_ring and not in_cal:
        in_cal = True  # the ring coverage includes the tail by construction
    return in_b, in_ring, in_cal, {
        "sup": sup, "witnesses": sorted(int(x) for x in wit_t),
        "ring_gap": ring_gap, "cal_gap": cal_gap, "why": why}


def classify_sets(spectrum: DyadicSpectrum, sigma: float) -> SetVerdict:
    """Membership verdicts for the three nested block conditions at level
    sigma: bounded blocks (the negative-order space), bounded blocks with
    witnesses in every octave window (ring), and bounded blocks with a
    bounded-gap witness sequence running to -inf (cal).

    Verdicts are finite-window statements: they must agree with the window
    shallowed by one decade, otherwise the window is declared too shallow.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    js = np.arange(spectrum.j_min, spectrum.j_max + 1)
    q_log2 = np.array([e.log2() - sigma * j
                       for j, e in zip(js, spectrum.e)])
    if js.size < 31:
        raise WindowTooShallow("window too shallow: need at least 31 blocks")
    nz_runs = int(np.sum(np.diff(np.isfinite(q_log2).astype(int)) == 1)) \
        + int(np.isfinite(q_log2[0]))
    full = _window_verdicts(js, q_log2)
    shallow = _window_verdicts(js[10:], q_log2[10:])
    if full[:3] != shallow[:3]:
        raise WindowTooShallow(
            "window too shallow: verdicts flip when the deepest decade is "
            f"dropped (full={full[:3]}, shallowed={shallow[:3]})")
    in_b, in_ring, in_cal, det = full
    wit = det["witnesses"]
    c_lower = ZERO
    if wit:
        c_lower = min((spectrum.block(j).mul_pow2(-sigma * j) for j in wit))
    c_upper = LogScalar.exp2(det["sup"]) if det["sup"] > -math.inf else ZERO
    diag = (f"window [{spectrum.j_min},{spectrum.j_max}], "
            f"{nz_runs} occupied runs, ring gap {det['ring_gap']}, "
            f"cal gap {det['cal_gap']}" +
            ("; " + det["why"] if det["why"] else ""))
    return SetVerdict(sigma, in_b, in_ring, in_cal, c_upper, c_lower,
                      c_upper, det["ring_gap"], det["cal_gap"],
                      tuple(wit), diag)
