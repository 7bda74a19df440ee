"""Decay indicators Phi_r(rho) and the decay-character report.

The two indicator limits (liminf and limsup of Phi_r as rho -> 0) are
estimated from windowed extremes of Phi over a geometric rho grid joined
with exact evaluations at every structural segment edge: the extrema of Phi
occur exactly at shell edges, and for lacunary data those edges are the only
usable sample points since no grid reaches radii like 2**(-2**40).  Upper
and lower decay characters are located by bisection on the sign of the
corresponding envelope slope, which is strictly decreasing in the probe
exponent r (slope of log2 Phi_r per octave is -(2r+n) plus an r-independent
mass slope).

Finite-data conventions (all reported, none silent):

  * A profile whose structural shells form a ladder of 10+ octave scales is
    measured on its deepest intact window; samples at or below the ladder's
    truncation radius are construction artifacts and are dropped.
  * A non-ladder profile with no spectral mass in the deep grid tail has
    indicator zero for every r and upper/lower characters +inf.
  * Log-corrected behaviour is declared only for profiles carrying
    log-power atoms, by comparing straight-line and log-augmented fits of
    log2 Phi over a long baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .logscalar import LogScalar, ZERO
from .profiles import RadialProfile

_LN2 = math.log(2.0)

__all__ = [
    "RhoGrid",
    "DecayIndicatorReport",
    "DecayCharacterReport",
    "IndicatorError",
    "phi",
    "decay_indicator",
    "decay_character",
    "auto_rho_grid",
    "SLOPE_TOL",
    "OSC_TOL",
    "R_TOL",
]

SLOPE_TOL = 0.05      # log2 Phi per octave
OSC_TOL = 1.2         # limsup/liminf ratio below which a flat tail is a limit
R_TOL = 0.1           # |r_plus - r_minus| gate for the decay character
TAIL_BUCKETS = 8      # octave buckets per estimation window
_LADDER_GUARD_BUCKETS = 6  # deepest witness buckets dropped as truncation
_LADDER_MIN_SCALES = 10    # distinct octaves of structural edges
_ZERO_TAIL_MARGIN = 16.0   # massless octaves above the grid bottom
_BISECT_STEPS = 48
_BISECT_WIDTH = 0.004


class IndicatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class RhoGrid:
    log2_rho_max: float
    log2_rho_min: float
    samples_per_octave: int = 8

    def __post_init__(self):
        if not self.log2_rho_min < self.log2_rho_max:
            raise ValueError("log2_rho_min must be below log2_rho_max")
        if self.samples_per_octave < 1:
            raise ValueError("samples_per_octave must be positive")

    def points(self) -> np.ndarray:
        n = int(math.ceil((self.log2_rho_max - self.log2_rho_min)
                          * self.samples_per_octave))
        return self.log2_rho_max - np.arange(n + 1) / self.samples_per_octave


@dataclass(frozen=True)
class DecayIndicatorReport:
    r: float
    liminf_est: LogScalar
    limsup_est: LogScalar
    classification: str   # Zero | FinitePositive | Infinite | Oscillating | LogCorrected
    tail_slope: float
    diagnostics: str
    ratio_finite: bool = True

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "liminf_log2": _enc(self.liminf_est.log2()),
            "limsup_log2": _enc(self.limsup_est.log2()),
            "classification": self.classification,
            "tail_slope": self.tail_slope,
            "ratio_finite": self.ratio_finite,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class DecayCharacterReport:
    dimension: int
    r_plus: float          # may be +inf; the value -n/2 encodes that endpoint
    r_minus: float
    r_star: float | None
    sigma: float | None
    log_correction: bool
    diagnostics: str = ""

    def to_json(self) -> dict:
        n2 = self.dimension / 2.0
        return {
            "n": self.dimension,
            "r_plus": _enc_r(self.r_plus, n2),
            "r_minus": _enc_r(self.r_minus, n2),
            "r_star": None if self.r_star is None else _enc_r(self.r_star, n2),
            "sigma": None if self.sigma is None else _enc(self.sigma),
            "log_correction": self.log_correction,
            "diagnostics": self.diagnostics,
        }


def _enc(x: float):
    if x == math.inf:
        return "+inf"
    if x == -math.inf:
        return "-inf"
    return x


def _enc_r(x: float, n2: float):
    if x == math.inf:
        return "+inf"
    if x == -n2:
        return "-n/2"
    return x


def phi(profile: RadialProfile, r: float, log2_rho: float) -> LogScalar:
    """Phi_r(rho) = rho^(-2r-n) * mass of the spectral ball of radius rho."""
    m = profile.spectral_mass(log2_rho)
    if m.is_zero:
        return ZERO
    return m.mul_pow2(-(2.0 * r + profile.dimension) * log2_rho)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


class _PhiSampler:
    """Mass samples over grid + structural edges, reusable across probe r."""

    def __init__(self, profile: RadialProfile, grid: RhoGrid):
        self.profile = profile
        self.grid = grid
        self.n = profile.dimension
        pts = grid.points()
        entries: list[tuple[float, LogScalar, str]] = [
            (float(u), profile.spectral_mass(float(u)), "") for u in pts]
        wit_keys = set()
        for w in profile.edge_witnesses():
            if w.log2_rho <= grid.log2_rho_max:
                entries.append((w.log2_rho, w.mass, w.kind))
                wit_keys.add(math.floor(w.log2_rho))
        entries.sort(key=lambda e: -e[0])  # shallow -> deep
        self.log2_rho = np.array([e[0] for e in entries])
        self.mass = [e[1] for e in entries]
        self.log2_mass = np.array([m.log2() for m in self.mass])
        self.kind = np.array([e[2] for e in entries])
        self.ladder = len(wit_keys) >= _LADDER_MIN_SCALES
        finite = np.isfinite(self.log2_mass)
        self.bottom_fin = (float(self.log2_rho[finite].min())
                           if finite.any() else None)

    def all_zero(self) -> bool:
        return self.bottom_fin is None

    def zero_deep_tail(self) -> bool:
        """True when no spectral mass reaches the deep end of the grid and
        the profile is not a truncated ladder: every indicator limit is 0."""
        if self.bottom_fin is None:
            return True
        if self.ladder:
            return False
        return self.bottom_fin >= self.grid.log2_rho_min + _ZERO_TAIL_MARGIN

    def tail_indices(self, windows: int) -> list[np.ndarray]:
        """Deepest `windows` blocks of TAIL_BUCKETS nonempty octave buckets.

        Zero-mass samples sit at or below the profile's truncation radius
        and are dropped.  For ladders the windows are anchored on the
        buckets that contain structural witnesses, and the deepest few of
        those go too: the last shells of a truncated ladder see a visibly
        shortened tail below them.
        """
        finite = np.isfinite(self.log2_mass)
        keys = np.floor(self.log2_rho).astype(np.int64)
        if self.ladder:
            wkeys = np.sort(np.unique(
                keys[finite & (self.kind != "")]))  # ascending = deepest
            wkeys = wkeys[_LADDER_GUARD_BUCKETS:]
            out: list[np.ndarray] = []
            for w in range(windows):
                sel = wkeys[w * TAIL_BUCKETS:(w + 1) * TAIL_BUCKETS]
                if sel.size == 0:
                    break
                mask = finite & (keys >= sel.min()) & (keys <= sel.max())
                out.append(np.nonzero(mask)[0])
            return out
        idx = np.nonzero(finite)[0]
        if idx.size == 0:
            return []
        uniq = np.sort(np.unique(keys[idx]))
        out = []
        for w in range(windows):
            sel = uniq[w * TAIL_BUCKETS:(w + 1) * TAIL_BUCKETS]
            if sel.size == 0:
                break
            out.append(idx[np.isin(keys[idx], sel)])
        return out

    def phi_log2(self, r: float, indices: np.ndarray) -> np.ndarray:
        beta = 2.0 * r + self.n
        return self.log2_mass[indices] - beta * self.log2_rho[indices]

    def phi_exact(self, r: float, i: int) -> LogScalar:
        beta = 2.0 * r + self.n
        return self.mass[i].mul_pow2(-beta * self.log2_rho[i])


@dataclass
class _Envelope:
    x_lo: list[float]
    y_lo: list[float]
    x_hi: list[float]
    y_hi: list[float]
    i_min: int            # index of the tail-wide minimum
    i_max: int


def _envelope(s: _PhiSampler, r: float, indices: np.ndarray) -> _Envelope:
    """Lower/upper envelope point series of log2 Phi_r on the given window.

    When the window holds enough structural edges the envelopes are read off
    the edge witnesses directly (the exact extrema); otherwise they fall
    back to per-octave bucket extremes of all samples.
    """
    vals = s.phi_log2(r, indices)
    rho = s.log2_rho[indices]
    kinds = s.kind[indices]
    i_min = int(indices[int(np.argmin(vals))])
    i_max = int(indices[int(np.argmax(vals))])

    lo_mask = kinds == "lower"
    hi_mask = kinds == "upper"
    if lo_mask.sum() >= 4 and hi_mask.sum() >= 4:
        return _Envelope(list(rho[lo_mask]), list(vals[lo_mask]),
                         list(rho[hi_mask]), list(vals[hi_mask]),
                         i_min, i_max)

    keys = np.floor(rho).astype(np.int64)
    x_lo, y_lo, x_hi, y_hi = [], [], [], []
    for k in np.unique(keys):
        mask = keys == k
        sub = vals[mask]
        j_hi = int(np.argmax(sub))
        j_lo = int(np.argmin(sub))
        x_lo.append(float(rho[mask][j_lo]))
        y_lo.append(float(sub[j_lo]))
        x_hi.append(float(rho[mask][j_hi]))
        y_hi.append(float(sub[j_hi]))
    return _Envelope(x_lo, y_lo, x_hi, y_hi, i_min, i_max)


def _fit_slope(x: list[float], y: list[float]) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(np.array(x), np.array(y), 1)[0])


def _max_origin_log_power(profile: RadialProfile) -> int:
    p = 0
    for a in profile.atoms:
        if a.log_power > 0 and a.log2_lo is None:
            p = max(p, a.log_power)
    return p


def _log_correction_fit(s: _PhiSampler, r: float, two_p: int):
    """Compare straight-line vs log-augmented fits of log2 Phi_r over a long
    deep baseline.  Returns (is_log_corrected, diagnostics)."""
    finite = np.isfinite(s.log2_mass)
    deep = finite & (s.log2_rho <= -16.0)
    idx = np.nonzero(deep)[0]
    if idx.size == 0:
        return False, "log fit skipped: no deep samples"
    # one representative (maximum) per octave bucket
    vals = s.phi_log2(r, idx)
    rho = s.log2_rho[idx]
    keys = np.floor(rho).astype(np.int64)
    xs, ys = [], []
    for k in np.unique(keys):
        mask = keys == k
        j = int(np.argmax(vals[mask]))
        xs.append(float(rho[mask][j]))
        ys.append(float(vals[mask][j]))
    if len(xs) < 12:
        return False, "log fit skipped: baseline under 12 octaves"
    x = np.array(xs)
    y = np.array(ys)
    basis_a = np.column_stack([x, np.ones_like(x)])
    basis_b = np.column_stack([x, np.log2(-x), np.ones_like(x)])
    res_a = _lstsq_rms(basis_a, y)
    coef_b, res_b = _lstsq_rms(basis_b, y, return_coef=True)
    ok = res_a >= max(5.0 * res_b, 0.02) and \
        abs(coef_b[1] - two_p) <= max(1.0, two_p / 2.0)
    return ok, (f"log fit: line rms {res_a:.4f}, log-augmented rms "
                f"{res_b:.4f}, log coefficient {coef_b[1]:.3f}")


def _lstsq_rms(basis: np.ndarray, y: np.ndarray, return_coef: bool = False):
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    rms = float(np.sqrt(np.mean((y - basis @ coef) ** 2)))
    if return_coef:
        return coef, rms
    return rms


# ---------------------------------------------------------------------------
# the indicator report
# ---------------------------------------------------------------------------


def decay_indicator(profile: RadialProfile, r: float, grid: RhoGrid,
                    sampler: _PhiSampler | None = None) -> DecayIndicatorReport:
    """Windowed liminf/limsup estimates of Phi_r and their classification."""
    n = profile.dimension
    if 2.0 * r + n <= 0:
        return DecayIndicatorReport(r, ZERO, ZERO, "Zero", 0.0,
                                    "r <= -n/2: indicator is identically zero")
    s = sampler if sampler is not None else _PhiSampler(profile, grid)
    if s.zero_deep_tail():
        return DecayIndicatorReport(r, ZERO, ZERO, "Zero", 0.0,
                                    "no spectral mass in the deep tail")
    windows = s.tail_indices(2)
    if not windows:
        raise IndicatorError("indicator not resolved: no usable tail samples")
    env = _envelope(s, r, windows[0])
    slope_up = _fit_slope(env.x_hi, env.y_hi)
    slope_lo = _fit_slope(env.x_lo, env.y_lo)
    limsup = s.phi_exact(r, env.i_max)
    liminf = s.phi_exact(r, env.i_min)
    ratio_log2 = max(env.y_hi) - min(env.y_lo)

    creep = math.nan
    prev_ratio_log2 = math.nan
    if len(windows) > 1:
        env1 = _envelope(s, r, windows[1])
        creep = max(env.y_hi) - max(env1.y_hi)
        prev_ratio_log2 = max(env1.y_hi) - min(env1.y_lo)

    diag = (f"tail slopes upper={slope_up:.4f} lower={slope_lo:.4f}, "
            f"window ratio log2={ratio_log2:.3f}, "
            f"limsup creep log2={creep:.4f}")

    if slope_up > SLOPE_TOL:
        return DecayIndicatorReport(r, liminf, limsup, "Zero", slope_up, diag)
    if slope_lo < -SLOPE_TOL:
        return DecayIndicatorReport(r, liminf, limsup, "Infinite", slope_lo,
                                    diag)

    two_p = 2 * _max_origin_log_power(profile)
    if two_p > 0:
        is_log, log_diag = _log_correction_fit(s, r, two_p)
        diag += "; " + log_diag
        if is_log:
            return DecayIndicatorReport(r, liminf, limsup, "LogCorrected",
                                        slope_up, diag, False)

    if slope_lo > SLOPE_TOL:
        # upper envelope flat, lower envelope still sinking: the two limits
        # separate without bound along the tail
        return DecayIndicatorReport(r, liminf, limsup, "Oscillating",
                                    slope_up, diag + "; ratio divergent",
                                    False)

    ratio = math.inf if ratio_log2 > 60.0 else 2.0 ** ratio_log2
    stable = True
    if not math.isnan(creep):
        drift = min(abs(ratio_log2 - prev_ratio_log2), 60.0)
        stable = (2.0 ** drift - 1.0) < 0.2 and \
            abs(2.0 ** min(abs(creep), 60.0) - 1.0) < 0.2
    if not stable:
        raise IndicatorError("indicator not resolved: " + diag)
    if ratio <= OSC_TOL:
        return DecayIndicatorReport(r, liminf, limsup, "FinitePositive",
                                    slope_up, diag)
    return DecayIndicatorReport(r, liminf, limsup, "Oscillating", slope_up,
                                diag, True)


# ---------------------------------------------------------------------------
# decay characters by bisection
# ---------------------------------------------------------------------------


def auto_rho_grid(profile: RadialProfile) -> RhoGrid:
    """Grid deep enough for the profile's structure.

    Lacunary edges beyond float-grid reach are handled by the structural
    witnesses, so the grid itself never needs to go below 2**-120; profiles
    with log-corrected behaviour need extra depth because their indicator
    drifts like 1/log(rho).
    """
    edges = [a.log2_hi for a in profile.atoms if a.log2_hi is not None]
    edges += [a.log2_lo for a in profile.atoms if a.log2_lo is not None]
    lowest = min(edges) if edges else -10.0
    top = max(edges) if edges else 2.0
    if lowest < -200.0:
        lo = -120.0
    elif _max_origin_log_power(profile) > 0:
        lo = min(-180.0, lowest - 12.0)
    else:
        lo = min(lowest - 20.0, -40.0)
    return RhoGrid(max(top, 2.0) + 1.0, lo)


def _slope_probe(sampler: _PhiSampler, which: str, tail: np.ndarray):
    def probe(r: float) -> float:
        env = _envelope(sampler, r, tail)
        if which == "upper":
            return _fit_slope(env.x_hi, env.y_hi)
        return _fit_slope(env.x_lo, env.y_lo)
    return probe


def _bisect_root(fn, lo: float, hi: float) -> float | None:
    """Root of a decreasing slope function; None when positive slope (the
    Zero phase) is never reached, +inf when the Infinite phase is never
    reached inside the bracket."""
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo <= 0.0:
        return None if f_hi >= 0.0 else lo
    if f_hi >= 0.0:
        return math.inf
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < _BISECT_WIDTH:
            break
    return 0.5 * (lo + hi)


def decay_character(profile: RadialProfile,
                    r_search: tuple[float, float] | None = None,
                    grid: RhoGrid | None = None) -> DecayCharacterReport:
    """Upper/lower decay characters, the decay character when it exists, and
    the induced Besov-normalization exponent sigma = r* + n/2."""
    n = profile.dimension
    if grid is None:
        grid = auto_rho_grid(profile)
    if r_search is None:
        r_search = (-n / 2.0 + 0.02, 8.0)
    lo, hi = r_search
    if not (-n / 2.0 < lo < hi):
        raise ValueError("r_search must lie inside (-n/2, inf)")

    sampler = _PhiSampler(profile, grid)
    if sampler.zero_deep_tail():
        return DecayCharacterReport(n, math.inf, math.inf, math.inf, math.inf,
                                    False,
                                    "no spectral mass in the deep tail")
    tails = sampler.tail_indices(1)
    if not tails:
        raise IndicatorError("no usable tail samples; deepen the grid")
    tail = tails[0]

    r_plus = _bisect_root(_slope_probe(sampler, "upper", tail), lo, hi)
    r_minus = _bisect_root(_slope_probe(sampler, "lower", tail), lo, hi)
    diag = ""
    if r_plus is None:
        r_plus = -n / 2.0
    if r_minus is None:
        r_minus = -n / 2.0
    if r_plus == math.inf or r_minus == math.inf:
        if r_plus != r_minus:
            raise IndicatorError(
                "enlarge r_search: envelope slope does not change sign "
                f"(r_plus={r_plus}, r_minus={r_minus})")
        return DecayCharacterReport(n, math.inf, math.inf, math.inf, math.inf,
                                    False, "super-algebraic concentration")

    if r_minus < r_plus:
        if r_plus - r_minus <= R_TOL:
            mid = 0.5 * (r_plus + r_minus)
            diag = (f"ordering clamp: raw r_plus={r_plus:.4f} "
                    f"r_minus={r_minus:.4f}")
            r_plus = r_minus = mid
        else:
            raise IndicatorError(
                f"ordering violated beyond tolerance: r_plus={r_plus:.4f}, "
                f"r_minus={r_minus:.4f}")

    r_star: float | None = None
    sigma: float | None = None
    log_corr = False
    if abs(r_plus - r_minus) <= R_TOL:
        r_hat = 0.5 * (r_plus + r_minus)
        report = decay_indicator(profile, r_hat, grid, sampler)
        log_corr = report.classification == "LogCorrected"
        if report.classification == "FinitePositive" or (
                report.classification == "Oscillating" and report.ratio_finite):
            r_star = r_hat
            sigma = r_hat + n / 2.0
        diag = (diag + "; " if diag else "") + \
            f"indicator at midpoint: {report.classification}"
    return DecayCharacterReport(n, r_plus, r_minus, r_star, sigma, log_corr,
                                diag)
