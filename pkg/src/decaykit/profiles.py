"""Radial Fourier-magnitude profiles and their spectral mass calculus.

An L2 datum enters the toolkit as per-component descriptions of |fhat| as a
function of the radius lambda = |xi|:

  * power segments  h * lambda^r * ln(1/lambda)^p  on a radius interval,
  * sampled radial curves interpolated log-log linearly between nodes.

Everything downstream (decay indicators, dyadic block norms, semigroup
norms) reduces to integrals of g(lambda)^2 lambda^(n-1) against smooth
weights, so profiles are compiled once into a flat list of power-law
"atoms" with an exact cumulative-mass ledger.  Radii and amplitudes live in
the log2 domain throughout; interval widths are carried as separate
LogScalars because a lacunary shell can be narrower than the float
resolution of its own endpoints.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .logscalar import LogScalar, ZERO, ONE, one_minus_exp2_neg, pairwise_sum
from .special import gamma_lower_diff, gamma_lower_log, _log2_upper_q, _gamma_ls

_LN2 = math.log(2.0)
_LOG2_LN2 = math.log2(_LN2)

__all__ = [
    "ProfileError",
    "PowerSegment",
    "SampledRadial",
    "Component",
    "RadialProfile",
    "make_radial_profile",
    "l2_norm",
    "omega_n",
    "ingest_radial_csv",
    "export_radial_csv",
    "ingest_cartesian_grid",
    "profile_to_json",
    "profile_from_json",
]


class ProfileError(ValueError):
    pass


def omega_n(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class PowerSegment:
    """|fhat| = h lambda^r ln(1/lambda)^p on radii 2**log2_a .. 2**log2_b.

    log2_a None means the segment starts at radius 0.  log2_h None means
    zero amplitude.  When the interval is narrower than float resolution of
    its endpoints (log2_a == log2_b), the true width must be supplied as
    log2_gap = log2(log2_b - log2_a).
    """
    log2_a: float | None
    log2_b: float
    log2_h: float | None
    r: float
    log_power: int = 0
    log2_gap: float | None = None

    def gap(self) -> LogScalar | None:
        """Width log2_b - log2_a as a LogScalar; None for a zero lower radius."""
        if self.log2_a is None:
            return None
        if self.log2_gap is not None:
            return LogScalar.exp2(self.log2_gap)
        return LogScalar.from_float(self.log2_b - self.log2_a)

    def validate(self) -> None:
        if self.log2_a is not None:
            if self.log2_a > self.log2_b:
                raise ProfileError("segment has log2_a > log2_b")
            if self.log2_a == self.log2_b and self.log2_gap is None:
                raise ProfileError(
                    "segment endpoints collide in float; supply log2_gap")
        if self.log_power < 0 or self.log_power != int(self.log_power):
            raise ProfileError("log_power must be a nonnegative integer")
        if self.log_power >= 1 and self.log2_b > 0:
            raise ProfileError(
                "log-corrected segments require an upper radius <= 1")


@dataclass(frozen=True)
class SampledRadial:
    """Sampled |fhat| with log-log linear interpolation between nodes.

    ``extend`` controls behaviour outside the node range: "zero" truncates
    (appropriate for ingested data whose low frequencies are simply absent),
    "slope" continues the boundary log-log slope (appropriate for
    constructed data known to follow a power law outside the window).
    """
    log2_nodes: tuple[float, ...]
    log2_mags: tuple[float | None, ...]
    extend: str = "zero"

    def validate(self) -> None:
        if len(self.log2_nodes) != len(self.log2_mags):
            raise ProfileError("nodes and magnitudes must have equal length")
        if len(self.log2_nodes) < 2:
            raise ProfileError("sampled profiles need at least 2 nodes")
        for a, b in zip(self.log2_nodes, self.log2_nodes[1:]):
            if not b > a:
                raise ProfileError("sampled nodes must be strictly increasing")
        if self.extend not in ("zero", "slope"):
            raise ProfileError("extend must be 'zero' or 'slope'")


@dataclass(frozen=True)
class Component:
    segments: tuple[PowerSegment, ...] = ()
    sampled: SampledRadial | None = None


# ---------------------------------------------------------------------------
# atoms: the compiled integral representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """g^2 = 2**log2_c2 * lambda^two_r * ln(1/lambda)^(2p) on one interval."""
    component: int
    log2_lo: float | None      # None -> radius 0
    log2_hi: float | None      # None -> radius infinity
    gap: LogScalar | None      # log2_hi - log2_lo; None when an end is open
    log2_c2: float | None      # None -> zero amplitude
    two_r: float
    log_power: int
    structural: bool           # segment edges act as indicator witnesses

    def mass_exponent(self, n: int) -> float:
        return self.two_r + n


def _power_base_full(m: float, log2_lo: float | None, log2_hi: float | None,
                     gap: LogScalar | None, what: str) -> LogScalar:
    """int lambda^(m-1) dlambda over the atom interval, without amplitude."""
    if log2_lo is None:
        if m <= 0:
            raise ProfileError(f"not square integrable: {what} diverges at 0 "
                               f"(2r + n = {m:g} <= 0)")
        return LogScalar.exp2(m * log2_hi).mul_pow2(-math.log2(m))
    if log2_hi is None:
        if m >= 0:
            raise ProfileError(f"not square integrable: {what} diverges at "
                               f"infinity (2r + n = {m:g} >= 0)")
        return LogScalar.exp2(m * log2_lo).mul_pow2(-math.log2(-m))
    if gap is None or gap.is_zero:
        return ZERO
    if m > 0:
        e = one_minus_exp2_neg(gap.mul_pow2(math.log2(m)))
        return LogScalar.exp2(m * log2_hi) * e.mul_pow2(-math.log2(m))
    if m < 0:
        e = one_minus_exp2_neg(gap.mul_pow2(math.log2(-m)))
        return LogScalar.exp2(m * log2_lo) * e.mul_pow2(-math.log2(-m))
    return gap.mul_pow2(_LOG2_LN2)  # int dlambda/lambda = ln(b/a)


def _exp_poly_int(two_p: int, q: float, w_lo: float, w_hi: float) -> LogScalar:
    """int_{w_lo}^{w_hi} w^two_p e^(q w) dw for q > 0, by parts (exact)."""
    def big_f(w: float) -> LogScalar:
        terms = []
        coeff = 1.0
        for i in range(two_p + 1):
            if i > 0:
                coeff *= (two_p - i + 1)
            mag = (w / _LN2) + (two_p - i) * (math.log2(w) if w > 0 else -math.inf) \
                + math.log2(coeff) - (i + 1) * math.log2(q)
            terms.append(LogScalar(1 if i % 2 == 0 else -1, mag))
        return pairwise_sum(terms)

    return big_f(w_hi) - big_f(w_lo)


def _log_base_full(m: float, two_p: int, log2_lo: float | None,
                   log2_hi: float, what: str) -> LogScalar:
    """int lambda^(m-1) ln(1/lambda)^two_p dlambda over [lo, hi], hi <= 1."""
    v_hi = -log2_hi * _LN2          # v = ln(1/lambda) at the upper radius
    v_lo = None if log2_lo is None else -log2_lo * _LN2
    if m > 0:
        s = two_p + 1
        if v_lo is None:
            if v_hi <= 0.0:
                return _gamma_ls(s).mul_pow2(-s * math.log2(m))
            q_log2 = _log2_upper_q(s, m * v_hi) if m * v_hi >= s + 1 else \
                math.log2(1.0 - _reg_p(s, m * v_hi))
            return _gamma_ls(s).mul_pow2(q_log2 - s * math.log2(m))
        if v_hi <= 0.0:
            diff = gamma_lower_log(s, math.log2(m * v_lo))
        else:
            gap = LogScalar.from_float(math.log2(v_lo / v_hi))
            diff = gamma_lower_diff(s, math.log2(m * v_hi), gap)
        return diff.mul_pow2(-s * math.log2(m))
    if m == 0.0:
        if v_lo is None:
            raise ProfileError(f"not square integrable: {what} (2r + n = 0)")
        k = two_p + 1
        return (LogScalar.from_float(v_lo) ** k
                - LogScalar.from_float(max(v_hi, 0.0)) ** k).mul_pow2(-math.log2(k))
    if v_lo is None:
        raise ProfileError(f"not square integrable: {what} (2r + n < 0)")
    return _exp_poly_int(two_p, -m, max(v_hi, 0.0), v_lo)


def _reg_p(s: float, x: float) -> float:
    from .special import lower_incomplete_gamma_reg
    return lower_incomplete_gamma_reg(s, x)


def _atom_mass(atom: Atom, n: int, what: str = "segment") -> LogScalar:
    """int g^2 lambda^(n-1) dlambda over the full atom interval."""
    if atom.log2_c2 is None:
        return ZERO
    m = atom.mass_exponent(n)
    if atom.log_power == 0:
        base = _power_base_full(m, atom.log2_lo, atom.log2_hi, atom.gap, what)
    else:
        if atom.log2_hi is None:
            raise ProfileError(f"not square integrable: {what}")
        base = _log_base_full(m, 2 * atom.log_power, atom.log2_lo,
                              atom.log2_hi, what)
    return base.mul_pow2(atom.log2_c2)


def _atom_mass_below(atom: Atom, n: int, log2_rho: float) -> LogScalar:
    """Mass of the atom clipped to radii <= 2**log2_rho (rho interior)."""
    if atom.log2_c2 is None:
        return ZERO
    m = atom.mass_exponent(n)
    lo = atom.log2_lo
    if atom.log_power == 0:
        gap = None if lo is None else LogScalar.from_float(log2_rho - lo)
        base = _power_base_full(m, lo, log2_rho, gap, "clip")
    else:
        base = _log_base_full(m, 2 * atom.log_power, lo,
                              min(log2_rho, atom.log2_hi), "clip")
    return base.mul_pow2(atom.log2_c2)


@dataclass(frozen=True)
class Witness:
    """Phi evaluation point pinned to a structural edge.

    The cumulative mass is attached explicitly because at lacunary scales
    the two edges of a shell collide in float and cannot be separated by
    comparing radii.
    """
    log2_rho: float
    mass: LogScalar          # includes the omega_n factor
    kind: str                # "lower" edge (shell excluded) or "upper"


class _MassLedger:
    """Sorted atoms with exact prefix masses (times omega_n)."""

    def __init__(self, profile: "RadialProfile"):
        self.n = profile.dimension
        self.omega = omega_n(profile.dimension)
        atoms = sorted(profile.atoms, key=lambda a: (
            math.inf if a.log2_hi is None else a.log2_hi,
            -math.inf if a.log2_lo is None else a.log2_lo))
        self.atoms = atoms
        masses = [_atom_mass(a, self.n) for a in atoms]
        log2_w = math.log2(self.omega)
        self.masses = [m_.mul_pow2(log2_w) for m_ in masses]
        prefix: list[LogScalar] = []
        acc = ZERO
        for m_ in self.masses:
            acc = acc + m_
            prefix.append(acc)
        self.prefix = prefix                      # prefix[i] = mass of atoms[0..i]
        self.total = acc
        self.hi = np.array([math.inf if a.log2_hi is None else a.log2_hi
                            for a in atoms])
        self.lo = np.array([-math.inf if a.log2_lo is None else a.log2_lo
                            for a in atoms])
        self.log2_w = log2_w

    def mass_below(self, log2_rho: float) -> LogScalar:
        """Spectral mass of the ball of radius 2**log2_rho."""
        k = int(np.searchsorted(self.hi, log2_rho, side="right"))
        total = self.prefix[k - 1] if k > 0 else ZERO
        for i in range(k, len(self.atoms)):
            if self.lo[i] >= log2_rho:
                continue
            total = total + _atom_mass_below(self.atoms[i], self.n,
                                             log2_rho).mul_pow2(self.log2_w)
        return total

    def _mass_at_excluding(self, log2_rho: float, skip: int) -> LogScalar:
        """Ball mass with one atom forced out, by direct summation.

        Needed for lower-edge witnesses: subtracting the atom's own mass
        from a prefix cancels to zero in the log domain whenever the deeper
        tail is exponentially smaller than the atom itself.
        """
        vals: list[LogScalar] = []
        for j, a in enumerate(self.atoms):
            if j == skip:
                continue
            if self.hi[j] <= log2_rho:
                vals.append(self.masses[j])
            elif self.lo[j] < log2_rho:
                vals.append(_atom_mass_below(a, self.n,
                                             log2_rho).mul_pow2(self.log2_w))
        return pairwise_sum(vals)

    def witnesses(self) -> list[Witness]:
        out: list[Witness] = []
        for i, a in enumerate(self.atoms):
            if not a.structural or a.log2_hi is None:
                continue
            out.append(Witness(a.log2_hi, self.prefix[i], "upper"))
            if a.log2_lo is not None:
                lower_mass = self._mass_at_excluding(a.log2_lo, i)
                out.append(Witness(a.log2_lo, lower_mass, "lower"))
        out.sort(key=lambda w: w.log2_rho)
        return out


# ---------------------------------------------------------------------------
# the profile proper
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    dimension: int
    components: tuple[Component, ...]
    label: str = ""

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        out: list[Atom] = []
        for ci, comp in enumerate(self.components):
            for seg in comp.segments:
                c2 = None if seg.log2_h is None else 2.0 * seg.log2_h
                out.append(Atom(ci, seg.log2_a, seg.log2_b, seg.gap(), c2,
                                2.0 * seg.r, seg.log_power, True))
            if comp.sampled is not None:
                out.extend(_compile_sampled(ci, comp.sampled))
        return tuple(out)

    @cached_property
    def ledger(self) -> _MassLedger:
        return _MassLedger(self)

    @cached_property
    def l2_squared(self) -> LogScalar:
        return self.ledger.total

    def spectral_mass(self, log2_rho: float) -> LogScalar:
        """int_{|xi| <= rho} |fhat|^2 for rho = 2**log2_rho."""
        return self.ledger.mass_below(log2_rho)

    def edge_witnesses(self) -> list[Witness]:
        return self.ledger.witnesses()

    def component_atoms(self, ci: int) -> list[Atom]:
        return [a for a in self.atoms if a.component == ci]

    @property
    def m_components(self) -> int:
        return len(self.components)

    def scaled(self, factor_log2: float, label: str | None = None) -> "RadialProfile":
        """Profile with every amplitude scaled by 2**factor_log2."""
        comps = []
        for comp in self.components:
            segs = tuple(PowerSegment(
                s.log2_a, s.log2_b,
                None if s.log2_h is None else s.log2_h + factor_log2,
                s.r, s.log_power, s.log2_gap) for s in comp.segments)
            samp = comp.sampled
            if samp is not None:
                mags = tuple(None if m_ is None else m_ + factor_log2
                             for m_ in samp.log2_mags)
                samp = SampledRadial(samp.log2_nodes, mags, samp.extend)
            comps.append(Component(segs, samp))
        return RadialProfile(self.dimension, tuple(comps),
                             label if label is not None else self.label)


def _compile_sampled(ci: int, s: SampledRadial) -> list[Atom]:
    atoms: list[Atom] = []
    nodes, mags = s.log2_nodes, s.log2_mags
    slopes: list[float | None] = []
    for i in range(len(nodes) - 1):
        w0, w1 = mags[i], mags[i + 1]
        du = nodes[i + 1] - nodes[i]
        if w0 is None or w1 is None:
            slopes.append(None)
            atoms.append(Atom(ci, nodes[i], nodes[i + 1],
                              LogScalar.from_float(du), None, 0.0, 0, False))
            continue
        slope = (w1 - w0) / du
        slopes.append(slope)
        c2 = 2.0 * (w0 - slope * nodes[i])
        atoms.append(Atom(ci, nodes[i], nodes[i + 1],
                          LogScalar.from_float(du), c2, 2.0 * slope, 0, False))
    if s.extend == "slope":
        s0 = slopes[0]
        if s0 is not None and mags[0] is not None:
            atoms.append(Atom(ci, None, nodes[0], None,
                              2.0 * (mags[0] - s0 * nodes[0]), 2.0 * s0, 0,
                              False))
        s1 = slopes[-1]
        if s1 is not None and mags[-1] is not None:
            atoms.append(Atom(ci, nodes[-1], None, None,
                              2.0 * (mags[-1] - s1 * nodes[-1]), 2.0 * s1, 0,
                              False))
    return atoms


def make_radial_profile(dimension: int, components, label: str = "") -> RadialProfile:
    """Validated profile; raises ProfileError on structural or L2 violations."""
    if dimension < 1 or dimension != int(dimension):
        raise ProfileError("dimension must be a positive integer")
    comps: list[Component] = []
    for comp in components:
        if isinstance(comp, Component):
            comps.append(comp)
        elif isinstance(comp, SampledRadial):
            comps.append(Component((), comp))
        else:
            comps.append(Component(tuple(comp), None))
    if not comps or all(not c.segments and c.sampled is None for c in comps):
        raise ProfileError("empty profile")
    for comp in comps:
        for seg in comp.segments:
            seg.validate()
        if comp.sampled is not None:
            comp.sampled.validate()
        _check_overlap(comp.segments)
    profile = RadialProfile(int(dimension), tuple(comps), label)
    profile.l2_squared  # runs the L2 finiteness check and caches it
    return profile


def _check_overlap(segments: tuple[PowerSegment, ...]) -> None:
    ordered = sorted(segments, key=lambda s: (s.log2_b, -math.inf
                                              if s.log2_a is None else s.log2_a))
    for s1, s2 in zip(ordered, ordered[1:]):
        lo2 = -math.inf if s2.log2_a is None else s2.log2_a
        if lo2 < s1.log2_b and not (s2.log2_a == s1.log2_b):
            raise ProfileError("segments overlap")


def l2_norm(profile: RadialProfile) -> LogScalar:
    """L2 norm of the datum, via Plancherel on the radial representation."""
    return profile.l2_squared.sqrt()


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def profile_to_json(profile: RadialProfile) -> dict:
    comps = []
    for comp in profile.components:
        entry: dict = {}
        if comp.segments:
            entry["segments"] = [_seg_dict(s) for s in comp.segments]
        if comp.sampled is not None:
            s = comp.sampled
            entry["sampled"] = {
                "log2_nodes": list(s.log2_nodes),
                "log2_mags": [None if m_ is None else m_ for m_ in s.log2_mags],
                "extend": s.extend,
            }
        comps.append(entry)
    return {"n": profile.dimension, "label": profile.label,
            "components": comps}


def _seg_dict(s: PowerSegment) -> dict:
    d = {"log2_a": s.log2_a, "log2_b": s.log2_b, "log2_h": s.log2_h,
         "r": s.r, "log_power": s.log_power}
    if s.log2_gap is not None:
        d["log2_gap"] = s.log2_gap
    return d


def profile_from_json(doc: dict) -> RadialProfile:
    try:
        n = int(doc["n"])
        comps = []
        for entry in doc["components"]:
            segs = tuple(PowerSegment(
                sd.get("log2_a"), float(sd["log2_b"]),
                None if sd.get("log2_h") is None else float(sd["log2_h"]),
                float(sd["r"]), int(sd.get("log_power", 0)),
                sd.get("log2_gap"))
                for sd in entry.get("segments", []))
            samp = None
            if "sampled" in entry:
                sj = entry["sampled"]
                samp = SampledRadial(
                    tuple(float(x) for x in sj["log2_nodes"]),
                    tuple(None if m_ is None else float(m_)
                          for m_ in sj["log2_mags"]),
                    sj.get("extend", "zero"))
            comps.append(Component(segs, samp))
    except (KeyError, TypeError) as exc:
        raise ProfileError(f"malformed profile document: {exc}") from exc
    return make_radial_profile(n, comps, str(doc.get("label", "")))


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def ingest_radial_csv(stream, dimension: int, label: str = "") -> RadialProfile:
    """Profile from CSV with header ``log2_lambda,magnitude``.

    Rows must be sorted by log2_lambda; magnitudes are linear (not logs) and
    must be nonnegative.  The data range is the support: no extrapolation
    below the first or above the last node.
    """
    if isinstance(stream, (str, bytes)):
        stream = io.StringIO(stream if isinstance(stream, str)
                             else stream.decode())
    header = stream.readline().strip()
    if header != "log2_lambda,magnitude":
        raise ProfileError("expected header 'log2_lambda,magnitude', got "
                           f"{header!r}")
    nodes: list[float] = []
    mags: list[float | None] = []
    for lineno, line in enumerate(stream, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ProfileError(f"row {lineno}: expected 2 fields")
        try:
            u, mag = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ProfileError(f"row {lineno}: {exc}") from exc
        if not math.isfinite(u) or not math.isfinite(mag):
            raise ProfileError(f"row {lineno}: non-finite value")
        if mag < 0:
            raise ProfileError(f"row {lineno}: negative magnitude")
        if nodes and u <= nodes[-1]:
            raise ProfileError(f"row {lineno}: log2_lambda not increasing")
        nodes.append(u)
        mags.append(None if mag == 0.0 else math.log2(mag))
    if len(nodes) < 2:
        raise ProfileError("fewer than 2 rows")
    sampled = SampledRadial(tuple(nodes), tuple(mags), extend="zero")
    return make_radial_profile(dimension, [sampled], label)


def export_radial_csv(profile: RadialProfile, stream) -> None:
    """Inverse of ingest_radial_csv for single-component sampled profiles."""
    if profile.m_components != 1 or profile.components[0].sampled is None \
            or profile.components[0].segments:
        raise ProfileError("only single sampled components can be exported")
    s = profile.components[0].sampled
    stream.write("log2_lambda,magnitude\n")
    for u, m_ in zip(s.log2_nodes, s.log2_mags):
        mag = 0.0 if m_ is None else LogScalar.exp2(m_).to_float()
        stream.write(f"{u!r},{mag!r}\n")


_SHELLS_PER_OCTAVE = 8


def ingest_cartesian_grid(header: dict, payload: bytes,
                          label: str = "") -> RadialProfile:
    """Shell-binned profile from gridded |fhat| samples.

    ``header`` declares {"n": 1|2|3, "shape": [...], "dxi": [...]}; the
    payload is row-major little-endian float64.  Frequencies run over the
    centered lattice (i - N//2) * dxi per axis.  Shells are geometric with 8
    per octave; each shell's value is the rms magnitude over its lattice
    points and its node sits at the rms radius of those points.  The DC
    point is dropped: frequencies below the grid fundamental are absent, so
    the profile truncates to zero there and low-frequency limits taken from
    grid data are untrustworthy.
    """
    try:
        n = int(header["n"])
        shape = [int(x) for x in header["shape"]]
        dxi = [float(x) for x in header["dxi"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfileError(f"malformed grid header: {exc}") from exc
    if n not in (1, 2, 3) or len(shape) != n or len(dxi) != n:
        raise ProfileError("grid header must declare n in {1,2,3} with "
                           "matching shape and dxi")
    count = int(np.prod(shape))
    if len(payload) != 8 * count:
        raise ProfileError(f"payload holds {len(payload) // 8} samples, "
                           f"header declares {count}")
    data = np.frombuffer(payload, dtype="<f8").reshape(shape)
    if np.isnan(data).any():
        raise ProfileError("NaN in payload")

    axes = [(np.arange(sz) - sz // 2) * step for sz, step in zip(shape, dxi)]
    grids = np.meshgrid(*axes, indexing="ij")
    radius2 = np.zeros(shape)
    for g in grids:
        radius2 = radius2 + g * g
    radius2 = radius2.ravel()
    mags = np.abs(data).ravel()
    keep = radius2 > 0
    radius2, mags = radius2[keep], mags[keep]
    log2_r = 0.5 * np.log2(radius2)

    step = 1.0 / _SHELLS_PER_OCTAVE
    bins = np.floor(log2_r / step).astype(np.int64)
    nodes: list[float] = []
    values: list[float | None] = []
    for b in np.unique(bins):
        mask = bins == b
        rms_mag = math.sqrt(float(np.mean(mags[mask] ** 2)))
        rms_rad = 0.5 * math.log2(float(np.mean(radius2[mask])))
        nodes.append(rms_rad)
        values.append(None if rms_mag == 0.0 else math.log2(rms_mag))
    if len(nodes) < 2:
        raise ProfileError("grid too small: fewer than 2 shells")
    sampled = SampledRadial(tuple(nodes), tuple(values), extend="zero")
    return make_radial_profile(n, [sampled],
                               label or "cartesian-grid (shell rms; "
                               "low frequencies absent)")
