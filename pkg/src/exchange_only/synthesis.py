"""Analytic compilation of CPhase pulse sequences for three-spin qubits.

The construction nests three building blocks:

* ``U3(x)`` - three pulses (t, tbar, t) on three consecutive sites, diagonal
  in ((p q)_a r)_c, with phase difference x between c = 1/2 and c = 3/2 at
  a = 1;
* ``U4(x)`` - U3(s4) U2(s4) U3(x) U2(t4) U3(t4) (time order) on sites 1-4,
  a similarity transform of U3(x) that makes it diagonal in the b label;
* ``U5(x)`` - U4(t5) U3(s5) U4(x) U3(t5) U4(s5) on sites 1-5, which puts the
  phase exp(-i x) on ab = 11 for both g sectors.

Each U3 has two realisations (short: t < pi, long: t > pi) that differ
only by a phase on a = 0, so the choice per slot just moves the
single-qubit corrections, which are computed numerically from the composed
gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .geometry import N2_HAT, TWO_PI, Z_HAT, conjugation_angle, normalize_angle
from .pulses import Pulse, PulseSequence, compose, schedule_to_dict
from .verification import gate_report

N_SITES = 6
RESID_TOL = 1e-9

U3_RATIO = -2.0  # tan(t/2) tan(tbar/2) for the bare three-spin U3
U4T_RATIO = -3.0  # same relation for the U3 U2 U3 four-spin block

N2_COS = N2_HAT.dot(Z_HAT)  # -1/3
T4 = conjugation_angle(N2_COS, +1)  # 2pi/3
S4 = TWO_PI - T4
T5 = conjugation_angle(N2_COS, -1)  # arccos(1/4)
S5 = TWO_PI - T5

SHORT, LONG = "short", "long"

# Parameter of every U3 instance of the 39-pulse core, in time order.
SLOT_PARAMS = ("s4", "t5", "t4", "s5", "s4", "phi", "t4", "t5", "s4", "s5", "t4")
N_SLOTS = len(SLOT_PARAMS)


class UnachievableThetaError(ValueError):
    """Requested phase lies outside the range of a single U3 U2 U3 block."""


# -- U3 ------------------------------------------------------------------------


@dataclass(frozen=True)
class U3Solution:
    phi: float
    t: float
    tbar: float
    variant: str

    @property
    def ratio_residual(self) -> float:
        return abs(math.tan(self.t / 2) * math.tan(self.tbar / 2) - U3_RATIO)

    @property
    def phase_residual(self) -> float:
        d = normalize_angle(self.t + self.tbar - math.pi - self.phi)
        return min(d, TWO_PI - d)


def _check_phase(phi: float) -> float:
    phi = float(phi)
    if not 0.0 < phi < TWO_PI:
        raise ValueError(f"phase {phi!r} must lie strictly inside (0, 2pi)")
    return phi


def _short_roots(phi: float) -> tuple:
    # tan(t/2), tan(tbar/2) are the roots of x^2 + 3 cot(phi/2) x - 2 = 0
    c = math.cos(phi / 2) / math.sin(phi / 2)
    disc = math.sqrt(9 * c * c + 8)
    if c >= 0:
        y = (-3 * c - disc) / 2
        x = -2 / y
    else:
        x = (-3 * c + disc) / 2
        y = -2 / x
    return 2 * math.atan(x), 2 * math.atan(y) + TWO_PI


def _phase_of_t(t: float) -> float:
    return t + 2 * math.pi - 2 * math.atan(2 / math.tan(t / 2)) - math.pi


def _solve_u3_bisect(phi: float) -> tuple:
    """Fallback: root of the monotone phi(t) on (0, pi)."""
    eps = 1e-15
    t = brentq(lambda s: _phase_of_t(s) - phi, eps, math.pi - eps, xtol=1e-15, rtol=1e-15)
    tbar = phi + math.pi - t
    return t, tbar


def solve_u3(phi: float, variant: str = SHORT) -> U3Solution:
    """Pulse times (t, tbar) of U3(phi) for the short or long variant."""
    phi = _check_phase(phi)
    if variant not in (SHORT, LONG):
        raise ValueError(f"unknown variant {variant!r}")
    t, tbar = _short_roots(phi)
    sol = U3Solution(phi, t, tbar, SHORT)
    if sol.ratio_residual > RESID_TOL or sol.phase_residual > RESID_TOL:
        t, tbar = _solve_u3_bisect(phi)
    if variant == LONG:
        t, tbar = tbar, t
    return U3Solution(phi, t, tbar, variant)


def _check_chain(sites: Sequence[int]) -> None:
    for a, b in zip(sites, sites[1:]):
        if abs(a - b) != 1:
            raise ValueError(f"sites {tuple(sites)} are not consecutive chain sites")
    if len(set(sites)) != len(sites):
        raise ValueError(f"repeated site in {tuple(sites)}")


def u3_sequence(sol: U3Solution, sites=(1, 2, 3), n_sites: int = N_SITES) -> PulseSequence:
    """Three pulses for U3: (y, z) for t, (x, y) for tbar, (y, z) for t.

    (x, y) is the pair whose total spin label the operation conserves.
    """
    x, y, z = sites
    _check_chain(sites)
    outer = (y, z)
    return PulseSequence(
        n_sites, [Pulse(outer, sol.t), Pulse((x, y), sol.tbar), Pulse(outer, sol.t)]
    )


# -- U4 / U5 --------------------------------------------------------------------


def _u3_block(param: float, variant: str, sites, n_sites: int) -> PulseSequence:
    return u3_sequence(solve_u3(param, variant), sites, n_sites)


def u4_sequence(
    phi: float,
    variants: Sequence[str] = (LONG, SHORT, SHORT),
    sites=(1, 2, 3, 4),
    n_sites: int = N_SITES,
) -> PulseSequence:
    """11 pulses: U3(s4), U2(s4), U3(phi), U2(t4), U3(t4) in time order.

    ``variants`` picks short/long for the three U3 blocks in that order.
    The U3 blocks act on sites[:3] (labelled pair sites[:2]) and the U2
    pulses on sites[2:].
    """
    phi = _check_phase(phi)
    _check_chain(sites)
    if len(variants) != 3:
        raise ValueError("a U4 block needs three U3 variants")
    u3_sites, u2_pair = tuple(sites[:3]), tuple(sites[2:])
    seq = PulseSequence(n_sites)
    seq += _u3_block(S4, variants[0], u3_sites, n_sites)
    seq += PulseSequence(n_sites, [Pulse(u2_pair, S4)])
    seq += _u3_block(phi, variants[1], u3_sites, n_sites)
    seq += PulseSequence(n_sites, [Pulse(u2_pair, T4)])
    seq += _u3_block(T4, variants[2], u3_sites, n_sites)
    return seq


@dataclass(frozen=True)
class VariantProfile:
    """Short/long choice for each of the 11 U3 slots, in time order."""

    variants: tuple
    name: str = "custom"

    def __post_init__(self):
        if len(self.variants) != N_SLOTS:
            raise ValueError(f"profile needs {N_SLOTS} entries, got {len(self.variants)}")
        bad = [v for v in self.variants if v not in (SHORT, LONG)]
        if bad:
            raise ValueError(f"unknown variants {bad}")

    @classmethod
    def preset(cls, name: str) -> "VariantProfile":
        if name == "fig9a":
            # t-type slots short, s-type slots long: the outer blocks cancel
            return cls(tuple(LONG if p in ("s4", "s5") else SHORT for p in SLOT_PARAMS), name)
        if name == "fig9b":
            return cls((SHORT,) * N_SLOTS, name)
        raise ValueError(f"unknown profile {name!r}")

    @classmethod
    def parse(cls, text: str) -> "VariantProfile":
        """``fig9a``, ``fig9b`` or ``custom:<11 letters s/l>``."""
        if text.startswith("custom:"):
            letters = text.split(":", 1)[1].strip().lower()
            table = {"s": SHORT, "l": LONG}
            if any(ch not in table for ch in letters):
                raise ValueError(f"custom profile must use only 's' and 'l': {letters!r}")
            return cls(tuple(table[ch] for ch in letters), "custom:" + letters)
        return cls.preset(text)

    def code(self) -> str:
        return "".join(v[0] for v in self.variants)


def _standalone_u3(param: float, variant: str, n_sites: int) -> PulseSequence:
    # labelled pair (3, 4), third site 5
    return _u3_block(param, variant, (3, 4, 5), n_sites)


def u5_sequence(phi: float, profile: VariantProfile | str = "fig9a", n_sites: int = N_SITES):
    """39 pulses: U4(t5), U3(s5), U4(phi), U3(t5), U4(s5) in time order."""
    phi = _check_phase(phi)
    if isinstance(profile, str):
        profile = VariantProfile.parse(profile)
    v = profile.variants
    seq = u4_sequence(T5, v[0:3], n_sites=n_sites)
    seq += _standalone_u3(S5, v[3], n_sites)
    seq += u4_sequence(phi, v[4:7], n_sites=n_sites)
    seq += _standalone_u3(T5, v[7], n_sites)
    seq += u4_sequence(S5, v[8:11], n_sites=n_sites)
    return seq


# -- corrections -----------------------------------------------------------------

ZERO_PULSE_TOL = 1e-9


def correction_pulses(core: PulseSequence, phi: float | None = None, g: int = 1) -> list:
    """Single-qubit pulses that bring a diagonal core gate to CPhase form.

    A pulse on (1, 2) multiplies a = 1 by exp(-i t) and one on (3, 4) does the
    same for b = 1; durations are read off the diagonal phases so that the
    corrected gate is diag(1, 1, 1, exp(-i phi)) up to a global phase.
    Durations that vanish mod 2pi are dropped.
    """
    if core.n_sites != N_SITES:
        raise ValueError(f"corrections need a {N_SITES}-site core")
    rep = gate_report(compose(core), g)
    if not rep.is_diagonal:
        raise ValueError(f"not diagonal: core gate has off-diagonal entries up to {rep.offdiag_max:.3g}")
    p00, p01, p10, p11 = rep.phases
    if phi is not None:
        want = normalize_angle(-phi)
        d = abs(normalize_angle(rep.entangling_phase - want))
        if min(d, TWO_PI - d) > 1e-8:
            raise ValueError(
                f"core entangling phase {rep.entangling_phase:.6f} does not match -phi={want:.6f}"
            )
    out = []
    for pair, dphi in (((1, 2), p10 - p00), ((3, 4), p01 - p00)):
        t = normalize_angle(dphi)
        if min(t, TWO_PI - t) > ZERO_PULSE_TOL:
            out.append(Pulse(pair, t))
    return out


# -- alternate U4 (U3 U2 U3) ----------------------------------------------------


def theta_of_t(t: float, k: float = -U4T_RATIO) -> float:
    """Phase theta = t - tbar + pi of the U3(t) U2(tbar) U3(t) block, t in (0, pi)."""
    return t - math.pi + 2 * math.atan(k / math.tan(t / 2))


def _theta_peak(k: float = -U4T_RATIO) -> float:
    # theta'(t) = 1 - k csc^2(t/2) / (1 + k^2 cot^2(t/2))
    def dtheta(t):
        s, c = math.sin(t / 2), math.cos(t / 2)
        return 1 - k / (s * s + k * k * c * c)

    return brentq(dtheta, 1e-9, math.pi - 1e-9, xtol=1e-15, rtol=1e-15)


def theta_range() -> float:
    """Largest theta reachable with t in (0, pi); the full set is (0, m] U [2pi - m, 2pi)."""
    return theta_of_t(_theta_peak())


def solve_u3_tilde(theta: float, branch: int = 0) -> tuple:
    """(t, tbar) with tan(t/2) tan(tbar/2) = -3 and t - tbar + pi = theta (mod 2pi).

    Two t values reach each achievable theta; ``branch`` 0/1 picks them in
    ascending order of t.
    """
    if branch not in (0, 1):
        raise ValueError("branch must be 0 or 1")
    theta = normalize_angle(theta)
    peak_t = _theta_peak()
    peak = theta_of_t(peak_t)
    mirrored = theta > math.pi
    target = TWO_PI - theta if mirrored else theta
    if not 0.0 < target <= peak + 1e-12:
        raise UnachievableThetaError(
            f"unachievable theta {theta:.6f}: a single block reaches only (0, {peak:.6f}]"
            f" and [{TWO_PI - peak:.6f}, 2pi)"
        )
    if target >= peak - 1e-13:
        t = peak_t
    else:
        # for mirrored theta t -> 2pi - t reverses the order of the two roots
        lower = (branch == 0) != mirrored
        f = lambda s: theta_of_t(s) - target
        if lower:
            t = brentq(f, 1e-12, peak_t, xtol=1e-15, rtol=1e-15)
        else:
            t = brentq(f, peak_t, math.pi - 1e-12, xtol=1e-15, rtol=1e-15)
    tbar = TWO_PI - 2 * math.atan(-U4T_RATIO / math.tan(t / 2))
    if mirrored:
        t, tbar = TWO_PI - t, TWO_PI - tbar
    return t, tbar


def u4_tilde_sequence(
    theta: float,
    branch: int = 0,
    variant: str = SHORT,
    sites=(1, 2, 3, 4),
    n_sites: int = N_SITES,
) -> PulseSequence:
    """U3(t), U2(tbar), U3(t): 7 pulses, diagonal in b and d.

    Between b = 1 states with d = 0 and d = 1 it puts the same phase
    difference theta that U4(theta) does.
    """
    _check_chain(sites)
    t, tbar = solve_u3_tilde(theta, branch)
    u3_sites, u2_pair = tuple(sites[:3]), tuple(sites[2:])
    seq = _u3_block(t, variant, u3_sites, n_sites)
    seq += PulseSequence(n_sites, [Pulse(u2_pair, tbar)])
    seq += _u3_block(t, variant, u3_sites, n_sites)
    return seq


def u4_tilde_pair_sequence(
    theta1: float,
    theta2: float,
    variants: Sequence[str] = (SHORT, SHORT, SHORT),
    inverse: bool = False,
    branch: int = 0,
    n_sites: int = N_SITES,
) -> PulseSequence:
    """Alternate block for theta1 followed by one for theta2, touching U3s merged.

    11 pulses: U3(t1), U2(tbar1), U3(t1 + t2), U2(tbar2), U3(t2).  With
    ``inverse`` the pulses realise the inverse of that product on a = 1
    (every U3/U2 angle complemented, order reversed), which is what the
    closing slot of the five-spin similarity transform needs.
    """
    t1, tb1 = solve_u3_tilde(theta1, branch)
    t2, tb2 = solve_u3_tilde(theta2, branch)
    blocks = [(t1, tb1), (t2, tb2)]
    if inverse:
        blocks = [(TWO_PI - t, TWO_PI - tb) for t, tb in reversed(blocks)]
    (ta, tba), (tb, tbb) = blocks
    merged = normalize_angle(ta + tb)
    if min(merged, TWO_PI - merged) < 1e-12:
        raise UnachievableThetaError("merged central U3 is trivial for this split")
    u3 = (1, 2, 3)
    seq = _u3_block(ta, variants[0], u3, n_sites)
    seq += PulseSequence(n_sites, [Pulse((3, 4), tba)])
    seq += _u3_block(merged, variants[1], u3, n_sites)
    seq += PulseSequence(n_sites, [Pulse((3, 4), tbb)])
    seq += _u3_block(tb, variants[2], u3, n_sites)
    return seq


def alt_u5_sequence(phi: float, theta1: float, profile: VariantProfile | str = "fig9a"):
    """39-pulse variant with each outer U4 replaced by two merged alternate blocks.

    The opening slot splits t5 into theta1 + (t5 - theta1); the closing slot
    is its exact inverse on a = 1, a rotation through s5.  Profile slots keep
    their positions: 0-2 and 8-10 pick the variants of the three U3 blocks
    inside the replaced slots.
    """
    phi = _check_phase(phi)
    if isinstance(profile, str):
        profile = VariantProfile.parse(profile)
    v = profile.variants
    theta1 = float(theta1)
    theta2 = T5 - theta1
    if not (0.0 < theta1 < T5):
        raise UnachievableThetaError(f"split {theta1:.6f} + {theta2:.6f} of t5 is not positive")
    seq = u4_tilde_pair_sequence(theta1, theta2, v[0:3])
    seq += _standalone_u3(S5, v[3], N_SITES)
    seq += u4_sequence(phi, v[4:7])
    seq += _standalone_u3(T5, v[7], N_SITES)
    seq += u4_tilde_pair_sequence(theta1, theta2, v[8:11], inverse=True)
    return seq


# -- full synthesis ---------------------------------------------------------------


@dataclass
class SynthesisResult:
    core: PulseSequence
    corrections: list
    phi: float
    profile: VariantProfile
    alt_theta1: float | None = None

    @property
    def full(self) -> PulseSequence:
        return self.core + PulseSequence(self.core.n_sites, self.corrections)

    def meta(self) -> dict:
        meta = {
            "phi": self.phi,
            "variant_profile": list(self.profile.variants),
            "profile_name": self.profile.name,
            "core_pulses": len(self.core),
            "corrections": [{"pair": list(p.pair), "t": p.t} for p in self.corrections],
        }
        if self.alt_theta1 is not None:
            meta["alt_theta1"] = self.alt_theta1
        return meta

    def to_schedule(self) -> dict:
        return schedule_to_dict(self.full, self.meta())


def synthesize(phi: float, profile: VariantProfile | str = "fig9a", alt_theta1: float | None = None):
    if isinstance(profile, str):
        profile = VariantProfile.parse(profile)
    phi = _check_phase(phi)
    if alt_theta1 is None:
        core = u5_sequence(phi, profile)
    else:
        core = alt_u5_sequence(phi, alt_theta1, profile)
    corrections = correction_pulses(core, phi)
    return SynthesisResult(core, corrections, phi, profile, alt_theta1)
