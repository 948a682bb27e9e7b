"""Numerical evidence that four central spins cannot entangle the two qubits.

Pulses restricted to chain sites 1-4 are simulated on a four-site chain
(site k of that chain is chain site k + 1).  Three facts are checked:

* every pair Hamiltonian S_i.S_j + 3/4 has sector traces (1, 2, 1) on total
  spin d = 0, 1, 2, so tr0 - tr1 + tr2 vanishes, also for sums;
* hence det|d0 * det|d2 / det|d1 = 1 for every four-spin pulse sequence;
* for sequences that are diagonal in ((1 2)_a (3 4)_b)_d the entangling
  phase built from those determinants is zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, normalize_angle
from .pulses import Pulse, PulseSequence, compose
from .synthesis import theta_range, u4_sequence, u4_tilde_sequence
from .verification import (
    CENTRAL,
    DIAGONAL_TOL,
    _four_spin_sector_basis,
    central_pair_hamiltonian,
    determinant_ratio,
    four_spin_trace_check,
    sector_traces,
)

NN_PAIRS = ((1, 2), (2, 3), (3, 4))
ALL_PAIRS = tuple(itertools.combinations(CENTRAL, 2))
FORWARD = (1, 2, 3, 4)
MIRRORED = (4, 3, 2, 1)


def _wrap(x: float) -> float:
    """Angle folded to (-pi, pi]."""
    y = normalize_angle(x)
    return y - TWO_PI if y > math.pi else y


def central_unitary(seq: PulseSequence) -> np.ndarray:
    """16x16 unitary of a sequence that only touches chain sites 1-4."""
    if not seq.sites <= set(CENTRAL):
        raise ValueError(f"sequence touches sites outside {CENTRAL}: {sorted(seq.sites)}")
    return compose(seq.on_chain(4, -1))


@dataclass
class DiagonalPhases:
    """Phases of an operator diagonal in ((1 2)_a (3 4)_b)_d."""

    p00: float
    p01: float
    p10: float
    p11: tuple  # one per d = 0, 1, 2
    offdiag_max: float

    @property
    def p11_effective(self) -> float:
        # equals p11 whenever all three d sectors agree
        d0, d1, d2 = self.p11
        return d0 - d1 + d2

    @property
    def entangling_phase(self) -> float:
        return _wrap(self.p00 - self.p01 - self.p10 + self.p11_effective)

    @property
    def p11_spread(self) -> float:
        d0, d1, d2 = self.p11
        return max(abs(_wrap(d1 - d0)), abs(_wrap(d2 - d0)))


def diagonal_phases(U4: np.ndarray) -> DiagonalPhases:
    """Read the phase of every ab, d basis state; raises if U4 is not diagonal."""
    blocks = []
    offmax = 0.0
    for d in (0, 1, 2):
        B = _four_spin_sector_basis(d)
        m = B.conj().T @ U4 @ B
        offmax = max(offmax, float(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0)))
        # U must also stay inside each sector
        offmax = max(offmax, float(np.max(np.abs(U4 @ B - B @ m))))
        blocks.append(np.angle(np.diag(m)))
    if offmax > DIAGONAL_TOL:
        raise ValueError(f"not diagonal in the ab, d basis (off-diagonal {offmax:.3g})")
    # sector bases are ordered (a, b): d=0 -> 00, 11; d=1 -> 01, 10, 11; d=2 -> 11
    return DiagonalPhases(
        p00=float(blocks[0][0]),
        p01=float(blocks[1][0]),
        p10=float(blocks[1][1]),
        p11=(float(blocks[0][1]), float(blocks[1][2]), float(blocks[2][0])),
        offdiag_max=offmax,
    )


def random_sequence(rng: np.random.Generator, n_pulses: int) -> PulseSequence:
    pairs = rng.integers(0, len(NN_PAIRS), size=n_pulses)
    times = rng.uniform(0.05, TWO_PI - 0.05, size=n_pulses)
    return PulseSequence(6, [Pulse(NN_PAIRS[k], float(t)) for k, t in zip(pairs, times)])


def random_diagonal_sequence(rng: np.random.Generator, n_blocks: int) -> PulseSequence:
    """Product of blocks that are each diagonal in ((1 2)_a (3 4)_b)_d.

    Blocks: single pulses on (1, 2) or (3, 4), U4(phi) and the alternate
    U3 U2 U3 block, the latter two on either orientation of the four sites.
    """
    peak = theta_range()
    seq = PulseSequence(6)
    for _ in range(n_blocks):
        kind = rng.integers(0, 3)
        sites = FORWARD if rng.random() < 0.5 else MIRRORED
        if kind == 0:
            pair = (1, 2) if rng.random() < 0.5 else (3, 4)
            seq += PulseSequence(6, [Pulse(pair, float(rng.uniform(0.05, TWO_PI - 0.05)))])
        elif kind == 1:
            seq += u4_sequence(float(rng.uniform(0.05, TWO_PI - 0.05)), sites=sites)
        else:
            theta = float(rng.uniform(0.05, peak - 0.01))
            if rng.random() < 0.5:
                theta = TWO_PI - theta
            seq += u4_tilde_sequence(theta, branch=int(rng.integers(0, 2)), sites=sites)
    return seq


@dataclass
class NoGoReport:
    seed: int
    traces: dict
    combo_traces: list
    det_ratio_errors: list
    diagonal_phases: list
    u4_entangling_phase: float
    tol: float = 1e-8

    @property
    def max_trace_sum(self) -> float:
        sums = [abs(v[3]) for v in self.traces.values()] + [abs(v[3]) for v in self.combo_traces]
        return max(sums)

    @property
    def max_det_error(self) -> float:
        return max(self.det_ratio_errors, default=0.0)

    @property
    def max_entangling(self) -> float:
        return max((abs(p.entangling_phase) for p in self.diagonal_phases), default=0.0)

    @property
    def passed(self) -> bool:
        traces_ok = all(
            np.allclose(v, (1, 2, 1, 0), atol=1e-12) for k, v in self.traces.items() if k in NN_PAIRS
        )
        return (
            traces_ok
            and self.max_trace_sum < 1e-12
            and self.max_det_error < self.tol
            and self.max_entangling < self.tol
            and abs(self.u4_entangling_phase) < self.tol
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "traces": {f"{i}-{j}": list(v) for (i, j), v in self.traces.items()},
            "max_trace_alternating_sum": self.max_trace_sum,
            "n_random_sequences": len(self.det_ratio_errors),
            "max_det_ratio_error": self.max_det_error,
            "n_diagonal_sequences": len(self.diagonal_phases),
            "max_entangling_phase": self.max_entangling,
            "max_p11_spread": max((p.p11_spread for p in self.diagonal_phases), default=0.0),
            "u4_entangling_phase": self.u4_entangling_phase,
            "passed": self.passed,
        }


def four_spin_nogo_demo(
    n_trials: int = 50,
    pulses_per_trial: int = 20,
    rng_seed: int = 0,
    n_random: int = 200,
    n_combos: int = 20,
) -> NoGoReport:
    """Run the trace, determinant and diagonal-sequence checks.

    ``n_trials`` diagonal-by-construction sequences of up to
    ``pulses_per_trial // 7`` blocks (at least two) and ``n_random`` fully
    random sequences of ``pulses_per_trial`` pulses each get their own RNG
    stream spawned from ``rng_seed``.
    """
    if n_trials <= 0:
        raise ValueError("n_trials must be positive")
    root = np.random.SeedSequence(rng_seed)
    s_traces, s_random, s_diag = root.spawn(3)

    traces = {pair: four_spin_trace_check(pair) for pair in ALL_PAIRS}
    rng = np.random.default_rng(s_traces)
    combos = []
    for _ in range(n_combos):
        w = rng.uniform(0.0, 2.0, size=len(ALL_PAIRS))
        H = sum(wk * central_pair_hamiltonian(*p) for wk, p in zip(w, ALL_PAIRS))
        combos.append(sector_traces(H))

    det_errors = []
    for child in s_random.spawn(n_random):
        seq = random_sequence(np.random.default_rng(child), pulses_per_trial)
        det_errors.append(abs(determinant_ratio(central_unitary(seq)) - 1.0))

    phases = []
    max_blocks = max(2, pulses_per_trial // 7)
    for child in s_diag.spawn(n_trials):
        r = np.random.default_rng(child)
        seq = random_diagonal_sequence(r, int(r.integers(2, max_blocks + 1)))
        phases.append(diagonal_phases(central_unitary(seq)))

    u4 = diagonal_phases(central_unitary(u4_sequence(math.pi)))
    return NoGoReport(
        seed=rng_seed,
        traces=traces,
        combo_traces=combos,
        det_ratio_errors=det_errors,
        diagonal_phases=phases,
        u4_entangling_phase=u4.entangling_phase,
    )
