"""Exact checks of composed pulse sequences on two three-spin qubits.

Site layout on the six-site chain: the left qubit is site 0 with pair (1, 2)
carrying label a, i.e. (0 (1 2)_a)_{1/2}; the right qubit is pair (3, 4)
carrying label b with site 5, i.e. ((3 4)_b 5)_{1/2}.  The two qubits couple
to total spin g in {0, 1}.  Encoded basis order is ab = 00, 01, 10, 11.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .angular import (
    as_spin,
    basis_matrix,
    build_state,
    check_orthonormal,
    couple,
    labelings,
    spin_dot,
    total_s2,
    total_sz,
)
from .geometry import TWO_PI, normalize_angle
from .pulses import PulseSequence, compose

N_SITES = 6
DIAGONAL_TOL = 1e-9
CONSERVE_TOL = 1e-9
AB_LABELS = ("00", "01", "10", "11")


def encoded_trees(g) -> list:
    """The four encoded basis trees of total spin g, ordered ab = 00..11."""
    out = []
    for a in (0, 1):
        for b in (0, 1):
            left = couple(0, couple(1, 2, a), 0.5)
            right = couple(couple(3, 4, b), 5, 0.5)
            out.append(couple(left, right, g))
    return out


def reference_trees(g) -> list:
    """Encoded labels recoupled as (0 ((1 2)_a ((3 4)_b 5)_{1/2})_{1/2})_g.

    These span the part of the g sector with the five rightmost spins in
    total spin 1/2, which is where the two sectors can be compared directly.
    """
    out = []
    for a in (0, 1):
        for b in (0, 1):
            right = couple(couple(3, 4, b), 5, 0.5)
            out.append(couple(0, couple(couple(1, 2, a), right, 0.5), g))
    return out


@lru_cache(maxsize=None)
def _basis(kind: str, g: int, twice_m: int) -> np.ndarray:
    trees = encoded_trees(g) if kind == "encoded" else reference_trees(g)
    B = basis_matrix(trees, as_spin(twice_m) / 2)
    check_orthonormal(B)
    B.setflags(write=False)
    return B


def encoded_basis(g, M=None) -> np.ndarray:
    """64x4 matrix whose columns are the encoded states (ab = 00..11)."""
    g = int(g)
    if g not in (0, 1):
        raise ValueError("g must be 0 or 1")
    M = g if M is None else as_spin(M)
    if abs(M) > g or (M - g).denominator != 1:
        raise ValueError(f"M={M} invalid for g={g}")
    return _basis("encoded", g, int(2 * M))


@lru_cache(maxsize=None)
def _spin_ops():
    s2, sz = total_s2(N_SITES), total_sz(N_SITES)
    s2.setflags(write=False)
    sz.setflags(write=False)
    return s2, sz


def check_conserving(U: np.ndarray, tol: float = CONSERVE_TOL) -> None:
    s2, sz = _spin_ops()
    for name, op in (("S^2", s2), ("S_z", sz)):
        err = np.max(np.abs(U @ op - op @ U))
        if err > tol:
            raise ValueError(f"non-conserving U: [U, {name}] has entries up to {err:.3g}")


def _as_unitary(U) -> np.ndarray:
    if isinstance(U, PulseSequence):
        if U.n_sites != N_SITES:
            raise ValueError(f"expected a {N_SITES}-site sequence, got {U.n_sites}")
        return compose(U)
    U = np.asarray(U, dtype=complex)
    if U.shape != (2**N_SITES, 2**N_SITES):
        raise ValueError(f"expected a {2**N_SITES}x{2**N_SITES} matrix, got {U.shape}")
    return U


# -- gate extraction ------------------------------------------------------------

MAGIC = (1 / math.sqrt(2)) * np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
)


def makhlin_invariants(gate: np.ndarray) -> tuple:
    """Local invariants (G1, G2) of a two-qubit unitary."""
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    if np.max(np.abs(gate.conj().T @ gate - np.eye(4))) > 1e-9:
        raise ValueError("gate is not unitary")
    um = MAGIC.conj().T @ gate @ MAGIC
    det = np.linalg.det(um)
    m = um.T @ um
    tr2 = np.trace(m) ** 2
    g1 = tr2 / (16 * det)
    g2 = (tr2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(g2.real)


CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CNOT_INVARIANTS = makhlin_invariants(CNOT)


def locally_equivalent(g_a: tuple, g_b: tuple, tol: float = 1e-8) -> bool:
    return abs(g_a[0] - g_b[0]) < tol and abs(g_a[1] - g_b[1]) < tol


def phase_normalized(A: np.ndarray) -> np.ndarray:
    """A divided by the phase of its largest-magnitude entry."""
    A = np.asarray(A, dtype=complex)
    k = np.argmax(np.abs(A))
    ref = A.flat[k]
    if abs(ref) == 0:
        return A.copy()
    return A * (abs(ref) / ref)


def phase_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Max entrywise deviation between A and B after removing a global phase."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    overlap = np.vdot(A, B)
    if abs(overlap) == 0:
        return float(np.max(np.abs(A - B)))
    return float(np.max(np.abs(A * (overlap / abs(overlap)) - B)))


def cphase(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(-1j * phi)]).astype(complex)


@dataclass
class GateReport:
    gate: np.ndarray
    leakage_norm: float
    g: int
    M: float
    offdiag_max: float
    phases: tuple | None = None
    entangling_phase: float | None = None
    makhlin: tuple | None = None

    @property
    def is_diagonal(self) -> bool:
        return self.phases is not None

    def to_dict(self) -> dict:
        out = {
            "g": self.g,
            "M": float(self.M),
            "gate": [[[float(z.real), float(z.imag)] for z in row] for row in self.gate],
            "leakage_norm": self.leakage_norm,
            "offdiag_max": self.offdiag_max,
            "diagonal_phases": None if self.phases is None else dict(zip(AB_LABELS, self.phases)),
            "entangling_phase": self.entangling_phase,
            "makhlin": None
            if self.makhlin is None
            else {"G1": [self.makhlin[0].real, self.makhlin[0].imag], "G2": self.makhlin[1]},
        }
        return out


def entangling_phase(phases: Sequence[float]) -> float:
    p00, p01, p10, p11 = phases
    return normalize_angle(p00 - p01 - p10 + p11)


def gate_report(U, g=1, M=None, check: bool = True) -> GateReport:
    """Encoded 4x4 gate of U in sector (g, M) plus leakage and phase data.

    ``leakage_norm`` is the largest singular value of (1 - P) U P restricted
    to the encoded span.  Phases are only extracted when every off-diagonal
    entry is below 1e-9; they are the arguments of the diagonal entries.
    """
    U = _as_unitary(U)
    if check:
        check_conserving(U)
    B = encoded_basis(g, M)
    UB = U @ B
    gate = B.conj().T @ UB
    leak = UB - B @ gate
    leakage = float(np.linalg.norm(leak, 2))
    off = gate - np.diag(np.diag(gate))
    offmax = float(np.max(np.abs(off)))
    report = GateReport(gate, leakage, int(g), float(g if M is None else as_spin(M)), offmax)
    if offmax < DIAGONAL_TOL:
        phases = tuple(float(np.angle(z)) for z in np.diag(gate))
        report.phases = phases
        report.entangling_phase = entangling_phase(phases)
    try:
        report.makhlin = makhlin_invariants(gate)
    except ValueError:
        pass  # leaky: the encoded block is not unitary
    return report


def sector_ms(g: int) -> list:
    return [Mt / 2 for Mt in range(-2 * g, 2 * g + 1, 2)]


def g_independence_check(seq: PulseSequence, tol: float = 1e-9) -> tuple:
    """Does a sequence avoiding site 0 act identically for g = 0 and g = 1?

    Always compares the representations on the reference trees (five
    rightmost spins in total spin 1/2), which must coincide for any such
    sequence.  When the g = 1 gate is also leakage-free the encoded gates
    themselves are compared up to one global phase.  Returns (ok, max_dev).
    """
    if 0 in seq.sites:
        raise ValueError("sequence touches site 0")
    U = _as_unitary(seq)
    devs = []
    ref = []
    for g in (0, 1):
        B = _basis("reference", g, 2 * g)
        ref.append(B.conj().T @ U @ B)
    devs.append(phase_distance(ref[0], ref[1]))
    r0, r1 = gate_report(U, 0), gate_report(U, 1)
    if r1.leakage_norm < tol:
        devs.append(phase_distance(r0.gate, r1.gate))
    dev = max(devs)
    return dev < tol, dev


def sz_independence_check(seq, tol: float = 1e-10) -> bool:
    """Encoded gates coincide for every M of both g sectors."""
    U = _as_unitary(seq)
    for g in (0, 1):
        gates = [gate_report(U, g, M, check=False).gate for M in sector_ms(g)]
        for other in gates[1:]:
            if np.max(np.abs(other - gates[0])) > tol:
                return False
    return True


def sector_matrix(U, basis: Sequence, M=None, tol: float = 1e-9) -> np.ndarray:
    """Matrix elements <tree_i| U |tree_j> on a U-invariant span of trees.

    ``U`` may be a matrix or a PulseSequence on as many sites as the trees
    cover.
    """
    if isinstance(U, PulseSequence):
        U = compose(U)
    B = basis_matrix(list(basis), M)
    check_orthonormal(B)
    if B.shape[0] != U.shape[0]:
        raise ValueError(f"basis dimension {B.shape[0]} does not match U ({U.shape[0]})")
    UB = U @ B
    mat = B.conj().T @ UB
    resid = float(np.max(np.abs(UB - B @ mat)))
    if resid > tol:
        raise ValueError(f"not invariant: U leaks out of the span (residual {resid:.3g})")
    return mat


# -- four central spins ----------------------------------------------------------

CENTRAL = (1, 2, 3, 4)


def four_spin_sector_trees(d) -> list:
    """((0 1)_a (2 3)_b)_d on a four-site chain; site k is chain site k + 1."""
    return labelings(couple(couple(0, 1), couple(2, 3)), d)


@lru_cache(maxsize=None)
def _four_spin_sector_basis(d: int) -> np.ndarray:
    B = basis_matrix(four_spin_sector_trees(d), 0)
    B.setflags(write=False)
    return B


def sector_traces(H: np.ndarray) -> tuple:
    """Traces of a 16x16 operator on the d = 0, 1, 2 sectors (one M each)."""
    trs = []
    for d in (0, 1, 2):
        B = _four_spin_sector_basis(d)
        trs.append(float(np.trace(B.conj().T @ H @ B).real))
    return trs[0], trs[1], trs[2], trs[0] - trs[1] + trs[2]


def central_pair_hamiltonian(i: int, j: int) -> np.ndarray:
    """S_i.S_j + 3/4 for chain sites i, j among the central four (16x16)."""
    if i == j or i not in CENTRAL or j not in CENTRAL:
        raise ValueError(f"pair ({i}, {j}) is not within the central sites {CENTRAL}")
    return spin_dot(4, i - 1, j - 1) + 0.75 * np.eye(16)


def four_spin_trace_check(pair: tuple) -> tuple:
    return sector_traces(central_pair_hamiltonian(*pair))


def sector_determinants(U4: np.ndarray) -> tuple:
    """Determinants of a 16x16 rotation-invariant U on the d = 0, 1, 2 sectors."""
    dets = []
    for d in (0, 1, 2):
        B = _four_spin_sector_basis(d)
        dets.append(complex(np.linalg.det(B.conj().T @ U4 @ B)))
    return tuple(dets)


def determinant_ratio(U4: np.ndarray) -> complex:
    d0, d1, d2 = sector_determinants(U4)
    return d0 * d2 / d1
