"""Small-chain bases shared by the tests (site k of the small chain is chain site k + 1)."""

import math

import numpy as np

from exchange_only.angular import couple

A1 = couple(0, 1, 1)

# ((0 1)_a 2)_c with ac = 0 1/2, 1 1/2 | 1 3/2
THREE_SPIN = [couple(couple(0, 1, 0), 2, 0.5), couple(couple(0, 1, 1), 2, 0.5), couple(couple(0, 1, 1), 2, 1.5)]

# a = 1, (A (2 3)_b)_d with bd = 10 | 01, 11 | 12
FOUR_SPIN_A1 = [
    couple(A1, couple(2, 3, 1), 0),
    couple(A1, couple(2, 3, 0), 1),
    couple(A1, couple(2, 3, 1), 1),
    couple(A1, couple(2, 3, 1), 2),
]

# a = b = 1, (A (B 4)_e)_f with ef = 1/2 1/2, 3/2 1/2 | 1/2 3/2, 3/2 3/2
FIVE_SPIN_AB1 = [
    couple(A1, couple(couple(2, 3, 1), 4, e), f) for f, e in [(0.5, 0.5), (0.5, 1.5), (1.5, 0.5), (1.5, 1.5)]
]


def rel_phases(diag):
    """Phases of a diagonal relative to its first entry, folded to (-pi, pi]."""
    ph = np.angle(np.asarray(diag))
    return np.array([math.remainder(p - ph[0], 2 * math.pi) for p in ph])


def offdiag(m):
    return float(np.max(np.abs(m - np.diag(np.diag(m)))))
