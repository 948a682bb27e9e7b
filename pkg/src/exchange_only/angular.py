"""Coupling trees of spin-1/2 sites realised as vectors in the product space.

A coupling tree is a bracketing of chain sites where every bracket carries a
total-spin label, e.g. ``couple(couple(0, 1, 1), 2, 1/2)`` is the state
((0 1)_1 2)_{1/2}.  Leaves are site indices; every leaf is a spin-1/2.  A
bracket whose label is ``None`` is free and gets filled in by
:func:`labelings`, which is how basis "shapes" are enumerated.

Conventions: Condon-Shortley phases, the left child is the first angular
momentum in each Clebsch-Gordan coefficient, site 0 is the most significant
tensor factor, and basis index 0 of a site is spin up.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from ._kernels import swap_partner

HALF = Fraction(1, 2)
ORTHO_TOL = 1e-12


def as_spin(x) -> Fraction:
    """Convert a number to an exact half-integer, or raise."""
    f = Fraction(x).limit_denominator(4) if isinstance(x, float) else Fraction(x)
    if (2 * f).denominator != 1 or abs(float(f) - float(x)) > 1e-12:
        raise ValueError(f"{x!r} is not a half-integer")
    return f


@lru_cache(maxsize=None)
def _cg_doubled(j1, m1, j2, m2, j, m):
    # all arguments are doubled angular momenta (plain ints)
    if m1 + m2 != m:
        return 0.0
    if j < abs(j1 - j2) or j > j1 + j2 or (j1 + j2 + j) % 2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m) > j:
        return 0.0
    f = math.factorial
    a = (j1 + j2 - j) // 2
    b = (j1 - m1) // 2
    c = (j2 + m2) // 2
    d = (j - j2 + m1) // 2
    e = (j - j1 - m2) // 2
    pre = Fraction(
        (j + 1)
        * f((j + j1 - j2) // 2)
        * f((j - j1 + j2) // 2)
        * f(a)
        * f((j + m) // 2)
        * f((j - m) // 2)
        * f(b)
        * f((j1 + m1) // 2)
        * f((j2 - m2) // 2)
        * f(c),
        f((j1 + j2 + j) // 2 + 1),
    )
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        den = f(k) * f(a - k) * f(b - k) * f(c - k) * f(d + k) * f(e + k)
        total += Fraction((-1) ** k, den)
    return float(total) * math.sqrt(pre)


def cg_coefficient(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley)."""
    args = [as_spin(x) for x in (j1, m1, j2, m2, J, M)]
    for jj, mm in ((args[0], args[1]), (args[2], args[3]), (args[4], args[5])):
        if jj < 0:
            raise ValueError("angular momentum must be non-negative")
        if (jj - mm).denominator != 1:
            raise ValueError(f"m={mm} incompatible with j={jj}")
        if abs(mm) > jj:
            raise ValueError(f"|m|={abs(mm)} exceeds j={jj}")
    return _cg_doubled(*(int(2 * a) for a in args))


# -- coupling trees ----------------------------------------------------------


@dataclass(frozen=True)
class Coupled:
    left: "Tree"
    right: "Tree"
    spin: Union[Fraction, None] = None

    def __repr__(self):
        label = "?" if self.spin is None else str(self.spin)
        return f"({_fmt(self.left)} {_fmt(self.right)})_{label}"


Tree = Union[int, Coupled]


def _fmt(tree: Tree) -> str:
    return str(tree) if isinstance(tree, int) else repr(tree)


def couple(left: Tree, right: Tree, spin=None) -> Coupled:
    return Coupled(left, right, None if spin is None else as_spin(spin))


def spin_of(tree: Tree) -> Fraction:
    if isinstance(tree, int):
        return HALF
    if tree.spin is None:
        raise ValueError(f"unlabelled bracket in {tree!r}")
    return tree.spin


def leaves(tree: Tree) -> tuple:
    if isinstance(tree, int):
        return (tree,)
    return leaves(tree.left) + leaves(tree.right)


def node_labels(tree: Tree) -> tuple:
    """Bracket labels in preorder (root first)."""
    if isinstance(tree, int):
        return ()
    return (tree.spin,) + node_labels(tree.left) + node_labels(tree.right)


def _triangle(j1, j2, j) -> bool:
    return abs(j1 - j2) <= j <= j1 + j2 and (j1 + j2 - j).denominator == 1


def validate_tree(tree: Tree) -> None:
    """Raise ValueError unless every bracket obeys the triangle rule."""
    if isinstance(tree, int):
        return
    validate_tree(tree.left)
    validate_tree(tree.right)
    j1, j2, j = spin_of(tree.left), spin_of(tree.right), spin_of(tree)
    if not _triangle(j1, j2, j):
        raise ValueError(f"triangle rule violated at {tree!r}: {j1} x {j2} -/-> {j}")
    sites = leaves(tree)
    if len(set(sites)) != len(sites):
        raise ValueError(f"site repeated in {tree!r}")


def _label_options(tree: Tree):
    """Yield every fully labelled version of ``tree``."""
    if isinstance(tree, int):
        yield tree
        return
    for left in _label_options(tree.left):
        for right in _label_options(tree.right):
            j1, j2 = spin_of(left), spin_of(right)
            if tree.spin is not None:
                if _triangle(j1, j2, tree.spin):
                    yield Coupled(left, right, tree.spin)
                continue
            j = abs(j1 - j2)
            while j <= j1 + j2:
                yield Coupled(left, right, j)
                j += 1


def labelings(shape: Tree, S=None) -> list:
    """All valid labelings of ``shape`` (optionally with root spin S).

    Sorted by the preorder label tuple, so the outermost free label varies
    slowest.
    """
    if S is not None:
        S = as_spin(S)
        if isinstance(shape, int):
            raise ValueError("a single site has no root label to fix")
        if shape.spin is not None and shape.spin != S:
            return []
        shape = replace(shape, spin=S)
    return sorted(_label_options(shape), key=node_labels)


# -- state construction -------------------------------------------------------


def _multiplet(tree: Tree):
    """Return (sites, {2m: tensor}) for every magnetic number of ``tree``."""
    if isinstance(tree, int):
        return (tree,), {1: np.array([1.0, 0.0]), -1: np.array([0.0, 1.0])}
    ls, lvecs = _multiplet(tree.left)
    rs, rvecs = _multiplet(tree.right)
    j1, j2, j = (int(2 * spin_of(x)) for x in (tree.left, tree.right, tree))
    shape = (2,) * (len(ls) + len(rs))
    out = {}
    for m in range(-j, j + 1, 2):
        acc = np.zeros(shape)
        for m1, v1 in lvecs.items():
            m2 = m - m1
            if m2 not in rvecs:
                continue
            c = _cg_doubled(j1, m1, j2, m2, j, m)
            if c != 0.0:
                acc += c * np.multiply.outer(v1, rvecs[m2])
        out[m] = acc
    return ls + rs, out


def build_state(tree: Tree, M=None, n_sites: int = None) -> np.ndarray:
    """Product-space vector of a fully labelled tree at magnetic number M.

    The tree must cover sites 0..n-1 exactly.  M defaults to the root spin.
    """
    validate_tree(tree)
    S = spin_of(tree)
    M = S if M is None else as_spin(M)
    if abs(M) > S or (S - M).denominator != 1:
        raise ValueError(f"M={M} invalid for S={S}")
    sites, vecs = _multiplet(tree)
    n = len(sites) if n_sites is None else n_sites
    if sorted(sites) != list(range(n)):
        raise ValueError(f"tree sites {sites} do not cover 0..{n - 1}")
    arr = np.transpose(vecs[int(2 * M)], np.argsort(sites))
    return arr.reshape(-1).astype(complex)


def basis_matrix(trees: Sequence[Tree], M=None) -> np.ndarray:
    """Columns are the states of ``trees`` at a common M (default: max allowed)."""
    if not trees:
        raise ValueError("empty basis")
    if M is None:
        M = min(spin_of(t) for t in trees)
    return np.column_stack([build_state(t, M) for t in trees])


def check_orthonormal(B: np.ndarray, tol: float = ORTHO_TOL) -> float:
    err = float(np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))))
    if err > tol:
        raise ValueError(f"basis not orthonormal (deviation {err:.3g})")
    return err


@dataclass(frozen=True)
class RecouplingMatrix:
    """``matrix[i, j] = <target[j] | source[i]>``."""

    matrix: np.ndarray
    source: tuple
    target: tuple


def recoupling_matrix(shape_a: Tree, shape_b: Tree, S, M=None) -> RecouplingMatrix:
    """Overlaps between all labelings of two tree shapes with root spin S.

    Fixed labels in the shapes restrict the enumeration; fixing labels in
    ``shape_a`` only gives a subset of rows (each row is still a complete
    expansion over the target shape).  The result is
    computed at two magnetic numbers when S > 0 and they must agree.
    """
    if sorted(leaves(shape_a)) != sorted(leaves(shape_b)):
        raise ValueError("shapes are over different sites")
    src = labelings(shape_a, S)
    dst = labelings(shape_b, S)
    if not src or not dst or len(src) > len(dst):
        raise ValueError(f"incompatible shapes: {len(src)} vs {len(dst)} states")
    S = as_spin(S)
    ms = [S if M is None else as_spin(M)]
    if M is None and S > 0:
        ms.append(-S)
    mats = []
    for m in ms:
        A = basis_matrix(src, m)
        B = basis_matrix(dst, m)
        mats.append((B.conj().T @ A).T.real)
    for other in mats[1:]:
        if np.max(np.abs(other - mats[0])) > ORTHO_TOL:
            raise ValueError("recoupling matrix depends on M")
    F = mats[0]
    # rows must be complete: every source state lies in the target span
    if np.max(np.abs(F @ F.T - np.eye(len(src)))) > ORTHO_TOL:
        raise ValueError("source states are not spanned by the target shape")
    return RecouplingMatrix(F, tuple(src), tuple(dst))


def subspace_projector(trees: Sequence[Tree], M=None) -> np.ndarray:
    B = basis_matrix(trees, M)
    check_orthonormal(B)
    return B @ B.conj().T


# -- spin operators -----------------------------------------------------------


def swap_matrix(n_sites: int, i: int, j: int) -> np.ndarray:
    perm = swap_partner(n_sites, i, j)
    P = np.zeros((2**n_sites, 2**n_sites))
    P[perm, np.arange(2**n_sites)] = 1.0
    return P


def spin_dot(n_sites: int, i: int, j: int) -> np.ndarray:
    """S_i . S_j = SWAP_ij / 2 - 1/4."""
    return 0.5 * swap_matrix(n_sites, i, j) - 0.25 * np.eye(2**n_sites)


def total_sz(n_sites: int, sites: Iterable[int] = None) -> np.ndarray:
    sites = range(n_sites) if sites is None else sites
    idx = np.arange(2**n_sites)
    diag = np.zeros(2**n_sites)
    for s in sites:
        bit = (idx >> (n_sites - 1 - s)) & 1
        diag += 0.5 - bit
    return np.diag(diag)


def total_s2(n_sites: int, sites: Iterable[int] = None) -> np.ndarray:
    sites = list(range(n_sites) if sites is None else sites)
    out = 0.75 * len(sites) * np.eye(2**n_sites)
    for i, j in itertools.combinations(sites, 2):
        out += 2.0 * spin_dot(n_sites, i, j)
    return out
