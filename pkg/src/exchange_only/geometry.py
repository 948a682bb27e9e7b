"""Pseudospin rotation algebra and the two cone constructions.

Rotations follow the left-handed convention: a rotation through ``angle``
about ``axis`` is the SU(2) element ``exp(+i angle axis.sigma / 2)``, and the
induced map on Bloch vectors turns x toward -y for a quarter turn about z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
UNIT_TOL = 1e-12

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def normalize_angle(angle: float) -> float:
    """Map an angle to [0, 2pi)."""
    a = math.fmod(angle, TWO_PI)
    if a < 0:
        a += TWO_PI
    # fmod can hand back exactly 2pi after the shift for tiny negative input
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class UnitVector3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"not a unit vector (norm {norm!r})")

    @classmethod
    def from_array(cls, v, renormalize: bool = False) -> "UnitVector3":
        v = np.asarray(v, dtype=float)
        if renormalize:
            v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: "UnitVector3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z


@dataclass(frozen=True)
class AxisAngle:
    axis: UnitVector3
    angle: float

    def __post_init__(self):
        if not 0.0 <= self.angle < TWO_PI:
            raise ValueError(f"angle {self.angle!r} outside [0, 2pi)")

    @classmethod
    def make(cls, axis, angle: float) -> "AxisAngle":
        if not isinstance(axis, UnitVector3):
            axis = UnitVector3.from_array(axis)
        return cls(axis, normalize_angle(angle))

    def inverse(self) -> "AxisAngle":
        return AxisAngle(self.axis, normalize_angle(TWO_PI - self.angle))

    def su2(self) -> np.ndarray:
        """The SU(2) element exp(i angle n.sigma / 2)."""
        n = self.axis.to_array()
        h = 0.5 * self.angle
        return math.cos(h) * np.eye(2) + 1j * math.sin(h) * np.einsum("k,kij->ij", n, PAULI)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix acting on Bloch vectors."""
        return rotation_matrix(self.axis.to_array(), self.angle)


Z_HAT = UnitVector3(0.0, 0.0, 1.0)
F1_HAT = UnitVector3.from_array([math.sqrt(3) / 2, 0.0, -0.5], renormalize=True)
F2_HAT = UnitVector3.from_array([math.sqrt(2 / 3), 0.0, -1 / math.sqrt(3)], renormalize=True)


def rotation_matrix(axis, angle: float) -> np.ndarray:
    # left-handed: Rodrigues formula with the angle negated
    n = np.asarray(axis, dtype=float)
    k = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    s, c = math.sin(-angle), math.cos(-angle)
    return np.eye(3) + s * k + (1 - c) * (k @ k)


def rotate_vector(v: UnitVector3, r: AxisAngle) -> UnitVector3:
    out = r.matrix() @ v.to_array()
    # renormalise away the last ulp so the result stays a valid UnitVector3
    return UnitVector3.from_array(out, renormalize=True)


def axis_from_reflection(f: UnitVector3) -> UnitVector3:
    """Rotation axis ``2 f (f.z) - z`` obtained by conjugating z with f.sigma."""
    fz = f.z
    return UnitVector3.from_array([2 * f.x * fz, 2 * f.y * fz, 2 * fz * fz - 1.0], renormalize=True)


N1_HAT = axis_from_reflection(F1_HAT)
N2_HAT = axis_from_reflection(F2_HAT)


def _check_obtuse(c: float) -> None:
    if not -1.0 < c < 0.0:
        raise ValueError(f"axis cosine {c!r} must lie in (-1, 0)")


def three_rotation_companion(c: float, t: float) -> float:
    """Middle angle of the n, z, n sequence that leaves z fixed.

    Solves ``tan(t/2) tan(tbar/2) = 1/c`` for tbar in (0, 2pi), written as
    ``tan(tbar/2) = cot(t/2) / c`` so nothing overflows near t = 0 or pi.
    ``c`` is the cosine between the two rotation axes.
    """
    _check_obtuse(c)
    if not 0.0 < t < TWO_PI:
        raise ValueError(f"t={t!r} must lie in (0, 2pi)")
    h = 0.5 * t
    half = math.atan2(math.cos(h), c * math.sin(h))  # in (-pi, pi]
    # tan has period pi: fold the half angle into (0, pi)
    half = math.fmod(half, math.pi)
    if half <= 0.0:
        half += math.pi
    if half >= math.pi or half <= 0.0:
        raise ValueError(f"t={t!r} gives a trivial companion angle")
    return 2.0 * half


def conjugation_angle(c: float, sign: int) -> float:
    """Angle of the two-step conjugation that carries an axis onto +z or -z.

    Returns ``arccos(c / (c + sign))``.  With sign=+1 the rotations about z
    then about the axis (both through this angle) send the axis to +z; with
    sign=-1 the second rotation uses the complementary angle and the result
    is -z.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    _check_obtuse(c)
    ratio = c / (c + sign)
    if abs(ratio) > 1.0:
        raise ValueError(f"no real conjugation angle for c={c!r}, sign={sign}")
    return math.acos(ratio)
