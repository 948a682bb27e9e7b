"""Exchange pulses on a spin chain, sequence algebra and the schedule format.

Durations are in units of 1/J (hbar = 1).  A pulse of duration t on sites
(i, j) is ``exp(-i t (S_i.S_j + 3/4))``: it leaves the pair singlet alone
and multiplies the pair triplet by ``exp(-i t)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .geometry import TWO_PI

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Pulse:
    pair: tuple
    t: float

    def __post_init__(self):
        i, j = self.pair
        if i == j:
            raise ValueError(f"pulse pair {self.pair} must join two distinct sites")
        if abs(i - j) != 1:
            raise ValueError(f"pulse pair {self.pair} is not nearest-neighbour")
        if not 0.0 < self.t < TWO_PI:
            raise ValueError(f"pulse duration {self.t!r} outside (0, 2pi)")
        object.__setattr__(self, "pair", (int(min(i, j)), int(max(i, j))))

    def inverse(self) -> "Pulse":
        return Pulse(self.pair, TWO_PI - self.t)

    def shifted(self, offset: int) -> "Pulse":
        return Pulse((self.pair[0] + offset, self.pair[1] + offset), self.t)


@dataclass(frozen=True)
class PulseSequence:
    n_sites: int
    pulses: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        for p in self.pulses:
            if not all(0 <= s < self.n_sites for s in p.pair):
                raise ValueError(f"pulse {p} outside a {self.n_sites}-site chain")

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        """Concatenate: ``self`` acts first, then ``other``."""
        if other.n_sites != self.n_sites:
            raise ValueError("cannot concatenate sequences on different chains")
        return PulseSequence(self.n_sites, self.pulses + other.pulses)

    @property
    def sites(self) -> set:
        return {s for p in self.pulses for s in p.pair}

    def on_chain(self, n_sites: int, offset: int = 0) -> "PulseSequence":
        """Same pulses, site labels shifted by ``offset``, on an n-site chain."""
        return PulseSequence(n_sites, [p.shifted(offset) for p in self.pulses])


def exchange_unitary(n_sites: int, i: int, j: int, t: float) -> np.ndarray:
    if not (0 <= i < n_sites and 0 <= j < n_sites) or i == j:
        raise ValueError(f"sites ({i}, {j}) invalid for a {n_sites}-site chain")
    if not 0.0 <= t <= TWO_PI:
        raise ValueError(f"duration {t!r} outside [0, 2pi]")
    eye = np.eye(2**n_sites, dtype=complex)
    return _kernels.apply_pulse(eye, n_sites, i, j, t)


def compose(seq: PulseSequence, backend: str = None) -> np.ndarray:
    """Unitary ``U_N ... U_2 U_1`` of the sequence (pulse 0 acts first)."""
    pairs = [p.pair for p in seq.pulses] or np.zeros((0, 2))
    times = [p.t for p in seq.pulses]
    return _kernels.compose_pulses(seq.n_sites, pairs, times, backend=backend)


def invert_sequence(seq: PulseSequence) -> PulseSequence:
    return PulseSequence(seq.n_sites, [p.inverse() for p in reversed(seq.pulses)])


def durations(seq: PulseSequence | Iterable[Pulse]) -> tuple:
    """(serial, parallel) total duration.

    The parallel figure is the makespan of an earliest-start greedy schedule:
    each pulse starts as soon as both of its sites are free, so pulses on
    disjoint pairs overlap while the order on any shared site is kept.
    """
    pulses = seq.pulses if isinstance(seq, PulseSequence) else tuple(seq)
    free: dict = {}
    serial = 0.0
    makespan = 0.0
    for p in pulses:
        start = max(free.get(s, 0.0) for s in p.pair)
        end = start + p.t
        for s in p.pair:
            free[s] = end
        serial += p.t
        makespan = max(makespan, end)
    return serial, makespan


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) < tol)


# -- schedule JSON -------------------------------------------------------------


class ScheduleError(ValueError):
    """Schedule document does not match the expected layout."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def schedule_to_dict(seq: PulseSequence, meta: dict | None = None) -> dict:
    return {
        "n_sites": seq.n_sites,
        "pulses": [{"pair": list(p.pair), "t": float(p.t)} for p in seq.pulses],
        "meta": dict(meta or {}),
    }


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def schedule_from_dict(doc) -> tuple:
    """Parse a schedule document into (PulseSequence, meta); errors name the field."""
    if not isinstance(doc, dict):
        raise ScheduleError("$", "expected an object")
    for key in ("n_sites", "pulses"):
        if key not in doc:
            raise ScheduleError(f"$.{key}", "missing")
    n = doc["n_sites"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ScheduleError("$.n_sites", "expected an integer >= 2")
    if not isinstance(doc["pulses"], list):
        raise ScheduleError("$.pulses", "expected a list")
    pulses = []
    for k, item in enumerate(doc["pulses"]):
        where = f"$.pulses[{k}]"
        if not isinstance(item, dict):
            raise ScheduleError(where, "expected an object")
        pair = item.get("pair")
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(s, int) and not isinstance(s, bool) for s in pair)
        ):
            raise ScheduleError(f"{where}.pair", "expected [i, j] with integer sites")
        if not _is_number(item.get("t")):
            raise ScheduleError(f"{where}.t", "expected a finite number")
        try:
            pulses.append(Pulse(tuple(pair), float(item["t"])))
        except ValueError as exc:
            raise ScheduleError(where, str(exc)) from None
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ScheduleError("$.meta", "expected an object")
    try:
        seq = PulseSequence(n, pulses)
    except ValueError as exc:
        raise ScheduleError("$.pulses", str(exc)) from None
    return seq, meta


def dump_schedule(seq: PulseSequence, meta: dict | None = None) -> str:
    return json.dumps(schedule_to_dict(seq, meta), indent=2, sort_keys=True) + "\n"


def load_schedule(path) -> tuple:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return schedule_from_dict(doc)
