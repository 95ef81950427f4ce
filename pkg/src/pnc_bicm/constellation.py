"""QPSK label maps and the superimposed constellation seen at the relay.

Labels are 2-bit tuples ``(b1, b2)`` stored as the integer ``2*b1 + b2``.
The first bit of each coded pair is ``b1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ra_code import as_bits

GRAY = "gray"
ANTI_GRAY = "anti_gray"
MAP_KINDS = (GRAY, ANTI_GRAY)

# angular order of the QPSK points, counter-clockwise from +1+1j
ANGULAR_ORDER = (1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j)
_ANTI_GRAY_ORDER = (0b00, 0b11, 0b01, 0b10)


@dataclass(frozen=True)
class LabelMap:
    """Bit-label to QPSK symbol table, indexed by ``2*b1 + b2``."""

    name: str
    table: tuple

    def symbol(self, label: int) -> complex:
        return self.table[label]

    def label_of(self, point: complex) -> int:
        return self.table.index(point)

    def to_text(self) -> str:
        rows = ["label real imag"]
        for label, point in enumerate(self.table):
            rows.append(f"{label >> 1}{label & 1} {point.real:+.0f} {point.imag:+.0f}")
        return "\n".join(rows) + "\n"


def make_label_map(kind: str) -> LabelMap:
    """Return the Gray or anti-Gray QPSK table.

    Gray puts ``b1`` on the in-phase axis and ``b2`` on the quadrature axis,
    ``(b1, b2) -> (1 - 2*b1) + 1j*(1 - 2*b2)``. Anti-Gray walks the circle
    with labels 00, 11, 01, 10 so neighbours alternate Hamming distance 2, 1.
    """
    if kind == GRAY:
        table = tuple(complex(1 - 2 * (lab >> 1), 1 - 2 * (lab & 1)) for lab in range(4))
    elif kind == ANTI_GRAY:
        lookup = dict(zip(_ANTI_GRAY_ORDER, ANGULAR_ORDER))
        table = tuple(lookup[lab] for lab in range(4))
    else:
        raise ValueError(f"unknown map kind {kind!r}, expected one of {MAP_KINDS}")
    return LabelMap(name=kind, table=table)


def adjacent_hamming_distances(label_map: LabelMap) -> list[int]:
    labels = [label_map.label_of(p) for p in ANGULAR_ORDER]
    return [bin(labels[i] ^ labels[(i + 1) % 4]).count("1") for i in range(4)]


def modulate(label_map: LabelMap, coded) -> np.ndarray:
    """Map coded bit pairs ``(coded[2t], coded[2t+1])`` to QPSK symbols."""
    coded = as_bits(coded, name="coded packet")
    if coded.size % 2:
        raise ValueError("coded packet length must be even for QPSK")
    labels = 2 * coded[0::2].astype(np.int64) + coded[1::2]
    return np.asarray(label_map.table, dtype=np.complex128)[labels]


@dataclass(frozen=True, eq=False)
class SuperposedConstellation:
    """All 16 constituent pairs of the relay constellation.

    Attributes:
        label1, label2: constituent labels of each pair (integers 0..3).
        points: complex sum ``s(label1) + s(label2)`` per pair.
        nc_labels: ``label1 ^ label2`` per pair.
        distinct_points: the 9 distinct superimposed points.
        by_label: (4, 4) array, row ``c`` holds the points with NC label ``c``.
        label_map: the map the constellation was built from.
    """

    label1: np.ndarray
    label2: np.ndarray
    points: np.ndarray
    nc_labels: np.ndarray
    distinct_points: np.ndarray
    by_label: np.ndarray
    label_map: LabelMap

    def points_for(self, nc_label: int) -> np.ndarray:
        return self.points[self.nc_labels == nc_label]


@lru_cache(maxsize=None)
def build_superposed(label_map: LabelMap) -> SuperposedConstellation:
    l1, l2 = np.meshgrid(np.arange(4), np.arange(4), indexing="ij")
    l1, l2 = l1.ravel(), l2.ravel()
    table = np.asarray(label_map.table, dtype=np.complex128)
    points = table[l1] + table[l2]
    distinct = np.unique(np.round(points, 12))
    nc = l1 ^ l2
    by_label = np.stack([points[nc == c] for c in range(4)])
    arrays = [l1, l2, points, nc, distinct, by_label]
    for a in arrays:
        a.setflags(write=False)
    return SuperposedConstellation(*arrays, label_map=label_map)
