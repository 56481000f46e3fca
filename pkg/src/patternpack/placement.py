"""Bottom-left placement under pairwise clearance, plus an independent verifier.

Candidate-point scheme: the origin plus, for every placed rectangle, the two
offset corners (x + w + d, y) and (x, y + h + d).  Each rectangle goes to the
feasible candidate with minimal y, ties broken by minimal x.  No clearance is
required towards the bin edges.
"""

from collections import Counter
from typing import Iterable, Mapping, Sequence

import numpy as np

from .model import Instance, Layout, TypeRegistry, expand_counts

Rect = tuple[int, int, int, int]  # (x, y, w, h)


def separated(r1: Rect, r2: Rect, d: int) -> bool:
    """True iff the two rectangles keep an axis-aligned gap >= d."""
    x1, y1, w1, h1 = r1
    x2, y2, w2, h2 = r2
    return (x1 + w1 + d <= x2 or x2 + w2 + d <= x1
            or y1 + h1 + d <= y2 or y2 + h2 + d <= y1)


class BottomLeftPacker:
    """Incremental bottom-left packer for one bin.

    Placing rectangle k depends only on rectangles 1..k-1, so feeding a
    sequence one element at a time is equivalent to a batch run on the whole
    sequence.  ``mark``/``reset_to`` allow cheap rollback of a suffix.
    """

    _GROW = 256

    def __init__(self, bin_width: int, bin_height: int, spacing: int):
        self.bin_width = bin_width
        self.bin_height = bin_height
        self.spacing = spacing
        cap = self._GROW
        self._px = np.zeros(cap, dtype=np.int64)
        self._py = np.zeros(cap, dtype=np.int64)
        self._pw = np.zeros(cap, dtype=np.int64)
        self._ph = np.zeros(cap, dtype=np.int64)
        self._cx = np.zeros(2 * cap + 1, dtype=np.int64)
        self._cy = np.zeros(2 * cap + 1, dtype=np.int64)
        self._n_placed = 0
        self._n_cand = 1  # the origin

    def _grow(self) -> None:
        for name in ("_px", "_py", "_pw", "_ph", "_cx", "_cy"):
            arr = getattr(self, name)
            setattr(self, name, np.concatenate([arr, np.zeros_like(arr)]))

    def mark(self) -> tuple[int, int]:
        return self._n_placed, self._n_cand

    def reset_to(self, mark: tuple[int, int]) -> None:
        self._n_placed, self._n_cand = mark

    def place(self, w: int, h: int) -> tuple[int, int] | None:
        """Place one w x h rectangle; returns its (x, y) or None if it cannot fit."""
        n, c, d = self._n_placed, self._n_cand, self.spacing
        cx, cy = self._cx[:c], self._cy[:c]
        ok = (cx + w <= self.bin_width) & (cy + h <= self.bin_height)
        if n:
            px, py = self._px[:n], self._py[:n]
            pw, ph = self._pw[:n], self._ph[:n]
            sep = ((cx[:, None] + (w + d) <= px[None, :])
                   | (px[None, :] + pw[None, :] + d <= cx[:, None])
                   | (cy[:, None] + (h + d) <= py[None, :])
                   | (py[None, :] + ph[None, :] + d <= cy[:, None]))
            ok &= sep.all(axis=1)
        if not ok.any():
            return None
        idx = np.flatnonzero(ok)
        best = idx[np.lexsort((cx[idx], cy[idx]))[0]]
        x, y = int(cx[best]), int(cy[best])
        if n + 1 > self._px.shape[0] or c + 2 > self._cx.shape[0]:
            self._grow()
        self._px[n], self._py[n], self._pw[n], self._ph[n] = x, y, w, h
        self._cx[c], self._cy[c] = x + w + d, y
        self._cx[c + 1], self._cy[c + 1] = x, y + h + d
        self._n_placed = n + 1
        self._n_cand = c + 2
        return x, y

    def placements(self) -> list[Rect]:
        n = self._n_placed
        return [(int(self._px[i]), int(self._py[i]), int(self._pw[i]), int(self._ph[i]))
                for i in range(n)]


def bottom_left_place(rectangles: Sequence[tuple[int, int]], bin_width: int,
                      bin_height: int, spacing: int) -> list[tuple[int, int]] | None:
    """Positions for the rectangles in the given order, or None if some rectangle
    has no feasible candidate point.  Deterministic for a fixed input order."""
    packer = BottomLeftPacker(bin_width, bin_height, spacing)
    out: list[tuple[int, int]] = []
    for w, h in rectangles:
        pos = packer.place(w, h)
        if pos is None:
            return None
        out.append(pos)
    return out


def place_counts(counts: Mapping[str, int], order: Sequence[str],
                 instance: Instance, registry: TypeRegistry) -> Layout | None:
    """Place the expanded multiset of ``counts`` in the given original-type order.

    ``order`` must be a permutation of the expansion of ``counts``; a compound
    contributes all its constituent rectangles to the same bin or the whole
    placement fails.
    """
    expanded = expand_counts(counts, registry)
    if Counter(order) != Counter({k: v for k, v in expanded.items() if v > 0}):
        raise ValueError("order is not a permutation of the expanded counts")
    rects = []
    for oid in order:
        t = registry[oid]
        rects.append((t.width, t.height))
    placed = bottom_left_place(rects, instance.bin_width, instance.bin_height,
                               instance.spacing)
    if placed is None:
        return None
    return Layout(tuple((oid, x, y) for oid, (x, y) in zip(order, placed)))


def verify_layout(layout: Layout, counts: Mapping[str, int], instance: Instance,
                  registry: TypeRegistry | None = None) -> bool:
    """Independent check: in-bin, pairwise separated, multiset matches the counts."""
    if registry is None:
        registry = instance.registry()
    try:
        expected = {k: v for k, v in expand_counts(counts, registry).items() if v > 0}
    except Exception:
        return False
    got = Counter(oid for oid, _, _ in layout.placements)
    if got != Counter(expected):
        return False
    rects: list[Rect] = []
    for oid, x, y in layout.placements:
        t = registry[oid]
        if t.is_compound:
            return False
        if x < 0 or y < 0 or x + t.width > instance.bin_width \
                or y + t.height > instance.bin_height:
            return False
        rects.append((x, y, t.width, t.height))
    d = instance.spacing
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if not separated(rects[i], rects[j], d):
                return False
    return True


def expansion_sequence(counts: Mapping[str, int], type_order: Iterable[str],
                       registry: TypeRegistry) -> list[str]:
    """Original-type placement order: types in ``type_order``, copies contiguous,
    compound constituents contiguous in registry order."""
    out: list[str] = []
    for tid in type_order:
        n = counts.get(tid, 0)
        if n <= 0:
            continue
        unit = registry.expansion(tid)
        out.extend(unit * n)
    return out
