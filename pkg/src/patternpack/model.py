"""Domain model: item types, instances, columns, layouts, solutions.

All types are immutable after construction and safe to share between
threads.  Serialization lives in :mod:`patternpack.cli`.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Iterator, Mapping


class InvalidInstanceError(ValueError):
    """Instance data violates a structural rule (bad range, bad dimension)."""


class InfeasibleInstanceError(ValueError):
    """Some item cannot be produced at all (larger than the bin)."""


class RegistryError(RuntimeError):
    """Corrupted type registry (cycle or dangling reference)."""


@dataclass(frozen=True)
class ItemType:
    """A rectangular item type, or a compound bundling items that must share a bin.

    Original types carry geometry; compound types carry only their
    constituent multiset and resolve recursively to original rectangles.
    """

    id: str
    width: int = 0   # mm, originals only
    height: int = 0  # mm, originals only
    from_count: int = 0  # minimum number of items to produce
    to_count: int = 0    # production cap including overproduction
    constituents: tuple[tuple[str, int], ...] = ()  # (type id, multiplicity)

    @property
    def is_compound(self) -> bool:
        return bool(self.constituents)

    def __post_init__(self) -> None:
        if self.is_compound:
            if sum(n for _, n in self.constituents) < 2:
                raise InvalidInstanceError(
                    f"compound type {self.id!r} needs at least 2 constituent items")
            if any(n <= 0 for _, n in self.constituents):
                raise InvalidInstanceError(
                    f"compound type {self.id!r} has a non-positive constituent count")
        else:
            if self.width <= 0 or self.height <= 0:
                raise InvalidInstanceError(
                    f"item type {self.id!r}: width and height must be positive")
        if self.from_count < 0:
            raise InvalidInstanceError(f"item type {self.id!r}: from must be >= 0")
        if self.from_count > self.to_count:
            raise InvalidInstanceError(
                f"item type {self.id!r}: from ({self.from_count}) exceeds to ({self.to_count})")


def derive_to(from_count: int, rate: float) -> int:
    """Production cap for a type given its minimum and the overproduction rate.

    Uses exact decimal arithmetic so e.g. (2000, 0.15) gives 2300, not 2299.
    Floor rounding: the cap is never exceeded, and never below ``from_count``.
    """
    if rate < 0:
        raise ValueError("overproduction rate must be >= 0")
    return floor(Fraction(from_count) * (1 + Fraction(str(rate))))


class TypeRegistry:
    """Append-only ordered registry of item types.

    Holds the instance's original types plus every compound type created
    during the search.  Registry order (insertion order) is the canonical
    tie-breaking order everywhere.
    """

    def __init__(self, originals: tuple["ItemType", ...] = ()):
        self._types: list[ItemType] = []
        self._index: dict[str, int] = {}
        self._expansion_cache: dict[str, tuple[str, ...]] = {}
        self._basis_cache: dict[tuple[str, frozenset[str]], dict[str, int]] = {}
        for t in originals:
            self.add(t)

    def add(self, item_type: ItemType) -> None:
        if item_type.id in self._index:
            raise InvalidInstanceError(f"duplicate item type id {item_type.id!r}")
        self._index[item_type.id] = len(self._types)
        self._types.append(item_type)

    def __contains__(self, type_id: str) -> bool:
        return type_id in self._index

    def __getitem__(self, type_id: str) -> ItemType:
        try:
            return self._types[self._index[type_id]]
        except KeyError:
            raise RegistryError(f"unknown item type {type_id!r}") from None

    def __iter__(self) -> Iterator[ItemType]:
        return iter(self._types)

    def __len__(self) -> int:
        return len(self._types)

    def order(self, type_id: str) -> int:
        """Position of a type in registry order."""
        try:
            return self._index[type_id]
        except KeyError:
            raise RegistryError(f"unknown item type {type_id!r}") from None

    def ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self._types)

    def expansion(self, type_id: str) -> tuple[str, ...]:
        """Original type ids realizing one unit of ``type_id``.

        Compound constituents are listed contiguously, in registry order,
        recursively.  Detects constituent cycles.
        """
        cached = self._expansion_cache.get(type_id)
        if cached is not None:
            return cached
        result = self._expand(type_id, visiting=set())
        self._expansion_cache[type_id] = result
        return result

    def _expand(self, type_id: str, visiting: set[str]) -> tuple[str, ...]:
        t = self[type_id]
        if not t.is_compound:
            return (type_id,)
        if type_id in visiting:
            raise RegistryError(f"cycle in compound constituents at {type_id!r}")
        visiting.add(type_id)
        parts: list[str] = []
        ordered = sorted(t.constituents, key=lambda cn: self.order(cn[0]))
        for cid, n in ordered:
            unit = self._expand(cid, visiting)
            parts.extend(unit * n)
        visiting.remove(type_id)
        return tuple(parts)

    def unit_area(self, type_id: str) -> int:
        """Total constituent rectangle area of one unit of a type, in mm^2."""
        total = 0
        for oid in self.expansion(type_id):
            o = self[oid]
            total += o.width * o.height
        return total

    def basis_counts(self, type_id: str,
                     basis: frozenset[str]) -> dict[str, int]:
        """One unit of ``type_id`` expressed over the given type basis.

        Types in the basis (and originals) stay opaque; compounds outside it
        are expanded into their constituents recursively.
        """
        key = (type_id, basis)
        cached = self._basis_cache.get(key)
        if cached is not None:
            return cached
        t = self[type_id]
        if type_id in basis or not t.is_compound:
            out = {type_id: 1}
        else:
            out = {}
            for cid, n in t.constituents:
                for inner, k in self.basis_counts(cid, basis).items():
                    out[inner] = out.get(inner, 0) + n * k
        self._basis_cache[key] = out
        return out

    def find_compound(self, i: str, j: str) -> ItemType | None:
        """Existing compound whose constituents are exactly one i and one j (two i if i == j)."""
        want = {i: 2} if i == j else {i: 1, j: 1}
        for t in self._types:
            if not t.is_compound:
                continue
            have: dict[str, int] = {}
            for cid, n in t.constituents:
                have[cid] = have.get(cid, 0) + n
            if have == want:
                return t
        return None


def expand_counts(counts: Mapping[str, int], registry: TypeRegistry) -> dict[str, int]:
    """Counts over original types only; the rectangle multiset is preserved."""
    out: dict[str, int] = {}
    for tid, n in counts.items():
        if n == 0:
            continue
        for oid in registry.expansion(tid):
            out[oid] = out.get(oid, 0) + n
    return out


@dataclass(frozen=True)
class ApartRule:
    """Apart-branch rule: items of a and b may not share a bin; when a == b,
    at most one item of a per bin.

    ``basis`` is the active type set when the rule was created.  The rule
    sees through compounds registered later (they cannot smuggle forbidden
    pairings past it) while compounds that were already active stay opaque:
    their internal pairings were forced by earlier together-branches and are
    exempt.
    """

    a: str
    b: str
    basis: frozenset[str]

    @property
    def is_cap(self) -> bool:
        return self.a == self.b

    def violated_by(self, counts: Mapping[str, int],
                    registry: TypeRegistry) -> bool:
        ca = cb = 0
        for tid, n in counts.items():
            if not n:
                continue
            bc = registry.basis_counts(tid, self.basis)
            ca += n * bc.get(self.a, 0)
            cb += n * bc.get(self.b, 0)
        if self.is_cap:
            return ca > 1
        return ca > 0 and cb > 0


def violates_rules(counts: Mapping[str, int], rules,
                   registry: TypeRegistry) -> bool:
    """True iff the counts break any apart-branch rule."""
    return any(rule.violated_by(counts, registry) for rule in rules)


@dataclass(frozen=True)
class Instance:
    """A packing problem: bin dimensions, clearance, and original item types."""

    bin_width: int   # mm
    bin_height: int  # mm
    spacing: int     # mm, pairwise clearance between items
    item_types: tuple[ItemType, ...]

    def __post_init__(self) -> None:
        if self.bin_width <= 0 or self.bin_height <= 0:
            raise InvalidInstanceError("bin dimensions must be positive")
        if self.spacing < 0:
            raise InvalidInstanceError("spacing must be >= 0")
        seen: set[str] = set()
        for t in self.item_types:
            if t.is_compound:
                raise InvalidInstanceError(
                    f"item type {t.id!r}: instances hold original types only")
            if t.id in seen:
                raise InvalidInstanceError(f"duplicate item type id {t.id!r}")
            seen.add(t.id)
            if t.width > self.bin_width or t.height > self.bin_height:
                raise InfeasibleInstanceError(
                    f"item type {t.id!r} ({t.width}x{t.height}) does not fit "
                    f"the {self.bin_width}x{self.bin_height} bin")

    def registry(self) -> TypeRegistry:
        return TypeRegistry(self.item_types)


@dataclass(frozen=True)
class Layout:
    """Axis-aligned placements (original type id, x, y) inside one bin; no rotation."""

    placements: tuple[tuple[str, int, int], ...] = ()

    def __len__(self) -> int:
        return len(self.placements)


@dataclass(frozen=True)
class Column:
    """A pattern: item counts for one bin plus a placement witness.

    ``counts`` is sparse (positive entries only), sorted by registry order
    at creation time.  Count vectors are pairwise distinct inside one
    node's pool.
    """

    counts: tuple[tuple[str, int], ...]
    witness: Layout
    node_scope: int = 0

    def counts_dict(self) -> dict[str, int]:
        return dict(self.counts)

    def count(self, type_id: str) -> int:
        for tid, n in self.counts:
            if tid == type_id:
                return n
        return 0

    def key(self) -> tuple[tuple[str, int], ...]:
        """Identity of the column for dedup purposes: the sparse count vector."""
        return self.counts


def make_column(counts: Mapping[str, int], witness: Layout,
                registry: TypeRegistry, node_scope: int = 0) -> Column:
    """Column with counts canonicalized to registry order, zeros dropped."""
    items = sorted(((tid, n) for tid, n in counts.items() if n > 0),
                   key=lambda kv: registry.order(kv[0]))
    return Column(counts=tuple(items), witness=witness, node_scope=node_scope)


def dense_counts(counts: Mapping[str, int], registry: TypeRegistry) -> tuple[int, ...]:
    """Count vector over the full registry, for lexicographic ordering."""
    return tuple(counts.get(t.id, 0) for t in registry)


@dataclass(frozen=True)
class Solution:
    """An integral assignment of bins to patterns."""

    assignments: tuple[tuple[Column, int], ...]  # (pattern, x_l > 0)
    s: tuple[tuple[str, int], ...]               # produced totals, original types
    bins: int
    patterns: int
    objective_report: float
    integral: bool = True

    def totals(self) -> dict[str, int]:
        return dict(self.s)


@dataclass(frozen=True)
class SolverConfig:
    """Weights, limits and strategy knobs for a solver run."""

    c1: float = 1.0                      # weight on distinct patterns
    c2: float = 1.0                      # weight on bins
    M: int | None = None                 # reporting bound; defaults to max to_j
    time_limit_seconds: float | None = None
    rng_seed: int = 0
    node_selection: str = "heuristic_min_heap"  # or "depth_first"
    pricing_random_sequences: int = 8
    overproduction_rate: float = 0.15

    def __post_init__(self) -> None:
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.node_selection not in ("heuristic_min_heap", "depth_first"):
            raise ValueError(f"unknown node selection {self.node_selection!r}")
        if self.pricing_random_sequences < 0:
            raise ValueError("pricing_random_sequences must be >= 0")
        if self.overproduction_rate < 0:
            raise ValueError("overproduction_rate must be >= 0")

    def effective_m(self, instance: Instance) -> int:
        m = self.M if self.M is not None else max(
            (t.to_count for t in instance.item_types), default=1)
        top = max((t.to_count for t in instance.item_types), default=0)
        if m < top:
            raise ValueError(f"M ({m}) must be >= the largest to ({top})")
        return max(m, 1)


def node_rng(seed: int, node_id: int) -> random.Random:
    """Node-local deterministic generator."""
    return random.Random(seed * 1_000_003 + node_id)
