"""Integer boxes, expansion and interior operators, and collar regions."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class Box:
    """Axis-aligned cell box: anchor is the lexicographically least cell."""

    anchor: tuple[int, ...]
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.anchor) != len(self.shape):
            raise ValueError("anchor and shape dimensions differ")
        if any(e < 1 for e in self.shape):
            raise ValueError(f"box extents must be >= 1, got {self.shape}")

    @property
    def dim(self) -> int:
        return len(self.anchor)

    @property
    def end(self) -> tuple[int, ...]:
        """Exclusive upper corner."""
        return tuple(a + e for a, e in zip(self.anchor, self.shape))

    @property
    def volume(self) -> int:
        return math.prod(self.shape)

    def cells(self) -> Iterator[tuple[int, ...]]:
        """All cells in lexicographic order."""
        ranges = [range(a, a + e) for a, e in zip(self.anchor, self.shape)]
        return iter(itertools.product(*ranges))

    def contains_cell(self, v: tuple[int, ...]) -> bool:
        return all(a <= x < a + e for x, a, e in zip(v, self.anchor, self.shape))

    def contains_box(self, other: "Box") -> bool:
        return all(
            sa <= oa and oa + oe <= sa + se
            for sa, se, oa, oe in zip(self.anchor, self.shape, other.anchor, other.shape)
        )

    def intersect(self, other: "Box") -> "Box | None":
        lo = tuple(max(a, b) for a, b in zip(self.anchor, other.anchor))
        hi = tuple(min(a, b) for a, b in zip(self.end, other.end))
        if any(h <= l for l, h in zip(lo, hi)):
            return None
        return Box(lo, tuple(h - l for l, h in zip(lo, hi)))

    def translate(self, v: tuple[int, ...]) -> "Box":
        return Box(tuple(a + x for a, x in zip(self.anchor, v)), self.shape)


class Region:
    """Finite cell set with canonical (lexicographic) iteration order."""

    __slots__ = ("cells", "_set")

    def __init__(self, cells: Iterable[tuple[int, ...]]) -> None:
        self._set = frozenset(tuple(c) for c in cells)
        self.cells = tuple(sorted(self._set))

    def __contains__(self, v: tuple[int, ...]) -> bool:
        return tuple(v) in self._set

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Region) and self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        return f"Region({len(self.cells)} cells)"


def expand(b: Box, s: int) -> Box:
    """Grow ``b`` by ``s`` cells on every face."""
    if s < 0:
        raise ValueError("expansion step must be >= 0")
    return Box(tuple(a - s for a in b.anchor), tuple(e + 2 * s for e in b.shape))


def interior(b: Box, s: int) -> Box | None:
    """Shrink ``b`` by ``s`` on every face; None when nothing is left."""
    if s < 0:
        raise ValueError("interior step must be >= 0")
    shape = tuple(e - 2 * s for e in b.shape)
    if any(e < 1 for e in shape):
        return None
    return Box(tuple(a + s for a in b.anchor), shape)


def outer_collar(b: Box, s: int) -> Region:
    """Cells of expand(b, s) not in b."""
    grown = expand(b, s)
    return Region(v for v in grown.cells() if not b.contains_cell(v))


def inner_collar(b: Box, s: int) -> Region:
    """Cells of b not in interior(b, s)."""
    core = interior(b, s)
    if core is None:
        return Region(b.cells())
    return Region(v for v in b.cells() if not core.contains_cell(v))
