"""Periodic brick walls and uniform filling between misaligned walls.

A brick wall is the doubly periodic word whose tiles are translates of one
large brick on a full sublattice.  The filler interpolates between an inner
wall written on a box and an outer wall far away: complete the cut bricks on
each side, split the remaining collar into axis slabs, and tile each slab by
strips of small family tiles.  The collar width needed for this is the
family's ``fill_length`` when both walls share the brick shape, and the
obvious analogue when the periods differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .geometry import Box, expand
from .numerics import RectFamily, represent
from .sft import Alphabet, Symbol, SymbolicWord, Tiling


class NonMultipleExtent(ValueError):
    def __init__(self, axis: int, extent: int, side: int) -> None:
        super().__init__(f"extent {extent} along axis {axis} is not a multiple of {side}")
        self.axis = axis


class InwardEmpty(ValueError):
    pass


class GapTooNarrow(ValueError):
    def __init__(self, axis: int, side: int, gap: int, threshold: int) -> None:
        face = "low" if side == 0 else "high"
        super().__init__(
            f"collar gap {gap} at the {face} face of axis {axis} is <= threshold {threshold}"
        )
        self.face = (axis, side)


class NoMatchingTranslate(ValueError):
    pass


class BrickWall:
    """The infinite periodic word of one large tile repeated on its lattice."""

    def __init__(self, alphabet: Alphabet, tile: int | str, translate: Sequence[int]) -> None:
        self.alphabet = alphabet
        self.tile = tile
        self.period = alphabet.shape(tile)
        self.translate = tuple(int(t) % p for t, p in zip(translate, self.period))

    def shifted(self, v: Sequence[int]) -> "BrickWall":
        return BrickWall(
            self.alphabet, self.tile, tuple(t + x for t, x in zip(self.translate, v))
        )

    def aligned_with(self, other: "BrickWall") -> bool:
        return (
            self.tile == other.tile
            and self.period == other.period
            and self.translate == other.translate
        )

    def symbol_at(self, v: Sequence[int]) -> Symbol:
        offset = tuple((x - t) % p for x, t, p in zip(v, self.translate, self.period))
        return Symbol(self.tile, offset)

    def floor_align(self, x: int, axis: int) -> int:
        """Largest lattice line <= x along ``axis``."""
        p = self.period[axis]
        return x - (x - self.translate[axis]) % p

    def ceil_align(self, x: int, axis: int) -> int:
        """Smallest lattice line >= x along ``axis``."""
        p = self.period[axis]
        return x + (self.translate[axis] - x) % p

    def materialize(self, box: Box) -> SymbolicWord:
        return SymbolicWord(self.alphabet, box, self.pattern_over(box))

    def pattern_over(self, box: Box) -> np.ndarray:
        """Symbol-index array of the wall restricted to ``box``."""
        pattern = self.alphabet.block(self.tile)
        phase = tuple(
            (a - t) % p for a, t, p in zip(box.anchor, self.translate, self.period)
        )
        rolled = np.roll(pattern, tuple(-ph for ph in phase), axis=tuple(range(box.dim)))
        reps = tuple(-(-e // p) for e, p in zip(box.shape, self.period))
        tiled = np.tile(rolled, reps)
        return tiled[tuple(slice(0, e) for e in box.shape)].copy()

    def placements_in(self, box: Box) -> Tiling:
        """Whole bricks contained in ``box``."""
        anchors_1d = []
        for axis in range(box.dim):
            start = self.ceil_align(box.anchor[axis], axis)
            stop = box.end[axis] - self.period[axis]
            anchors_1d.append(np.arange(start, stop + 1, self.period[axis], dtype=np.int64))
        if any(len(a) == 0 for a in anchors_1d):
            anchors = np.zeros((0, box.dim), dtype=np.int64)
        else:
            mesh = np.meshgrid(*anchors_1d, indexing="ij")
            anchors = np.stack([m.ravel() for m in mesh], axis=1)
        codes = np.zeros(len(anchors), dtype=np.int32)
        shapes = {self.tile: self.period}
        return Tiling(shapes, codes, anchors, box)


def brick_wall(alphabet: Alphabet, translate: Sequence[int], tile: int | str = "P") -> BrickWall:
    return BrickWall(alphabet, tile, translate)


def complete_partial_tiles(b: Box, wall: BrickWall, direction: str) -> Box:
    """Align ``b`` to the wall lattice.

    ``outward``: smallest aligned box containing b, so every wall tile that
    meets b lies wholly inside the result.  ``inward``: largest aligned box
    inside b; raises InwardEmpty when b contains no whole wall tile.
    """
    if direction not in ("outward", "inward"):
        raise ValueError(f"unknown direction {direction!r}")
    lo = []
    hi = []
    for axis in range(b.dim):
        if direction == "outward":
            lo.append(wall.floor_align(b.anchor[axis], axis))
            hi.append(wall.ceil_align(b.end[axis], axis))
        else:
            lo.append(wall.ceil_align(b.anchor[axis], axis))
            hi.append(wall.floor_align(b.end[axis], axis))
    if direction == "inward" and any(h - l < p for l, h, p in zip(lo, hi, wall.period)):
        raise InwardEmpty(f"{b} contains no whole tile of period {wall.period}")
    return Box(tuple(lo), tuple(h - l for l, h in zip(lo, hi)))


@dataclass(frozen=True)
class CollarPiece:
    """One slab of a collar decomposition and the axis its strips run along."""

    box: Box
    axis: int
    side: int


def decompose_collar(inner: Box, outer: Box, threshold: int) -> list[CollarPiece]:
    """Split outer minus inner into axis slabs with representable gaps.

    Faces are processed axis 0 low, axis 0 high, axis 1 low, ...  Each slab's
    free axis is the face axis; its other extents are inherited from a single
    box (inner for earlier axes, outer for later ones).  A gap of zero is a
    flush face and produces no slab; a gap in 1..threshold cannot be strip
    tiled and raises GapTooNarrow.
    """
    if not outer.contains_box(inner):
        raise ValueError("outer must contain inner")
    for axis in range(outer.dim):
        for side, gap in (
            (0, inner.anchor[axis] - outer.anchor[axis]),
            (1, outer.end[axis] - inner.end[axis]),
        ):
            if 0 < gap <= threshold:
                raise GapTooNarrow(axis, side, gap, threshold)
    pieces = []
    index = 0
    for axis in range(outer.dim):
        for side in (0, 1):
            boxes = _face_slab(inner, outer, axis, side)
            if boxes is not None:
                pieces.append(CollarPiece(boxes, axis, side))
            index += 1
    return pieces


def _face_slab(inner: Box, outer: Box, axis: int, side: int) -> Box | None:
    if side == 0:
        lo, hi = outer.anchor[axis], inner.anchor[axis]
    else:
        lo, hi = inner.end[axis], outer.end[axis]
    if hi <= lo:
        return None
    anchor = []
    shape = []
    for a in range(outer.dim):
        if a == axis:
            anchor.append(lo)
            shape.append(hi - lo)
        elif a < axis:
            anchor.append(inner.anchor[a])
            shape.append(inner.shape[a])
        else:
            anchor.append(outer.anchor[a])
            shape.append(outer.shape[a])
    return Box(tuple(anchor), tuple(shape))


@dataclass(frozen=True)
class StripRun:
    """A run of identical tiles filling a sub-box of a collar slab."""

    tile: int
    box: Box
    counts: tuple[int, ...]

    def anchors(self) -> np.ndarray:
        shape = tuple(e // c for e, c in zip(self.box.shape, self.counts))
        axes = [
            np.arange(a, a + e, s, dtype=np.int64)
            for a, e, s in zip(self.box.anchor, self.box.shape, shape)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def strip_runs(b: Box, f: RectFamily, axis: int) -> list[StripRun]:
    """Decompose ``b`` into full-cross-section strips of single tiles.

    The extent along ``axis`` is written as a nonnegative combination of the
    family's sides there (lexicographically greatest coefficients); strip j
    then holds a grid of tile j.  Every other extent must be divisible by the
    corresponding side of each tile that actually appears.
    """
    sides = f.axis_sides(axis)
    coeffs = represent(b.shape[axis], sides)
    runs = []
    pos = b.anchor[axis]
    for j, (a_j, side) in enumerate(zip(coeffs, sides)):
        if a_j == 0:
            continue
        tile_shape = f.shapes[j]
        counts = []
        for ax in range(b.dim):
            if ax == axis:
                counts.append(a_j)
                continue
            if b.shape[ax] % tile_shape[ax] != 0:
                raise NonMultipleExtent(ax, b.shape[ax], tile_shape[ax])
            counts.append(b.shape[ax] // tile_shape[ax])
        anchor = list(b.anchor)
        anchor[axis] = pos
        shape = list(b.shape)
        shape[axis] = a_j * side
        runs.append(StripRun(j + 1, Box(tuple(anchor), tuple(shape)), tuple(counts)))
        pos += a_j * side
    return runs


def strip_tile(b: Box, f: RectFamily, axis: int) -> Tiling:
    """Tile ``b`` exactly by strips of family tiles along ``axis``."""
    runs = strip_runs(b, f, axis)
    shapes = {j + 1: s for j, s in enumerate(f.shapes)}
    codes = []
    anchors = []
    for run in runs:
        a = run.anchors()
        anchors.append(a)
        codes.append(np.full(len(a), run.tile - 1, dtype=np.int32))
    if codes:
        return Tiling(shapes, np.concatenate(codes), np.concatenate(anchors), b)
    return Tiling(shapes, np.zeros(0, dtype=np.int32), np.zeros((0, b.dim), dtype=np.int64), b)


def collar_width(inner_wall: BrickWall, outer_wall: BrickWall, base: RectFamily) -> int:
    """Collar wide enough to complete both walls and leave representable gaps."""
    return base.threshold + sum(inner_wall.period) + sum(outer_wall.period)


class FilledWord:
    """Lazy infinite word: inner wall on a core box, outer wall far away,
    explicit strip runs on the collar in between."""

    def __init__(
        self,
        inner_wall: BrickWall,
        inner_core: Box | None,
        outer_wall: BrickWall,
        outer_core: Box | None,
        runs: list[StripRun],
        base: RectFamily,
        footprint: Box | None,
    ) -> None:
        self.inner_wall = inner_wall
        self.inner_core = inner_core
        self.outer_wall = outer_wall
        self.outer_core = outer_core
        self.runs = runs
        self.base = base
        self.footprint = footprint
        self.alphabet = outer_wall.alphabet

    @classmethod
    def pure_wall(cls, wall: BrickWall, base: RectFamily) -> "FilledWord":
        return cls(wall, None, wall, None, [], base, None)

    def symbol_at(self, v: Sequence[int]) -> Symbol:
        v = tuple(int(x) for x in v)
        if self.inner_core is not None and self.inner_core.contains_cell(v):
            return self.inner_wall.symbol_at(v)
        if self.outer_core is None or not self.outer_core.contains_cell(v):
            return self.outer_wall.symbol_at(v)
        for run in self.runs:
            if run.box.contains_cell(v):
                tile_shape = self.alphabet.shape(run.tile)
                offset = tuple(
                    (x - a) % s for x, a, s in zip(v, run.box.anchor, tile_shape)
                )
                return Symbol(run.tile, offset)
        raise AssertionError(f"cell {v} missed every fill region")

    def materialize(self, box: Box) -> SymbolicWord:
        grid = self.outer_wall.pattern_over(box)
        word = SymbolicWord(self.alphabet, box, grid)
        if self.inner_core is not None:
            clip = box.intersect(self.inner_core)
            if clip is not None:
                word.paste(clip, self.inner_wall.pattern_over(clip))
        for run in self.runs:
            clip = box.intersect(run.box)
            if clip is None:
                continue
            tile_shape = self.alphabet.shape(run.tile)
            phase_wall = BrickWall(self.alphabet, run.tile, run.box.anchor)
            word.paste(clip, phase_wall.pattern_over(clip))
        return word

    def collar_tiling(self) -> Tiling:
        """The explicit small-tile placements of the filling collar."""
        shapes = {j + 1: s for j, s in enumerate(self.base.shapes)}
        codes = []
        anchors = []
        for run in self.runs:
            a = run.anchors()
            anchors.append(a)
            codes.append(np.full(len(a), run.tile - 1, dtype=np.int32))
        if codes:
            return Tiling(shapes, np.concatenate(codes), np.concatenate(anchors), self.footprint)
        dim = self.base.dim
        return Tiling(shapes, np.zeros(0, dtype=np.int32), np.zeros((0, dim), dtype=np.int64), self.footprint)


def fill_between(
    inner_wall: BrickWall,
    inner_box: Box,
    outer_wall: BrickWall,
    base: RectFamily,
    width: int | None = None,
) -> FilledWord:
    """Valid word equal to inner_wall on inner_box and outer_wall outside
    expand(inner_box, width).

    Both wall periods must be per-axis multiples of every base tile side so
    that completed cores have strip-tileable cross sections.
    """
    if inner_wall.aligned_with(outer_wall):
        return FilledWord.pure_wall(outer_wall, base)
    for wall in (inner_wall, outer_wall):
        for axis in range(base.dim):
            for side in base.axis_sides(axis):
                if wall.period[axis] % side != 0:
                    raise NonMultipleExtent(axis, wall.period[axis], side)
    if width is None:
        width = collar_width(inner_wall, outer_wall, base)
    inner_core = complete_partial_tiles(inner_box, inner_wall, "outward")
    footprint = expand(inner_box, width)
    outer_core = complete_partial_tiles(footprint, outer_wall, "inward")
    pieces = decompose_collar(inner_core, outer_core, base.threshold)
    runs: list[StripRun] = []
    for piece in pieces:
        runs.extend(strip_runs(piece.box, base, piece.axis))
    return FilledWord(inner_wall, inner_core, outer_wall, outer_core, runs, base, footprint)


def uniform_fill(
    inner_wall: BrickWall, inner_box: Box, outer_wall: BrickWall, f: RectFamily
) -> FilledWord:
    """Interpolate between two translates of the family's brick wall.

    The transition happens inside a collar of width ``f.fill_length`` around
    ``inner_box``; aligned walls return the wall itself.
    """
    return fill_between(inner_wall, inner_box, outer_wall, f, f.fill_length)


def restricted_fill(
    inner_wall: BrickWall, inner_box: Box, outer_wall: BrickWall, base: RectFamily
) -> FilledWord:
    """Fill between walls of different periods using only base-family tiles.

    The inner wall may have a coarser period (a brick subsuming more tiles);
    the collar is still tiled exclusively by the base tiles, which is what
    keeps later redistribution stages honest about which small tiles appear.
    """
    return fill_between(inner_wall, inner_box, outer_wall, base)


class GluedWord:
    """A finite block overlaid on a fill between its boundary wall and an
    ambient wall."""

    def __init__(self, block: SymbolicWord, fill: FilledWord) -> None:
        self.block = block
        self.fill = fill
        self.alphabet = block.alphabet

    def symbol_at(self, v: Sequence[int]) -> Symbol:
        v = tuple(int(x) for x in v)
        if self.block.box.contains_cell(v):
            sym = self.block.cell(v)
            if sym is not None:
                return sym
        return self.fill.symbol_at(v)

    def materialize(self, box: Box) -> SymbolicWord:
        word = self.fill.materialize(box)
        clip = box.intersect(self.block.box)
        if clip is not None:
            word.paste(clip, self.block.subgrid(clip))
        return word


def infer_wall_translate(block: SymbolicWord) -> BrickWall:
    """Recover the unique brick wall matching the block's outermost ring.

    Every ring cell must carry the same large tile with offsets consistent
    with a single translate; otherwise NoMatchingTranslate is raised.
    """
    alphabet = block.alphabet
    box = block.box
    candidate: BrickWall | None = None
    for cell in _ring_cells(box):
        sym = block.cell(cell)
        if sym is None:
            raise NoMatchingTranslate(f"ring cell {cell} is unassigned")
        if isinstance(sym.tile, int):
            raise NoMatchingTranslate(f"ring cell {cell} carries small tile {sym.tile}")
        if candidate is None:
            translate = tuple(c - o for c, o in zip(cell, sym.offset))
            candidate = BrickWall(alphabet, sym.tile, translate)
        if candidate.symbol_at(cell) != sym:
            raise NoMatchingTranslate(
                f"ring cell {cell} carries {sym}, expected {candidate.symbol_at(cell)}"
            )
    if candidate is None:
        raise NoMatchingTranslate("block has no boundary ring")
    return candidate


def _ring_cells(box: Box) -> Iterator[tuple[int, ...]]:
    from .geometry import inner_collar

    for cell in inner_collar(box, 1):
        yield cell


def glue(block: SymbolicWord, ambient: BrickWall, base: RectFamily) -> GluedWord:
    """Extend a block whose boundary ring matches some wall into ``ambient``.

    The result keeps the block verbatim, agrees with ``ambient`` outside the
    block expanded by the collar width, and is valid across both seams: the
    fill agrees with the inferred wall on the whole block footprint, so the
    one-step rules across the block boundary only ever see wall symbols that
    are present in the block's own ring.
    """
    inner = infer_wall_translate(block)
    fill = fill_between(inner, block.box, ambient, base)
    return GluedWord(block, fill)
