"""Symbolic coding of rectangle tilings as a nearest-neighbour shift.

Every cell of a tiling is labelled by the tile covering it together with the
cell's offset inside that tile.  The resulting word obeys a one-step rule per
axis: inside a tile the offset must increment, and at a tile's far face the
next symbol may be any tile's near face.  Words over box domains are stored
as integer grids (symbol indices, -1 for unassigned) so that validation and
decoding stay vectorised on multi-million-cell windows.
"""

from __future__ import annotations

import math
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .geometry import Box
from .numerics import RectFamily

TileId = int | str


class InvalidWord(ValueError):
    pass


class Symbol(NamedTuple):
    tile: int | str
    offset: tuple[int, ...]


class Violation(NamedTuple):
    cell: tuple[int, ...]
    axis: int
    symbol: Symbol
    neighbor: Symbol


class Placement(NamedTuple):
    tile: TileId
    anchor: tuple[int, ...]


def tile_sort_key(tile: TileId) -> tuple[int, int]:
    """Small tiles by index, then large tiles by their stage number."""
    if isinstance(tile, int):
        return (0, tile)
    suffix = tile[1:]
    return (1, int(suffix) if suffix else 0)


class Alphabet:
    """Symbol table for a tile-shape map, with cached numpy lookup tables."""

    def __init__(self, dim: int, tile_shapes: Mapping[TileId, Sequence[int]]) -> None:
        self.dim = dim
        self.tile_shapes: dict[int | str, tuple[int, ...]] = {}
        for tile, shape in tile_shapes.items():
            vec = tuple(int(x) for x in shape)
            if len(vec) != dim or any(x < 1 for x in vec):
                raise ValueError(f"bad shape {vec} for tile {tile!r}")
            self.tile_shapes[tile] = vec
        self.tiles = sorted(self.tile_shapes, key=tile_sort_key)
        self.symbols: list[Symbol] = []
        for tile in self.tiles:
            for offset in Box((0,) * dim, self.tile_shapes[tile]).cells():
                self.symbols.append(Symbol(tile, offset))
        self._index = {s: i for i, s in enumerate(self.symbols)}
        n = len(self.symbols)
        self.tile_codes = np.array(
            [self.tiles.index(s.tile) for s in self.symbols], dtype=np.int32
        )
        self.offsets = np.array([s.offset for s in self.symbols], dtype=np.int32)
        self.sym_shapes = np.array(
            [self.tile_shapes[s.tile] for s in self.symbols], dtype=np.int32
        )
        self.is_anchor = np.all(self.offsets == 0, axis=1)
        self._transitions: dict[int, np.ndarray] = {}
        self._blocks: dict[int | str, np.ndarray] = {}
        self.size = n

    def index(self, symbol: Symbol) -> int:
        return self._index[symbol]

    def symbol(self, idx: int) -> Symbol:
        return self.symbols[idx]

    def shape(self, tile: TileId) -> tuple[int, ...]:
        return self.tile_shapes[tile]

    def tile_code(self, tile: TileId) -> int:
        return self.tiles.index(tile)

    def block(self, tile: TileId) -> np.ndarray:
        """Symbol-index grid of one whole tile (offset -> index)."""
        if tile not in self._blocks:
            shape = self.tile_shapes[tile]
            arr = np.empty(shape, dtype=np.int32)
            for off in Box((0,) * self.dim, shape).cells():
                arr[off] = self._index[Symbol(tile, off)]
            self._blocks[tile] = arr
        return self._blocks[tile]

    def transition(self, axis: int) -> np.ndarray:
        """Boolean table T[a, b]: symbol b may sit one step up ``axis`` from a."""
        if axis not in self._transitions:
            off_a = self.offsets[:, None, :]
            off_b = self.offsets[None, :, :]
            same_tile = self.tile_codes[:, None] == self.tile_codes[None, :]
            at_face = self.offsets[:, axis] == self.sym_shapes[:, axis] - 1
            step = off_b - off_a
            unit = np.zeros(self.dim, dtype=np.int32)
            unit[axis] = 1
            increments = np.all(step == unit, axis=2)
            interior_ok = same_tile & increments
            face_ok = self.offsets[None, :, axis] == 0
            table = np.where(at_face[:, None], face_ok, interior_ok)
            self._transitions[axis] = table
        return self._transitions[axis]


def build_alphabet(
    f: RectFamily, large: Mapping[TileId, Sequence[int]] | None = None
) -> Alphabet:
    """Alphabet of the family's tiles plus large brick tiles.

    By default a single large tile ``"P"`` with the family's product shape is
    included; pass an explicit mapping (possibly empty) to override.
    """
    shapes: dict[int | str, Sequence[int]] = {
        j + 1: s for j, s in enumerate(f.shapes)
    }
    if large is None:
        large = {"P": f.large_shape}
    for tile, shape in large.items():
        shapes[tile] = shape
    return Alphabet(f.dim, shapes)


def allowed_neighbor(alphabet: Alphabet, s: Symbol, axis: int, t: Symbol) -> bool:
    """One-step rule: does symbol ``t`` legally follow ``s`` along ``axis``?"""
    shape = alphabet.shape(s.tile)
    if s.offset[axis] < shape[axis] - 1:
        expected = s.offset[:axis] + (s.offset[axis] + 1,) + s.offset[axis + 1 :]
        return t.tile == s.tile and t.offset == expected
    return t.offset[axis] == 0


class SymbolicWord:
    """Partial word over a box: an int grid of symbol indices, -1 unassigned."""

    def __init__(self, alphabet: Alphabet, box: Box, grid: np.ndarray | None = None) -> None:
        self.alphabet = alphabet
        self.box = box
        if grid is None:
            grid = np.full(box.shape, -1, dtype=np.int32)
        if tuple(grid.shape) != box.shape:
            raise ValueError("grid does not match box shape")
        self.grid = grid

    @classmethod
    def from_symbols(
        cls, alphabet: Alphabet, assignment: Mapping[tuple[int, ...], Symbol]
    ) -> "SymbolicWord":
        if not assignment:
            raise ValueError("assignment must be nonempty")
        cells = list(assignment)
        lo = tuple(min(c[a] for c in cells) for a in range(alphabet.dim))
        hi = tuple(max(c[a] for c in cells) for a in range(alphabet.dim))
        box = Box(lo, tuple(h - l + 1 for l, h in zip(lo, hi)))
        word = cls(alphabet, box)
        for cell, sym in assignment.items():
            word.set_cell(cell, sym)
        return word

    def _rel(self, v: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(x - a for x, a in zip(v, self.box.anchor))

    def set_cell(self, v: tuple[int, ...], symbol: Symbol) -> None:
        self.grid[self._rel(v)] = self.alphabet.index(symbol)

    def cell(self, v: tuple[int, ...]) -> Symbol | None:
        if not self.box.contains_cell(v):
            return None
        idx = int(self.grid[self._rel(v)])
        return None if idx < 0 else self.alphabet.symbol(idx)

    def slices_for(self, sub: Box) -> tuple[slice, ...]:
        if not self.box.contains_box(sub):
            raise ValueError("sub-box leaves the word's box")
        return tuple(
            slice(a - b, a - b + e)
            for a, b, e in zip(sub.anchor, self.box.anchor, sub.shape)
        )

    def paste(self, sub: Box, values: np.ndarray) -> None:
        self.grid[self.slices_for(sub)] = values

    def subgrid(self, sub: Box) -> np.ndarray:
        return self.grid[self.slices_for(sub)]

    def restrict(self, sub: Box) -> "SymbolicWord":
        return SymbolicWord(self.alphabet, sub, self.subgrid(sub).copy())

    @property
    def assigned_count(self) -> int:
        return int(np.count_nonzero(self.grid >= 0))

    @property
    def is_full(self) -> bool:
        return bool(np.all(self.grid >= 0))

    def iter_cells(self) -> Iterator[tuple[tuple[int, ...], Symbol]]:
        """Assigned cells in lexicographic order."""
        for rel in np.argwhere(self.grid >= 0):
            cell = tuple(int(a + r) for a, r in zip(self.box.anchor, rel))
            yield cell, self.alphabet.symbol(int(self.grid[tuple(rel)]))

    def equals_on(self, other: "SymbolicWord", sub: Box) -> bool:
        return bool(np.array_equal(self.subgrid(sub), other.subgrid(sub)))


def translate_word(word: SymbolicWord, v: tuple[int, ...]) -> SymbolicWord:
    """Shift the whole word by ``v`` (content moves with the domain)."""
    return SymbolicWord(word.alphabet, word.box.translate(v), word.grid)


def validate_word(word: SymbolicWord) -> list[Violation]:
    """All one-step adjacency violations between assigned cell pairs."""
    out: list[Violation] = []
    grid = word.grid
    alphabet = word.alphabet
    for axis in range(alphabet.dim):
        lo = [slice(None)] * alphabet.dim
        hi = [slice(None)] * alphabet.dim
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        a = grid[tuple(lo)]
        b = grid[tuple(hi)]
        both = (a >= 0) & (b >= 0)
        if not np.any(both):
            continue
        table = alphabet.transition(axis)
        bad = np.zeros(a.shape, dtype=bool)
        bad[both] = ~table[a[both], b[both]]
        for rel in np.argwhere(bad):
            cell = tuple(int(x + y) for x, y in zip(word.box.anchor, rel))
            sym = alphabet.symbol(int(a[tuple(rel)]))
            nb = alphabet.symbol(int(b[tuple(rel)]))
            out.append(Violation(cell, axis, sym, nb))
    return out


class Tiling:
    """Whole-tile placements, stored columnar for bulk work."""

    def __init__(
        self,
        tile_shapes: Mapping[TileId, tuple[int, ...]],
        codes: np.ndarray,
        anchors: np.ndarray,
        window: Box | None = None,
    ) -> None:
        self.tile_shapes = dict(tile_shapes)
        self.tile_order = sorted(self.tile_shapes, key=tile_sort_key)
        self.codes = np.asarray(codes, dtype=np.int32)
        self.anchors = np.asarray(anchors, dtype=np.int64)
        if self.anchors.ndim == 1:
            self.anchors = self.anchors.reshape(len(self.codes), -1)
        self.window = window

    @classmethod
    def from_placements(
        cls,
        tile_shapes: Mapping[TileId, tuple[int, ...]],
        placements: Sequence[Placement],
        window: Box | None = None,
    ) -> "Tiling":
        order = sorted(tile_shapes, key=tile_sort_key)
        lookup = {t: i for i, t in enumerate(order)}
        codes = np.array([lookup[p.tile] for p in placements], dtype=np.int32)
        dim = len(next(iter(tile_shapes.values()))) if tile_shapes else 0
        anchors = np.array(
            [p.anchor for p in placements], dtype=np.int64
        ).reshape(len(placements), dim)
        return cls(tile_shapes, codes, anchors, window)

    def __len__(self) -> int:
        return len(self.codes)

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def placements(self) -> Iterator[Placement]:
        for code, anchor in zip(self.codes, self.anchors):
            yield Placement(self.tile_order[int(code)], tuple(int(x) for x in anchor))

    def covered_cells(self) -> int:
        total = 0
        for code in range(len(self.tile_order)):
            n = int(np.count_nonzero(self.codes == code))
            total += n * math.prod(self.tile_shapes[self.tile_order[code]])
        return total

    def tile_cell_counts(self) -> dict[TileId, int]:
        out = {}
        for code, tile in enumerate(self.tile_order):
            n = int(np.count_nonzero(self.codes == code))
            out[tile] = n * math.prod(self.tile_shapes[tile])
        return out

    def sorted_canonical(self) -> "Tiling":
        """Placements ordered by anchor lexicographically, then tile."""
        if len(self.codes) == 0:
            return self
        keys = [self.codes] + [self.anchors[:, a] for a in range(self.dim - 1, -1, -1)]
        order = np.lexsort(keys)
        return Tiling(self.tile_shapes, self.codes[order], self.anchors[order], self.window)

    def concat(self, other: "Tiling") -> "Tiling":
        if self.tile_order != other.tile_order:
            raise ValueError("tilings use different tile tables")
        return Tiling(
            self.tile_shapes,
            np.concatenate([self.codes, other.codes]),
            np.concatenate([self.anchors, other.anchors]),
            self.window or other.window,
        )

    def same_placements(self, other: "Tiling") -> bool:
        a = self.sorted_canonical()
        b = other.sorted_canonical()
        return bool(
            a.tile_order == b.tile_order
            and np.array_equal(a.codes, b.codes)
            and np.array_equal(a.anchors, b.anchors)
        )


class DecodeResult(NamedTuple):
    tiling: Tiling
    partials: list[Placement]
    partial_cells: int


def decode(word: SymbolicWord, check: bool = True) -> DecodeResult:
    """Group word cells into whole placements plus boundary partials.

    Tiles cut by the domain boundary are reported as partial placements, not
    errors.  Requires a valid word; raises InvalidWord otherwise.
    """
    if check:
        violations = validate_word(word)
        if violations:
            raise InvalidWord(f"{len(violations)} adjacency violations, first: {violations[0]}")
    alphabet = word.alphabet
    if word.is_full:
        return _decode_full_box(word)
    placements: list[Placement] = []
    partials: list[Placement] = []
    partial_cells = 0
    groups: dict[Placement, int] = {}
    for cell, sym in word.iter_cells():
        anchor = tuple(c - o for c, o in zip(cell, sym.offset))
        key = Placement(sym.tile, anchor)
        groups[key] = groups.get(key, 0) + 1
    for key, count in groups.items():
        if count == math.prod(alphabet.shape(key.tile)):
            placements.append(key)
        else:
            partials.append(key)
            partial_cells += count
    tiling = Tiling.from_placements(alphabet.tile_shapes, placements, word.box)
    return DecodeResult(tiling, sorted(partials), partial_cells)


def _decode_full_box(word: SymbolicWord) -> DecodeResult:
    """Vectorised decode for fully assigned box domains.

    Validity means a whole tile sits at every anchor-symbol cell whose
    rectangle stays inside the box; everything else at the rim is partial.
    """
    alphabet = word.alphabet
    box = word.box
    grid = word.grid
    dim = alphabet.dim
    codes_parts = []
    anchors_parts = []
    complete_cells = 0
    code_of = {t: i for i, t in enumerate(sorted(alphabet.tile_shapes, key=tile_sort_key))}
    for tile in alphabet.tiles:
        shape = alphabet.shape(tile)
        anchor_idx = alphabet.index(Symbol(tile, (0,) * dim))
        rel = np.argwhere(grid == anchor_idx)
        if len(rel) == 0:
            continue
        fits = np.ones(len(rel), dtype=bool)
        for a in range(dim):
            fits &= rel[:, a] + shape[a] <= box.shape[a]
        whole = rel[fits]
        if len(whole) == 0:
            continue
        anchors_parts.append(whole + np.array(box.anchor, dtype=np.int64))
        codes_parts.append(np.full(len(whole), code_of[tile], dtype=np.int32))
        complete_cells += len(whole) * math.prod(shape)
    if codes_parts:
        codes = np.concatenate(codes_parts)
        anchors = np.concatenate(anchors_parts)
    else:
        codes = np.zeros(0, dtype=np.int32)
        anchors = np.zeros((0, dim), dtype=np.int64)
    tiling = Tiling(alphabet.tile_shapes, codes, anchors, box)
    partial_cells = box.volume - complete_cells
    partials = _rim_partials(word, tiling) if partial_cells else []
    return DecodeResult(tiling, partials, partial_cells)


def _rim_partials(word: SymbolicWord, complete: Tiling) -> list[Placement]:
    """Partial placements of a full box word: anchors of cut tiles at the rim."""
    alphabet = word.alphabet
    box = word.box
    max_side = max(max(s) for s in alphabet.tile_shapes.values())
    whole = {p for p in complete.placements()}
    partial: set[Placement] = set()
    rim_width = max_side
    core = None
    if all(e > 2 * rim_width for e in box.shape):
        from .geometry import interior

        core = interior(box, rim_width)
    for rel in np.argwhere(word.grid >= 0):
        cell = tuple(int(a + r) for a, r in zip(box.anchor, rel))
        if core is not None and core.contains_cell(cell):
            continue
        sym = alphabet.symbol(int(word.grid[tuple(rel)]))
        anchor = tuple(c - o for c, o in zip(cell, sym.offset))
        key = Placement(sym.tile, anchor)
        if key not in whole:
            partial.add(key)
    return sorted(partial)


def encode(tiling: Tiling, alphabet: Alphabet, window: Box | None = None) -> SymbolicWord:
    """Write each placement's symbols; placements must tile disjointly."""
    if window is None:
        window = tiling.window
    if window is None:
        if len(tiling) == 0:
            raise ValueError("cannot infer a window from an empty tiling")
        shapes = np.array(
            [tiling.tile_shapes[tiling.tile_order[int(c)]] for c in tiling.codes],
            dtype=np.int64,
        )
        lo = tuple(int(x) for x in tiling.anchors.min(axis=0))
        hi = tuple(int(x) for x in (tiling.anchors + shapes).max(axis=0))
        window = Box(lo, tuple(h - l for l, h in zip(lo, hi)))
    word = SymbolicWord(alphabet, window)
    for tile, anchor in tiling.placements():
        block = alphabet.block(tile)
        target = Box(anchor, alphabet.shape(tile))
        clip = window.intersect(target)
        if clip is None:
            continue
        rel = tuple(
            slice(c - t, c - t + e)
            for c, t, e in zip(clip.anchor, target.anchor, clip.shape)
        )
        word.paste(clip, block[rel])
    return word
