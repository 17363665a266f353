"""Staged tower construction: fill a window at prescribed tile frequencies.

Each stage samples a sublattice of disjoint cubical towers.  Stage 1 writes a
brick wall on every tower interior.  Stage i pastes the surviving stage-(i-1)
blocks into larger towers, surrounds them with the ambient wall, and bridges
the gap with filling collars.  Because almost all area ends up inside large
bricks, a final redistribution pass relabels and subdivides those bricks to
hit any target frequency vector up to placement quantisation.

Towers are simulated Rohlin towers: a randomly offset sublattice intersected
with the window, with the uncovered remainder reported as the error set.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .brickfill import BrickWall, fill_between
from .geometry import Box, interior
from .numerics import RectFamily, SharedAxisDivisor, validate_family
from .rng import SplitMix64
from .sft import Alphabet, SymbolicWord, Tiling, build_alphabet, validate_word

LARGE_FINITE = "P"


class NonpositiveTarget(ValueError):
    pass


class InvalidTargets(ValueError):
    pass


class Infeasible(ValueError):
    def __init__(self, constraint: str, detail: str = "") -> None:
        super().__init__(f"plan constraint {constraint!r} cannot be met: {detail}".rstrip(": "))
        self.constraint = constraint


class WindowTooSmall(ValueError):
    pass


class TargetsInfeasible(ValueError):
    pass


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class TargetDistribution:
    """Exact rational tile frequencies; probs plus tail_mass must sum to 1."""

    probs: tuple[Fraction, ...]
    tail_mass: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if not self.probs or any(p <= 0 for p in self.probs):
            raise NonpositiveTarget(f"targets must be positive, got {self.probs}")
        if self.tail_mass < 0:
            raise NonpositiveTarget("tail mass must be >= 0")
        total = sum(self.probs, start=Fraction(0)) + self.tail_mass
        if total != 1:
            raise InvalidTargets(f"targets sum to {total}, expected 1")

    @classmethod
    def of(cls, values: Sequence, tail_mass=0) -> "TargetDistribution":
        return cls(tuple(_as_fraction(v) for v in values), _as_fraction(tail_mass))

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class StageSpec:
    """One stage's tower side, collar width, and reporting budget."""

    side: int
    collar: int
    error_budget: Fraction
    gap: int = 0
    cutoff: int | None = None
    tail_mass: Fraction = Fraction(0)

    @property
    def step(self) -> int:
        return self.side + self.gap


@dataclass(frozen=True)
class StagePlan:
    """Validated stage schedule for a (possibly truncated countable) run."""

    family: RectFamily
    base: RectFamily
    targets: TargetDistribution
    mode: str
    stages: tuple[StageSpec, ...]
    cutoffs: tuple[int, ...] | None = None

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    @property
    def countable(self) -> bool:
        return self.cutoffs is not None

    def brick_id(self, stage: int) -> int | str:
        return f"P{stage}" if self.countable else LARGE_FINITE

    def brick_shape(self, stage: int) -> tuple[int, ...]:
        if not self.countable:
            return self.family.large_shape
        cutoff = self.stages[stage - 1].cutoff
        return tuple(
            math.prod(s[a] for s in self.family.shapes[:cutoff])
            for a in range(self.family.dim)
        )

    def large_shapes(self) -> dict[int | str, tuple[int, ...]]:
        if not self.countable:
            return {LARGE_FINITE: self.family.large_shape}
        return {self.brick_id(i): self.brick_shape(i) for i in range(1, self.stage_count + 1)}

    def alphabet(self) -> Alphabet:
        return build_alphabet(self.family, self.large_shapes())

    def predicted_uncovered_bound(self, window_shape: Sequence[int]) -> Fraction:
        """Worst-case uncovered fraction over sublattice offsets.

        Counts the fewest whole top-stage towers any offset leaves in the
        window and credits each with only the cells that whole bricks of the
        coarsest period can occupy inside its deepest interior.
        """
        top = self.stages[-1]
        period = self.brick_shape(self.stage_count)
        inner = top.side - 2 * (top.collar + 1)
        content = [max(inner - 2 * (p - 1), 0) for p in period]
        if 0 in content:
            return Fraction(1)
        towers = 1
        for extent in window_shape:
            worst = (extent - top.side - top.step + 1) // top.step + 1
            towers *= max(worst, 0)
        covered = towers * math.prod(content)
        total = math.prod(int(e) for e in window_shape)
        return 1 - Fraction(min(covered, total), total)

    def predicted_error_budget(self) -> Fraction:
        """Sum of the per-stage sublattice error budgets."""
        return sum((s.error_budget for s in self.stages), start=Fraction(0))


def plan_stages(
    f: RectFamily,
    targets: TargetDistribution,
    count: int | None = None,
    mode: str = "strict",
    *,
    sides: Sequence[int] | None = None,
    error_budgets: Sequence | None = None,
    gaps: Sequence[int] | None = None,
    cutoffs: Sequence[int] | None = None,
    side_cap: int = 10**7,
) -> StagePlan:
    """Build and validate a stage schedule.

    Strict mode enforces the geometric-decay inequalities exactly in rational
    arithmetic and, when ``sides`` is omitted, picks each side minimal by
    scanning upward.  Relaxed mode only requires every stage to fit its
    blocks (side >= 2 * (collar + 2) + previous side + 1) and records the
    supplied budgets for reporting rather than enforcing decay.
    """
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"unknown mode {mode!r}")
    base, cuts = _resolve_base(f, targets, cutoffs, count, sides)
    n_stages = len(cuts) if cuts else _resolve_count(count, sides)
    budgets = _resolve_budgets(error_budgets, n_stages, mode)
    gap_list = list(gaps) if gaps is not None else [0] * n_stages
    if len(gap_list) != n_stages or any(g < 0 for g in gap_list):
        raise Infeasible("stage_side", f"need {n_stages} nonnegative gaps")
    collars = _stage_collars(f, base, cuts, n_stages)
    if cuts is not None and mode == "strict":
        _check_tail_schedule(targets, cuts)
    chosen = _choose_sides(f.dim, mode, sides, collars, n_stages, side_cap)
    if mode == "strict":
        _check_small_tile_budget(f, targets, collars, chosen, cuts)
    specs = []
    for i in range(n_stages):
        specs.append(
            StageSpec(
                side=chosen[i],
                collar=collars[i],
                error_budget=budgets[i],
                gap=gap_list[i],
                cutoff=cuts[i] if cuts else None,
                tail_mass=_tail_mass(targets, cuts, i),
            )
        )
    return StagePlan(
        family=f,
        base=base,
        targets=targets,
        mode=mode,
        stages=tuple(specs),
        cutoffs=tuple(cuts) if cuts else None,
    )


def _resolve_count(count: int | None, sides: Sequence[int] | None) -> int:
    if sides is not None:
        return len(sides)
    if count is None or count < 1:
        raise Infeasible("stage_side", "need a stage count or explicit sides")
    return count


def _resolve_base(f, targets, cutoffs, count, sides):
    if len(targets.probs) != f.count:
        raise InvalidTargets(f"{f.count} tiles but {len(targets.probs)} targets")
    if cutoffs is None:
        if targets.tail_mass != 0:
            raise InvalidTargets("a tail mass needs cut points")
        return f, None
    cut = [int(c) for c in cutoffs]
    if any(c2 <= c1 for c1, c2 in zip(cut, cut[1:])) or cut[0] < 2 or cut[-1] > f.count:
        raise Infeasible("cutoffs", f"cut points {cut} must increase within 2..{f.count}")
    if count is not None or sides is not None:
        n = _resolve_count(count, sides)
        if n != len(cut):
            raise Infeasible("cutoffs", f"{len(cut)} cut points for {n} stages")
    try:
        base = validate_family(f.shapes[: cut[0]], f.dim)
    except SharedAxisDivisor as exc:
        raise Infeasible("base_gcd", str(exc)) from exc
    return base, cut


def _resolve_budgets(error_budgets, n_stages, mode):
    if error_budgets is None:
        if mode == "strict":
            return [Fraction(1, 2 * 4**i) for i in range(1, n_stages + 1)]
        return [Fraction(1, 4)] * n_stages
    budgets = [_as_fraction(b) for b in error_budgets]
    if len(budgets) != n_stages:
        raise Infeasible("error_budget", f"need {n_stages} budgets")
    if mode == "strict":
        for i, b in enumerate(budgets, start=1):
            if not 0 < b < Fraction(1, 4**i):
                raise Infeasible("error_budget", f"stage {i} budget {b} not below 1/4^{i}")
    return budgets


def _stage_collars(f, base, cuts, n_stages):
    if cuts is None:
        return [f.fill_length] * n_stages
    base_period = tuple(
        math.prod(s[a] for s in f.shapes[: cuts[0]]) for a in range(f.dim)
    )
    collars = []
    for i in range(n_stages):
        period = tuple(
            math.prod(s[a] for s in f.shapes[: cuts[i]]) for a in range(f.dim)
        )
        collars.append(base.threshold + sum(period) + sum(base_period))
    return collars


def _check_tail_schedule(targets, cuts):
    """Decay and ordering of the per-stage tail masses."""
    probs = targets.probs

    def tail_beyond(c: int) -> Fraction:
        return sum(probs[c:], start=Fraction(0)) + targets.tail_mass

    for k, c in enumerate(cuts, start=1):
        if tail_beyond(c) >= Fraction(1, 8**k):
            raise Infeasible("tail_decay", f"mass beyond cut {c} is not < 1/8^{k}")
    for k in range(len(cuts) - 1):
        block = sum(probs[cuts[k] - 1 : cuts[k + 1]], start=Fraction(0))
        if block <= tail_beyond(cuts[k + 1]):
            raise Infeasible("tail_order", f"stage {k + 1} block mass too small")


def _min_small_target(targets: TargetDistribution, cuts) -> Fraction:
    limit = cuts[0] if cuts else len(targets.probs)
    return min(targets.probs[:limit])


def _choose_sides(dim, mode, sides, collars, n_stages, side_cap):
    chosen = []
    prev = 0
    for i in range(1, n_stages + 1):
        collar = collars[i - 1]
        if mode == "strict":
            bound = Fraction(1, 4**i)
            need = 2 * dim * (collar + 2 + prev)
            if sides is not None:
                n = int(sides[i - 1])
                if Fraction(need, n) >= bound:
                    raise Infeasible(
                        "collar_fraction",
                        f"stage {i}: 2d(collar+2+prev)/{n} not below 1/4^{i}",
                    )
            else:
                n = prev + 1
                while n <= side_cap and Fraction(need, n) >= bound:
                    n += 1
                if n > side_cap:
                    raise Infeasible("collar_fraction", f"stage {i} side exceeds cap {side_cap}")
        else:
            minimum = 2 * (collar + 2) + prev + 1
            n = int(sides[i - 1]) if sides is not None else minimum
            if n < minimum:
                raise Infeasible("stage_side", f"stage {i} side {n} below minimum {minimum}")
        if n <= prev:
            raise Infeasible("stage_side", f"stage {i} side {n} not above previous {prev}")
        chosen.append(n)
        prev = n
    return chosen


def _check_small_tile_budget(f, targets, collars, sides, cuts):
    total = sum(
        (Fraction(2 * f.dim * c, n) for c, n in zip(collars, sides)), start=Fraction(0)
    )
    if total >= _min_small_target(targets, cuts):
        raise Infeasible(
            "small_tile_budget",
            f"collar mass bound {total} not below the smallest base target",
        )


def _tail_mass(targets, cuts, stage_index) -> Fraction:
    """Cell-mass share reserved for stage i's coarser-brick towers.

    Stage i's brick is the first that can be carved into tiles past the
    previous cut point; reserving exactly their mass keeps every brick pool
    consumable in index order during redistribution.
    """
    if cuts is None or stage_index == 0:
        return Fraction(0)
    lo = cuts[stage_index - 1]
    hi = cuts[stage_index]
    return sum(targets.probs[lo:hi], start=Fraction(0))


@dataclass(frozen=True)
class StageTowers:
    """Anchors of one stage's disjoint towers inside the window."""

    stage: int
    side: int
    step: int
    offset: tuple[int, ...]
    anchors: np.ndarray
    window: Box

    @property
    def count(self) -> int:
        return len(self.anchors)

    @property
    def error_cells(self) -> int:
        return self.window.volume - self.count * self.side ** self.window.dim

    @property
    def error_fraction(self) -> Fraction:
        return Fraction(self.error_cells, self.window.volume)


def sample_towers(
    plan: StagePlan,
    window: Box,
    stage: int,
    seed: int,
    offset: Sequence[int] | None = None,
) -> StageTowers:
    """Towers on the offset sublattice (side + gap) Z^d, wholly inside window.

    The offset is drawn uniformly per axis (axis order 0..d-1) from the
    seeded stream; pass ``offset`` to pin it instead.
    """
    spec = plan.stages[stage - 1]
    if any(e < spec.side for e in window.shape):
        raise WindowTooSmall(f"window {window.shape} cannot hold side {spec.side}")
    step = spec.step
    if offset is None:
        rng = SplitMix64(seed)
        offset = tuple(rng.below(step) for _ in range(window.dim))
    else:
        offset = tuple(int(o) % step for o in offset)
    axes = []
    for a in range(window.dim):
        start = window.anchor[a] + offset[a]
        stop = window.end[a] - spec.side
        axes.append(np.arange(start, stop + 1, step, dtype=np.int64))
    if any(len(ax) == 0 for ax in axes):
        anchors = np.zeros((0, window.dim), dtype=np.int64)
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        anchors = np.stack([m.ravel() for m in mesh], axis=1)
    return StageTowers(stage, spec.side, step, offset, anchors, window)


@dataclass
class TowerBlock:
    """A finished block: its tower box, glue collar, and boundary wall.

    The block's word agrees with ``wall`` on the outermost ring of
    ``domain``, which is what lets a later stage glue it into any ambient
    wall with a filling collar of width ``collar``.
    """

    box: Box
    collar: int
    wall: BrickWall
    domain: Box


@dataclass
class ConstructionState:
    """Word and block list after one stage."""

    stage: int
    word: SymbolicWord
    blocks: list[TowerBlock]
    tower_side: int
    window: Box


def build_stage(
    state: ConstructionState | None,
    towers: StageTowers,
    wall: BrickWall,
    base: RectFamily,
    plan: StagePlan,
    tail_anchors: frozenset[tuple[int, ...]] = frozenset(),
) -> ConstructionState:
    """Run one construction stage on a fresh word.

    Every tower either becomes a pure wall block (always at stage 1; later,
    when its anchor is in ``tail_anchors``, with that stage's coarser brick)
    or a composite: the ambient wall over the whole interior, previous-stage
    blocks that landed deep enough pasted back verbatim, and a filling band
    bridging each pasted block to the ambient wall.  Previous blocks not
    wholly inside a good position are dropped.
    """
    alphabet = wall.alphabet
    spec = plan.stages[towers.stage - 1]
    word = SymbolicWord(alphabet, towers.window)
    blocks: list[TowerBlock] = []
    prev = _BlockIndex(state) if state is not None else None
    for anchor_row in towers.anchors:
        anchor = tuple(int(x) for x in anchor_row)
        tower_box = Box(anchor, (spec.side,) * towers.window.dim)
        if towers.stage == 1 or anchor in tail_anchors:
            block_wall = BrickWall(
                alphabet, plan.brick_id(towers.stage), _add(wall.translate, anchor)
            )
            domain = interior(tower_box, spec.collar + 1)
            if domain is None:
                raise Infeasible("stage_side", f"side {spec.side} below 2*(collar+1)+1")
            word.paste(domain, block_wall.pattern_over(domain))
            blocks.append(TowerBlock(tower_box, spec.collar, block_wall, domain))
            continue
        ambient = BrickWall(alphabet, wall.tile, _add(wall.translate, anchor))
        domain = interior(tower_box, base.fill_length + 1)
        if domain is None:
            raise Infeasible("stage_side", f"side {spec.side} below 2*(fill_length+1)+1")
        good = prev.deep_inside(tower_box) if prev is not None else []
        saved = [(blk, state.word.subgrid(blk.domain).copy()) for blk in good]
        word.paste(domain, ambient.pattern_over(domain))
        for blk, content in saved:
            fill = fill_between(blk.wall, blk.domain, ambient, base, blk.collar)
            band = interior(blk.box, 1)
            word.paste(band, fill.materialize(band).grid)
            word.paste(blk.domain, content)
        blocks.append(TowerBlock(tower_box, base.fill_length, ambient, domain))
    return ConstructionState(towers.stage, word, blocks, spec.side, towers.window)


def _add(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(x) + int(y) for x, y in zip(a, b))


class _BlockIndex:
    """Previous-stage blocks sorted by first anchor coordinate.

    A tower keeps only blocks anchored inside it, so a bisect along axis 0
    narrows each lookup to one slab instead of every block in the window.
    The stable sort keeps the original row-major block order within a slab.
    """

    def __init__(self, state: ConstructionState):
        self.margin = 2 + state.tower_side
        self.blocks = sorted(state.blocks, key=lambda blk: blk.box.anchor[0])
        self.keys = [blk.box.anchor[0] for blk in self.blocks]

    def deep_inside(self, tower_box: Box) -> list[TowerBlock]:
        """Blocks whose anchor sits deep enough inside ``tower_box``."""
        lo = bisect_left(self.keys, tower_box.anchor[0])
        hi = bisect_left(self.keys, tower_box.anchor[0] + tower_box.shape[0])
        out = []
        for blk in self.blocks[lo:hi]:
            core = interior(tower_box, blk.collar + self.margin)
            if core is not None and core.contains_cell(blk.box.anchor):
                out.append(blk)
        return out


@dataclass
class FrequencyReport:
    """Cell accounting of a tiling against a window and optional targets."""

    window_cells: int
    covered_cells: int
    tile_cells: dict
    targets: TargetDistribution | None = None
    partial_cells: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def uncovered_fraction(self) -> Fraction:
        if self.window_cells == 0:
            return Fraction(0)
        return Fraction(self.window_cells - self.covered_cells, self.window_cells)

    def frequency(self, tile) -> Fraction:
        """Covered-cell fraction carried by ``tile``."""
        if self.covered_cells == 0:
            return Fraction(0)
        return Fraction(self.tile_cells.get(tile, 0), self.covered_cells)

    def small_tile_cells(self) -> int:
        return sum(c for t, c in self.tile_cells.items() if isinstance(t, int))

    def small_tile_fraction(self) -> Fraction:
        if self.covered_cells == 0:
            return Fraction(0)
        return Fraction(self.small_tile_cells(), self.covered_cells)

    def large_fraction(self) -> Fraction:
        return 1 - self.small_tile_fraction() if self.covered_cells else Fraction(0)

    def deltas(self) -> dict:
        """Per-small-tile gap between covered frequency and target."""
        if self.targets is None:
            return {}
        return {
            j + 1: self.frequency(j + 1) - p for j, p in enumerate(self.targets.probs)
        }

    def to_dict(self) -> dict:
        def plain(v):
            return float(v) if isinstance(v, Fraction) else v

        return {
            "window_cells": self.window_cells,
            "covered_cells": self.covered_cells,
            "uncovered_fraction": float(self.uncovered_fraction),
            "partial_cells": self.partial_cells,
            "tile_cells": {
                str(t): c for t, c in sorted(self.tile_cells.items(), key=lambda kv: str(kv[0]))
            },
            "frequencies": {
                str(t): float(self.frequency(t)) for t in sorted(self.tile_cells, key=str)
            },
            "deltas": {str(t): float(d) for t, d in self.deltas().items()},
            "notes": {k: plain(v) for k, v in self.notes.items()},
        }


def finalize(
    state: ConstructionState | None,
    window: Box | None,
    plan: StagePlan | None = None,
) -> tuple[Tiling, FrequencyReport]:
    """Decode the top-stage interiors into whole placements and account cells.

    Uncovered cells are the sublattice error set, the towers' own unfilled
    boundary collars, and tiles cut by domain edges; those are excluded from
    the covered count, never errors.
    """
    from .sft import InvalidWord, decode

    targets = plan.targets if plan is not None else None
    if state is None or not state.blocks or window is None:
        shapes = {} if state is None else dict(state.word.alphabet.tile_shapes)
        dim = window.dim if window is not None else 1
        empty = Tiling(
            shapes, np.zeros(0, dtype=np.int32), np.zeros((0, dim), dtype=np.int64), window
        )
        cells = 0 if window is None else window.volume
        return empty, FrequencyReport(cells, 0, {}, targets)
    violations = validate_word(state.word)
    if violations:
        raise InvalidWord(f"stage {state.stage} word is invalid: {violations[0]}")
    merged: Tiling | None = None
    partial_cells = 0
    for blk in state.blocks:
        result = decode(state.word.restrict(blk.domain), check=False)
        partial_cells += result.partial_cells
        merged = result.tiling if merged is None else merged.concat(result.tiling)
    merged.window = window
    tiling = merged.sorted_canonical()
    counts = tiling.tile_cell_counts()
    covered = sum(counts.values())
    report = FrequencyReport(window.volume, covered, counts, targets, partial_cells)
    if plan is not None:
        collar_bound = sum(
            (Fraction(2 * window.dim * s.collar, s.side) for s in plan.stages),
            start=Fraction(0),
        )
        min_target = _min_small_target(plan.targets, plan.cutoffs)
        report.notes["small_fraction_below_min_target"] = bool(
            report.small_tile_fraction() < min_target
        )
        report.notes["large_fraction_above_collar_bound"] = bool(
            report.large_fraction() > 1 - collar_bound
        )
        report.notes["collar_mass_bound"] = collar_bound
        report.notes["predicted_error_budget"] = plan.predicted_error_budget()
    return tiling, report


def _largest_remainder(quotas: list[Fraction], total: int, rng: SplitMix64) -> list[int]:
    """Integer counts summing to ``total``, proportional to exact quotas.

    Floors first, then hands out what is missing by largest fractional part;
    ties are broken by a seeded shuffle of the indices.
    """
    floors = [int(q) for q in quotas]
    remainders = [q - f for q, f in zip(quotas, floors)]
    missing = total - sum(floors)
    order = list(range(len(quotas)))
    rng.shuffle(order)
    position = {j: k for k, j in enumerate(order)}
    rank = sorted(order, key=lambda j: (-remainders[j], position[j]))
    counts = list(floors)
    for j in rank[:missing]:
        counts[j] += 1
    return counts


def redistribute(
    tiling: Tiling,
    targets: TargetDistribution,
    report: FrequencyReport,
    seed: int,
    tile_shapes: Mapping[int | str, tuple[int, ...]] | None = None,
) -> Tiling:
    """Relabel and subdivide large bricks so small-tile frequencies hit targets.

    Brick pools are processed from coarsest to finest.  A pool first serves
    the tiles only it (among the remaining pools) can produce, then spreads
    the rest over the other tiles its period admits, proportionally to their
    remaining deficits; bricks left with no label stay in place, which is how
    any reserved tail mass survives.  Placement counts come from largest-
    remainder rounding and a seeded shuffle picks which placements get which
    label.
    """
    shapes = dict(tile_shapes) if tile_shapes is not None else dict(tiling.tile_shapes)
    small_tiles = sorted(t for t in shapes if isinstance(t, int))
    large_tiles = sorted(
        (t for t in shapes if not isinstance(t, int)),
        key=lambda t: math.prod(shapes[t]),
        reverse=True,
    )
    if len(small_tiles) != len(targets.probs):
        raise InvalidTargets(f"{len(small_tiles)} small tiles, {len(targets.probs)} targets")
    covered = report.covered_cells
    if covered == 0:
        return tiling
    deficits: dict[int, Fraction] = {}
    for j in small_tiles:
        measured = Fraction(report.tile_cells.get(j, 0), covered)
        p = targets.probs[j - 1]
        if measured > p:
            raise TargetsInfeasible(f"tile {j} already carries {measured}, above target {p}")
        deficits[j] = (p - measured) * covered
    rng = SplitMix64(seed)
    code_of = {t: i for i, t in enumerate(tiling.tile_order)}
    parts: list[tuple[int | str, np.ndarray]] = []
    for j in small_tiles:
        if j in code_of:
            sel = tiling.codes == code_of[j]
            if np.any(sel):
                parts.append((j, tiling.anchors[sel]))
    for rank, pool_tile in enumerate(large_tiles):
        if pool_tile not in code_of:
            continue
        pool_anchors = tiling.anchors[tiling.codes == code_of[pool_tile]]
        n_pool = len(pool_anchors)
        if n_pool == 0:
            continue
        period = shapes[pool_tile]
        area = math.prod(period)
        eligible = [j for j in small_tiles if _divides(shapes[j], period)]
        finer = set()
        for other in large_tiles[rank + 1 :]:
            finer.update(j for j in small_tiles if _divides(shapes[j], shapes[other]))
        exclusive = [j for j in eligible if j not in finer]
        keep = targets.tail_mass * covered if rank == 0 else Fraction(0)
        alloc = _pool_allocation(deficits, eligible, exclusive, Fraction(n_pool * area) - keep)
        shared = [j for j in eligible if j not in exclusive]
        # Exclusive demand rounds up to whole bricks: no later pool can serve
        # it, and a stranded fraction would surface as unlabeled bricks once
        # the finer pools run out of eligible demand.
        quotas_ex = [alloc.get(j, Fraction(0)) / area for j in exclusive]
        n_ex = min(n_pool, math.ceil(sum(quotas_ex, start=Fraction(0))))
        counts_ex = _largest_remainder(quotas_ex, n_ex, rng.fork(10 + rank))
        quotas_sh = [alloc.get(j, Fraction(0)) / area for j in shared]
        quotas_sh.append(n_pool - n_ex - sum(quotas_sh, start=Fraction(0)))
        counts_sh = _largest_remainder(quotas_sh, n_pool - n_ex, rng.fork(30 + rank))
        counts = counts_ex + counts_sh
        perm = list(range(n_pool))
        rng.fork(20 + rank).shuffle(perm)
        pos = 0
        for label, cnt in zip(exclusive + shared + [None], counts):
            chosen = pool_anchors[np.array(perm[pos : pos + cnt], dtype=np.int64)]
            pos += cnt
            if cnt == 0:
                continue
            if label is None:
                parts.append((pool_tile, chosen))
            else:
                parts.append((label, _subdivide(chosen, period, shapes[label])))
                deficits[label] = max(deficits[label] - Fraction(cnt * area), Fraction(0))
    order_lookup = {t: i for i, t in enumerate(sorted(shapes, key=_tile_key))}
    codes_final = [np.full(len(a), order_lookup[t], dtype=np.int32) for t, a in parts]
    anchors_final = [a for _, a in parts]
    if codes_final:
        codes = np.concatenate(codes_final)
        anchors = np.concatenate(anchors_final)
    else:
        codes = np.zeros(0, dtype=np.int32)
        anchors = np.zeros((0, tiling.dim), dtype=np.int64)
    return Tiling(shapes, codes, anchors, tiling.window).sorted_canonical()


def _tile_key(tile):
    from .sft import tile_sort_key

    return tile_sort_key(tile)


def _divides(small: tuple[int, ...], period: tuple[int, ...]) -> bool:
    return all(p % s == 0 for s, p in zip(small, period))


def _pool_allocation(
    deficits: dict[int, Fraction],
    eligible: list[int],
    exclusive: list[int],
    pool_cells: Fraction,
) -> dict[int, Fraction]:
    """Split a pool's cell mass: exclusive tiles first, the rest pro rata."""
    alloc: dict[int, Fraction] = {}
    remaining = max(pool_cells, Fraction(0))
    need_exclusive = sum((deficits[j] for j in exclusive), start=Fraction(0))
    if need_exclusive > 0:
        scale = min(Fraction(1), remaining / need_exclusive)
        for j in exclusive:
            alloc[j] = deficits[j] * scale
        remaining -= need_exclusive * scale
    others = [j for j in eligible if j not in exclusive]
    need_rest = sum((deficits[j] for j in others), start=Fraction(0))
    if remaining > 0 and need_rest > 0:
        scale = min(Fraction(1), remaining / need_rest)
        for j in others:
            alloc[j] = deficits[j] * scale
    return alloc


def _subdivide(
    anchors: np.ndarray, period: tuple[int, ...], tile_shape: tuple[int, ...]
) -> np.ndarray:
    """Anchors of the tile grid refining each brick placement."""
    axes = [np.arange(0, p, s, dtype=np.int64) for p, s in zip(period, tile_shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)
    return (anchors[:, None, :] + offsets[None, :, :]).reshape(-1, anchors.shape[1])


@dataclass
class PipelineResult:
    """Everything one seeded run produces."""

    plan: StagePlan
    state: ConstructionState
    pre_tiling: Tiling
    pre_report: FrequencyReport
    tiling: Tiling
    report: FrequencyReport
    seed: int


def run_pipeline(plan: StagePlan, window: Box, seed: int) -> PipelineResult:
    """Sample towers, build every stage, finalize, and redistribute."""
    alphabet = plan.alphabet()
    root = SplitMix64(seed)
    wall = BrickWall(alphabet, plan.brick_id(1), (0,) * window.dim)
    state: ConstructionState | None = None
    for stage in range(1, plan.stage_count + 1):
        towers = sample_towers(plan, window, stage, root.fork(stage).seed)
        tail_anchors: frozenset[tuple[int, ...]] = frozenset()
        if plan.countable and stage >= 2:
            tail_anchors = _select_tails(plan, towers, root.fork(1000 + stage))
        state = build_stage(state, towers, wall, plan.base, plan, tail_anchors)
    pre_tiling, pre_report = finalize(state, window, plan)
    final = redistribute(
        pre_tiling, plan.targets, pre_report, root.fork(2000).seed, alphabet.tile_shapes
    )
    counts = final.tile_cell_counts()
    report = FrequencyReport(
        window.volume,
        sum(counts.values()),
        counts,
        plan.targets,
        pre_report.partial_cells,
        dict(pre_report.notes),
    )
    return PipelineResult(plan, state, pre_tiling, pre_report, final, report, seed)


def _select_tails(plan: StagePlan, towers: StageTowers, rng: SplitMix64) -> frozenset:
    """Pick how many towers carry this stage's coarser brick, and which.

    The count matches the stage's reserved tail mass against the whole-brick
    content cells one tower's interior actually holds, rounded to nearest.
    """
    spec = plan.stages[towers.stage - 1]
    if spec.tail_mass == 0 or towers.count == 0:
        return frozenset()
    period = plan.brick_shape(towers.stage)
    extent = spec.side - 2 * (spec.collar + 1)
    content = 1
    for a in range(towers.window.dim):
        lead = (-(spec.collar + 1)) % period[a]
        content *= max((extent - lead) // period[a], 0) * period[a]
    if content <= 0:
        raise Infeasible("stage_side", f"stage {towers.stage} tail towers hold no whole brick")
    want = spec.tail_mass * towers.window.volume / content
    count = min(int(want + Fraction(1, 2)), towers.count)
    idx = list(range(towers.count))
    rng.shuffle(idx)
    return frozenset(tuple(int(x) for x in towers.anchors[i]) for i in idx[:count])


def countable_build(
    shapes: Sequence[Sequence[int]],
    targets: TargetDistribution,
    plan: StagePlan,
    window: Box,
    seed: int,
) -> tuple[Tiling, FrequencyReport]:
    """Truncated countable run: coarser brick periods on each stage's tail
    towers, then one redistribution consuming each pool in period order."""
    if not plan.countable:
        raise Infeasible("cutoffs", "countable_build needs a plan with cut points")
    if tuple(tuple(int(x) for x in s) for s in shapes) != plan.family.shapes:
        raise Infeasible("cutoffs", "shapes disagree with the plan's family")
    result = run_pipeline(plan, window, seed)
    return result.tiling, result.report
