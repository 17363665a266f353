"""Stage planning, tower sampling, staged construction, and redistribution."""

from fractions import Fraction

import numpy as np
import pytest

from dominofill import (
    Box,
    BrickWall,
    FrequencyReport,
    Infeasible,
    InvalidTargets,
    NonpositiveTarget,
    Placement,
    StagePlan,
    StageSpec,
    TargetDistribution,
    TargetsInfeasible,
    Tiling,
    WindowTooSmall,
    brick_wall,
    build_stage,
    countable_build,
    finalize,
    inner_collar,
    interior,
    plan_stages,
    redistribute,
    run_pipeline,
    sample_towers,
    validate_family,
    validate_word,
)

FLAGSHIP_TARGETS = TargetDistribution.of([Fraction(2, 5), Fraction(3, 5)])


class TestTargetDistribution:
    def test_accepts_mixed_notations(self):
        t = TargetDistribution.of(["2/5", 0.6])
        assert t.probs == (Fraction(2, 5), Fraction(3, 5))
        assert t.tail_mass == 0

    def test_sum_must_be_one(self):
        with pytest.raises(InvalidTargets):
            TargetDistribution.of(["1/2", "1/3"])
        with pytest.raises(NonpositiveTarget):
            TargetDistribution.of(["1/2", "1/2", 0])

    def test_tail_mass_counts_toward_sum(self):
        t = TargetDistribution.of(["1/2", "2/5"], tail_mass=Fraction(1, 10))
        assert t.tail_mass == Fraction(1, 10)
        with pytest.raises(InvalidTargets):
            TargetDistribution.of(["1/2", "2/5"], tail_mass=Fraction(1, 5))


class TestPlanStages:
    def test_strict_minimal_sides(self, flagship):
        plan = plan_stages(flagship, FLAGSHIP_TARGETS, count=1)
        assert [s.side for s in plan.stages] == [449]
        two = plan_stages(flagship, FLAGSHIP_TARGETS, count=2)
        assert [s.side for s in two.stages] == [449, 30529]
        assert [s.collar for s in two.stages] == [26, 26]
        assert [s.error_budget for s in two.stages] == [Fraction(1, 8), Fraction(1, 32)]

    def test_strict_validates_explicit_sides(self, flagship):
        accepted = plan_stages(flagship, FLAGSHIP_TARGETS, sides=(449,))
        assert accepted.stages[0].side == 449
        with pytest.raises(Infeasible) as info:
            plan_stages(flagship, FLAGSHIP_TARGETS, sides=(448,))
        assert info.value.constraint == "collar_fraction"
        with pytest.raises(Infeasible) as info:
            plan_stages(flagship, FLAGSHIP_TARGETS, sides=(449, 30528))
        assert info.value.constraint == "collar_fraction"
        assert plan_stages(flagship, FLAGSHIP_TARGETS, sides=(449, 30529)).stage_count == 2

    def test_strict_error_budget_bounds(self, flagship):
        with pytest.raises(Infeasible) as info:
            plan_stages(flagship, FLAGSHIP_TARGETS, count=1, error_budgets=[Fraction(1, 4)])
        assert info.value.constraint == "error_budget"
        ok = plan_stages(flagship, FLAGSHIP_TARGETS, count=1, error_budgets=[Fraction(1, 5)])
        assert ok.stages[0].error_budget == Fraction(1, 5)

    def test_strict_small_tile_budget(self, flagship):
        # collar cells must stay below the smallest target: 2*2*26/n < 1/5
        skewed = TargetDistribution.of(["1/5", "4/5"])
        with pytest.raises(Infeasible) as info:
            plan_stages(flagship, skewed, sides=(520,))
        assert info.value.constraint == "small_tile_budget"
        assert plan_stages(flagship, skewed, sides=(521,)).stages[0].side == 521

    def test_relaxed_minimum_side(self, flagship):
        assert plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(57,))
        with pytest.raises(Infeasible) as info:
            plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(56,))
        assert info.value.constraint == "stage_side"
        assert plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(64, 512))

    def test_target_count_must_match_family(self, flagship):
        with pytest.raises(InvalidTargets):
            plan_stages(flagship, TargetDistribution.of(["1/2", "1/4", "1/4"]), count=1)

    def test_countable_strict_schedule(self):
        f3 = validate_family([(2,), (3,), (5,)])
        t3 = TargetDistribution.of(["1/2", "2/5", "1/10"])
        plan = plan_stages(f3, t3, mode="strict", cutoffs=(2, 3))
        assert [s.side for s in plan.stages] == [129, 5409]
        assert [s.collar for s in plan.stages] == [14, 38]
        assert [s.tail_mass for s in plan.stages] == [0, Fraction(1, 10)]
        assert plan.brick_id(1) == "P1" and plan.brick_id(2) == "P2"
        assert plan.brick_shape(1) == (6,) and plan.brick_shape(2) == (30,)
        assert len(plan.alphabet().symbols) == 46  # 2+3+5 small, 6+30 brick

    def test_countable_tail_decay(self):
        f3 = validate_family([(2,), (3,), (5,)])
        heavy_tail = TargetDistribution.of(["1/2", "3/8", "1/8"])
        with pytest.raises(Infeasible) as info:
            plan_stages(f3, heavy_tail, mode="strict", cutoffs=(2, 3))
        assert info.value.constraint == "tail_decay"

    def test_countable_base_must_validate(self):
        f3 = validate_family([(2,), (4,), (5,)])
        t3 = TargetDistribution.of(["1/2", "2/5", "1/10"])
        with pytest.raises(Infeasible) as info:
            plan_stages(f3, t3, mode="relaxed", cutoffs=(2, 3), sides=(40, 200))
        assert info.value.constraint == "base_gcd"


def toy_plan(family, side, gap=0):
    """A bare one-stage plan for lattice-arithmetic tests."""
    spec = StageSpec(
        side=side,
        collar=family.fill_length,
        error_budget=Fraction(1, 4),
        gap=gap,
        cutoff=None,
        tail_mass=Fraction(0),
    )
    return StagePlan(
        family=family,
        base=family,
        targets=FLAGSHIP_TARGETS,
        mode="relaxed",
        stages=(spec,),
        cutoffs=None,
    )


class TestSampleTowers:
    def test_exact_grid(self, flagship):
        towers = sample_towers(
            toy_plan(flagship, 6), Box((0, 0), (12, 12)), 1, seed=0, offset=(0, 0)
        )
        assert towers.count == 4
        assert towers.error_cells == 0

    def test_gap_counting(self, flagship):
        towers = sample_towers(
            toy_plan(flagship, 6, gap=2), Box((0, 0), (100, 100)), 1, seed=0, offset=(0, 0)
        )
        assert towers.count == 144
        assert towers.error_fraction == Fraction(4816, 10000)

    def test_seed_determinism(self, flagship):
        plan = toy_plan(flagship, 6, gap=2)
        window = Box((0, 0), (100, 100))
        a = sample_towers(plan, window, 1, seed=99)
        b = sample_towers(plan, window, 1, seed=99)
        assert a.offset == b.offset
        assert np.array_equal(a.anchors, b.anchors)

    def test_towers_disjoint_inside_window(self, flagship):
        plan = toy_plan(flagship, 6, gap=1)
        window = Box((3, -4), (40, 31))
        towers = sample_towers(plan, window, 1, seed=7)
        seen = set()
        for row in towers.anchors:
            box = Box(tuple(int(x) for x in row), (6, 6))
            assert window.contains_box(box)
            cells = set(box.cells())
            assert not cells & seen
            seen |= cells
        assert towers.error_cells == window.volume - len(seen)

    def test_window_too_small(self, flagship):
        with pytest.raises(WindowTooSmall):
            sample_towers(toy_plan(flagship, 6), Box((0, 0), (5, 12)), 1, seed=0)


@pytest.fixture(scope="module")
def two_stage_state(flagship, flagship_alphabet):
    """A pinned-offset 600x600 run where every stage-2 tower keeps one block."""
    plan = plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(57, 200))
    window = Box((0, 0), (600, 600))
    wall = brick_wall(flagship_alphabet, (0, 0))
    towers1 = sample_towers(plan, window, 1, seed=0, offset=(0, 0))
    state1 = build_stage(None, towers1, wall, flagship, plan)
    towers2 = sample_towers(plan, window, 2, seed=0, offset=(0, 0))
    state2 = build_stage(state1, towers2, wall, flagship, plan)
    return plan, window, state1, state2


class TestBuildStage:
    def test_stage_one_blocks_are_wall_restrictions(self, two_stage_state, flagship_alphabet):
        _, _, state1, _ = two_stage_state
        assert state1.stage == 1 and len(state1.blocks) == 100
        blk = state1.blocks[3]
        assert blk.domain == interior(blk.box, blk.collar + 1)
        shifted = BrickWall(flagship_alphabet, "P", blk.box.anchor)
        assert np.array_equal(
            state1.word.subgrid(blk.domain), shifted.pattern_over(blk.domain)
        )

    def test_stage_words_validate(self, two_stage_state):
        _, _, state1, state2 = two_stage_state
        assert validate_word(state1.word) == []
        assert validate_word(state2.word) == []

    def test_preserved_blocks_bit_identical(self, two_stage_state):
        _, _, state1, state2 = two_stage_state
        assert len(state2.blocks) == 9
        preserved = 0
        for big in state2.blocks:
            for prev in state1.blocks:
                core = interior(big.box, prev.collar + 2 + state1.tower_side)
                if core is not None and core.contains_cell(prev.box.anchor):
                    assert np.array_equal(
                        state1.word.subgrid(prev.domain), state2.word.subgrid(prev.domain)
                    )
                    preserved += 1
        assert preserved == 9  # one good block per stage-2 tower at these offsets

    def test_ambient_ring_carries_wall(self, two_stage_state):
        _, _, _, state2 = two_stage_state
        for blk in state2.blocks:
            ring = inner_collar(blk.domain, 1)
            for cell in ring:
                assert state2.word.cell(cell) == blk.wall.symbol_at(cell)


class TestFinalize:
    def test_single_stage_is_pure_bricks(self, flagship, flagship_alphabet):
        plan = plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(64,))
        window = Box((0, 0), (300, 300))
        towers = sample_towers(plan, window, 1, seed=0, offset=(0, 0))
        state = build_stage(None, towers, brick_wall(flagship_alphabet, (0, 0)), flagship, plan)
        tiling, report = finalize(state, window, plan)
        # each 10x10 block domain holds exactly one whole 6x6 brick
        assert towers.count == 16
        assert set(p.tile for p in tiling.placements()) == {"P"}
        assert report.covered_cells == 16 * 36 == tiling.covered_cells()
        assert report.frequency("P") == 1
        assert report.partial_cells == 16 * (100 - 36)
        assert report.uncovered_fraction == Fraction(90_000 - 576, 90_000)

    def test_two_stage_report(self, two_stage_state):
        plan, window, _, state2 = two_stage_state
        tiling, report = finalize(state2, window, plan)
        assert set(report.tile_cells) == {1, 2, "P"}
        assert report.small_tile_fraction() < Fraction(2, 5)
        assert report.notes["small_fraction_below_min_target"] is True
        assert report.notes["predicted_error_budget"] == Fraction(1, 2)
        assert sum(report.tile_cells.values()) == report.covered_cells

    def test_empty_state(self):
        tiling, report = finalize(None, None)
        assert len(tiling) == 0
        assert report.covered_cells == 0
        assert report.uncovered_fraction == 0


def measured_report(tiling):
    """Frequency report for a synthetic fully-covered window."""
    counts = tiling.tile_cell_counts()
    return FrequencyReport(
        tiling.window.volume, sum(counts.values()), counts, FLAGSHIP_TARGETS
    )


def block_grid_tiling(assignments, alphabet):
    """A 60x60 window as a 10x10 grid of 6x6 blocks.

    ``assignments`` maps grid index -> small tile id; every other block is one
    large brick.  Small tiles subdivide their block exactly.
    """
    placements = []
    for gx in range(10):
        for gy in range(10):
            base = (6 * gx, 6 * gy)
            tile = assignments.get((gx, gy), "P")
            if tile == "P":
                placements.append(Placement("P", base))
                continue
            w, h = alphabet.shape(tile)
            for dx in range(0, 6, w):
                for dy in range(0, 6, h):
                    placements.append(Placement(tile, (base[0] + dx, base[1] + dy)))
    return Tiling.from_placements(
        dict(alphabet.tile_shapes), placements, Box((0, 0), (60, 60))
    )


class TestRedistribute:
    def test_largest_remainder_split(self, flagship_alphabet):
        # 5 blocks of tile 1 (180 cells), 4 of tile 2 (144 cells), 91 bricks;
        # deficits are 1260 and 2016 cells, i.e. exactly 35 and 56 bricks
        assignments = {(0, i): 1 for i in range(5)}
        assignments.update({(1, i): 2 for i in range(4)})
        tiling = block_grid_tiling(assignments, flagship_alphabet)
        out = redistribute(tiling, FLAGSHIP_TARGETS, measured_report(tiling), seed=5)
        counts = out.tile_cell_counts()
        assert counts[1] == 1440 and counts[2] == 2160
        assert counts.get("P", 0) == 0
        assert len(out) == 30 + 35 * 6 + 24 + 56 * 6

    def test_partition_preserved(self, flagship_alphabet):
        assignments = {(0, i): 1 for i in range(5)}
        assignments.update({(1, i): 2 for i in range(4)})
        tiling = block_grid_tiling(assignments, flagship_alphabet)
        out = redistribute(tiling, FLAGSHIP_TARGETS, measured_report(tiling), seed=5)
        cover = np.zeros((60, 60), dtype=np.int32)
        for p in out.placements():
            w, h = out.tile_shapes[p.tile]
            cover[p.anchor[0] : p.anchor[0] + w, p.anchor[1] : p.anchor[1] + h] += 1
        assert cover.min() == 1 and cover.max() == 1

    def test_determinism(self, flagship_alphabet):
        assignments = {(0, 0): 1, (2, 2): 2}
        tiling = block_grid_tiling(assignments, flagship_alphabet)
        a = redistribute(tiling, FLAGSHIP_TARGETS, measured_report(tiling), seed=1)
        b = redistribute(tiling, FLAGSHIP_TARGETS, measured_report(tiling), seed=1)
        assert a.same_placements(b)

    def test_identity_when_exact(self, flagship_alphabet):
        # 2:3 cell ratio with no bricks at all leaves the tiling untouched
        assignments = {(0, 0): 1, (0, 1): 1, (1, 0): 2, (1, 1): 2, (1, 2): 2}
        placements = []
        for (gx, gy), tile in assignments.items():
            w, h = flagship_alphabet.shape(tile)
            for dx in range(0, 6, w):
                for dy in range(0, 6, h):
                    placements.append(Placement(tile, (6 * gx + dx, 6 * gy + dy)))
        t = Tiling.from_placements(
            dict(flagship_alphabet.tile_shapes), placements, Box((0, 0), (60, 60))
        )
        out = redistribute(t, FLAGSHIP_TARGETS, measured_report(t), seed=3)
        assert out.same_placements(t)

    def test_rejects_overfull_tile(self, flagship_alphabet):
        assignments = {(gx, gy): 1 for gx in range(5) for gy in range(10)}
        tiling = block_grid_tiling(assignments, flagship_alphabet)
        with pytest.raises(TargetsInfeasible):
            redistribute(tiling, FLAGSHIP_TARGETS, measured_report(tiling), seed=0)


@pytest.fixture(scope="module")
def small_run(flagship):
    plan = plan_stages(flagship, FLAGSHIP_TARGETS, mode="relaxed", sides=(57, 200))
    return plan, run_pipeline(plan, Box((0, 0), (600, 600)), seed=11)


class TestRunPipeline:
    def test_final_tiling_is_small_tiles_only(self, small_run):
        _, result = small_run
        assert result.report.tile_cells.get("P", 0) == 0
        assert set(p.tile for p in result.tiling.placements()) <= {1, 2}

    def test_frequencies_near_targets(self, small_run):
        _, result = small_run
        for delta in result.report.deltas().values():
            assert abs(delta) < Fraction(1, 100)

    def test_uncovered_within_predicted_bound(self, small_run):
        plan, result = small_run
        assert result.report.uncovered_fraction <= plan.predicted_uncovered_bound((600, 600))

    def test_pre_report_keeps_brick_mass(self, small_run):
        _, result = small_run
        pre = result.pre_report
        assert pre.tile_cells["P"] > pre.small_tile_cells()
        assert pre.covered_cells == result.report.covered_cells

    def test_determinism(self, small_run):
        plan, result = small_run
        again = run_pipeline(plan, Box((0, 0), (600, 600)), seed=11)
        other = run_pipeline(plan, Box((0, 0), (600, 600)), seed=12)
        assert result.tiling.same_placements(again.tiling)
        assert not result.tiling.same_placements(other.tiling)


@pytest.fixture(scope="module")
def line_run():
    f3 = validate_family([(2,), (3,), (5,)])
    targets = TargetDistribution.of(["2/5", "2/5", "1/5"])
    plan = plan_stages(f3, targets, mode="relaxed", cutoffs=(2, 3), sides=(33, 200))
    window = Box((0,), (100_000,))
    tiling, report = countable_build(f3.shapes, targets, plan, window, seed=4)
    return f3, plan, tiling, report


class TestCountableBuild:
    def test_final_tiles_from_truncated_list(self, line_run):
        _, _, tiling, report = line_run
        assert set(p.tile for p in tiling.placements()) <= {1, 2, 3}
        for brick in ("P1", "P2"):
            assert report.tile_cells.get(brick, 0) == 0

    def test_frequencies(self, line_run):
        _, _, _, report = line_run
        for delta in report.deltas().values():
            assert abs(delta) <= Fraction(2, 100)

    def test_shapes_must_match_plan(self, line_run):
        _, plan, _, _ = line_run
        targets = TargetDistribution.of(["2/5", "2/5", "1/5"])
        with pytest.raises(Infeasible) as info:
            countable_build(
                [(2,), (3,), (7,)], targets, plan, Box((0,), (10_000,)), seed=0
            )
        assert info.value.constraint == "cutoffs"
