"""Argument parsing and subcommand orchestration.

Subcommands: plan, build, fill, redistribute, verify, stats, render.  All
run parameters come from an INI config (see config.py); a few flags override
it per invocation.  The only environment variable honoured is
``DOMINOFILL_LOG`` (log level).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..brickfill import BrickWall, uniform_fill
from ..geometry import Box, expand
from ..numerics import FamilyError, validate_family
from ..sft import build_alphabet
from ..tower import (
    FrequencyReport,
    Infeasible,
    InvalidTargets,
    NonpositiveTarget,
    TargetDistribution,
    TargetsInfeasible,
    WindowTooSmall,
    plan_stages,
    redistribute,
    run_pipeline,
)
from .config import ConfigError, RunConfig, load_config, serialize_config
from .files import (
    ParseError,
    VersionMismatch,
    load_any,
    serialize_tiling,
    serialize_word,
    tiling_to_json,
    word_to_json,
    write_atomic,
)
from .render import render_ascii, render_svg
from .verify import verify_tiling, verify_word

log = logging.getLogger("dominofill")

USER_ERRORS = (
    ConfigError,
    FamilyError,
    Infeasible,
    InvalidTargets,
    NonpositiveTarget,
    OSError,
    ParseError,
    TargetsInfeasible,
    VersionMismatch,
    WindowTooSmall,
    ValueError,
)


def _setup_logging() -> None:
    level_name = os.environ.get("DOMINOFILL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_with_overrides(args) -> RunConfig:
    cfg = load_config(args.config)
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "mode", None):
        updates["mode"] = args.mode
    if getattr(args, "window", None):
        updates["window_shape"] = tuple(int(x) for x in args.window.split(","))
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    if getattr(args, "format", None):
        updates["out_format"] = args.format
    return cfg.replace(**updates) if updates else cfg


def _family_and_plan(cfg: RunConfig):
    family = validate_family(cfg.shapes, cfg.dim)
    targets = TargetDistribution.of(cfg.targets, cfg.tail_mass)
    plan = plan_stages(
        family,
        targets,
        count=cfg.count,
        mode=cfg.mode,
        sides=cfg.sides,
        error_budgets=cfg.error_budgets,
        gaps=cfg.gaps,
        cutoffs=cfg.cutoffs,
    )
    return family, targets, plan


def _window(cfg: RunConfig) -> Box:
    return Box(cfg.window_anchor, cfg.window_shape)


def _write_tiling(path_stem: str, tiling, seed: int, fmt: str) -> str:
    if fmt == "json":
        path = path_stem + ".json"
        write_atomic(path, tiling_to_json(tiling, seed))
    else:
        path = path_stem + ".txt"
        write_atomic(path, serialize_tiling(tiling, seed))
    return path


def cmd_plan(args) -> int:
    cfg = _load_with_overrides(args)
    family, targets, plan = _family_and_plan(cfg)
    print(f"family: {len(family.shapes)} tiles, d={family.dim}")
    print(f"large brick: {family.large_shape}  threshold: {family.threshold}  "
          f"fill length: {family.fill_length}")
    print(f"mode: {plan.mode}  stages: {plan.stage_count}"
          + (f"  cutoffs: {plan.cutoffs}" if plan.countable else ""))
    for i, s in enumerate(plan.stages, start=1):
        extra = f"  cutoff: {s.cutoff}  tail mass: {s.tail_mass}" if plan.countable else ""
        print(f"stage {i}: side {s.side}  collar {s.collar}  gap {s.gap}  "
              f"budget {s.error_budget}{extra}")
    bound = plan.predicted_uncovered_bound(cfg.window_shape)
    print(f"window {cfg.window_shape}: predicted uncovered bound {bound} "
          f"(~{float(bound):.4f})")
    return 0


def cmd_build(args) -> int:
    cfg = _load_with_overrides(args)
    _, _, plan = _family_and_plan(cfg)
    window = _window(cfg)
    log.info("building window %s with seed %d", window, cfg.seed)
    result = run_pipeline(plan, window, cfg.seed)
    out = cfg.out_dir
    paths = [
        _write_tiling(os.path.join(out, "tiling"), result.tiling, cfg.seed, cfg.out_format),
        _write_tiling(
            os.path.join(out, "tiling_pre"), result.pre_tiling, cfg.seed, cfg.out_format
        ),
    ]
    report_doc = {
        "seed": cfg.seed,
        "config": serialize_config(cfg),
        "pre": result.pre_report.to_dict(),
        "post": result.report.to_dict(),
        "predicted_uncovered_bound": float(
            plan.predicted_uncovered_bound(cfg.window_shape)
        ),
    }
    report_path = os.path.join(out, "report.json")
    write_atomic(report_path, json.dumps(report_doc, sort_keys=True, indent=2) + "\n")
    paths.append(report_path)
    post = result.report
    print(f"covered {post.covered_cells}/{post.window_cells} cells "
          f"({1 - float(post.uncovered_fraction):.4f})")
    for tile, delta in sorted(post.deltas().items()):
        print(f"tile {tile}: freq {float(post.frequency(tile)):.5f} "
              f"(target delta {float(delta):+.5f})")
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_fill(args) -> int:
    cfg = _load_with_overrides(args)
    if cfg.fill_inner is None or cfg.fill_outer is None or cfg.fill_box is None:
        raise ConfigError("fill needs [fill] inner_translate, outer_translate, box_anchor, box_shape")
    family = validate_family(cfg.shapes, cfg.dim)
    alphabet = build_alphabet(family)
    inner = BrickWall(alphabet, "P", cfg.fill_inner)
    outer = BrickWall(alphabet, "P", cfg.fill_outer)
    box = Box(*cfg.fill_box)
    filled = uniform_fill(inner, box, outer, family)
    region = expand(box, family.fill_length)
    word = filled.materialize(region)
    out = cfg.out_dir
    if cfg.out_format == "json":
        path = os.path.join(out, "fill.json")
        write_atomic(path, word_to_json(word, cfg.seed))
    else:
        path = os.path.join(out, "fill.txt")
        write_atomic(path, serialize_word(word, cfg.seed))
    print(f"filled {region} between translates {cfg.fill_inner} and {cfg.fill_outer}")
    print(f"wrote {path}")
    return 0


def cmd_redistribute(args) -> int:
    cfg = _load_with_overrides(args)
    loaded = load_any(args.file)
    if loaded.kind != "tiling":
        raise ParseError(f"{args.file} is not a tiling file")
    tiling = loaded.tiling
    if tiling.window is None:
        raise ParseError("redistribution needs a tiling with a window")
    targets = TargetDistribution.of(cfg.targets, cfg.tail_mass)
    shapes = dict(tiling.tile_shapes)
    for j, s in enumerate(cfg.shapes, start=1):
        shapes.setdefault(j, tuple(s))
    counts = tiling.tile_cell_counts()
    report = FrequencyReport(
        tiling.window.volume, sum(counts.values()), counts, targets
    )
    seed = cfg.seed if args.seed is None else args.seed
    result = redistribute(tiling, targets, report, seed, shapes)
    path = _write_tiling(
        os.path.join(cfg.out_dir, "redistributed"), result, seed, cfg.out_format
    )
    print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    loaded = load_any(args.file)
    if loaded.kind == "tiling":
        problems = verify_tiling(loaded.tiling)
    else:
        problems = verify_word(loaded.word)
    if problems:
        for p in problems:
            print(p, file=sys.stderr)
        print(f"FAIL: {len(problems)} violations in {args.file}", file=sys.stderr)
        return 1
    print(f"OK: {args.file}")
    return 0


def cmd_stats(args) -> int:
    loaded = load_any(args.file)
    if loaded.kind != "tiling":
        raise ParseError(f"{args.file} is not a tiling file")
    tiling = loaded.tiling
    targets = None
    if args.config:
        cfg = load_config(args.config)
        targets = TargetDistribution.of(cfg.targets, cfg.tail_mass)
    counts = tiling.tile_cell_counts()
    window_cells = tiling.window.volume if tiling.window else sum(counts.values())
    report = FrequencyReport(window_cells, sum(counts.values()), counts, targets)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0


def cmd_render(args) -> int:
    loaded = load_any(args.file)
    if loaded.kind != "tiling":
        raise ParseError(f"{args.file} is not a tiling file")
    tiling = loaded.tiling
    out_dir = args.out or "out"
    if tiling.dim == 1:
        path = os.path.join(out_dir, "render.txt")
        write_atomic(path, render_ascii(tiling))
    else:
        path = os.path.join(out_dir, "render.svg")
        write_atomic(path, render_svg(tiling))
    print(f"wrote {path}")
    return 0


def _add_overrides(sub, *, window: bool = True) -> None:
    sub.add_argument("--seed", type=int, default=None, help="override the config seed")
    sub.add_argument("--mode", choices=("strict", "relaxed"), default=None)
    if window:
        sub.add_argument("--window", default=None, help="window extents, e.g. 4096,4096")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--format", choices=("text", "json"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dominofill",
        description="Tilings of lattice windows by rectangles with coprime sides.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_plan = subs.add_parser("plan", help="validate and print a stage schedule")
    p_plan.add_argument("--config", required=True)
    _add_overrides(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_build = subs.add_parser("build", help="run the staged pipeline and write tilings")
    p_build.add_argument("--config", required=True)
    _add_overrides(p_build)
    p_build.set_defaults(func=cmd_build)

    p_fill = subs.add_parser("fill", help="fill between two wall translates")
    p_fill.add_argument("--config", required=True)
    _add_overrides(p_fill, window=False)
    p_fill.set_defaults(func=cmd_fill)

    p_redist = subs.add_parser("redistribute", help="relabel bricks to hit targets")
    p_redist.add_argument("file")
    p_redist.add_argument("--config", required=True)
    _add_overrides(p_redist, window=False)
    p_redist.set_defaults(func=cmd_redistribute)

    p_verify = subs.add_parser("verify", help="independently check a tiling or word file")
    p_verify.add_argument("file")
    p_verify.set_defaults(func=cmd_verify)

    p_stats = subs.add_parser("stats", help="frequency report for a tiling file")
    p_stats.add_argument("file")
    p_stats.add_argument("--config", default=None)
    p_stats.set_defaults(func=cmd_stats)

    p_render = subs.add_parser("render", help="SVG (d=2) or ASCII (d=1) picture")
    p_render.add_argument("file")
    p_render.add_argument("--out", default=None)
    p_render.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
