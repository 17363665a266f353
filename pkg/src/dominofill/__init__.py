"""Generalized domino tilings by rectangles with coprime sides.

The package builds tilings of finite lattice windows in any dimension from a
family of rectangular tiles whose sides are coprime along every axis.  The
core pieces are a symbolic coding of tilings as a nearest-neighbour shift
space, a deterministic collar-filling engine that interpolates between brick
walls, and a staged tower construction that drives tile frequencies to any
prescribed rational targets.
"""

from .brickfill import (
    BrickWall,
    FilledWord,
    GluedWord,
    GapTooNarrow,
    InwardEmpty,
    NoMatchingTranslate,
    NonMultipleExtent,
    brick_wall,
    collar_width,
    complete_partial_tiles,
    decompose_collar,
    fill_between,
    glue,
    restricted_fill,
    strip_tile,
    uniform_fill,
)
from .geometry import Box, Region, expand, inner_collar, interior, outer_collar
from .numerics import (
    FamilyError,
    FewerThanTwoShapes,
    GcdNotOne,
    NonPositiveEntry,
    NotRepresentable,
    RectFamily,
    SharedAxisDivisor,
    axis_threshold,
    represent,
    validate_family,
)
from .rng import SplitMix64
from .sft import (
    Alphabet,
    DecodeResult,
    InvalidWord,
    Placement,
    Symbol,
    SymbolicWord,
    Tiling,
    Violation,
    allowed_neighbor,
    build_alphabet,
    decode,
    encode,
    translate_word,
    validate_word,
)
from .tower import (
    ConstructionState,
    FrequencyReport,
    Infeasible,
    InvalidTargets,
    NonpositiveTarget,
    PipelineResult,
    StagePlan,
    StageSpec,
    StageTowers,
    TargetDistribution,
    TargetsInfeasible,
    TowerBlock,
    WindowTooSmall,
    build_stage,
    countable_build,
    finalize,
    plan_stages,
    redistribute,
    run_pipeline,
    sample_towers,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "Box",
    "BrickWall",
    "ConstructionState",
    "DecodeResult",
    "FamilyError",
    "FewerThanTwoShapes",
    "FilledWord",
    "FrequencyReport",
    "GapTooNarrow",
    "GcdNotOne",
    "GluedWord",
    "Infeasible",
    "InvalidTargets",
    "InvalidWord",
    "InwardEmpty",
    "NoMatchingTranslate",
    "NonMultipleExtent",
    "NonPositiveEntry",
    "NonpositiveTarget",
    "NotRepresentable",
    "PipelineResult",
    "Placement",
    "RectFamily",
    "Region",
    "SharedAxisDivisor",
    "SplitMix64",
    "StagePlan",
    "StageSpec",
    "StageTowers",
    "Symbol",
    "SymbolicWord",
    "TargetDistribution",
    "TargetsInfeasible",
    "Tiling",
    "TowerBlock",
    "Violation",
    "WindowTooSmall",
    "allowed_neighbor",
    "axis_threshold",
    "brick_wall",
    "build_alphabet",
    "build_stage",
    "collar_width",
    "complete_partial_tiles",
    "countable_build",
    "decode",
    "decompose_collar",
    "encode",
    "expand",
    "fill_between",
    "finalize",
    "glue",
    "inner_collar",
    "interior",
    "outer_collar",
    "plan_stages",
    "redistribute",
    "represent",
    "restricted_fill",
    "run_pipeline",
    "sample_towers",
    "strip_tile",
    "translate_word",
    "uniform_fill",
    "validate_family",
    "validate_word",
]
