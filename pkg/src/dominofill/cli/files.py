"""Canonical on-disk formats for tilings and words.

Text files are UTF-8 and line-oriented: a version marker, then ``dim``,
``shapes``, ``window`` and ``seed`` header lines, then one sorted record per
placement (``tile x_1 .. x_d``) or per assigned cell
(``x_1 .. x_d tile o_1 .. o_d``).  The JSON flavour mirrors the same fields
one for one.  Writes are atomic (temp file + rename) and byte-deterministic
for a given object, which is what makes seeded runs diffable.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..geometry import Box
from ..sft import Alphabet, Symbol, SymbolicWord, Tiling, tile_sort_key

TILING_MAGIC = "dominofill tiling v1"
WORD_MAGIC = "dominofill word v1"


class ParseError(ValueError):
    pass


class VersionMismatch(ParseError):
    pass


def _parse_tile(token: str):
    return int(token) if token.lstrip("-").isdigit() else token


def _fmt_shapes(shapes: Mapping) -> str:
    items = sorted(shapes.items(), key=lambda kv: tile_sort_key(kv[0]))
    return " ".join(f"{t}:{'x'.join(str(e) for e in s)}" for t, s in items)


def _parse_shapes(text: str) -> dict:
    out = {}
    for token in text.split():
        tile, _, dims = token.partition(":")
        if not dims:
            raise ParseError(f"bad shapes token {token!r}")
        out[_parse_tile(tile)] = tuple(int(x) for x in dims.split("x"))
    return out


def _window_line(window: Box | None) -> str:
    if window is None:
        return "window none"
    coords = " ".join(str(x) for x in window.anchor)
    extents = " ".join(str(x) for x in window.shape)
    return f"window {coords} {extents}"


def _parse_window(rest: list[str], dim: int) -> Box | None:
    if rest == ["none"]:
        return None
    if len(rest) != 2 * dim:
        raise ParseError(f"window line needs {2 * dim} integers")
    values = [int(x) for x in rest]
    return Box(tuple(values[:dim]), tuple(values[dim:]))


def _read_header(lines: list[str], magic: str) -> tuple[int, dict, Box | None, int, int]:
    if not lines:
        raise ParseError("empty file")
    if lines[0] != magic:
        if lines[0].startswith("dominofill "):
            raise VersionMismatch(f"expected {magic!r}, found {lines[0]!r}")
        raise ParseError(f"missing {magic!r} marker")
    header = {}
    idx = 1
    for key in ("dim", "shapes", "window", "seed"):
        if idx >= len(lines):
            raise ParseError(f"missing header line {key!r}")
        name, _, rest = lines[idx].partition(" ")
        if name != key:
            raise ParseError(f"expected header {key!r}, found {name!r}")
        header[key] = rest
        idx += 1
    dim = int(header["dim"])
    shapes = _parse_shapes(header["shapes"])
    window = _parse_window(header["window"].split(), dim)
    seed = int(header["seed"])
    return dim, shapes, window, seed, idx


def serialize_tiling(tiling: Tiling, seed: int = 0) -> str:
    canon = tiling.sorted_canonical()
    dim = canon.dim if len(canon) else (canon.window.dim if canon.window else 1)
    lines = [
        TILING_MAGIC,
        f"dim {dim}",
        f"shapes {_fmt_shapes(canon.tile_shapes)}",
        _window_line(canon.window),
        f"seed {seed}",
    ]
    order = canon.tile_order
    for code, anchor in zip(canon.codes, canon.anchors):
        coords = " ".join(str(int(x)) for x in anchor)
        lines.append(f"{order[int(code)]} {coords}")
    return "\n".join(lines) + "\n"


def parse_tiling(text: str) -> tuple[Tiling, int]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim, shapes, window, seed, idx = _read_header(lines, TILING_MAGIC)
    order = sorted(shapes, key=tile_sort_key)
    lookup = {t: i for i, t in enumerate(order)}
    codes = []
    anchors = []
    for ln in lines[idx:]:
        parts = ln.split()
        if len(parts) != dim + 1:
            raise ParseError(f"bad placement line {ln!r}")
        tile = _parse_tile(parts[0])
        if tile not in lookup:
            raise ParseError(f"unknown tile {tile!r} in line {ln!r}")
        codes.append(lookup[tile])
        anchors.append([int(x) for x in parts[1:]])
    codes_arr = np.array(codes, dtype=np.int32)
    anchors_arr = (
        np.array(anchors, dtype=np.int64) if anchors else np.zeros((0, dim), dtype=np.int64)
    )
    return Tiling(shapes, codes_arr, anchors_arr, window), seed


def serialize_word(word: SymbolicWord, seed: int = 0) -> str:
    lines = [
        WORD_MAGIC,
        f"dim {word.alphabet.dim}",
        f"shapes {_fmt_shapes(word.alphabet.tile_shapes)}",
        _window_line(word.box),
        f"seed {seed}",
    ]
    for cell, sym in word.iter_cells():
        coords = " ".join(str(x) for x in cell)
        offs = " ".join(str(x) for x in sym.offset)
        lines.append(f"{coords} {sym.tile} {offs}")
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> tuple[SymbolicWord, int]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim, shapes, window, seed, idx = _read_header(lines, WORD_MAGIC)
    if window is None:
        raise ParseError("word files need an explicit window")
    alphabet = Alphabet(dim, shapes)
    word = SymbolicWord(alphabet, window)
    for ln in lines[idx:]:
        parts = ln.split()
        if len(parts) != 2 * dim + 1:
            raise ParseError(f"bad cell line {ln!r}")
        cell = tuple(int(x) for x in parts[:dim])
        tile = _parse_tile(parts[dim])
        offset = tuple(int(x) for x in parts[dim + 1 :])
        if tile not in alphabet.tile_shapes:
            raise ParseError(f"unknown tile {tile!r} in line {ln!r}")
        if not window.contains_cell(cell):
            raise ParseError(f"cell {cell} outside window in line {ln!r}")
        try:
            word.set_cell(cell, Symbol(tile, offset))
        except KeyError as exc:
            raise ParseError(f"offset {offset} invalid for tile {tile!r}") from exc
    return word, seed


@dataclass(frozen=True)
class LoadedFile:
    """Either a tiling or a word, as found on disk."""

    kind: str
    tiling: Tiling | None
    word: SymbolicWord | None
    seed: int


def load_any(path: str) -> LoadedFile:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _from_json(stripped)
    first = stripped.splitlines()[0] if stripped else ""
    if first == TILING_MAGIC:
        tiling, seed = parse_tiling(text)
        return LoadedFile("tiling", tiling, None, seed)
    if first == WORD_MAGIC:
        word, seed = parse_word(text)
        return LoadedFile("word", None, word, seed)
    if first.startswith("dominofill "):
        raise VersionMismatch(f"unsupported format marker {first!r}")
    raise ParseError(f"unrecognized file {path!r}")


def tiling_to_json(tiling: Tiling, seed: int = 0) -> str:
    canon = tiling.sorted_canonical()
    dim = canon.dim if len(canon) else (canon.window.dim if canon.window else 1)
    doc = {
        "format": "dominofill tiling",
        "version": 1,
        "dim": dim,
        "shapes": {str(t): list(s) for t, s in canon.tile_shapes.items()},
        "window": None
        if canon.window is None
        else {"anchor": list(canon.window.anchor), "shape": list(canon.window.shape)},
        "seed": seed,
        "placements": [
            {"tile": canon.tile_order[int(c)], "anchor": [int(x) for x in a]}
            for c, a in zip(canon.codes, canon.anchors)
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def word_to_json(word: SymbolicWord, seed: int = 0) -> str:
    doc = {
        "format": "dominofill word",
        "version": 1,
        "dim": word.alphabet.dim,
        "shapes": {str(t): list(s) for t, s in word.alphabet.tile_shapes.items()},
        "window": {"anchor": list(word.box.anchor), "shape": list(word.box.shape)},
        "seed": seed,
        "cells": [
            {"cell": list(cell), "tile": sym.tile, "offset": list(sym.offset)}
            for cell, sym in word.iter_cells()
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _from_json(text: str) -> LoadedFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from exc
    fmt = doc.get("format", "")
    if doc.get("version") != 1:
        raise VersionMismatch(f"unsupported version {doc.get('version')!r}")
    dim = int(doc["dim"])
    shapes = {_parse_tile(t): tuple(int(x) for x in s) for t, s in doc["shapes"].items()}
    win = doc.get("window")
    window = None if win is None else Box(tuple(win["anchor"]), tuple(win["shape"]))
    seed = int(doc.get("seed", 0))
    if fmt == "dominofill tiling":
        order = sorted(shapes, key=tile_sort_key)
        lookup = {t: i for i, t in enumerate(order)}
        codes = []
        anchors = []
        for rec in doc["placements"]:
            codes.append(lookup[_parse_tile(str(rec["tile"]))])
            anchors.append([int(x) for x in rec["anchor"]])
        codes_arr = np.array(codes, dtype=np.int32)
        anchors_arr = (
            np.array(anchors, dtype=np.int64) if anchors else np.zeros((0, dim), dtype=np.int64)
        )
        return LoadedFile("tiling", Tiling(shapes, codes_arr, anchors_arr, window), None, seed)
    if fmt == "dominofill word":
        if window is None:
            raise ParseError("word JSON needs a window")
        alphabet = Alphabet(dim, shapes)
        word = SymbolicWord(alphabet, window)
        for rec in doc["cells"]:
            word.set_cell(
                tuple(int(x) for x in rec["cell"]),
                Symbol(_parse_tile(str(rec["tile"])), tuple(int(x) for x in rec["offset"])),
            )
        return LoadedFile("word", None, word, seed)
    raise ParseError(f"unknown JSON format {fmt!r}")


def write_atomic(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
