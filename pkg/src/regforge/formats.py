"""Plain-text file formats.

Every format starts with a ``REGFORGE-<KIND> v1`` header line. ``load``
dispatches on that header, so callers rarely need the per-kind readers.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bipartitions import BipartitionSequence
from .graph import Equipartition, LevelWeightedGraph
from .rationals import format_rational, parse_rational
from .sampler import SampledGraph
from .tower import ConstructionParams, PartitionTower, build_instance, build_tower, tower_sizes


class FormatError(ValueError):
    pass


def _header(line: str, kind: str) -> dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != f"REGFORGE-{kind}" or parts[1] != "v1":
        raise FormatError(f"expected 'REGFORGE-{kind} v1' header, got {line!r}")
    return _fields(parts[2:], line)


def _fields(tokens, line) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise FormatError(f"malformed field {tok!r} in {line!r}")
        key, val = tok.split("=", 1)
        out[key] = val
    return out


def _require(fields: dict, key: str, line: str) -> str:
    if key not in fields:
        raise FormatError(f"missing {key}= in {line!r}")
    return fields[key]


def _int(fields, key, line) -> int:
    try:
        return int(_require(fields, key, line))
    except ValueError:
        raise FormatError(f"{key} must be an integer in {line!r}") from None


def _rational(fields, key, line) -> Fraction:
    try:
        return parse_rational(_require(fields, key, line))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _lines(text: str) -> list[str]:
    return [ln for ln in text.splitlines() if ln.strip()]


def _bitrows(rows: list[str], width: int) -> np.ndarray:
    for row in rows:
        if len(row) != width or set(row) - {"0", "1"}:
            raise FormatError(f"bad bitstring {row!r} (expected {width} characters of 0/1)")
    return np.array([[ch == "1" for ch in row] for row in rows], dtype=bool).reshape(len(rows), width)


def _bitstrings(bits: np.ndarray) -> list[str]:
    return ["".join("1" if b else "0" for b in row) for row in bits]


# -- graph -------------------------------------------------------------------

def dumps_graph(G: LevelWeightedGraph) -> str:
    out = [f"REGFORGE-GRAPH v1 n={G.n} s={G.s} delta={format_rational(G.delta)}"]
    out += [" ".join(str(int(x)) for x in row) for row in G.counts]
    return "\n".join(out) + "\n"


def loads_graph(text: str) -> LevelWeightedGraph:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty graph file")
    f = _header(lines[0], "GRAPH")
    n, s, delta = _int(f, "n", lines[0]), _int(f, "s", lines[0]), _rational(f, "delta", lines[0])
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} matrix rows, found {len(lines) - 1}")
    try:
        counts = np.array([[int(x) for x in ln.split()] for ln in lines[1:]], dtype=np.int64)
    except ValueError:
        raise FormatError("matrix rows must contain integers") from None
    if counts.shape != (n, n):
        raise FormatError(f"matrix is not {n}x{n}")
    try:
        return LevelWeightedGraph(n, s, delta, counts)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


# -- parameters-only descriptor ---------------------------------------------

def _params_line(p: ConstructionParams) -> str:
    eps = "none" if p.epsilon is None else format_rational(p.epsilon)
    return (
        f"epsilon={eps} delta={format_rational(p.delta)} s={p.s} kappa={p.kappa} "
        f"n={p.n} seed={p.seed} mode={p.mode}"
    )


def _parse_params(line: str) -> ConstructionParams:
    f = _fields(line.split(), line)
    eps_text = _require(f, "epsilon", line)
    epsilon = None if eps_text == "none" else _rational(f, "epsilon", line)
    try:
        return ConstructionParams(
            _rational(f, "delta", line), _int(f, "s", line), _int(f, "n", line), _int(f, "kappa", line),
            epsilon, _int(f, "seed", line), _require(f, "mode", line),
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def dumps_descriptor(params: ConstructionParams) -> str:
    return f"REGFORGE-DESC v1\n{_params_line(params)}\n"


def loads_descriptor(text: str) -> ConstructionParams:
    lines = _lines(text)
    if len(lines) != 2:
        raise FormatError("descriptor must have a header and one params line")
    _header(lines[0], "DESC")
    return _parse_params(lines[1])


def instance_from_descriptor(text: str, max_retries: int = 1000) -> LevelWeightedGraph:
    return build_instance(build_tower(loads_descriptor(text), max_retries=max_retries))


# -- bipartition sequence ----------------------------------------------------

def dumps_sequence(S: BipartitionSequence) -> str:
    out = [f"REGFORGE-BISEQ v1 m={S.m} M={S.M} c={format_rational(S.c)}"]
    out += _bitstrings(S.bits)
    return "\n".join(out) + "\n"


def loads_sequence(text: str) -> BipartitionSequence:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty sequence file")
    f = _header(lines[0], "BISEQ")
    m, M, c = _int(f, "m", lines[0]), _int(f, "M", lines[0]), _rational(f, "c", lines[0])
    if len(lines) != m + 1:
        raise FormatError(f"expected {m} bitstrings, found {len(lines) - 1}")
    try:
        S = BipartitionSequence(_bitrows(lines[1:], M), c)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return S.verify()


# -- tower -------------------------------------------------------------------

def dumps_tower(T: PartitionTower) -> str:
    out = ["REGFORGE-TOWER v1", _params_line(T.params)]
    for r in range(1, T.s + 1):
        out.append(f"level {r} M={T.ground_size(r)}")
        out += _bitstrings(T.level_bits[r - 1])
    return "\n".join(out) + "\n"


def loads_tower(text: str) -> PartitionTower:
    lines = _lines(text)
    if len(lines) < 2 or lines[0].strip() != "REGFORGE-TOWER v1":
        raise FormatError("expected 'REGFORGE-TOWER v1' header")
    params = _parse_params(lines[1])
    sizes = tower_sizes(params.s, params.kappa, max_bits=64)
    pos, level_bits = 2, []
    for r in range(1, params.s + 1):
        if pos >= len(lines):
            raise FormatError(f"missing level {r}")
        m = re.fullmatch(r"level (\d+) M=(\d+)", lines[pos].strip())
        if m is None or int(m.group(1)) != r:
            raise FormatError(f"expected 'level {r} M=<M>', got {lines[pos]!r}")
        M = int(m.group(2))
        count = sizes[r - 1]
        rows = lines[pos + 1 : pos + 1 + count]
        if len(rows) != count:
            raise FormatError(f"level {r}: expected {count} bitstrings")
        level_bits.append(_bitrows(rows, M))
        pos += 1 + count
    if pos != len(lines):
        raise FormatError("trailing lines after last level")
    T = PartitionTower(params, tuple(sizes), tuple(level_bits))
    try:
        T.validate()
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return T


def towers_equal(a: PartitionTower, b: PartitionTower) -> bool:
    return (
        a.params == b.params
        and a.sizes == b.sizes
        and len(a.level_bits) == len(b.level_bits)
        and all(np.array_equal(x, y) for x, y in zip(a.level_bits, b.level_bits))
    )


# -- sampled graph -----------------------------------------------------------

def dumps_sample(Gp: SampledGraph) -> str:
    out = [f"REGFORGE-SAMPLE v1 n={Gp.n} seed={Gp.seed}"]
    out += [f"{u} {v}" for u, v in Gp.edges().tolist()]
    return "\n".join(out) + "\n"


def loads_sample(text: str) -> SampledGraph:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty sample file")
    f = _header(lines[0], "SAMPLE")
    n, seed = _int(f, "n", lines[0]), _int(f, "seed", lines[0])
    adj = np.zeros((n, n), dtype=bool)
    for ln in lines[1:]:
        try:
            u, v = (int(x) for x in ln.split())
        except ValueError:
            raise FormatError(f"bad edge line {ln!r}") from None
        if not 0 <= u < v < n:
            raise FormatError(f"edge {ln!r} must satisfy 0 <= u < v < n")
        adj[u, v] = adj[v, u] = True
    return SampledGraph(n, adj, {"seed": seed})


# -- partition ---------------------------------------------------------------

def dumps_partition(P: Equipartition) -> str:
    out = [f"REGFORGE-PART v1 n={P.n} k={P.k}"]
    out += [str(int(x)) for x in P.assignment]
    return "\n".join(out) + "\n"


def loads_partition(text: str) -> Equipartition:
    lines = _lines(text)
    if not lines:
        raise FormatError("empty partition file")
    f = _header(lines[0], "PART")
    n, k = _int(f, "n", lines[0]), _int(f, "k", lines[0])
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} part indices, found {len(lines) - 1}")
    try:
        return Equipartition(n, k, [int(x) for x in lines[1:]])
    except ValueError as exc:
        raise FormatError(str(exc)) from None


_LOADERS = {
    "REGFORGE-GRAPH": loads_graph,
    "REGFORGE-BISEQ": loads_sequence,
    "REGFORGE-TOWER": loads_tower,
    "REGFORGE-SAMPLE": loads_sample,
    "REGFORGE-PART": loads_partition,
    "REGFORGE-DESC": loads_descriptor,
}

_DUMPERS = {
    LevelWeightedGraph: dumps_graph,
    BipartitionSequence: dumps_sequence,
    PartitionTower: dumps_tower,
    SampledGraph: dumps_sample,
    Equipartition: dumps_partition,
    ConstructionParams: dumps_descriptor,
}


def loads(text: str):
    first = text.lstrip().split(None, 1)
    if not first or first[0] not in _LOADERS:
        raise FormatError("unrecognized file header")
    return _LOADERS[first[0]](text)


def dumps(obj) -> str:
    for cls, fn in _DUMPERS.items():
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"no file format for {type(obj).__name__}")


def load(path):
    return loads(Path(path).read_text())


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj))
