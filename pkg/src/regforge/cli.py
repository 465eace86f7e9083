"""Command-line entry point.

Exit codes: 0 success, 1 audit failure, 2 usage or configuration error.
Every report embeds the fully resolved configuration; apart from the
``timestamp`` field, identical configurations give identical reports.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

from . import __version__
from .auditor import (
    DEFAULT_SIZE_CAP,
    bounds_calculator,
    canonical_witness_search,
    exhaustive_pair_check,
    lower_bound_demo,
    niceness_audit,
)
from .bipartitions import DEFAULT_GRID_STEP, PAPER_C, RNG_ALGORITHM, BalanceError, biased_lemma_oracle, is_balanced
from .formats import FormatError, dumps_descriptor, load, save
from .graph import Equipartition, LevelWeightedGraph, VertexSet
from .rationals import format_rational, parse_rational
from .sampler import LOG_BASE, claim_threshold, deviation_audit, sample_graph
from .tower import (
    PAPER_KAPPA,
    ConstructionParams,
    build_instance,
    build_tower,
    eq1_suite,
    half_density_suite,
    paper_delta,
    random_vertex_sets,
)

COMMANDS = ("gen-tower", "gen-graph", "sample", "audit-pair", "audit-partition", "verify-lemmas", "demo", "bounds")
ORACLE_ZETAS = (Fraction(1, 40), Fraction(1, 20))

RATIONAL_KEYS = {"epsilon", "delta", "eps_audit", "zeta", "grid_step"}
INT_KEYS = {"s", "kappa", "n", "seed", "size_cap", "trials", "max_retries", "set_size", "z_count"}
STR_KEYS = {"mode", "in", "out", "format", "strategy", "a", "b", "method"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    epsilon: Fraction | None = None
    delta: Fraction | None = None
    s: int | None = None
    kappa: int = PAPER_KAPPA
    n: int | None = None
    seed: int = 0
    mode: str | None = None
    eps_audit: Fraction | None = None
    zeta: Fraction = Fraction(1, 10)
    grid_step: Fraction = DEFAULT_GRID_STEP
    size_cap: int = DEFAULT_SIZE_CAP
    trials: int = 100
    max_retries: int = 1000
    set_size: int | None = None
    z_count: int = 200
    strategy: str = "canonical"
    method: str = "auto"
    a: str | None = None
    b: str | None = None
    in_path: str | None = None
    out_path: str | None = None
    format: str = "json"
    descriptor: bool = False

    def params(self) -> ConstructionParams:
        if self.n is None:
            raise UsageError("n required")
        try:
            if self.mode == "paper":
                return ConstructionParams.paper(self.epsilon, self.n, self.seed)
            if self.delta is None or self.s is None:
                raise UsageError("custom mode requires delta and s")
            return ConstructionParams.custom(self.delta, self.s, self.n, self.kappa, self.epsilon, self.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def to_json(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = format_rational(v) if isinstance(v, Fraction) else v
        return out


def read_config_file(text: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment; dashes in keys are allowed."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def _convert(key: str, value):
    if value is None:
        return None
    try:
        if key in RATIONAL_KEYS:
            return parse_rational(value)
        if key in INT_KEYS:
            return int(value)
    except ValueError as exc:
        raise UsageError(f"{key.replace('_', '-')}: {exc}") from None
    if key in STR_KEYS:
        return str(value)
    raise UsageError(f"unknown config key {key!r}")


def parse_config(command: str, flags: dict | None = None, file_text: str | None = None) -> RunConfig:
    """Merge config-file values with flags (flags win), validate and fill defaults."""
    if command not in COMMANDS:
        raise UsageError(f"unknown subcommand {command!r}")
    merged: dict = {}
    if file_text:
        for k, v in read_config_file(file_text).items():
            merged[k] = _convert(k, v)
    for k, v in (flags or {}).items():
        if v is not None:
            merged[k] = _convert(k, v)
    rename = {"in": "in_path", "out": "out_path"}
    cfg = RunConfig(command, **{rename.get(k, k): v for k, v in merged.items()})

    if cfg.mode is None:
        # a graph read from --in needs no construction parameters
        from_file = command in ("sample", "audit-pair") and cfg.in_path and cfg.epsilon is None
        cfg.mode = "custom" if (cfg.delta is not None or cfg.s is not None or from_file) else "paper"
    if cfg.mode not in ("paper", "custom"):
        raise UsageError(f"mode must be paper or custom, got {cfg.mode!r}")
    if cfg.format not in ("json", "text"):
        raise UsageError("format must be json or text")
    if cfg.strategy not in ("exhaustive", "canonical", "both"):
        raise UsageError("strategy must be exhaustive, canonical or both")

    if command == "bounds" or cfg.mode == "paper":
        if cfg.epsilon is None:
            raise UsageError("epsilon required")
        try:
            delta = paper_delta(cfg.epsilon)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        s = int(1 / delta)
        if cfg.mode == "paper":
            if (cfg.delta is not None and cfg.delta != delta) or (cfg.s is not None and cfg.s != s):
                raise UsageError("overdetermined: paper mode derives delta and s from epsilon")
            if cfg.kappa != PAPER_KAPPA:
                raise UsageError("overdetermined: paper mode fixes kappa = 512")
            cfg.delta, cfg.s = delta, s
    if cfg.eps_audit is None and cfg.epsilon is not None:
        cfg.eps_audit = cfg.epsilon
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    for flag in ("epsilon", "delta", "s", "kappa", "n", "seed", "mode", "eps-audit", "zeta", "grid-step",
                 "size-cap", "trials", "max-retries", "set-size", "z-count", "strategy", "method", "a", "b"):
        common.add_argument(f"--{flag}", dest=flag.replace("-", "_"))
    common.add_argument("--in", dest="in")
    common.add_argument("--out", dest="out")
    common.add_argument("--format", dest="format")
    common.add_argument("--config", dest="config")
    common.add_argument("--descriptor", action="store_true", help="gen-graph: write the parameters-only descriptor")
    parser = _Parser(prog="regforge", description="Lower-bound instance builder and regularity auditor.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _vertex_list(text: str | None, n: int, label: str) -> VertexSet:
    if not text:
        raise UsageError(f"--{label} required")
    members = []
    try:
        for chunk in text.split(","):
            chunk = chunk.strip()
            if "-" in chunk:
                lo, hi = (int(x) for x in chunk.split("-", 1))
                members.extend(range(lo, hi + 1))
            elif chunk:
                members.append(int(chunk))
        return VertexSet.of(members, n)
    except ValueError as exc:
        raise UsageError(f"--{label}: {exc}") from None


def _load_graph(cfg: RunConfig) -> tuple[LevelWeightedGraph, object]:
    """Graph from ``--in`` (matrix file or descriptor) or from parameters."""
    if cfg.in_path:
        obj = load(cfg.in_path)
        if isinstance(obj, ConstructionParams):
            T = build_tower(obj, cfg.max_retries)
            return build_instance(T), T
        if isinstance(obj, LevelWeightedGraph):
            return obj, None
        raise UsageError(f"{cfg.in_path}: expected a graph or descriptor file")
    T = build_tower(cfg.params(), cfg.max_retries)
    return build_instance(T), T


def _need_eps(cfg: RunConfig) -> Fraction:
    if cfg.eps_audit is None:
        raise UsageError("eps-audit required")
    return cfg.eps_audit


def cmd_gen_tower(cfg: RunConfig):
    T = build_tower(cfg.params(), cfg.max_retries)
    if cfg.out_path:
        save(T, cfg.out_path)
    levels = [
        {"level": r, "M": T.ground_size(r), "m": T.sizes[r - 1],
         "worst_pair": list(is_balanced(T.sequence(r), PAPER_C)[1])}
        for r in range(1, T.s + 1)
    ]
    return True, {"tower_sizes": list(T.sizes), "levels": levels, "out": cfg.out_path}


def cmd_gen_graph(cfg: RunConfig):
    params = cfg.params()
    T = build_tower(params, cfg.max_retries)
    G = build_instance(T)
    if cfg.out_path:
        if cfg.descriptor:
            Path(cfg.out_path).write_text(dumps_descriptor(params))
        else:
            save(G, cfg.out_path)
    return True, {"n": G.n, "s": G.s, "delta": format_rational(G.delta),
                  "total_activation": int(G.counts.sum()), "out": cfg.out_path}


def cmd_sample(cfg: RunConfig):
    G, _ = _load_graph(cfg)
    Gp = sample_graph(G, cfg.seed)
    if cfg.out_path:
        save(Gp, cfg.out_path)
    result = {"n": G.n, "edges": int(len(Gp.edges())), "out": cfg.out_path}
    try:
        audit = deviation_audit(G, Gp, cfg.zeta, cfg.trials, cfg.seed, cfg.set_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result["audit"] = audit.to_json()
    return audit.passed, result


def cmd_audit_pair(cfg: RunConfig):
    eps = _need_eps(cfg)
    G, T = _load_graph(cfg)
    A = _vertex_list(cfg.a, G.n, "a")
    B = _vertex_list(cfg.b, G.n, "b")
    method = cfg.method
    if method == "auto":
        method = "exhaustive" if max(len(A), len(B)) <= cfg.size_cap else "canonical"
    if method == "exhaustive":
        try:
            v = exhaustive_pair_check(G, A, B, eps, cfg.size_cap)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif method == "canonical":
        if T is None:
            raise UsageError("canonical search needs construction parameters, not a bare matrix")
        v = canonical_witness_search(G, T, A, B, eps)
    else:
        raise UsageError("method must be auto, exhaustive or canonical")
    return not v.irregular, {"verdict": v.to_json()}


def cmd_audit_partition(cfg: RunConfig):
    eps = _need_eps(cfg)
    if not cfg.in_path:
        raise UsageError("--in partition file required")
    P = load(cfg.in_path)
    if not isinstance(P, Equipartition):
        raise UsageError(f"{cfg.in_path}: expected a partition file")
    T = build_tower(cfg.params(), cfg.max_retries)
    G = build_instance(T)
    try:
        rep = niceness_audit(G, P, eps, cfg.strategy, T, cfg.size_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return rep.verdict != "not-nice", {"report": rep.to_json()}


def cmd_verify_lemmas(cfg: RunConfig):
    T = build_tower(cfg.params(), cfg.max_retries)
    G = build_instance(T)
    suites = {}

    balance = []
    for r in range(1, T.s + 1):
        ok, worst = is_balanced(T.sequence(r), PAPER_C)
        balance.append({"level": r, "m": T.sizes[r - 1], "M": T.ground_size(r), "passed": ok, "worst_pair": list(worst)})
    suites["balance"] = {"passed": all(b["passed"] for b in balance), "levels": balance}

    oracle = []
    for r in range(1, T.s + 1):
        for zeta in ORACLE_ZETAS:
            res = biased_lemma_oracle(T.sequence(r), zeta, cfg.grid_step)
            oracle.append({"level": r, **res.to_json()})
    suites["biased_oracle"] = {"passed": all(o["holds"] for o in oracle), "runs": oracle}

    ok, checked, fail = half_density_suite(T, G)
    suites["half_density"] = {"passed": ok, "checked": checked, "first_failure": None if fail is None else list(fail.where)}

    ok, checked, fail = eq1_suite(T, G, random_vertex_sets(T.n, cfg.z_count, cfg.seed))
    suites["eq1"] = {"passed": ok, "checked": checked,
                     "first_failure": None if fail is None else [fail.where[0], fail.where[2], fail.where[3]]}

    size = cfg.set_size if cfg.set_size is not None else claim_threshold(G.n, cfg.zeta)
    if size > G.n:
        suites["sampling"] = {"passed": None, "skipped": f"n too small for zeta: set size {size} > n={G.n}",
                              "log": LOG_BASE}
    else:
        audit = deviation_audit(G, sample_graph(G, cfg.seed), cfg.zeta, cfg.trials, cfg.seed, size)
        suites["sampling"] = {"passed": audit.passed, **audit.to_json()}

    passed = all(v["passed"] is not False for v in suites.values())
    return passed, {"suites": suites}


def cmd_demo(cfg: RunConfig):
    report = lower_bound_demo(cfg.params(), _need_eps(cfg), cfg.z_count, cfg.max_retries)
    return report["passed"], report


def cmd_bounds(cfg: RunConfig):
    try:
        return True, bounds_calculator(cfg.epsilon)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


HANDLERS = {
    "gen-tower": cmd_gen_tower,
    "gen-graph": cmd_gen_graph,
    "sample": cmd_sample,
    "audit-pair": cmd_audit_pair,
    "audit-partition": cmd_audit_partition,
    "verify-lemmas": cmd_verify_lemmas,
    "demo": cmd_demo,
    "bounds": cmd_bounds,
}


def _text_lines(command: str, result: dict, passed: bool) -> list[str]:
    if command == "bounds":
        return [
            f"delta={result['delta']} s={result['s']}",
            "tower_sizes=" + " ".join(str(x) for x in result["tower_sizes"]),
            *result["statements"],
        ]
    return [f"{command}: {'pass' if passed else 'fail'}"] + [
        f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in result.items() if not isinstance(v, (dict, list))
    ]


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        ns = _build_parser().parse_args(argv)
        if ns.command is None:
            raise UsageError("missing subcommand (one of: " + ", ".join(COMMANDS) + ")")
        flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config", "descriptor")}
        file_text = Path(ns.config).read_text() if ns.config else None
        cfg = parse_config(ns.command, flags, file_text)
        cfg.descriptor = bool(ns.descriptor)
        passed, result = HANDLERS[ns.command](cfg)
    except (UsageError, FormatError, BalanceError, OSError, ValueError) as exc:
        print(f"regforge: error: {exc}".splitlines()[0], file=stderr)
        return 2
    report = {
        "command": ns.command,
        "config": cfg.to_json(),
        "rng": RNG_ALGORITHM,
        "version": __version__,
        "status": "pass" if passed else "fail",
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if cfg.out_path and ns.command in ("audit-pair", "audit-partition", "verify-lemmas", "demo", "bounds"):
        Path(cfg.out_path).write_text(text + "\n")
    if cfg.format == "text":
        print("\n".join(_text_lines(ns.command, result, passed)), file=stdout)
    else:
        print(text, file=stdout)
    return 0 if passed else 1


def _json_default(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
