"""Command-line front end: instance files, bundled datasets, runs, reports.

Instance files are JSON documents::

    {"bin": {"width": 614, "height": 512},
     "spacing": 6,
     "items": [{"id": "t1", "width": 55, "height": 111, "from": 50}, ...]}

``to`` may be omitted per item; it is then derived from the overproduction
rate at load time.  Solution files are JSON as well, byte-stable for a fixed
instance and seed, and self-contained: they embed the instance so layouts can
be re-verified later.
"""

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

from .master import report_objective
from .model import (InfeasibleInstanceError, Instance, InvalidInstanceError,
                    ItemType, SolverConfig, derive_to, expand_counts)
from .oracle import OracleGuardError, exact_solve
from .placement import verify_layout
from .search import SearchReport, run

EXIT_OK = 0
EXIT_NO_INCUMBENT = 2
EXIT_INFEASIBLE = 3
EXIT_INPUT = 4

_STRATEGIES = {"dfs": "depth_first", "heap": "heuristic_min_heap"}

BUNDLED = ("r1", "r2", "r3", "r4", "r5")


class InstanceFormatError(ValueError):
    """Malformed instance file; the message names the offending field."""


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise InstanceFormatError(f"{where}.{key}: missing")
    value = mapping[key]
    if kind is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise InstanceFormatError(f"{where}.{key}: must be an integer")
    if kind is str and not isinstance(value, str):
        raise InstanceFormatError(f"{where}.{key}: must be a string")
    return value


def parse_instance_data(data, overproduction_rate: float = 0.15,
                        where: str = "instance") -> Instance:
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{where}: must be a JSON object")
    bin_spec = _require(data, "bin", dict, where)
    if not isinstance(bin_spec, dict):
        raise InstanceFormatError(f"{where}.bin: must be an object")
    bin_w = _require(bin_spec, "width", int, f"{where}.bin")
    bin_h = _require(bin_spec, "height", int, f"{where}.bin")
    spacing = _require(data, "spacing", int, where)
    items = data.get("items")
    if not isinstance(items, list):
        raise InstanceFormatError(f"{where}.items: must be a list")
    types = []
    for k, item in enumerate(items):
        at = f"{where}.items[{k}]"
        if not isinstance(item, dict):
            raise InstanceFormatError(f"{at}: must be an object")
        tid = _require(item, "id", str, at)
        width = _require(item, "width", int, at)
        height = _require(item, "height", int, at)
        lo = _require(item, "from", int, at)
        if "to" in item:
            hi = _require(item, "to", int, at)
        else:
            hi = derive_to(lo, overproduction_rate)
        try:
            types.append(ItemType(id=tid, width=width, height=height,
                                  from_count=lo, to_count=hi))
        except InvalidInstanceError as exc:
            raise InstanceFormatError(f"{at}: {exc}") from None
    try:
        return Instance(bin_width=bin_w, bin_height=bin_h, spacing=spacing,
                        item_types=tuple(types))
    except InvalidInstanceError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from None


def parse_instance(path: str | Path,
                   overproduction_rate: float = 0.15) -> Instance:
    """Load an instance file; ``to`` is derived where omitted.

    Bundled dataset names (r1..r5) resolve to the packaged data files.
    """
    name = str(path)
    if name in BUNDLED:
        text = resources.files("patternpack.data").joinpath(f"{name}.json") \
            .read_text(encoding="utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise InstanceFormatError(f"{path}: no such file")
        text = p.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: invalid JSON ({exc})") from None
    return parse_instance_data(data, overproduction_rate, where=str(path))


def instance_to_data(instance: Instance) -> dict:
    return {
        "bin": {"width": instance.bin_width, "height": instance.bin_height},
        "spacing": instance.spacing,
        "items": [{"id": t.id, "width": t.width, "height": t.height,
                   "from": t.from_count, "to": t.to_count}
                  for t in instance.item_types],
    }


def instance_digest(instance: Instance) -> str:
    canonical = json.dumps(instance_to_data(instance), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def solution_record(report: SearchReport, cfg: SolverConfig) -> dict:
    """Serializable run record; runtime is whole seconds so records stay
    byte-stable across repeated identical runs."""
    instance = report.instance
    registry = report.registry  # knows the compound types the search created
    record = {
        "format": "patternpack-solution-1",
        "instance": instance_to_data(instance),
        "instance_digest": instance_digest(instance),
        "strategy": report.strategy,
        "seed": report.seed,
        "status": report.status,
        "best_bound": round(report.best_bound, 9),
        "runtime_seconds": int(report.stats.wall_time_seconds),
        "nodes_explored": report.stats.nodes_explored,
        "columns_generated": report.stats.columns_generated,
    }
    sol = report.solution
    if sol is None:
        record["gap"] = None
        record["patterns"] = None
        return record
    record["bins"] = sol.bins
    record["patterns"] = sol.patterns
    record["gap"] = round(report.gap, 9) if report.gap is not None else None
    record["objective"] = report_objective(sol, cfg)
    record["produced"] = {tid: n for tid, n in sol.s}
    blocks = []
    for col, x in sol.assignments:
        counts = expand_counts(col.counts_dict(), registry)
        blocks.append({
            "counts": {tid: n for tid, n in sorted(counts.items())},
            "x": x,
            "placements": [[oid, px, py] for oid, px, py in col.witness.placements],
        })
    record["pattern_blocks"] = blocks
    return record


def emit_solution(report: SearchReport, cfg: SolverConfig,
                  path: str | Path) -> None:
    """Write the run record as canonical JSON (sorted keys, trailing newline)."""
    record = solution_record(report, cfg)
    Path(path).write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def verify_solution_file(path: str | Path) -> list[str]:
    """Re-check an emitted record; returns a list of problems (empty = valid)."""
    problems: list[str] = []
    try:
        record = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return [f"unreadable solution file: {exc}"]
    try:
        instance = parse_instance_data(record["instance"], where="instance")
    except (KeyError, InstanceFormatError, InfeasibleInstanceError) as exc:
        return [f"embedded instance invalid: {exc}"]
    if record.get("instance_digest") != instance_digest(instance):
        problems.append("instance digest mismatch")
    if record.get("patterns") is None:
        return problems  # no incumbent was found; nothing further to verify
    registry = instance.registry()
    from .model import Layout
    totals = {t.id: 0 for t in instance.item_types}
    bins = 0
    for k, block in enumerate(record.get("pattern_blocks", [])):
        layout = Layout(tuple((p[0], p[1], p[2]) for p in block["placements"]))
        counts = {tid: n for tid, n in block["counts"].items()}
        if not verify_layout(layout, counts, instance, registry):
            problems.append(f"pattern_blocks[{k}]: layout fails verification")
        x = block["x"]
        if not isinstance(x, int) or x <= 0:
            problems.append(f"pattern_blocks[{k}]: x must be a positive integer")
            continue
        bins += x
        for tid, n in counts.items():
            totals[tid] = totals.get(tid, 0) + n * x
    if bins != record.get("bins"):
        problems.append(f"bins field ({record.get('bins')}) != sum of x ({bins})")
    if len(record.get("pattern_blocks", [])) != record.get("patterns"):
        problems.append("patterns field does not match the number of blocks")
    for t in instance.item_types:
        if not (t.from_count <= totals.get(t.id, 0) <= t.to_count):
            problems.append(
                f"production of {t.id!r} ({totals.get(t.id, 0)}) outside "
                f"[{t.from_count}, {t.to_count}]")
    return problems


def render_pattern(block: dict, instance: Instance, path: str | Path) -> None:
    """One SVG drawing per pattern: bin outline plus labeled item rectangles,
    1 mm = 1 unit."""
    W, H = instance.bin_width, instance.bin_height
    dims = {t.id: (t.width, t.height) for t in instance.item_types}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" '
        f'width="{W}" height="{H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white" '
        f'stroke="black" stroke-width="1"/>',
    ]
    for oid, x, y in block.get("placements", []):
        w, h = dims[oid]
        ys = H - y - h  # SVG y axis points down
        font = max(4, min(w, h) // 3)
        parts.append(
            f'<rect x="{x}" y="{ys}" width="{w}" height="{h}" '
            f'fill="#9ecae1" stroke="#08306b" stroke-width="0.5"/>')
        parts.append(
            f'<text x="{x + w / 2}" y="{ys + h / 2}" font-size="{font}" '
            f'text-anchor="middle" dominant-baseline="middle">{oid}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def _cmd_solve(args) -> int:
    try:
        instance = parse_instance(args.instance, args.overproduction)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    cfg = SolverConfig(
        c1=args.c1, c2=args.c2, time_limit_seconds=args.time_limit,
        rng_seed=args.seed, node_selection=_STRATEGIES[args.strategy],
        pricing_random_sequences=args.random_sequences,
        overproduction_rate=args.overproduction)

    def show(event) -> bool:
        gap = "n/a" if event.gap is None else f"{100 * event.gap:.1f}%"
        inc = "-" if event.incumbent_bins is None else \
            f"{event.incumbent_bins}/{event.incumbent_patterns}"
        print(f"nodes={event.nodes_explored} incumbent(bins/patterns)={inc} "
              f"bound={event.best_bound:.2f} gap={gap}", file=sys.stderr)
        return False

    report = run(instance, cfg, progress=show if not args.quiet else None)
    if args.out:
        emit_solution(report, cfg, args.out)
    if report.solution is None:
        print(f"no feasible solution found (best bound {report.best_bound:.2f})")
        return EXIT_NO_INCUMBENT
    sol = report.solution
    gap = "n/a" if report.gap is None else f"{100 * report.gap:.1f}%"
    print(f"bins={sol.bins} patterns={sol.patterns} "
          f"objective={report_objective(sol, cfg):.6g} gap={gap} "
          f"status={report.status} "
          f"time={report.stats.wall_time_seconds:.1f}s "
          f"nodes={report.stats.nodes_explored}")
    if args.render:
        out_dir = Path(args.render)
        out_dir.mkdir(parents=True, exist_ok=True)
        record = solution_record(report, cfg)
        for k, block in enumerate(record.get("pattern_blocks", [])):
            render_pattern(block, instance, out_dir / f"pattern_{k:03d}.svg")
    return EXIT_OK


def _cmd_verify(args) -> int:
    problems = verify_solution_file(args.solution)
    if problems:
        for p in problems:
            print(f"FAIL: {p}")
        return 1
    print("OK: solution file verifies")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    try:
        instance = parse_instance(args.instance, args.overproduction)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleInstanceError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        result = exact_solve(instance)
    except OracleGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if result is None:
        print("no integral solution exists")
        return EXIT_INFEASIBLE
    print(json.dumps({
        "bins": result.bins,
        "patterns": result.patterns,
        "assignment": [{"counts": dict(vec), "x": x}
                       for vec, x in result.assignment],
    }, sort_keys=True, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patternpack",
        description="Bin packing with pattern-count minimization via "
                    "branch-and-price.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve an instance file or bundled dataset")
    solve.add_argument("instance", help="path to an instance JSON, or r1..r5")
    solve.add_argument("--strategy", choices=("dfs", "heap"), default="heap")
    solve.add_argument("--time-limit", type=float, default=None, metavar="S")
    solve.add_argument("--seed", type=int, default=0, metavar="N")
    solve.add_argument("--c1", type=float, default=1.0, metavar="X")
    solve.add_argument("--c2", type=float, default=1.0, metavar="Y")
    solve.add_argument("--out", default=None, metavar="FILE",
                       help="write the solution record to FILE")
    solve.add_argument("--render", default=None, metavar="DIR",
                       help="write one SVG per pattern into DIR")
    solve.add_argument("--random-sequences", type=int, default=8)
    solve.add_argument("--overproduction", type=float, default=0.15)
    solve.add_argument("--quiet", action="store_true")
    solve.set_defaults(func=_cmd_solve)

    verify = sub.add_parser("verify", help="re-verify a solution record")
    verify.add_argument("solution")
    verify.set_defaults(func=_cmd_verify)

    oracle = sub.add_parser("oracle", help="exact solve (tiny instances only)")
    oracle.add_argument("instance")
    oracle.add_argument("--overproduction", type=float, default=0.15)
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
