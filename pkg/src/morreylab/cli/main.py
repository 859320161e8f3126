"""Command-line runner: ``morreylab run`` and ``morreylab describe``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from ..verify.report import ExperimentReport
from .config import BUDGET, SINGULAR, ConfigError, apply_resolution, load_toml, validate

EXIT_CONFIG = 64


def preset_dir() -> Path:
    return Path(str(resources.files("morreylab.cli") / "presets"))


def list_presets() -> list[tuple[str, str]]:
    out = []
    for path in sorted(preset_dir().glob("*.toml")):
        raw = load_toml(path)
        out.append((path.stem, raw.get("title", "")))
    return out


def resolve_config(name: str) -> Path:
    """A config path, or the name of a built-in preset."""
    p = Path(name)
    if p.exists():
        return p
    cand = preset_dir() / f"{name}.toml"
    if cand.exists():
        return cand
    raise ConfigError(f"{name}: no such config file or preset")


def load(path, resolution: str | None = None, seed: int | None = None):
    raw = load_toml(path)
    raw = apply_resolution(raw, resolution)
    if seed is not None:
        raw["seed"] = seed
    return raw, *validate(raw)


def effective_config(raw: dict, job, grid) -> dict:
    cfg = dict(job.entry)
    cfg["paper_anchor"] = job.anchor
    cfg["seed"] = raw["seed"]
    cfg["grid"] = grid.to_dict()
    return cfg


def run_job(raw, ctx, job) -> ExperimentReport:
    fn, kw, _ = job.call
    grid = ctx.grid(job.grid_name)
    rep = fn(**kw, id=job.id, config=effective_config(raw, job, grid))
    if job.negative_control:
        rep.notes.append("negative control: designed to fail")
    return rep


def write_report(rep: ExperimentReport, out: Path, fmt: str) -> None:
    if fmt in ("json", "both"):
        (out / f"{rep.id}.json").write_text(rep.to_json() + "\n")
    if fmt in ("csv", "both"):
        (out / f"{rep.id}.csv").write_text(rep.rows_csv())


def summary_of(reports: list[ExperimentReport]) -> dict:
    hashes = {r.id: r.content_hash() for r in reports}
    blob = json.dumps(hashes, sort_keys=True).encode()
    return {
        "experiments": [
            {"id": r.id, "type": r.type, "verdict": r.verdict, "headline": r.content()["headline"], "content_hash": hashes[r.id]}
            for r in reports
        ],
        "failed": sum(r.verdict == "fail" for r in reports),
        "determinism_hash": hashlib.sha256(blob).hexdigest(),
    }


def cmd_run(args) -> int:
    if args.list:
        for name, title in list_presets():
            print(f"{name:40s} {title}")
        return 0
    if not args.config:
        print("error: --config is required (or use --list)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = resolve_config(args.config)
        raw, ctx, jobs = load(path, args.resolution_override, args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    over = [(j.id, j.call[2]) for j in jobs if j.call[2] > BUDGET]
    if over and not args.force:
        for jid, cost in over:
            print(f"budget error: {jid} needs ~{cost:.3g} kernel evaluations (limit {BUDGET:.0e}); use --force", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        reports = list(pool.map(lambda j: run_job(raw, ctx, j), jobs))
    for rep in reports:
        write_report(rep, out, args.format)
        print(f"{rep.verdict.upper():12s} {rep.id:40s} headline={rep.headline:.6g}")
    summary = summary_of(reports)
    summary["timing"] = {"seconds": time.perf_counter() - t0}
    (out / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    print(f"{summary['failed']} failed of {len(reports)}")
    return summary["failed"]


def describe_text(path, resolution: str | None = None) -> str:
    raw, ctx, jobs = load(path, resolution)
    lines = [f"config: {path}", f"seed: {raw['seed']}"]
    for name, g in ctx.grids.items():
        lines.append(f"grid {name}: n={g.n} lower={g.lower} upper={g.upper} h={g.h} nodes={g.size}")
    for sec in ("exponents", "weights", "spaces", "kernels", "families"):
        for name, spec in raw.get(sec, {}).items():
            lines.append(f"{SINGULAR[sec]} {name}: {spec.get('kind', '?')}")
    for j in jobs:
        cost = j.call[2]
        tag = " [negative control]" if j.negative_control else ""
        lines.append(f"experiment {j.id}: {j.type} on grid {j.grid_name}{tag}")
        lines.append(f"    anchor: {j.anchor}")
        lines.append(f"    estimated kernel evaluations: {cost:.3g}")
        if cost > BUDGET:
            lines.append(f"    WARNING: above the {BUDGET:.0e} budget; run needs --force")
    return "\n".join(lines)


def cmd_describe(args) -> int:
    try:
        print(describe_text(resolve_config(args.config), args.resolution_override))
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="morreylab", description="Run Morrey-space operator experiments from TOML configs.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiments of a config")
    run.add_argument("--config", help="config path or preset name")
    run.add_argument("--out", default="reports", help="output directory (default: reports)")
    run.add_argument("--resolution-override", metavar="H", help="new grid spacing, or h/N to divide every spacing")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--threads", type=int, default=1, help="experiments run concurrently")
    run.add_argument("--format", choices=("json", "csv", "both"), default="json")
    run.add_argument("--force", action="store_true", help="ignore the kernel-evaluation budget")
    run.add_argument("--list", action="store_true", help="list built-in presets")
    run.set_defaults(func=cmd_run)
    desc = sub.add_parser("describe", help="print the resolved plan of a config")
    desc.add_argument("config", help="config path or preset name")
    desc.add_argument("--resolution-override", metavar="H")
    desc.set_defaults(func=cmd_describe)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
