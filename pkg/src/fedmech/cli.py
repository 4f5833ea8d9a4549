"""Command-line runner.

    fedmech run MANIFEST --out DIR [--jobs N] [--seeds 0,1,2]
    fedmech check MANIFEST

A manifest is an INI document with an optional ``[manifest]`` section::

    [manifest]
    scenarios = other.ini        ; extra scenario files, relative to this one
    mechanisms = realfm, linear, local
    seeds = 0, 1, 2              ; or: repetitions = 3  (seeds 0..2)

    [cifar10]
    base_cost = 2.5e-4
    ...

Every other section is a scenario. Verbosity comes from ``FEDMECH_LOG``
(error, info, debug).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import math
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from fedmech import __version__, kernels
from fedmech.accuracy import eval as acc_eval
from fedmech.assumptions import check_device, server_dominance
from fedmech.device import local_optimum
from fedmech.equilibrium import current_server_model, resolve_server
from fedmech.errors import ConfigError, FedMechError
from fedmech.scenarios import (
    MECHANISMS,
    ScenarioSpec,
    mechanism_config,
    new_parser,
    parse_scenarios,
    run as run_scenario,
    sample_devices,
)

log = logging.getLogger("fedmech")

RESULT_COLUMNS = (
    "scenario_id", "mechanism", "seed", "device_id", "cost", "a_opt", "m_local_opt",
    "m_star", "m_eq", "accuracy_reward", "monetary_reward", "device_utility_net",
    "server_utility", "converged", "iterations", "error",
)
SUMMARY_COLUMNS = (
    "scenario_id", "mechanism", "n_seeds", "n_failed", "total_contribution",
    "mean_device_utility", "server_utility", "server_accuracy",
)
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


@dataclass
class RunManifest:
    source: Path
    scenarios: list[ScenarioSpec]
    seeds: list[int]
    mechanisms: list[str]
    out_dir: Optional[Path] = None
    texts: list[str] = field(default_factory=list)

    @property
    def repetitions(self) -> int:
        return len(self.seeds)

    def validate(self):
        if not self.mechanisms:
            raise ConfigError("mechanism selector is empty", key="mechanisms")
        for m in self.mechanisms:
            if m not in MECHANISMS:
                raise ConfigError(f"unknown mechanism {m!r}; choose from {', '.join(MECHANISMS)}",
                                  key="mechanisms")
        if len(self.seeds) < 1:
            raise ConfigError("need at least one seed / repetition", key="seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct", key="seeds")
        if not self.scenarios:
            raise ConfigError("manifest defines no scenarios")
        ids = [s.scenario_id for s in self.scenarios]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate scenario ids")

    def config_hash(self) -> str:
        h = hashlib.sha256()
        for text in self.texts:
            h.update(text.encode("utf-8"))
            h.update(b"\0")
        h.update(repr((self.seeds, self.mechanisms)).encode())
        return h.hexdigest()


def _split_list(raw: str) -> list[str]:
    return [p.strip() for p in raw.replace(";", ",").split(",") if p.strip()]


def parse_seeds(raw: str) -> list[int]:
    try:
        return [int(s, 0) for s in _split_list(raw)]
    except ValueError:
        raise ConfigError(f"bad seed list {raw!r}", key="seeds") from None


def load_manifest(path, seeds: Optional[Sequence[int]] = None) -> RunManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from None
    parser = new_parser()
    try:
        parser.read_string(text)
    except Exception as exc:
        raise ConfigError(f"{path}: unparseable config: {exc}") from None

    texts = [text]
    scenarios = parse_scenarios(text)
    opts = dict(parser.items("manifest")) if parser.has_section("manifest") else {}
    known = {"scenarios", "mechanisms", "seeds", "repetitions"}
    for key in opts:
        if key not in known:
            raise ConfigError(f"[manifest] unknown key {key!r}", key=key)

    for rel in _split_list(opts.get("scenarios", "")):
        sub = (path.parent / rel)
        try:
            sub_text = sub.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file {sub}: {exc}", key="scenarios") from None
        texts.append(sub_text)
        scenarios.extend(parse_scenarios(sub_text))

    mechanisms = _split_list(opts.get("mechanisms", ",".join(MECHANISMS)))
    if seeds is None:
        if "seeds" in opts:
            seeds = parse_seeds(opts["seeds"])
            if "repetitions" in opts and int(opts["repetitions"]) != len(seeds):
                raise ConfigError("repetitions disagrees with the seed list", key="repetitions")
        else:
            try:
                reps = int(opts.get("repetitions", "1"))
            except ValueError:
                raise ConfigError("repetitions must be an integer", key="repetitions") from None
            if reps < 1:
                raise ConfigError("repetitions must be at least 1", key="repetitions")
            seeds = list(range(reps))
    manifest = RunManifest(path, scenarios, list(seeds), [m.lower() for m in mechanisms], texts=texts)
    manifest.validate()
    return manifest


# -- execution ------------------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _execute(task):
    spec, mechanism = task
    base = {"scenario_id": spec.scenario_id, "mechanism": mechanism, "seed": spec.seed}
    try:
        res = run_scenario(spec, mechanism)
    except (FedMechError, ArithmeticError) as exc:
        row = {c: "" for c in RESULT_COLUMNS}
        row.update(base, converged="false", iterations="0", error=type(exc).__name__)
        return [row], None, f"{spec.scenario_id}/{mechanism}/seed={spec.seed}: {exc}"
    out = res.outcome
    rows = []
    for i, d in enumerate(res.devices):
        b = out.bundles[i]
        rows.append({
            **base,
            "device_id": d.id,
            "cost": fmt(d.cost),
            "a_opt": fmt(d.accuracy.a_opt),
            "m_local_opt": fmt(out.local_optima[i]),
            "m_star": fmt(out.shaped_optima[i]),
            "m_eq": fmt(out.contributions[i]),
            "accuracy_reward": fmt(b.accuracy_reward),
            "monetary_reward": fmt(b.monetary_reward),
            "device_utility_net": fmt(res.device_utilities[i]),
            "server_utility": fmt(out.server_utility),
            "converged": fmt(out.converged),
            "iterations": out.iterations,
            "error": "" if out.converged else "NotConverged",
        })
    totals = (res.totals.total_contribution, res.totals.mean_device_utility,
              res.totals.server_utility, out.server_accuracy, out.converged)
    return rows, totals, None


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({c: fmt(row[c]) if not isinstance(row[c], str) else row[c] for c in columns})


def _mean(values):
    return math.fsum(values) / len(values) if values else float("nan")


def run(manifest: RunManifest, out_dir, jobs: int = 1) -> int:
    """Execute every scenario x mechanism x seed and write the three outputs."""
    manifest.validate()
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out_dir}: {exc}") from None
    started = time.time()
    tasks = [(spec.with_seed(seed), mech)
             for spec in manifest.scenarios for mech in manifest.mechanisms for seed in manifest.seeds]
    log.info("running %d tasks with %d job(s) on the %s backend", len(tasks), jobs, kernels.BACKEND)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_execute, tasks))
    else:
        results = [_execute(t) for t in tasks]

    rows, failures = [], 0
    grouped: dict[tuple[str, str], list] = {}
    for (spec, mech), (task_rows, totals, err) in zip(tasks, results):
        rows.extend(task_rows)
        grouped.setdefault((spec.scenario_id, mech), []).append(totals)
        if err is not None:
            failures += 1
            log.error("run failed: %s", err)

    summary = []
    for (sid, mech), entries in grouped.items():
        ok = [e for e in entries if e is not None and e[4]]
        summary.append({
            "scenario_id": sid, "mechanism": mech, "n_seeds": len(entries),
            "n_failed": len(entries) - len(ok),
            "total_contribution": _mean([e[0] for e in ok]),
            "mean_device_utility": _mean([e[1] for e in ok]),
            "server_utility": _mean([e[2] for e in ok]),
            "server_accuracy": _mean([e[3] for e in ok]),
        })

    _write_csv(out_dir / "results.csv", RESULT_COLUMNS, rows)
    _write_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, summary)
    finished = time.time()
    meta = [
        f"tool = fedmech {__version__}",
        f"kernel_backend = {kernels.BACKEND}",
        f"python = {platform.python_version()}",
        f"manifest = {manifest.source}",
        f"config_sha256 = {manifest.config_hash()}",
        f"seeds = {','.join(map(str, manifest.seeds))}",
        f"mechanisms = {','.join(manifest.mechanisms)}",
        f"started = {time.strftime('%Y-%m-%dT%H:%M:%S%z', time.localtime(started))}",
        f"wall_clock_s = {finished - started:.3f}",
        f"failed_runs = {failures}",
    ]
    (out_dir / "meta.txt").write_text("\n".join(meta) + "\n", encoding="utf-8")

    _print_summary(summary)
    return 1 if failures else 0


def _print_summary(summary):
    w = max([len("scenario")] + [len(s["scenario_id"]) for s in summary]) + 2
    print(f"{'scenario':<{w}}{'mechanism':<10}{'seeds':>6}{'failed':>7}"
          f"{'total m':>16}{'mean dev util':>16}{'server util':>16}")
    for s in summary:
        print(f"{s['scenario_id']:<{w}}{s['mechanism']:<10}{s['n_seeds']:>6}{s['n_failed']:>7}"
              f"{s['total_contribution']:>16.6g}{s['mean_device_utility']:>16.6g}"
              f"{s['server_utility']:>16.6g}")


def check(manifest: RunManifest) -> int:
    """Validate assumptions and print local optima without solving equilibria."""
    status = 0
    for spec in manifest.scenarios:
        spec = spec.with_seed(manifest.seeds[0])
        print(f"[{spec.scenario_id}] seed={spec.seed} n={spec.n_devices}")
        try:
            devices = sample_devices(spec)
            problems = [p for d in devices for p in check_device(d)]
            locals_ = [local_optimum(d) for d in devices]
        except FedMechError as exc:
            print(f"  error: {exc}")
            status = 1
            continue
        for p in problems:
            print(f"  assumption violated: {p}")
        if problems:
            status = 1
        for d, lo in zip(devices, locals_):
            note = "" if lo.m_opt > 0 else "  (does not participate: standalone utility never positive)"
            print(f"  device {d.id}: m_local_opt={fmt(lo.m_opt)} utility={fmt(lo.utility)}{note}")
        m = [lo.m_opt for lo in locals_]
        if sum(m) > 0:
            cfg = mechanism_config(spec)
            model = current_server_model(devices, resolve_server(devices, cfg), m)
            ok = server_dominance(devices, m, model, m)
            print(f"  server accuracy at local profile: {fmt(acc_eval(model, sum(m)))}")
            for d, good in zip(devices, ok):
                if not good:
                    print(f"  assumption violated: device {d.id} beats the global model alone")
                    status = 1
        else:
            print("  nobody participates at the local optimum; server dominance not checked")
    return status


# -- entry point ----------------------------------------------------------------

def _setup_logging():
    level = os.environ.get("FEDMECH_LOG", "error").strip().lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fedmech", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="solve every scenario x mechanism x seed")
    r.add_argument("manifest")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--seeds", help="comma-separated seeds; overrides the manifest")
    c = sub.add_parser("check", help="validate assumptions and print local optima")
    c.add_argument("manifest")
    c.add_argument("--seeds", help="comma-separated seeds; the first one is checked")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        seeds = parse_seeds(args.seeds) if args.seeds else None
        manifest = load_manifest(args.manifest, seeds)
        if args.command == "run":
            if args.jobs < 1:
                raise ConfigError("--jobs must be at least 1", key="jobs")
            return run(manifest, args.out, jobs=args.jobs)
        return check(manifest)
    except ConfigError as exc:
        where = f" (line {exc.line})" if exc.line else ""
        key = f" [key: {exc.key}]" if exc.key else ""
        print(f"config error{key}{where}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
