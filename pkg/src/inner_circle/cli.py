"""Batch experiment runner: configs in, manifests, CSV tables and plots out.

Exit codes: 0 success, 1 error, 2 when the verdict is undecided and the
caller asked for a decision (so shell pipelines can gate on decisiveness).
Output files are written atomically (temp + rename) and all floating-point
values are serialised at full precision, so identical config + seed runs
reproduce every numeric field bitwise.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__, catalog
from .boundary_lab import (
    KS_CRITICAL_01,
    ergodic_average_norms,
    fourier_inner_product,
    ks_uniformity,
    lowner_check,
    mixing_correlation,
    push_ensemble,
    recurrence_experiment,
    sample_uniform,
)
from .criteria import CriterionParams, classify, ergodic_double_sum, weyl_sum
from .disk_algebra import Arc, TWO_PI
from .sequence_engine import FamilySpec, build_ledger, make_sequence


def worker_count() -> int:
    """Worker cap from INNER_CIRCLE_THREADS (0 or unset = auto)."""
    raw = os.environ.get("INNER_CIRCLE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"INNER_CIRCLE_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ValueError("INNER_CIRCLE_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def format_value(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path: str, rows: list) -> None:
    """Rows are (index, quantity, value, error); full 17-digit precision."""
    lines = ["index,quantity,value,error"]
    for idx, quantity, value, error in rows:
        lines.append(
            f"{format_value(idx)},{quantity},{format_value(value)},{format_value(error)}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def _arc_from_turns(pair) -> Arc:
    start, end = float(pair[0]), float(pair[1])
    return Arc(start=TWO_PI * start, end=TWO_PI * end)


class ExperimentConfig:
    """Validated, round-trippable experiment description.

    All defaults are made explicit on construction so the manifest echo is
    self-describing.
    """

    DEFAULTS = {
        "classify": {
            "N": 10000,
            "ell_max": 8,
            "eps": 0.5,
            "lam": 0.5,
            "c": 0.25,
            "m0": 8,
            "tolerance": 1e-2,
        },
        "boundary": {
            "experiments": ["ks_uniformity", "ergodic_average_norm"],
            "N": 100,
            "S": 100000,
            "ells": [1, 2],
            "arc_a": [0.0, 0.5],
            "arc_b": [0.0, 0.5],
            "mixing_times": [10, 100, 1000],
            "recurrence_N": 1000,
            "recurrence_S": 1000,
        },
        "verify": {
            "N": 100,
            "S": 100000,
            "ells": [1, 2],
            "pairs": [[0, 3], [2, 5]],
            "lowner_z": [0.0, 0.3],
            "arc": [0.0, 0.25],
        },
    }

    def __init__(self, command: str, data: dict) -> None:
        if command not in self.DEFAULTS:
            raise ValueError(f"unknown command {command!r}")
        if "family" not in data:
            raise ValueError("config must name a family")
        self.command = command
        self.family = FamilySpec.from_dict(data["family"])
        merged = dict(self.DEFAULTS[command])
        for key, value in data.items():
            if key == "family":
                continue
            if key not in merged:
                raise ValueError(f"unknown config key {key!r} for {command!r}")
            merged[key] = value
        self.params = merged
        if self.params["N"] < 1:
            raise ValueError("N must be >= 1")

    def to_dict(self) -> dict:
        return {"family": self.family.to_dict(), **self.params}

    @classmethod
    def from_dict(cls, command: str, data: dict) -> "ExperimentConfig":
        return cls(command, data)


def _manifest(command: str, config: ExperimentConfig, results: dict, verdict=None) -> dict:
    # no timestamps or timings: identical config + seed must reproduce bitwise
    out = {
        "command": command,
        "version": __version__,
        "config": config.to_dict(),
        "results": results,
    }
    if verdict is not None:
        out["verdict"] = verdict
    return out


def run_classify(config: ExperimentConfig, out_dir=None, plots=False) -> dict:
    p = config.params
    params = CriterionParams(
        ell_max=int(p["ell_max"]),
        eps=float(p["eps"]),
        lam=float(p["lam"]),
        c=float(p["c"]),
        m0=int(p["m0"]),
        tolerance=float(p["tolerance"]),
    )
    seq = make_sequence(config.family)
    ledger = build_ledger(seq, int(p["N"]))
    report = classify(ledger, params)
    results = report.to_dict()
    manifest = _manifest("classify", config, results, report.verdict)
    if out_dir:
        rows = [
            (e["parameter"], e["condition"], e["value"], e["threshold"])
            for e in results["evidence"]
        ]
        _emit(manifest, rows, out_dir)
        if plots:
            _classify_plots(ledger, params, out_dir)
    return manifest


def _classify_plots(ledger, params: CriterionParams, out_dir: str) -> None:
    from .plotting import line_plot

    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    n_grid = sorted(
        {max(10, ledger.length * k // 16) for k in range(1, 17)}
    )
    series = {
        f"l={ell}": [abs(ergodic_double_sum(ledger, ell, n)) for n in n_grid]
        for ell in (1, 2, params.ell_max)
    }
    line_plot(
        os.path.join(out_dir, "plots", "double_sum_vs_N.svg"),
        n_grid,
        series,
        "double-sum criterion vs N",
        "N",
        "|S_N(l)|",
        logy=False,
    )
    if not ledger.has_zero(0, ledger.length):
        weyl = {
            f"l={ell}": [weyl_sum(ledger, ell, n) for n in n_grid]
            for ell in (1, 2, params.ell_max)
        }
        line_plot(
            os.path.join(out_dir, "plots", "weyl_vs_N.svg"),
            n_grid,
            weyl,
            "Weyl sums vs N",
            "N",
            "|W_N(l)|",
        )


def run_boundary(config: ExperimentConfig, out_dir=None, plots=False) -> dict:
    p = config.params
    seq = make_sequence(config.family)
    seed = config.family.seed
    size = int(p["S"])
    steps = int(p["N"])
    arc_a = _arc_from_turns(p["arc_a"])
    arc_b = _arc_from_turns(p["arc_b"])

    def exp_ks():
        ens = sample_uniform(size, seed)
        snaps = push_ensemble(seq, ens, steps)
        stats = [ks_uniformity(s) for s in snaps]
        return {
            "statistics": stats,
            "critical": KS_CRITICAL_01 / math.sqrt(size),
            "max": max(stats),
        }

    def exp_norm():
        ells = [int(l) for l in p["ells"]]
        norms = ergodic_average_norms(seq, ells, steps, size, seed)
        ledger = build_ledger(seq, steps)
        exact = {
            l: 1.0 / steps + 2.0 * ergodic_double_sum(ledger, l, steps) for l in ells
        }
        return {
            "mc_norms": {str(l): norms[l] for l in ells},
            "ledger_norms": {str(l): exact[l] for l in ells},
            "bound": 5.0 / math.sqrt(size),
        }

    def exp_mixing():
        out = []
        for n in p["mixing_times"]:
            est = mixing_correlation(seq, arc_a, arc_b, int(n), size, seed)
            out.append(
                {
                    "n": est.n,
                    "value": est.value,
                    "target": est.target,
                    "mc_error": est.mc_error,
                }
            )
        return out

    def exp_recurrence():
        summary = recurrence_experiment(
            seq, arc_a, int(p["recurrence_N"]), int(p["recurrence_S"]), seed
        )
        return {
            "mean_visit_fraction": summary.mean_visit_fraction,
            "median_visit_fraction": summary.median_visit_fraction,
            "fraction_with_returns": list(summary.fraction_with_returns),
            "coverage": summary.coverage,
        }

    runners = {
        "ks_uniformity": exp_ks,
        "ergodic_average_norm": exp_norm,
        "mixing_correlation": exp_mixing,
        "recurrence": exp_recurrence,
    }
    chosen = list(p["experiments"])
    for name in chosen:
        if name not in runners:
            raise ValueError(f"unknown boundary experiment {name!r}")
    # independent experiments may run concurrently; merge in config order
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        futures = {name: pool.submit(runners[name]) for name in chosen}
        results = {name: futures[name].result() for name in chosen}

    manifest = _manifest("boundary", config, results)
    if out_dir:
        rows = []
        if "ks_uniformity" in results:
            for i, s in enumerate(results["ks_uniformity"]["statistics"], start=1):
                rows.append((i, "ks_statistic", s, results["ks_uniformity"]["critical"]))
        if "ergodic_average_norm" in results:
            r = results["ergodic_average_norm"]
            for l, v in r["mc_norms"].items():
                rows.append((l, "mc_norm", v, r["bound"]))
                rows.append((l, "ledger_norm", r["ledger_norms"][l], 0.0))
        if "mixing_correlation" in results:
            for row in results["mixing_correlation"]:
                rows.append((row["n"], "mixing_correlation", row["value"], row["mc_error"]))
        if "recurrence" in results:
            r = results["recurrence"]
            rows.append((steps, "mean_visit_fraction", r["mean_visit_fraction"], 0.0))
            rows.append((steps, "coverage", r["coverage"], 0.0))
        _emit(manifest, rows, out_dir)
        if plots and "mixing_correlation" in results:
            from .plotting import line_plot

            os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
            times = [row["n"] for row in results["mixing_correlation"]]
            line_plot(
                os.path.join(out_dir, "plots", "mixing_vs_n.svg"),
                times,
                {
                    "estimate": [row["value"] for row in results["mixing_correlation"]],
                    "target": [row["target"] for row in results["mixing_correlation"]],
                },
                "mixing correlation vs n",
                "n",
                "m(A and G_n^{-1} B)",
            )
    return manifest


def run_verify(config: ExperimentConfig, out_dir=None, plots=False) -> dict:
    """Cross-validation identities: Fourier, norm, and harmonic pullback."""
    p = config.params
    seq = make_sequence(config.family)
    seed = config.family.seed
    steps = int(p["N"])
    size = int(p["S"])
    ledger = build_ledger(seq, max(steps, max(int(b) for _, b in p["pairs"])))
    checks = []

    for m, n in (tuple(int(v) for v in pair) for pair in p["pairs"]):
        for ell in (int(l) for l in p["ells"]):
            exact = ledger.window_derivative(m, n) ** ell
            try:
                quad = fourier_inner_product(seq, m, n, ell)
            except ValueError as exc:
                checks.append(
                    {
                        "identity": "fourier",
                        "parameter": [m, n, ell],
                        "skipped": str(exc),
                    }
                )
                continue
            err = float(abs(quad - exact))
            checks.append(
                {
                    "identity": "fourier",
                    "parameter": [m, n, ell],
                    "error": err,
                    "tolerance": 1e-8,
                    "passed": err <= 1e-8,
                }
            )

    norms = ergodic_average_norms(seq, p["ells"], steps, size, seed)
    for ell in (int(l) for l in p["ells"]):
        exact = 1.0 / steps + 2.0 * ergodic_double_sum(ledger, ell, steps)
        err = float(abs(norms[ell] - exact))
        bound = 5.0 / math.sqrt(size)
        checks.append(
            {
                "identity": "norm",
                "parameter": [ell, steps],
                "error": err,
                "tolerance": bound,
                "passed": err <= bound,
            }
        )

    z = complex(float(p["lowner_z"][0]), float(p["lowner_z"][1]))
    arc = _arc_from_turns(p["arc"])
    direct, pulled = lowner_check(seq.map_at(1), z, arc, size, seed)
    direct, pulled = float(direct), float(pulled)
    bound = 5.0 * math.sqrt(max(direct * (1.0 - direct), 1e-12) / size) + 1e-10
    checks.append(
        {
            "identity": "harmonic_pullback",
            "parameter": [p["lowner_z"], p["arc"]],
            "error": abs(direct - pulled),
            "tolerance": bound,
            "passed": abs(direct - pulled) <= bound,
        }
    )

    all_passed = all(c.get("passed", True) for c in checks)
    results = {"checks": checks, "all_passed": all_passed}
    manifest = _manifest("verify", config, results)
    if out_dir:
        rows = [
            (
                "/".join(str(v) for v in c["parameter"]),
                c["identity"],
                c.get("error", math.nan),
                c.get("tolerance", math.nan),
            )
            for c in checks
        ]
        _emit(manifest, rows, out_dir)
    return manifest


def _emit(manifest: dict, rows: list, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    atomic_write_text(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    write_csv(os.path.join(out_dir, "results.csv"), rows)


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inner-circle",
        description="ergodicity and mixing experiments for inner-function compositions",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("classify", "evaluate every criterion and synthesize a verdict"),
        ("boundary", "run Monte Carlo boundary experiments"),
        ("verify", "run the cross-validation identities"),
    ):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", required=True, help="JSON experiment config")
        cmd.add_argument("--seed", type=int, default=None, help="override family seed")
        cmd.add_argument("--out", default=None, help="output directory")
        cmd.add_argument("--format", choices=("csv", "json"), default="csv")
        cmd.add_argument("--plots", action="store_true", help="render SVG figures")
        cmd.add_argument(
            "--require-decision",
            action="store_true",
            help="exit with status 2 on an undecided verdict",
        )
    sub.add_parser("list-families", help="print the family catalog")
    return parser


RUNNERS = {"classify": run_classify, "boundary": run_boundary, "verify": run_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-families":
        for row in catalog.listing():
            print(
                f"{row['name']:28s} kind={row['kind']:24s} expected={row['expected']:24s}"
                f" {row['citation']}"
            )
        return 0
    try:
        raw = _load_config(args.config)
        if args.seed is not None:
            raw.setdefault("family", {})["seed"] = args.seed
        config = ExperimentConfig(args.command, raw)
        manifest = RUNNERS[args.command](config, out_dir=args.out, plots=args.plots)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out is None or args.format == "json":
        print(json.dumps(manifest, indent=2, sort_keys=True))
    verdict = manifest.get("verdict")
    if args.require_decision and verdict == "undecided":
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
