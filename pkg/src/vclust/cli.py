"""Command-line interface: analyze, sweep, cluster, experiment."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from . import io as vio
from .matrix import jacobi_eigen
from .pipeline import (
    DEFAULT_FRACTION,
    DEFAULT_RUNS,
    EXHAUSTIVE_CAP,
    ExperimentConfig,
    ReferenceMismatchError,
    load_inputs,
    run_experiment,
    write_reports,
)
from .relation import epsilon_sweep
from .similarity import pc_similarity
from .spectral import laplacian, normalized_laplacian


def _add_input(p):
    p.add_argument("--input", required=False, help="CSV file (observations or a square matrix)")
    p.add_argument(
        "--input-kind",
        choices=("observations", "similarity", "correlation"),
        default="observations",
        help="how to read --input (default: observations)",
    )
    p.add_argument("--psd-tol", type=float, default=1e-9, help="tolerated negative eigenvalue for PCA")


def _add_run(p):
    p.add_argument("--config", help="JSON experiment config; explicit flags override it")
    p.add_argument("--k", type=int, help="number of clusters")
    p.add_argument("--epsilon", type=float, nargs="+", help="relation threshold(s)")
    p.add_argument("--variants", help="comma-separated variant codes, or 'all'")
    p.add_argument("--init", choices=("exhaustive", "random", "auto"))
    p.add_argument("--runs", type=int, help=f"sampled initial sets (default {DEFAULT_RUNS})")
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive-cap", type=int, help=f"default {EXHAUSTIVE_CAP}")
    p.add_argument("--entropy-fraction", type=float, help=f"default {DEFAULT_FRACTION:.4f}")
    p.add_argument("--reference", help="'components' or a partition JSON file")
    p.add_argument("--reference-epsilon", type=float)
    p.add_argument("--pc-table", help="CSV of component-to-variable determination rows")
    p.add_argument("--workers", type=int, help="worker processes for the k-means runs")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vclust", description="Vertical clustering of correlated variables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="correlation, determination, PCA and Laplacian spectra")
    _add_input(p)
    p.add_argument("--out", help="directory for the CSV tables (default: print)")

    p = sub.add_parser("sweep", help="component count and relation kind over an epsilon grid")
    _add_input(p)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", help="CSV file (default: stdout)")

    p = sub.add_parser("cluster", help="run a single variant over its initial sets")
    _add_input(p)
    _add_run(p)

    p = sub.add_parser("experiment", help="run the full variant grid and write reports")
    _add_input(p)
    _add_run(p)
    return parser


def _config(args, single: bool = False) -> ExperimentConfig:
    data = {}
    if args.config:
        data = ExperimentConfig.load(args.config).to_dict()
    overrides = {
        "input": args.input,
        "input_kind": args.input_kind if args.input or not args.config else None,
        "k": args.k,
        "epsilon": args.epsilon,
        "variants": args.variants.split(",") if args.variants else None,
        "init": args.init,
        "runs": args.runs,
        "seed": args.seed,
        "exhaustive_cap": args.exhaustive_cap,
        "entropy_fraction": args.entropy_fraction,
        "reference": args.reference,
        "reference_epsilon": args.reference_epsilon,
        "pc_table": args.pc_table,
        "psd_tol": args.psd_tol if args.psd_tol != 1e-9 or not args.config else None,
        "workers": args.workers,
        "out": args.out,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    if "input" not in data:
        raise ValueError("--input (or a config with 'input') is required")
    cfg = ExperimentConfig.from_dict(data)
    if single and (len(cfg.variants) != 1 or cfg.variants[0] == "all"):
        raise ValueError("cluster runs exactly one variant; pass --variants CODE")
    return cfg


def _emit(rows, header, out=None):
    if out:
        vio.write_csv(out, header, rows)
        return
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _analyze(args) -> int:
    cfg = ExperimentConfig(args.input, args.input_kind, psd_tol=args.psd_tol)
    inputs = load_inputs(cfg)
    names = list(inputs.names)
    sim = inputs.similarity
    tables = {}
    if inputs.correlation is not None:
        tables["correlation"] = (["", *names], [[n, *(f"{x:.3f}" for x in row)] for n, row in zip(names, inputs.correlation)])
    tables["determination"] = (["", *names], [[n, *(f"{x:.3f}" for x in row)] for n, row in zip(names, sim)])
    if inputs.correlation is not None:
        pc = pc_similarity(inputs.correlation, args.psd_tol)
        tables["pca"] = (
            ["component", "eigenvalue", "explained_pct", "cumulative_pct", *names],
            [
                [f"PC{j + 1}", f"{lam:.3f}", f"{ev:.1f}", f"{cv:.1f}", *(f"{x:.3f}" for x in row)]
                for j, (lam, ev, cv, row) in enumerate(
                    zip(pc.eigenvalues, pc.explained_variance, pc.cumulative_variance, pc.det)
                )
            ],
        )
    spectra = [jacobi_eigen(laplacian(sim)).eigenvalues, jacobi_eigen(normalized_laplacian(sim)).eigenvalues]
    tables["laplacian_spectra"] = (
        ["index", "laplacian", "normalized_laplacian"],
        [[i + 1, f"{a:.3f}", f"{b:.3f}"] for i, (a, b) in enumerate(zip(*spectra))],
    )
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
    for name, (header, rows) in tables.items():
        if args.out:
            vio.write_csv(Path(args.out) / f"{name}.csv", header, rows)
        else:
            print(f"# {name}")
            _emit(rows, header)
    return 0


def _sweep(args) -> int:
    inputs = load_inputs(ExperimentConfig(args.input, args.input_kind))
    points = epsilon_sweep(inputs.similarity, args.lo, args.hi, args.step)
    _emit([[f"{p.epsilon:g}", p.components, p.kind] for p in points], ["epsilon", "components", "kind"], args.out)
    return 0


def _print_summary(result) -> None:
    for v in result.variants:
        st, top = v.report.statistics, v.top_report.statistics
        print(
            f"{v.variant}: {st.count} sets ({v.strategy}), average {st.average:.1f}%, "
            f"median {st.median}, mode {st.mode}, min {st.minimum}, max {st.maximum}; "
            f"top {top.count} by entropy: {top.average:.1f}% ({v.entropy_delta:+.1f} pp)"
        )


def _run(args, single: bool) -> int:
    cfg = _config(args, single)
    result = run_experiment(cfg)
    _print_summary(result)
    if cfg.out:
        written = write_reports(result, cfg.out)
        print(f"wrote {len(written)} files to {cfg.out}")
    elif not single:
        print("no --out given; reports not written", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            if not args.input:
                raise ValueError("--input is required")
            return _analyze(args)
        if args.command == "sweep":
            if not args.input:
                raise ValueError("--input is required")
            return _sweep(args)
        return _run(args, single=args.command == "cluster")
    except ReferenceMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
