"""Experiment orchestration: variants, reference patterns, runs over initial sets, reports.

A variant code reads ``<k><measure><n?><source>[<eps>%]``, for example
``4EP`` (Euclidean on principal-component points), ``3CnL`` (cosine on the
row-normalized normalized-Laplacian embedding of the determination matrix)
or ``4EnL45%`` (Euclidean on the normalized-Laplacian embedding of the
relation at epsilon 0.45).
"""

from __future__ import annotations

import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import io as vio
from .evaluation import EfficiencyReport, EfficiencyScore, efficiency_report, match_partitions
from .kmeans import (
    Dissimilarity,
    InitialSet,
    distinct_rows,
    enumerate_initial_sets,
    kmeans,
    sample_initial_sets,
    top_entropy_fraction,
    with_entropy,
)
from .relation import Partition, build_relation, connected_components, epsilon_sweep
from .similarity import correlation_matrix, determination_matrix, pc_cluster_points, pc_similarity
from .spectral import Embedding, laplacian, normalized_laplacian, spectral_embedding

__all__ = [
    "VariantCode",
    "ExperimentConfig",
    "ExperimentInputs",
    "ReferenceMismatchError",
    "RunRecord",
    "VariantResult",
    "ExperimentResult",
    "FAMILIES",
    "derive_reference",
    "load_inputs",
    "expand_variants",
    "build_embedding",
    "run_variant",
    "run_experiment",
    "write_reports",
]

EXHAUSTIVE_CAP = 300
DEFAULT_RUNS = 300
DEFAULT_FRACTION = 1.0 / 3.0

# the families ``all`` expands to; cosine on normalized pc points adds nothing
# over plain pc points, so ``CnP`` parses but is not part of the default grid
FAMILIES = ("EP", "CP", "EnP", "EL", "CL", "EnL", "CnL")
RELATION_FAMILIES = ("EL", "CL", "EnL", "CnL")

_CODE = re.compile(r"^(\d+)([EC])(n?)([PL])(?:(\d+(?:\.\d+)?)%)?$")


@dataclass(frozen=True)
class VariantCode:
    k: int
    measure: str
    normalized: bool
    source: str
    epsilon: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.measure not in ("E", "C"):
            raise ValueError(f"measure must be E or C, got {self.measure!r}")
        if self.source not in ("P", "L"):
            raise ValueError(f"source must be P or L, got {self.source!r}")
        if self.epsilon is not None:
            if self.source != "L":
                raise ValueError("only Laplacian variants take an epsilon")
            if not 0.0 <= self.epsilon <= 1.0:
                raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @classmethod
    def parse(cls, text: str) -> "VariantCode":
        m = _CODE.match(text.strip())
        if not m:
            raise ValueError(f"cannot parse variant code {text!r}")
        k, measure, n, source, pct = m.groups()
        eps = round(float(pct) / 100.0, 10) if pct is not None else None
        return cls(int(k), measure, n == "n", source, eps)

    @property
    def dissimilarity(self) -> Dissimilarity:
        return Dissimilarity.EUCLIDEAN if self.measure == "E" else Dissimilarity.COSINE

    @property
    def uses_relation(self) -> bool:
        return self.epsilon is not None

    @property
    def family(self) -> str:
        return f"{self.measure}{'n' if self.normalized else ''}{self.source}"

    def __str__(self) -> str:
        out = f"{self.k}{self.family}"
        if self.epsilon is not None:
            out += f"{round(self.epsilon * 100, 8):g}%"
        return out


class ReferenceMismatchError(ValueError):
    """Component count at the chosen epsilon differs from the expected cluster count."""

    def __init__(self, message: str, sweep):
        super().__init__(message)
        self.sweep = sweep


def derive_reference(s, epsilon: float, expected_k: int, window: float = 0.05) -> Partition:
    """Connected components of the relation at ``epsilon``, checked against ``expected_k``.

    On a mismatch the error carries the component counts on a grid around
    ``epsilon`` (step 0.01 within ``window``) so another threshold can be picked.
    """
    part = connected_components(build_relation(s, epsilon))
    if part.k == expected_k:
        return Partition(part.labels, {"source": "components", "epsilon": epsilon})
    lo, hi = max(0.0, epsilon - window), min(1.0, epsilon + window)
    sweep = epsilon_sweep(s, round(lo, 10), round(hi, 10), 0.01)
    hint = ", ".join(f"{p.epsilon:.2f}:{p.components}" for p in sweep)
    raise ReferenceMismatchError(
        f"epsilon={epsilon} gives {part.k} components, expected {expected_k} "
        f"(components near epsilon: {hint})",
        sweep,
    )


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce an experiment; round-trips through JSON.

    ``reference`` is ``"components"`` (relation components at
    ``reference_epsilon``, defaulting to the first of ``epsilon``) or the path
    of a partition JSON file. ``pc_table`` optionally names a CSV of
    component-to-variable determination rows used for the P variants instead
    of recomputing them. ``init`` is ``exhaustive``, ``random`` or ``auto``
    (exhaustive while the set count stays within ``exhaustive_cap``).
    """

    input: str
    input_kind: str = "observations"
    k: int = 2
    epsilon: list[float] = field(default_factory=list)
    variants: list[str] = field(default_factory=lambda: ["all"])
    init: str = "auto"
    runs: int = DEFAULT_RUNS
    seed: int = 0
    exhaustive_cap: int = EXHAUSTIVE_CAP
    entropy_fraction: float = DEFAULT_FRACTION
    reference: str = "components"
    reference_epsilon: float | None = None
    pc_table: str | None = None
    psd_tol: float = 1e-9
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.input_kind not in ("observations", "similarity", "correlation"):
            raise ValueError(f"unknown input kind {self.input_kind!r}")
        if self.init not in ("exhaustive", "random", "auto"):
            raise ValueError(f"unknown init strategy {self.init!r}")
        if not 0.0 < self.entropy_fraction <= 1.0:
            raise ValueError("entropy_fraction must lie in (0, 1]")
        if self.k < 1 or self.runs < 1 or self.exhaustive_cap < 1 or self.workers < 1:
            raise ValueError("k, runs, exhaustive_cap and workers must be positive")
        if isinstance(self.epsilon, (int, float)):
            self.epsilon = [self.epsilon]
        self.epsilon = [round(float(e), 10) for e in self.epsilon]
        if isinstance(self.variants, str):
            self.variants = [v for v in self.variants.split(",") if v]

    @property
    def base_epsilon(self) -> float | None:
        if self.reference_epsilon is not None:
            return self.reference_epsilon
        return self.epsilon[0] if self.epsilon else None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ExperimentInputs:
    """Similarity (determination) matrix plus whatever is available for P variants."""

    similarity: np.ndarray
    names: tuple[str, ...]
    correlation: np.ndarray | None = None
    pc_table: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.similarity.shape[0]

    @property
    def has_pc(self) -> bool:
        return self.pc_table is not None or self.correlation is not None


def load_inputs(config: ExperimentConfig) -> ExperimentInputs:
    corr = None
    if config.input_kind == "observations":
        table = vio.read_observations(config.input)
        corr, names = correlation_matrix(table), table.names
        sim = determination_matrix(corr)
    elif config.input_kind == "correlation":
        corr, names = vio.read_matrix(config.input)
        sim = determination_matrix(corr)
    else:
        sim, names = vio.read_matrix(config.input)
    pc = None
    if config.pc_table:
        pc, _ = vio.read_table(config.pc_table)
        if pc.shape[1] != sim.shape[0]:
            raise ValueError(
                f"pc table has {pc.shape[1]} columns, expected one per variable ({sim.shape[0]})"
            )
    names = names or tuple(f"V{i + 1}" for i in range(sim.shape[0]))
    return ExperimentInputs(sim, tuple(names), corr, pc)


def expand_variants(config: ExperimentConfig, inputs: ExperimentInputs | None = None) -> list[VariantCode]:
    """Variant list with ``all`` expanded; P families are dropped from ``all`` when no pc data exists."""
    out: list[VariantCode] = []
    for item in config.variants:
        if item == "all":
            families = [f for f in FAMILIES if inputs is None or inputs.has_pc or not f.endswith("P")]
            out += [VariantCode.parse(f"{config.k}{f}") for f in families]
            for eps in config.epsilon:
                out += [VariantCode(config.k, f[0], "n" in f, "L", eps) for f in RELATION_FAMILIES]
        else:
            out.append(VariantCode.parse(item))
    seen, unique = set(), []
    for v in out:
        if str(v) not in seen:
            seen.add(str(v))
            unique.append(v)
    return unique


def build_embedding(variant: VariantCode, inputs: ExperimentInputs, psd_tol: float = 1e-9) -> Embedding:
    """Points to cluster for ``variant``; rows are normalized for nP and every normalized Laplacian."""
    k = variant.k
    if variant.source == "P":
        if inputs.pc_table is not None:
            emb = pc_cluster_points(inputs.pc_table, k)
        elif inputs.correlation is not None:
            emb = pc_cluster_points(pc_similarity(inputs.correlation, psd_tol), k)
        else:
            raise ValueError(f"{variant}: P variants need a correlation matrix or a pc table")
        return emb.normalized() if variant.normalized else emb
    if variant.uses_relation:
        base = build_relation(inputs.similarity, variant.epsilon).bits.astype(float)
        prefix = "relation-"
    else:
        base = inputs.similarity
        prefix = ""
    if variant.normalized:
        return spectral_embedding(
            normalized_laplacian(base), k, normalize_rows=True, source=prefix + "normalized-laplacian"
        )
    return spectral_embedding(laplacian(base), k, source=prefix + "laplacian")


@dataclass(frozen=True)
class RunRecord:
    initial_set: tuple[int, ...]
    entropy: float
    partition: Partition
    score: EfficiencyScore


@dataclass(frozen=True)
class VariantResult:
    variant: VariantCode
    embedding: Embedding
    reference: Partition
    strategy: str
    runs: tuple[RunRecord, ...]
    top: tuple[int, ...]
    report: EfficiencyReport
    top_report: EfficiencyReport

    @property
    def entropy_delta(self) -> float:
        """Change of the average efficiency, in percentage points, when keeping the top-entropy sets."""
        return self.top_report.statistics.average - self.report.statistics.average


def _initial_sets(emb: Embedding, k: int, init: str, runs: int, seed: int, cap: int):
    reps = distinct_rows(emb)
    if k > len(reps):
        raise ValueError(f"k={k} exceeds the {len(reps)} distinct embedding rows")
    total = math.comb(len(reps), k)
    if init == "auto":
        init = "exhaustive" if total <= cap else "random"
    if init == "exhaustive":
        if total > cap:
            raise ValueError(
                f"exhaustive search needs C({len(reps)},{k}) = {total} runs, above the cap of {cap}"
            )
        local = enumerate_initial_sets(len(reps), k)
    else:
        local = sample_initial_sets(len(reps), k, runs, seed)
    return init, [InitialSet(tuple(reps[i] for i in s.indices)) for s in local]


def _one_run(args):
    points, init, kind, reference = args
    part = kmeans(points, init, kind)
    return part, match_partitions(part, reference)


def run_variant(
    variant: VariantCode,
    inputs: ExperimentInputs,
    reference: Partition,
    init: str = "auto",
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    exhaustive_cap: int = EXHAUSTIVE_CAP,
    entropy_fraction: float = DEFAULT_FRACTION,
    psd_tol: float = 1e-9,
    workers: int = 1,
) -> VariantResult:
    """k-means from every initial set, scored against ``reference``; results keep initial-set order."""
    try:
        emb = build_embedding(variant, inputs, psd_tol)
        strategy, sets = _initial_sets(emb, variant.k, init, runs, seed, exhaustive_cap)
        sets = with_entropy(emb, sets, variant.dissimilarity)
    except ValueError as exc:
        raise ValueError(f"{variant}: {exc}") from exc
    except Exception as exc:
        raise RuntimeError(f"{variant}: {exc}") from exc
    jobs = [(emb.points, s, variant.dissimilarity, reference) for s in sets]
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_one_run, jobs, chunksize=16))
        else:
            outcomes = [_one_run(j) for j in jobs]
    except Exception as exc:
        raise RuntimeError(f"{variant}: k-means failed: {exc}") from exc
    records = tuple(
        RunRecord(s.indices, s.entropy, part, score) for s, (part, score) in zip(sets, outcomes)
    )
    # rank positions of the kept sets; duplicates among sampled sets are resolved by position
    order = sorted(range(len(sets)), key=lambda i: (-sets[i].entropy, sets[i].indices, i))
    keep = len(top_entropy_fraction(sets, entropy_fraction))
    top = tuple(sorted(order[:keep]))
    code = str(variant)
    return VariantResult(
        variant,
        emb,
        reference,
        strategy,
        records,
        top,
        efficiency_report(code, [r.score for r in records]),
        efficiency_report(code, [records[i].score for i in top]),
    )


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    inputs: ExperimentInputs
    references: dict
    variants: tuple[VariantResult, ...]


def _reference_for(variant: VariantCode, config, inputs, cache: dict) -> Partition:
    if config.reference != "components":
        if "file" not in cache:
            ref = vio.read_partition(config.reference)
            if ref.order != inputs.order:
                raise ValueError(f"reference covers {ref.order} variables, expected {inputs.order}")
            cache["file"] = ref
        return cache["file"]
    eps = variant.epsilon if variant.uses_relation else config.base_epsilon
    if eps is None:
        raise ValueError("a components reference needs an epsilon (set epsilon or reference_epsilon)")
    if eps not in cache:
        cache[eps] = derive_reference(inputs.similarity, eps, variant.k)
    return cache[eps]


def run_experiment(config: ExperimentConfig, inputs: ExperimentInputs | None = None) -> ExperimentResult:
    """Run every requested variant; ``inputs`` may be passed to skip reading ``config.input``."""
    inputs = inputs or load_inputs(config)
    references: dict = {}
    results = []
    for variant in expand_variants(config, inputs):
        ref = _reference_for(variant, config, inputs, references)
        results.append(
            run_variant(
                variant,
                inputs,
                ref,
                init=config.init,
                runs=config.runs,
                seed=config.seed,
                exhaustive_cap=config.exhaustive_cap,
                entropy_fraction=config.entropy_fraction,
                psd_tol=config.psd_tol,
                workers=config.workers,
            )
        )
    return ExperimentResult(config, inputs, references, tuple(results))


def _pct(x: float) -> str:
    return f"{x:.1f}"


def _stat_rows(reports):
    header = ["statistic"] + [r.variant_code for r in reports]
    rows = [[label] for label, _ in reports[0].statistics.as_rows()] if reports else []
    for rep in reports:
        for row, (_, value) in zip(rows, rep.statistics.as_rows()):
            row.append(value)
    return header, rows


def _dist_rows(reports):
    header = ["bucket"] + [r.variant_code for r in reports]
    labels = list(reports[0].distribution) if reports else []
    rows = [[b] + [_pct(r.distribution[b]) for r in reports] for b in labels]
    return header, rows


def _report_dict(rep: EfficiencyReport) -> dict:
    st = rep.statistics
    return {
        "count": st.count,
        "average": round(st.average, 6),
        "median": str(st.median),
        "mode": str(st.mode),
        "minimum": str(st.minimum),
        "maximum": str(st.maximum),
        "scheme": rep.scheme,
        "distribution": {b: round(v, 6) for b, v in rep.distribution.items()},
    }


def _file_stem(code: str) -> str:
    return code.replace("%", "pct")


def write_reports(result: ExperimentResult, out_dir) -> list[Path]:
    """Write CSV tables and JSON summaries; identical inputs give byte-identical files."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    (out / "embeddings").mkdir(exist_ok=True)
    full = [v.report for v in result.variants]
    top = [v.top_report for v in result.variants]
    written = []

    def put(name, header, rows):
        path = out / name
        vio.write_csv(path, header, rows)
        written.append(path)

    put("statistics.csv", *_stat_rows(full))
    put("statistics_top.csv", *_stat_rows(top))
    put("distribution.csv", *_dist_rows(full))
    put("distribution_top.csv", *_dist_rows(top))
    put(
        "entropy_delta.csv",
        ["variant", "sets", "top_sets", "average", "average_top", "delta_pp"],
        [
            [
                str(v.variant),
                len(v.runs),
                len(v.top),
                _pct(v.report.statistics.average),
                _pct(v.top_report.statistics.average),
                _pct(v.entropy_delta),
            ]
            for v in result.variants
        ],
    )
    for v in result.variants:
        stem = _file_stem(str(v.variant))
        top_set = set(v.top)
        put(
            f"runs/{stem}.csv",
            ["run", "initial_set", "entropy", "labels", "matched", "total", "iterations", "converged", "top"],
            [
                [
                    i,
                    " ".join(map(str, r.initial_set)),
                    f"{r.entropy:.6f}",
                    " ".join(map(str, r.partition.labels)),
                    r.score.matched,
                    r.score.total,
                    r.partition.provenance.get("iterations"),
                    int(bool(r.partition.provenance.get("converged"))),
                    int(i in top_set),
                ]
                for i, r in enumerate(v.runs)
            ],
        )
        path = out / "embeddings" / f"{stem}.csv"
        vio.write_embedding(path, v.embedding)
        written.append(path)
    path = out / "determination.csv"
    vio.write_matrix(path, result.inputs.similarity, 3, header=result.inputs.names)
    written.append(path)

    refs = {
        ("file" if key == "file" else f"{key:g}"): part.clusters()
        for key, part in sorted(result.references.items(), key=lambda kv: str(kv[0]))
    }
    report = {
        v_code: {"strategy": v.strategy, "all": _report_dict(v.report), "top": _report_dict(v.top_report),
                 "entropy_delta_pp": round(v.entropy_delta, 6)}
        for v_code, v in ((str(v.variant), v) for v in result.variants)
    }
    manifest = {
        "version": __version__,
        "seed": result.config.seed,
        # run location and worker count do not influence results, so they stay out
        "config": {k: v for k, v in result.config.to_dict().items() if k not in ("out", "workers")},
        "variables": list(result.inputs.names),
        "variants": [str(v.variant) for v in result.variants],
        "references": refs,
    }
    for name, obj in (("report.json", report), ("manifest.json", manifest)):
        vio.write_json(out / name, obj)
        written.append(out / name)
    return written
