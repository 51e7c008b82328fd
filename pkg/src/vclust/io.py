"""CSV/JSON readers and writers for matrices, observations, embeddings and partitions."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .matrix import SYMMETRY_TOL, as_symmetric
from .relation import Partition, RelationMatrix
from .kmeans import InitialSet
from .similarity import ObservationTable
from .spectral import Embedding


def _rows(path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_table(path) -> tuple[np.ndarray, tuple[str, ...]]:
    """Numeric CSV with an optional header row of names."""
    rows = _rows(path)
    if not rows:
        raise ValueError(f"{path}: empty file")
    names: tuple[str, ...] = ()
    if not all(_is_number(x) for x in rows[0]):
        names = tuple(x.strip() for x in rows[0])
        rows = rows[1:]
    try:
        values = np.array([[float(x) for x in row] for row in rows], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return values, names


def read_observations(path) -> ObservationTable:
    values, names = read_table(path)
    return ObservationTable(values, names)


def read_matrix(path, tol: float = SYMMETRY_TOL) -> tuple[np.ndarray, tuple[str, ...]]:
    """Square symmetric matrix (correlation, similarity, relation); symmetry checked to ``tol``."""
    values, names = read_table(path)
    return as_symmetric(values, tol=tol), names


def format_matrix(m, decimals: int = 3) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(m):
        writer.writerow([f"{x:.{decimals}f}" for x in row])
    return buf.getvalue()


def write_matrix(path, m, decimals: int = 3, header=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header:
            csv.writer(fh, lineterminator="\n").writerow(header)
        fh.write(format_matrix(m, decimals))


def write_relation(path, r: RelationMatrix) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in r.bits:
            writer.writerow([int(x) for x in row])


def read_relation(path) -> RelationMatrix:
    values, _ = read_table(path)
    return RelationMatrix(values.astype(int))


def write_embedding(path, emb: Embedding, decimals: int = 6) -> None:
    """Embedding rows as CSV, preceded by a ``#`` line holding the provenance as JSON."""
    meta = {"source": emb.source, "row_normalized": emb.row_normalized, **emb.provenance}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write(format_matrix(emb.points, decimals))


def read_embedding(path) -> Embedding:
    meta = {}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("#"):
        meta = json.loads(first[1:])
    values, _ = read_table(path)
    source = meta.pop("source", "unknown")
    normalized = meta.pop("row_normalized", False)
    return Embedding(values, source, normalized, meta)


def read_partition(path) -> Partition:
    """Reference partition from JSON: either a label list or a list of member-index groups."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("labels", data.get("clusters"))
    if data and all(isinstance(g, list) for g in data):
        return Partition.from_clusters(data, provenance={"source": str(path)})
    return Partition(tuple(int(x) for x in data), {"source": str(path)})


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_sweep(path, points) -> None:
    write_csv(path, ["epsilon", "components", "kind"], [[f"{p.epsilon:g}", p.components, p.kind] for p in points])


def write_initial_sets(path, sets) -> None:
    """Initial sets as a JSON array of index arrays."""
    Path(path).write_text(json.dumps([list(s.indices) for s in sets]) + "\n", encoding="utf-8")


def read_initial_sets(path):
    return [InitialSet(tuple(s)) for s in json.loads(Path(path).read_text(encoding="utf-8"))]


def write_entropy_ranking(path, sets) -> None:
    """Sets ranked by entropy, highest first (ties by index order)."""
    ranked = sorted(sets, key=lambda s: (-s.entropy, s.indices))
    write_csv(path, ["indices", "entropy"], [[" ".join(map(str, s.indices)), f"{s.entropy:.6f}"] for s in ranked])
