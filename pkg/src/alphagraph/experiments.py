"""Experiment drivers: parameter sweeps and regime-specific measurements.

Each driver samples replicate graphs on deterministic value-derived streams,
so a given (spec, master_seed) always produces bit-identical results,
regardless of worker count or scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .branching import rho_limit
from .components import component_labels, components, omega_for
from .model import (
    Kernel,
    ModelParams,
    NearestNeighborKernel,
    PowerLawKernel,
    kernel_for_alpha,
)
from .sampler import Graph, sample_fast, sample_filtration, subgraph_at
from .streams import stream

__all__ = [
    "SweepSpec",
    "CellResult",
    "SweepResult",
    "run_sweep",
    "conjecture_probe",
    "TriangleStats",
    "triangle_stats",
    "BlockStats",
    "block_stats",
    "block_connectivity",
    "SprinkleRecord",
    "SprinklingResult",
    "sprinkling_experiment",
    "write_sweep_csv",
    "write_json_sidecar",
    "format_float",
]


def format_float(x: float) -> str:
    """17 significant digits: enough to round-trip any double exactly."""
    return format(float(x), ".17g")


def resolve_workers(workers: int | None) -> int:
    env = os.environ.get("ALPHAGRAPH_WORKERS")
    if env:
        return max(1, int(env))
    if workers is None:
        return os.cpu_count() or 1
    return max(1, workers)


def _map_jobs(fn, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    chunk = max(1, len(jobs) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=chunk))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    """Grid of (alpha, c, n) cells with replicate count and cutoff rule."""

    alphas: tuple[float, ...]
    cs: tuple[float, ...]
    ns: tuple[int, ...]
    replicates: int
    omega_rule: str = "log4"
    master_seed: int = 0

    def __post_init__(self):
        if not (self.alphas and self.cs and self.ns):
            raise ValueError("alphas, cs, and ns must be non-empty")
        if self.replicates < 1:
            raise ValueError("need replicates >= 1")


@dataclass
class CellResult:
    """Largest-component statistics for one (kernel, c, n) grid cell."""

    kernel: str
    alpha: float | None
    c: float
    n: int
    replicates: int
    omega: int
    mean_fraction: float
    std_fraction: float
    min_fraction: float
    max_fraction: float
    mean_second_fraction: float
    mean_b_fraction: float
    predicted_rho: float | None
    error: str | None = None


@dataclass
class SweepResult:
    spec: dict
    cells: list[CellResult] = field(default_factory=list)

    def cell(self, **match) -> CellResult:
        """The unique cell whose fields equal the given values."""
        hits = [
            c
            for c in self.cells
            if all(getattr(c, k) == v for k, v in match.items())
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match {match}")
        return hits[0]


def _replicate_task(args) -> tuple:
    """Sample one replicate and reduce it to component statistics."""
    kernel, n, c, seed, rep, omega = args
    try:
        params = ModelParams(n=n, c=c, kernel=kernel, seed=seed)
        graph = sample_fast(params, replicate=rep)
        summary = components(graph)
        return (
            "ok",
            summary.largest,
            summary.second_largest,
            summary.b_count(omega),
        )
    except Exception as exc:  # noqa: BLE001 - cell failures are recorded, not fatal
        return ("err", f"{type(exc).__name__}: {exc}")


def _run_cells(
    cells: list[tuple[Kernel, float | None, float, int]],
    replicates: int,
    omega_rule: str,
    master_seed: int,
    workers: int | None,
    predict: str = "alpha<=1",
) -> list[CellResult]:
    workers = resolve_workers(workers)
    jobs = []
    omegas = []
    for kernel, _alpha, c, n in cells:
        omega = omega_for(omega_rule, n)
        omegas.append(omega)
        for rep in range(replicates):
            jobs.append((kernel, n, c, master_seed, rep, omega))
    outputs = _map_jobs(_replicate_task, jobs, workers)

    results: list[CellResult] = []
    pos = 0
    for (kernel, alpha, c, n), omega in zip(cells, omegas):
        outs = outputs[pos : pos + replicates]
        pos += replicates
        errors = [o[1] for o in outs if o[0] == "err"]
        predicted = None
        if predict == "always" or (predict == "alpha<=1" and alpha is not None and alpha <= 1):
            predicted = rho_limit(c) if c > 0 else 0.0
        base = dict(
            kernel=kernel.spec_string(),
            alpha=alpha,
            c=c,
            n=n,
            replicates=replicates,
            omega=omega,
            predicted_rho=predicted,
        )
        if errors:
            results.append(
                CellResult(
                    **base,
                    mean_fraction=math.nan,
                    std_fraction=math.nan,
                    min_fraction=math.nan,
                    max_fraction=math.nan,
                    mean_second_fraction=math.nan,
                    mean_b_fraction=math.nan,
                    error=errors[0],
                )
            )
            continue
        fr = np.array([o[1] for o in outs], dtype=np.float64) / n
        second = np.array([o[2] for o in outs], dtype=np.float64) / n
        bfr = np.array([o[3] for o in outs], dtype=np.float64) / n
        results.append(
            CellResult(
                **base,
                mean_fraction=float(fr.mean()),
                std_fraction=float(fr.std()),
                min_fraction=float(fr.min()),
                max_fraction=float(fr.max()),
                mean_second_fraction=float(second.mean()),
                mean_b_fraction=float(bfr.mean()),
            )
        )
    return results


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Sample every (alpha, c, n) cell and summarize largest components.

    Cells supercritical by the branching prediction carry the Poisson
    survival probability rho(c) for alpha <= 1.
    """
    cells = [
        (kernel_for_alpha(alpha), alpha, c, n)
        for alpha in spec.alphas
        for c in spec.cs
        for n in spec.ns
    ]
    results = _run_cells(
        cells, spec.replicates, spec.omega_rule, spec.master_seed, workers
    )
    echo = asdict(spec)
    return SweepResult(spec=echo, cells=results)


def conjecture_probe(
    kernel: Kernel,
    ns: tuple[int, ...],
    cs: tuple[float, ...],
    replicates: int,
    master_seed: int = 0,
    omega_rule: str = "log4",
    workers: int | None = None,
) -> SweepResult:
    """Sweep one explicit kernel over (c, n) to expose fraction trends.

    The Poisson survival probability rho(c) is attached to every cell as the
    reference value a "random-graph-like" kernel should approach; kernels
    whose normalizer stays bounded are expected to fall away from it as n
    grows.
    """
    if isinstance(kernel, PowerLawKernel):
        alpha = kernel.alpha
    elif isinstance(kernel, NearestNeighborKernel):
        alpha = math.inf
    else:
        alpha = None
    cells = [(kernel, alpha, c, n) for c in cs for n in ns]
    results = _run_cells(
        cells, replicates, omega_rule, master_seed, workers, predict="always"
    )
    echo = dict(
        kernel=kernel.spec_string(),
        cs=list(cs),
        ns=list(ns),
        replicates=replicates,
        omega_rule=omega_rule,
        master_seed=master_seed,
    )
    return SweepResult(spec=echo, cells=results)


# ---------------------------------------------------------------------------
# Triangles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangleStats:
    """Exact triangle and neighborhood statistics of one graph."""

    triangles_per_vertex: float
    mean_degree: float
    second_neighbors_per_vertex: float


def triangle_stats(graph: Graph) -> TriangleStats:
    """Exact 3-cycle count per vertex plus first/second neighborhood sizes.

    Enumerates common neighbors edge by edge; cost is sum over edges of
    min(deg u, deg v), fine for the bounded-degree graphs this is used on.
    """
    n = graph.n
    indptr, nbrs = graph.adjacency()
    adj = [set(nbrs[indptr[v] : indptr[v + 1]].tolist()) for v in range(n)]
    triangle_ends = 0  # counts (triangle, vertex) incidences, = 3 * #triangles
    for u, v in graph.edges.tolist():
        common = adj[u] & adj[v]
        triangle_ends += len(common)  # each common w closes one triangle at w
    total_triangles = triangle_ends / 3.0  # each triangle found once per edge

    second = 0
    for v in range(n):
        direct = adj[v]
        reach = set()
        for u in direct:
            reach |= adj[u]
        reach.discard(v)
        second += len(reach - direct)

    return TriangleStats(
        triangles_per_vertex=3.0 * total_triangles / n,
        mean_degree=2.0 * graph.num_edges / n,
        second_neighbors_per_vertex=second / n,
    )


# ---------------------------------------------------------------------------
# Block renormalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockStats:
    """Block-to-block connectivity estimates at one block size m."""

    m: int
    n_blocks: int
    adjacent_connect_freq: float
    nonadjacent_connect_freq: float
    samples: int
    replicates: int


def _block_pair_index(bu: np.ndarray, bv: np.ndarray, dist: int, nb: int) -> np.ndarray:
    """Ring index i of block pairs (i, (i+dist) mod nb) among (bu, bv) rows."""
    forward = (bu + dist) % nb == bv
    backward = (bv + dist) % nb == bu
    return np.unique(np.concatenate([bu[forward], bv[backward]]))


def _block_replicate_task(args) -> tuple:
    kernel, n, c, seed, rep, ms, pairs_cap, nonadj_dist = args
    params = ModelParams(n=n, c=c, kernel=kernel, seed=seed)
    graph = sample_fast(params, replicate=rep)
    u = graph.edges[:, 0]
    v = graph.edges[:, 1]
    out = []
    for m in ms:
        nb = n // m
        bu = u // m
        bv = v // m
        off = bu != bv
        buo, bvo = bu[off], bv[off]
        # Adjacent pairs: all nb ring-adjacent block pairs.
        adj_present = _block_pair_index(buo, bvo, 1, nb)
        # Non-adjacent pairs at the probed circular block distance.
        non_present = _block_pair_index(buo, bvo, nonadj_dist, nb)
        if nb <= pairs_cap:
            sampled = np.arange(nb)
        else:
            srng = stream(seed, "blocks:pairs", kernel.spec_string(), n, float(c), rep, m)
            sampled = srng.choice(nb, size=pairs_cap, replace=False)
        non_hits = int(np.isin(sampled, non_present).sum())
        out.append((int(adj_present.size), nb, non_hits, int(sampled.size)))
    return tuple(out)


def block_connectivity(
    params: ModelParams,
    ms: tuple[int, ...],
    replicates: int,
    pairs_cap: int = 1000,
    nonadjacent_distance: int = 2,
    workers: int | None = None,
) -> list[BlockStats]:
    """Block-connection frequencies for several block sizes at once.

    Partitions the ring into n/m contiguous blocks and estimates, across
    replicates, the probability that two blocks are joined by at least one
    edge: for the nb ring-adjacent pairs exhaustively, and for pairs at
    circular block distance ``nonadjacent_distance`` (the nearest
    non-adjacent class, where block-to-block connectivity is strongest)
    over up to ``pairs_cap`` sampled ring positions.

    Each replicate graph is sampled once and analyzed at every m.
    """
    n = params.n
    for m in ms:
        if m < 1:
            raise ValueError(f"need m >= 1, got {m}")
        if n % m != 0:
            raise ValueError(f"block size {m} must divide n={n}")
        if m > n // 4:
            raise ValueError(f"block size {m} leaves fewer than 4 blocks (n={n})")
    if nonadjacent_distance < 2:
        raise ValueError("non-adjacent block distance must be >= 2")
    if replicates < 1:
        raise ValueError("need replicates >= 1")
    workers = resolve_workers(workers)
    jobs = [
        (params.kernel, n, params.c, params.seed, rep, tuple(ms), pairs_cap, nonadjacent_distance)
        for rep in range(replicates)
    ]
    outputs = _map_jobs(_block_replicate_task, jobs, workers)
    stats = []
    for idx, m in enumerate(ms):
        adj_hits = sum(o[idx][0] for o in outputs)
        adj_total = sum(o[idx][1] for o in outputs)
        non_hits = sum(o[idx][2] for o in outputs)
        non_total = sum(o[idx][3] for o in outputs)
        stats.append(
            BlockStats(
                m=m,
                n_blocks=n // m,
                adjacent_connect_freq=adj_hits / adj_total,
                nonadjacent_connect_freq=non_hits / non_total,
                samples=non_total,
                replicates=replicates,
            )
        )
    return stats


def block_stats(
    params: ModelParams,
    m: int,
    replicates: int,
    pairs_cap: int = 1000,
    nonadjacent_distance: int = 2,
    workers: int | None = None,
) -> BlockStats:
    """Block-connection frequencies for a single block size."""
    return block_connectivity(
        params, (m,), replicates, pairs_cap, nonadjacent_distance, workers
    )[0]


# ---------------------------------------------------------------------------
# Sprinkling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SprinkleRecord:
    replicate: int
    b_fraction: float
    merged: bool
    fraction_before: float
    fraction_after: float
    nested_ok: bool


@dataclass
class SprinklingResult:
    n: int
    kernel: str
    c_prime: float
    delta: float
    omega: int
    records: list[SprinkleRecord]

    @property
    def merged_fraction(self) -> float:
        return sum(r.merged for r in self.records) / len(self.records)

    @property
    def nesting_fraction(self) -> float:
        return sum(r.nested_ok for r in self.records) / len(self.records)

    @property
    def mean_b_fraction(self) -> float:
        return sum(r.b_fraction for r in self.records) / len(self.records)


def _edges_subset(inner: np.ndarray, outer: np.ndarray, n: int) -> bool:
    inner_keys = inner[:, 0] * np.int64(n) + inner[:, 1]
    outer_keys = outer[:, 0] * np.int64(n) + outer[:, 1]
    pos = np.searchsorted(outer_keys, inner_keys)
    pos = np.minimum(pos, max(len(outer_keys) - 1, 0))
    if len(outer_keys) == 0:
        return len(inner_keys) == 0
    return bool(np.all(outer_keys[pos] == inner_keys))


def _sprinkle_task(args) -> SprinkleRecord:
    kernel, n, c_prime, delta, omega, seed, rep = args
    filt = sample_filtration(n, kernel, c_prime + delta, seed, replicate=rep)
    before = subgraph_at(filt, c_prime)
    after = subgraph_at(filt, c_prime + delta)

    labels1, sizes1 = component_labels(before)
    b_mask = sizes1[labels1] >= omega
    labels2, sizes2 = component_labels(after)
    merged = bool(np.unique(labels2[b_mask]).size <= 1)
    nested = _edges_subset(before.edges, after.edges, n)
    return SprinkleRecord(
        replicate=rep,
        b_fraction=float(b_mask.sum() / n),
        merged=merged,
        fraction_before=float(sizes1.max() / n),
        fraction_after=float(sizes2.max() / n),
        nested_ok=nested,
    )


def sprinkling_experiment(
    n: int,
    kernel: Kernel,
    c_prime: float,
    delta: float,
    omega: int,
    replicates: int,
    master_seed: int = 0,
    workers: int | None = None,
) -> SprinklingResult:
    """Two-stage construction: sample at c', then raise the level to c'+delta.

    Both stages are read off one coupled filtration, so the stage-two edge
    set contains stage one's by construction (verified per replicate).  For
    each replicate this reports the fraction of vertices in components of
    size >= omega at c', whether those vertices all land in a single
    component at c'+delta, and the largest-component fractions at both
    levels.
    """
    if not c_prime > 0:
        raise ValueError(f"need c' > 0, got {c_prime}")
    if delta < 0:
        raise ValueError(f"need delta >= 0, got {delta}")
    if omega < 1:
        raise ValueError(f"need omega >= 1, got {omega}")
    if replicates < 1:
        raise ValueError("need replicates >= 1")
    workers = resolve_workers(workers)
    jobs = [
        (kernel, n, c_prime, delta, omega, master_seed, rep) for rep in range(replicates)
    ]
    records = _map_jobs(_sprinkle_task, jobs, workers)
    return SprinklingResult(
        n=n,
        kernel=kernel.spec_string(),
        c_prime=c_prime,
        delta=delta,
        omega=omega,
        records=list(records),
    )


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _atomic_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, float):
        return format_float(x)
    return str(x)


def write_rows_csv(path: str | Path, fieldnames: list[str], rows: list[dict]) -> None:
    """CSV with floats at 17 significant digits, written atomically."""
    import io

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_csv_value(row[k]) for k in fieldnames])
    _atomic_text(path, buf.getvalue())


def write_sweep_csv(path: str | Path, result: SweepResult) -> None:
    """One row per grid cell, columns named after the CellResult fields."""
    fields = list(CellResult.__dataclass_fields__)
    rows = [asdict(cell) for cell in result.cells]
    write_rows_csv(path, fields, rows)


def write_json_sidecar(path: str | Path, payload: dict) -> None:
    """Provenance sidecar: the full spec/config that produced an output."""
    _atomic_text(path, json.dumps(payload, indent=2, default=str) + "\n")
