"""Graph sampling.

Three routes to a realization of the ring model:

* ``sample_naive``  — per-pair Bernoulli draws; the slow correctness oracle.
* ``sample_fast``   — translation invariance makes all m_d pairs at distance d
  share one probability p_d, so the edge count per distance class is
  Binomial(m_d, p_d) and the pairs are a uniform subset of the class.
  Expected work and memory are O(n + |E|).
* ``sample_filtration`` — coupled sample: each realized edge at level c_max
  carries the smallest c at which it would open, so the graph at every
  c' <= c_max can be read off one draw monotonically (sprinkling).

Edge lists are canonical: shape (m, 2) int64 arrays with u < v per row,
rows sorted lexicographically.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .model import (
    Kernel,
    ModelParams,
    class_edge_probs,
    distance_classes,
    normalizer,
    parse_kernel,
)
from .streams import stream

__all__ = [
    "Graph",
    "Filtration",
    "sample_naive",
    "sample_fast",
    "sample_filtration",
    "subgraph_at",
    "write_edge_list",
    "read_edge_list",
    "write_filtration",
    "read_filtration",
]

NAIVE_GUARD_N = 10_000


class Graph:
    """Immutable undirected graph on vertex set {0, ..., n-1}."""

    __slots__ = ("n", "edges", "_adj")

    def __init__(self, n: int, edges: np.ndarray, _validated: bool = False):
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        if not _validated:
            if edges.size:
                edges = canonical_edges(n, edges[:, 0], edges[:, 1])
            _validate_edges(n, edges)
        edges.setflags(write=False)
        self.n = int(n)
        self.edges = edges
        self._adj = None

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style adjacency: (indptr, neighbors) with sorted neighbor lists."""
        if self._adj is None:
            u = self.edges[:, 0]
            v = self.edges[:, 1]
            src = np.concatenate([u, v])
            dst = np.concatenate([v, u])
            order = np.lexsort((dst, src))
            neighbors = dst[order]
            counts = np.bincount(src, minlength=self.n)
            indptr = np.concatenate([[0], np.cumsum(counts)])
            self._adj = (indptr, neighbors)
        return self._adj

    def neighbors(self, v: int) -> np.ndarray:
        indptr, nbrs = self.adjacency()
        return nbrs[indptr[v] : indptr[v + 1]]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.edges, other.edges)
        )

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


def _validate_edges(n: int, edges: np.ndarray) -> None:
    if edges.size == 0:
        return
    if edges.min() < 0 or edges.max() >= n:
        raise ValueError("edge endpoint out of range")
    if np.any(edges[:, 0] >= edges[:, 1]):
        raise ValueError("edges must satisfy u < v (no self-loops)")
    keys = edges[:, 0] * np.int64(n) + edges[:, 1]
    if np.any(np.diff(keys) <= 0):
        raise ValueError("edges must be sorted and duplicate-free")


def canonical_edges(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Sort endpoints within rows and rows lexicographically."""
    lo = np.minimum(u, v).astype(np.int64)
    hi = np.maximum(u, v).astype(np.int64)
    order = np.argsort(lo * np.int64(n) + hi, kind="stable")
    return np.column_stack([lo[order], hi[order]])


class Filtration:
    """Edges realized at level c_max, each with its activation level.

    An edge opens when a uniform variable U falls below c*f(d)/h; its
    activation is the smallest c at which that happens, i.e. U*h/f(d).
    ``subgraph_at(c)`` therefore has exactly the law of the model at
    parameter c, for every 0 < c <= c_max, and the subgraphs are nested.
    """

    __slots__ = ("n", "c_max", "kernel", "edges", "activation")

    def __init__(
        self,
        n: int,
        c_max: float,
        kernel: Kernel,
        edges: np.ndarray,
        activation: np.ndarray,
    ):
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        activation = np.ascontiguousarray(activation, dtype=np.float64)
        _validate_edges(n, edges)
        if activation.shape[0] != edges.shape[0]:
            raise ValueError("one activation level per edge required")
        if activation.size and not (
            activation.min() > 0 and activation.max() <= c_max * (1 + 1e-15)
        ):
            raise ValueError("activation levels must lie in (0, c_max]")
        edges.setflags(write=False)
        activation.setflags(write=False)
        self.n = int(n)
        self.c_max = float(c_max)
        self.kernel = kernel
        self.edges = edges
        self.activation = activation

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def __repr__(self) -> str:
        return f"Filtration(n={self.n}, c_max={self.c_max}, edges={self.num_edges})"


def subgraph_at(filtration: Filtration, c: float) -> Graph:
    """Graph containing the edges with activation <= c.  Requires 0 < c <= c_max."""
    if not 0 < c <= filtration.c_max:
        raise ValueError(f"need 0 < c <= c_max={filtration.c_max}, got {c}")
    mask = filtration.activation <= c
    return Graph(filtration.n, filtration.edges[mask], _validated=True)


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


def _pair_probs(params: ModelParams) -> np.ndarray:
    """Edge probability for every pair (u, v), u < v, in canonical order."""
    n = params.n
    p_class = class_edge_probs(params)
    rows = []
    for u in range(n - 1):
        v = np.arange(u + 1, n)
        a = v - u
        d = np.minimum(a, n - a)
        rows.append(p_class[d - 1])
    return np.concatenate(rows)


def _pair_index_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.repeat(np.arange(n - 1), np.arange(n - 1, 0, -1))
    v = np.concatenate([np.arange(s + 1, n) for s in range(n - 1)])
    return u, v


def sample_naive(params: ModelParams, replicate: int = 0, max_n: int = NAIVE_GUARD_N) -> Graph:
    """Direct per-pair Bernoulli sampling; O(n^2) work, guarded by max_n."""
    n = params.n
    if n > max_n:
        raise ValueError(f"sample_naive is O(n^2); n={n} exceeds guard {max_n}")
    rng = stream(params.seed, "sample:naive", params.kernel.spec_string(), n, float(params.c), replicate)
    if n <= 2048:
        # Small-n fast path: one vectorized draw over all pairs.
        probs = _cached_pair_probs(params)
        hit = rng.random(probs.shape[0]) < probs
        u, v = _cached_pair_indices(n)
        return Graph(n, np.column_stack([u[hit], v[hit]]), _validated=True)
    p_class = class_edge_probs(params)
    us, vs = [], []
    for u in range(n - 1):
        v = np.arange(u + 1, n)
        a = v - u
        d = np.minimum(a, n - a)
        hit = rng.random(v.shape[0]) < p_class[d - 1]
        if hit.any():
            vv = v[hit]
            us.append(np.full(vv.shape[0], u, dtype=np.int64))
            vs.append(vv)
    if not us:
        return Graph(n, np.empty((0, 2), dtype=np.int64), _validated=True)
    edges = np.column_stack([np.concatenate(us), np.concatenate(vs)])
    return Graph(n, edges, _validated=True)


# Per-pair probability/index caches for the small-n Monte Carlo path.
_PAIR_PROB_CACHE: dict[tuple, np.ndarray] = {}
_PAIR_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _cached_pair_probs(params: ModelParams) -> np.ndarray:
    key = (params.n, float(params.c), params.kernel.spec_string())
    if key not in _PAIR_PROB_CACHE:
        if len(_PAIR_PROB_CACHE) > 64:
            _PAIR_PROB_CACHE.clear()
        _PAIR_PROB_CACHE[key] = _pair_probs(params)
    return _PAIR_PROB_CACHE[key]


def _cached_pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _PAIR_INDEX_CACHE:
        if len(_PAIR_INDEX_CACHE) > 16:
            _PAIR_INDEX_CACHE.clear()
        _PAIR_INDEX_CACHE[n] = _pair_index_arrays(n)
    return _PAIR_INDEX_CACHE[n]


def _select_class_members(
    rng: np.random.Generator,
    m_pairs: np.ndarray,
    counts: np.ndarray,
    offsets: np.ndarray,
) -> np.ndarray:
    """Choose counts[j] distinct members of each class, as global pair keys.

    Classes are intervals [offsets[j], offsets[j]+m_pairs[j]) of an implicit
    global pair index.  Clamped classes (count == m) are emitted whole;
    dense classes use a partial shuffle; sparse classes are filled by
    vectorized rejection across all classes at once, so the per-class cost
    stays proportional to the number of selected pairs.
    """
    nz = np.nonzero(counts)[0]
    parts: list[np.ndarray] = []

    full = nz[counts[nz] == m_pairs[nz]]
    for j in full:
        parts.append(np.arange(offsets[j], offsets[j] + m_pairs[j], dtype=np.int64))

    partial = nz[counts[nz] < m_pairs[nz]]
    dense = partial[counts[partial] > m_pairs[partial] // 2]
    for j in dense:
        sel = rng.choice(m_pairs[j], size=counts[j], replace=False)
        parts.append(offsets[j] + np.sort(sel))

    sparse = partial[counts[partial] <= m_pairs[partial] // 2]
    need = counts[sparse].copy()
    chosen = np.empty(0, dtype=np.int64)
    while sparse.size:
        cls = np.repeat(sparse, need)
        cand = offsets[cls] + rng.integers(0, m_pairs[cls])
        chosen = np.unique(np.concatenate([chosen, cand]))
        got = np.searchsorted(chosen, offsets[sparse] + m_pairs[sparse]) - np.searchsorted(
            chosen, offsets[sparse]
        )
        need = counts[sparse] - got
        alive = need > 0
        sparse, need = sparse[alive], need[alive]
    parts.append(chosen)

    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def _keys_to_edges(keys: np.ndarray, n: int, offsets: np.ndarray) -> np.ndarray:
    """Map global pair keys back to canonical (u, v) rows.

    The class at distance d enumerates its pairs as (u, (u+d) mod n) for
    u = 0..m_d-1, which covers each unordered pair exactly once.
    """
    j = np.searchsorted(offsets, keys, side="right") - 1
    u = keys - offsets[j]
    d = j + 1
    v = (u + d) % n
    return canonical_edges(n, u, v)


def _class_offsets(m_pairs: np.ndarray) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(m_pairs)]).astype(np.int64)


def sample_fast(params: ModelParams, replicate: int = 0) -> Graph:
    """Distance-class sampler; same law as sample_naive, O(n + |E|) work."""
    n = params.n
    rng = stream(params.seed, "sample:fast", params.kernel.spec_string(), n, float(params.c), replicate)
    _, _, m_pairs = distance_classes(n)
    p = class_edge_probs(params)
    counts = rng.binomial(m_pairs, p)
    offsets = _class_offsets(m_pairs)
    keys = _select_class_members(rng, m_pairs, counts, offsets)
    return Graph(n, _keys_to_edges(keys, n, offsets), _validated=True)


def sample_filtration(
    n: int, kernel: Kernel, c_max: float, seed: int, replicate: int = 0
) -> Filtration:
    """Coupled sample exposing the graph at every level c' <= c_max.

    Conditioned on opening by level c_max, an edge's uniform variable is
    uniform below its threshold, so its activation is uniform on
    (0, min(c_max, h/f(d))].  Unrealized pairs are never materialized.
    """
    if not c_max > 0:
        raise ValueError(f"need c_max > 0, got {c_max}")
    params = ModelParams(n=n, c=c_max, kernel=kernel, seed=seed)
    rng = stream(seed, "filtration", kernel.spec_string(), n, float(c_max), replicate)
    _, _, m_pairs = distance_classes(n)
    p = class_edge_probs(params)
    counts = rng.binomial(m_pairs, p)
    offsets = _class_offsets(m_pairs)
    keys = _select_class_members(rng, m_pairs, counts, offsets)
    keys.sort()

    j = np.searchsorted(offsets, keys, side="right") - 1
    u = keys - offsets[j]
    d = j + 1
    v = (u + d) % n

    h = normalizer(n, kernel).value
    f_vals = kernel.values(n)[j]
    cap = np.minimum(c_max, h / f_vals)
    # 1 - U is uniform on (0, 1], keeping activations strictly positive.
    activation = (1.0 - rng.random(keys.shape[0])) * cap

    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    order = np.argsort(lo * np.int64(n) + hi, kind="stable")
    edges = np.column_stack([lo[order], hi[order]])
    return Filtration(n, c_max, kernel, edges, activation[order])


# ---------------------------------------------------------------------------
# Edge-list files
# ---------------------------------------------------------------------------

_HEADER_MAGIC = "# alphagraph v1"


def _format_header(n: int, alpha, c: float, seed: int) -> str:
    return f"{_HEADER_MAGIC} n={n} alpha={alpha} c={repr(float(c))} seed={seed}"


def _atomic_write(path: str | Path, write_body) -> None:
    """Write via a temp file in the destination directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_edge_list(path: str | Path, graph: Graph, params: ModelParams) -> None:
    """Write the v1 edge-list format: header line, then sorted "u v" rows."""

    def body(fh):
        fh.write(_format_header(graph.n, _kernel_to_alpha_field(params.kernel), params.c, params.seed))
        fh.write("\n")
        for u, v in graph.edges.tolist():
            fh.write(f"{u} {v}\n")

    _atomic_write(path, body)


def _parse_header(line: str) -> dict:
    if not line.startswith(_HEADER_MAGIC):
        raise ValueError(f"not an alphagraph v1 file (header {line!r})")
    fields: dict[str, str] = {}
    for tok in line[len(_HEADER_MAGIC) :].split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"bad header token {tok!r}")
        fields[key] = value
    return {
        "n": int(fields["n"]),
        "alpha": fields["alpha"],
        "c": float(fields["c"]),
        "seed": int(fields["seed"]),
    }


def read_edge_list(path: str | Path) -> tuple[Graph, dict]:
    """Read a v1 edge-list file; returns (graph, header fields)."""
    with open(path) as fh:
        header = _parse_header(fh.readline().rstrip("\n"))
        body = fh.read()
    data = _parse_body(body, np.int64, 2)
    return Graph(header["n"], data), header


def _parse_body(body: str, dtype, cols: int) -> np.ndarray:
    if not body.strip():
        return np.empty((0, cols), dtype=dtype)
    import io

    return np.loadtxt(io.StringIO(body), dtype=dtype, ndmin=2)


def _kernel_to_alpha_field(kernel: Kernel) -> str:
    from .model import NearestNeighborKernel, PowerLawKernel

    if isinstance(kernel, PowerLawKernel):
        return repr(float(kernel.alpha))
    if isinstance(kernel, NearestNeighborKernel):
        return "inf"
    return kernel.spec_string()


def kernel_from_alpha_field(field: str) -> Kernel:
    """Inverse of the header alpha field: a float, "inf", or a kernel spec."""
    from .model import NearestNeighborKernel, PowerLawKernel

    if field == "inf":
        return NearestNeighborKernel()
    try:
        return PowerLawKernel(float(field))
    except ValueError:
        return parse_kernel(field)


def write_filtration(path: str | Path, filtration: Filtration, seed: int) -> None:
    """Edge-list format plus a third activation column (17 significant digits)."""
    alpha_field = _kernel_to_alpha_field(filtration.kernel)

    def body(fh):
        fh.write(_format_header(filtration.n, alpha_field, filtration.c_max, seed))
        fh.write("\n")
        for (u, v), a in zip(filtration.edges.tolist(), filtration.activation.tolist()):
            fh.write(f"{u} {v} {a:.17g}\n")

    _atomic_write(path, body)


def read_filtration(path: str | Path) -> tuple[Filtration, dict]:
    """Read a filtration file; returns (filtration, header fields)."""
    with open(path) as fh:
        header = _parse_header(fh.readline().rstrip("\n"))
        body = fh.read()
    data = _parse_body(body, np.float64, 3)
    edges = data[:, :2].astype(np.int64)
    act = data[:, 2]
    kernel = kernel_from_alpha_field(header["alpha"])
    filt = Filtration(header["n"], header["c"], kernel, edges, act)
    return filt, header
