"""Weighted graphs, their finite truncations and functions on vertices.

A :class:`WeightedGraph` is always a *finite* object.  Infinite graphs
(lattices, regular trees) are represented by a generator that materializes
Dirichlet truncations ``B_n`` on demand; the truncation remembers the total
weight of the edges it cut (``boundary``), so that the form of the
truncation is exactly the form of the infinite graph restricted to
functions vanishing outside ``B_n``.

Edge weights are stored for ordered pairs, both orientations present.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import ConfigError

__all__ = [
    "WeightedGraph",
    "VertexFunction",
    "BoundedPotential",
    "Exhaustion",
    "LatticeGenerator",
    "TreeGenerator",
    "build_lattice",
    "build_regular_tree",
    "load_graph",
    "dump_graph",
    "graph_to_dict",
    "graph_from_dict",
    "pad",
    "restrict",
]

VertexSpec = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite weighted graph ``(X, b, kappa, m)`` with Dirichlet boundary.

    Vertices are indexed by position ``0..n-1``; ``ids`` maps positions to
    canonical integer ids (sorted ascending).  Ordered pairs are stored as
    parallel arrays ``src``, ``dst``, ``weight`` of positions.

    ``boundary[i]`` is the total weight of edges from vertex ``i`` to
    vertices that are not part of this graph; functions are taken to vanish
    there.
    """

    ids: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    kappa: np.ndarray
    measure: np.ndarray
    boundary: np.ndarray
    dist: np.ndarray
    root: int
    coords: np.ndarray | None = None
    source: str = "file"
    generator: object | None = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.ids)
        if n == 0:
            raise ConfigError("graph has no vertices")
        if np.any(np.diff(self.ids) <= 0):
            raise ConfigError("vertex ids must be unique and sorted")
        for name in ("kappa", "measure", "boundary", "dist"):
            if getattr(self, name).shape != (n,):
                raise ConfigError(f"{name} must have one entry per vertex")
        if not np.all(np.isfinite(self.kappa)):
            raise ConfigError("kappa must be finite")
        if np.any(~(self.measure > 0)) or not np.all(np.isfinite(self.measure)):
            raise ConfigError("measure must be positive at every vertex")
        if np.any(self.weight < 0) or np.any(self.boundary < 0):
            raise ConfigError("edge weights must be nonnegative")
        if np.any(self.src == self.dst):
            raise ConfigError("b(x,x) must vanish")
        o1 = np.lexsort((self.dst, self.src))
        o2 = np.lexsort((self.src, self.dst))
        if not (
            np.array_equal(self.src[o1], self.dst[o2])
            and np.array_equal(self.dst[o1], self.src[o2])
            and np.array_equal(self.weight[o1], self.weight[o2])
        ):
            raise ConfigError("edge weights are not symmetric")
        if self.root not in self:
            raise ConfigError(f"root {self.root} is not a vertex")

    # -- basic access -----------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def num_pairs(self) -> int:
        """Number of stored ordered pairs with positive weight."""
        return int(np.count_nonzero(self.weight))

    @property
    def degree(self) -> np.ndarray:
        """Weighted degree ``sum_y b(x,y)`` including cut edges."""
        deg = np.bincount(self.src, weights=self.weight, minlength=self.n)
        return deg + self.boundary

    @property
    def root_index(self) -> int:
        return int(self.index(self.root))

    @property
    def interior(self) -> np.ndarray:
        """Boolean mask of vertices with no cut edges."""
        return self.boundary == 0

    def __contains__(self, vid) -> bool:
        i = np.searchsorted(self.ids, vid)
        return bool(i < self.n and self.ids[i] == vid)

    def index(self, vids):
        """Positions of the given vertex ids; raises on unknown ids."""
        vids = np.asarray(vids, dtype=np.int64)
        pos = np.searchsorted(self.ids, vids)
        pos_c = np.minimum(pos, self.n - 1)
        if np.any(self.ids[pos_c] != vids):
            missing = np.atleast_1d(vids)[np.atleast_1d(self.ids[pos_c] != vids)]
            raise ConfigError(f"vertices not in graph: {missing[:5].tolist()}")
        return pos_c

    def edges(self) -> dict:
        """Ordered-pair weights as a ``{(x, y): b}`` dict of vertex ids."""
        return {
            (int(self.ids[s]), int(self.ids[d])): float(w)
            for s, d, w in zip(self.src, self.dst, self.weight)
        }

    def ball(self, n: int) -> np.ndarray:
        """Ids of the exhaustion region ``B_n`` inside this graph."""
        return self.ids[self.dist <= n]

    def extended_pairs(self):
        """Ordered pairs including cut edges to a ghost vertex at position n.

        Functions evaluated on these pairs must be padded with a trailing
        zero (see :func:`pad`).
        """
        cut = np.flatnonzero(self.boundary)
        ghost = np.full(len(cut), self.n)
        src = np.concatenate([self.src, cut, ghost])
        dst = np.concatenate([self.dst, ghost, cut])
        w = np.concatenate([self.weight, self.boundary[cut], self.boundary[cut]])
        return src, dst, w

    def values(self, u) -> np.ndarray:
        """Coerce ``u`` (array, VertexFunction or scalar) to a vertex array."""
        if isinstance(u, VertexFunction):
            return u.on(self)
        if np.isscalar(u):
            return np.full(self.n, float(u))
        arr = np.asarray(u, dtype=float)
        if arr.shape != (self.n,):
            raise ConfigError(f"expected {self.n} vertex values, got shape {arr.shape}")
        return arr

    def replace(self, **changes) -> "WeightedGraph":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return WeightedGraph(**data)


def pad(u: np.ndarray) -> np.ndarray:
    """Append the ghost value 0 used by :meth:`WeightedGraph.extended_pairs`."""
    return np.append(u, 0.0)


@dataclass(frozen=True)
class VertexFunction:
    """Finitely supported real function given by ids and values."""

    ids: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        vals = np.asarray(self.values, dtype=float)
        if ids.shape != vals.shape or ids.ndim != 1:
            raise ConfigError("ids and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(vals)):
            raise ConfigError("values must be finite")
        order = np.argsort(ids, kind="stable")
        ids, vals = ids[order], vals[order]
        if np.any(np.diff(ids) == 0):
            raise ConfigError("duplicate vertex ids")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_array(cls, g: WeightedGraph, arr) -> "VertexFunction":
        arr = g.values(arr)
        nz = arr != 0
        return cls(g.ids[nz], arr[nz])

    @property
    def support(self) -> np.ndarray:
        return self.ids[self.values != 0]

    def on(self, g: WeightedGraph, strict: bool = True) -> np.ndarray:
        """Values aligned with the vertices of ``g`` (zero off support).

        With ``strict`` a nonzero value outside ``g`` raises ConfigError.
        """
        out = np.zeros(g.n)
        pos = np.searchsorted(g.ids, self.ids)
        pos_c = np.minimum(pos, g.n - 1)
        hit = g.ids[pos_c] == self.ids
        if strict and np.any(self.values[~hit] != 0):
            raise ConfigError("function support leaves the materialized truncation")
        out[pos_c[hit]] = self.values[hit]
        return out

    def __call__(self, vid) -> float:
        i = np.searchsorted(self.ids, vid)
        if i < len(self.ids) and self.ids[i] == vid:
            return float(self.values[i])
        return 0.0


@dataclass(frozen=True)
class BoundedPotential:
    """Bounded potential ``W``: explicit values on finitely many vertices
    and the constant ``default`` everywhere else."""

    ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    vals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    default: float = 0.0

    def __post_init__(self):
        f = VertexFunction(self.ids, self.vals)
        object.__setattr__(self, "ids", f.ids)
        object.__setattr__(self, "vals", f.values)
        if not np.isfinite(self.default):
            raise ConfigError("potential must be bounded")

    @classmethod
    def zero(cls) -> "BoundedPotential":
        return cls()

    @classmethod
    def constant(cls, c: float) -> "BoundedPotential":
        return cls(default=float(c))

    @classmethod
    def indicator(cls, vids, t: float = 1.0) -> "BoundedPotential":
        vids = np.atleast_1d(np.asarray(vids, dtype=np.int64))
        return cls(vids, np.full(len(vids), float(t)))

    @classmethod
    def from_array(cls, g: WeightedGraph, arr, default: float = 0.0) -> "BoundedPotential":
        return cls(g.ids.copy(), g.values(arr).copy(), default)

    @property
    def sup_norm(self) -> float:
        m = abs(self.default)
        if len(self.vals):
            m = max(m, float(np.max(np.abs(self.vals))))
        return m

    @property
    def is_zero(self) -> bool:
        return self.default == 0 and not np.any(self.vals)

    def on(self, g: WeightedGraph) -> np.ndarray:
        out = np.full(g.n, float(self.default))
        pos = np.searchsorted(g.ids, self.ids)
        pos_c = np.minimum(pos, g.n - 1)
        hit = g.ids[pos_c] == self.ids
        out[pos_c[hit]] = self.vals[hit]
        return out

    def scaled(self, t: float) -> "BoundedPotential":
        return BoundedPotential(self.ids, t * self.vals, t * self.default)

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other: "BoundedPotential") -> "BoundedPotential":
        ids = np.union1d(self.ids, other.ids)
        vals = _eval_on_ids(self, ids) + _eval_on_ids(other, ids)
        return BoundedPotential(ids, vals, self.default + other.default)


def _eval_on_ids(W: BoundedPotential, ids: np.ndarray) -> np.ndarray:
    out = np.full(len(ids), float(W.default))
    if len(W.ids):
        pos = np.minimum(np.searchsorted(W.ids, ids), len(W.ids) - 1)
        hit = W.ids[pos] == ids
        out[hit] = W.vals[pos[hit]]
    return out


# ---------------------------------------------------------------------------
# restriction and exhaustions


def restrict(g: WeightedGraph, region) -> WeightedGraph:
    """Dirichlet restriction of ``g`` to ``region`` (ids or boolean mask).

    Edges leaving the region are folded into ``boundary`` so that the form
    of the result equals the form of ``g`` on functions vanishing outside
    the region.
    """
    region = np.asarray(region)
    if region.dtype == bool:
        if region.shape != (g.n,):
            raise ConfigError("mask has wrong length")
        keep = region
    else:
        keep = np.zeros(g.n, dtype=bool)
        keep[g.index(np.unique(region.astype(np.int64)))] = True
    if not keep.any():
        raise ConfigError("empty region")
    if keep.all():
        return g
    new_pos = np.cumsum(keep) - 1
    inside = keep[g.src] & keep[g.dst]
    leaving = keep[g.src] & ~keep[g.dst]
    cut = np.bincount(g.src[leaving], weights=g.weight[leaving], minlength=g.n)
    root = g.root if keep[g.root_index] else int(g.ids[keep][0])
    return WeightedGraph(
        ids=g.ids[keep],
        src=new_pos[g.src[inside]],
        dst=new_pos[g.dst[inside]],
        weight=g.weight[inside],
        kappa=g.kappa[keep],
        measure=g.measure[keep],
        boundary=(g.boundary + cut)[keep],
        dist=g.dist[keep],
        root=root,
        coords=None if g.coords is None else g.coords[keep],
        source=g.source,
        generator=g.generator,
    )


@dataclass(frozen=True, eq=False)
class Exhaustion:
    """Nested regions ``B_0 ⊂ B_1 ⊂ ...`` around ``root``.

    Either ``generator`` (an infinite graph) or ``graph`` (a finite one)
    is set.  ``truncation(n)`` returns the Dirichlet restriction to ``B_n``.
    """

    root: int
    generator: object | None = None
    graph: WeightedGraph | None = None

    @property
    def max_index(self) -> int | None:
        """Largest useful index for finite graphs, ``None`` if infinite."""
        if self.graph is None:
            return None
        return int(self.graph.dist.max())

    def truncation(self, n: int) -> WeightedGraph:
        if n < 0:
            raise ConfigError("exhaustion index must be nonnegative")
        if self.generator is not None:
            return self.generator.truncation(n)
        return restrict(self.graph, self.graph.dist <= n)

    def region(self, n: int) -> np.ndarray:
        return self.truncation(n).ids

    @classmethod
    def of_graph(cls, g: WeightedGraph) -> "Exhaustion":
        return cls(root=g.root, graph=g)


def _vertex_values(spec: VertexSpec, arg: np.ndarray, n: int, name: str) -> np.ndarray:
    if callable(spec):
        out = np.asarray(spec(arg), dtype=float)
        if out.shape == ():
            out = np.full(n, float(out))
    else:
        out = np.full(n, float(spec))
    if out.shape != (n,):
        raise ConfigError(f"{name} spec returned shape {out.shape}, expected ({n},)")
    return out


# ---------------------------------------------------------------------------
# generators


class LatticeGenerator:
    """Nearest-neighbour lattice ``Z^d`` with sup-norm balls as exhaustion.

    Canonical ids list vertices shell by shell (sup-norm 0, 1, 2, ...),
    lexicographically inside each shell, so ids do not depend on the
    truncation radius.  ``kappa`` and ``measure`` are scalars or callables
    on an ``(N, d)`` integer coordinate array.
    """

    def __init__(self, dim: int, edge_weight: float = 0.5,
                 kappa: VertexSpec = 0.0, measure: VertexSpec = 1.0):
        if int(dim) != dim or dim < 1:
            raise ConfigError("lattice dimension must be a positive integer")
        if not edge_weight > 0:
            raise ConfigError("edge weight must be positive")
        self.dim = int(dim)
        self.edge_weight = float(edge_weight)
        self.kappa = kappa
        self.measure = measure
        self._cache: dict[int, WeightedGraph] = {}

    @property
    def tag(self) -> str:
        return f"lattice(d={self.dim},b={self.edge_weight!r})"

    def coordinates(self, radius: int) -> np.ndarray:
        """Coordinates of the ball of given radius in canonical id order."""
        axis = np.arange(-radius, radius + 1)
        grid = np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"), -1)
        pts = grid.reshape(-1, self.dim)
        shell = np.abs(pts).max(axis=1)
        keys = [pts[:, j] for j in range(self.dim - 1, -1, -1)] + [shell]
        return pts[np.lexsort(keys)]

    def truncation(self, radius: int) -> WeightedGraph:
        radius = int(radius)
        if radius < 0:
            raise ConfigError("radius must be nonnegative")
        if radius in self._cache:
            return self._cache[radius]
        d, b = self.dim, self.edge_weight
        pts = self.coordinates(radius)
        n = len(pts)
        side = 2 * radius + 1
        lookup = np.empty(side ** d, dtype=np.int64)
        lookup[np.ravel_multi_index(tuple((pts + radius).T), (side,) * d)] = np.arange(n)
        src, dst = [], []
        boundary = np.zeros(n)
        for j in range(d):
            for step in (-1, 1):
                nb = pts.copy()
                nb[:, j] += step
                inside = np.abs(nb[:, j]) <= radius
                idx = np.flatnonzero(inside)
                src.append(idx)
                dst.append(lookup[np.ravel_multi_index(tuple((nb[idx] + radius).T), (side,) * d)])
                boundary[~inside] += b
        src = np.concatenate(src)
        dst = np.concatenate(dst)
        g = WeightedGraph(
            ids=np.arange(n, dtype=np.int64),
            src=src,
            dst=dst,
            weight=np.full(len(src), b),
            kappa=_vertex_values(self.kappa, pts, n, "kappa"),
            measure=_vertex_values(self.measure, pts, n, "measure"),
            boundary=boundary,
            dist=np.abs(pts).max(axis=1),
            root=0,
            coords=pts,
            source=self.tag,
            generator=self,
        )
        self._cache[radius] = g
        return g

    def vertex_id(self, point) -> int:
        """Canonical id of a lattice point."""
        point = np.asarray(point, dtype=np.int64).reshape(1, self.dim)
        r = int(np.abs(point).max())
        pts = self.coordinates(r)
        hit = np.flatnonzero(np.all(pts == point, axis=1))
        return int(hit[0])


class TreeGenerator:
    """Rooted regular tree in which every vertex has ``degree`` neighbours.

    Ids are breadth-first; the exhaustion is by depth.  ``kappa`` and
    ``measure`` are scalars or callables on the depth array.
    """

    def __init__(self, degree: int, edge_weight: float = 0.5,
                 kappa: VertexSpec = 0.0, measure: VertexSpec = 1.0):
        if int(degree) != degree or degree < 3:
            raise ConfigError("tree degree must be >= 3 (degree 2 is the path, use build_lattice)")
        if not edge_weight > 0:
            raise ConfigError("edge weight must be positive")
        self.degree = int(degree)
        self.edge_weight = float(edge_weight)
        self.kappa = kappa
        self.measure = measure
        self._cache: dict[int, WeightedGraph] = {}

    @property
    def tag(self) -> str:
        return f"tree(degree={self.degree},b={self.edge_weight!r})"

    def size(self, depth: int) -> int:
        q = self.degree - 1
        return 1 + self.degree * (q ** depth - 1) // (q - 1)

    def truncation(self, depth: int) -> WeightedGraph:
        depth = int(depth)
        if depth < 0:
            raise ConfigError("depth must be nonnegative")
        if depth in self._cache:
            return self._cache[depth]
        k, b = self.degree, self.edge_weight
        n = self.size(depth)
        level = np.zeros(n, dtype=np.int64)
        parent = np.full(n, -1, dtype=np.int64)
        start, width, prev = 1, k, np.array([0])
        for r in range(1, depth + 1):
            kids = np.arange(start, start + width)
            parent[kids] = np.repeat(prev, width // len(prev))
            level[kids] = r
            prev, start, width = kids, start + width, width * (k - 1)
        child = np.arange(1, n)
        src = np.concatenate([child, parent[1:]])
        dst = np.concatenate([parent[1:], child])
        boundary = np.where(level == depth, (k - 1) * b, 0.0)
        if depth == 0:
            boundary[0] = k * b
        g = WeightedGraph(
            ids=np.arange(n, dtype=np.int64),
            src=src,
            dst=dst,
            weight=np.full(len(src), b),
            kappa=_vertex_values(self.kappa, level, n, "kappa"),
            measure=_vertex_values(self.measure, level, n, "measure"),
            boundary=boundary,
            dist=level,
            root=0,
            source=self.tag,
            generator=self,
        )
        self._cache[depth] = g
        return g


def build_lattice(d: int, radius: int, edge_weight: float = 0.5,
                  kappa: VertexSpec = 0.0, measure: VertexSpec = 1.0):
    """Truncation of ``Z^d`` to the sup-ball of given radius.

    Returns
    -------
    graph : WeightedGraph
    exhaustion : Exhaustion
        Sup-balls around the origin, materialized lazily from the same
        generator (so larger balls are available).

    Examples
    --------
    >>> g, ex = build_lattice(1, 3)
    >>> g.n, g.num_pairs
    (7, 12)
    """
    if int(radius) != radius or radius < 1:
        raise ConfigError("radius must be a positive integer")
    gen = LatticeGenerator(d, edge_weight, kappa, measure)
    return gen.truncation(radius), Exhaustion(root=0, generator=gen)


def build_regular_tree(degree: int, depth: int, edge_weight: float = 0.5,
                       kappa: VertexSpec = 0.0, measure: VertexSpec = 1.0):
    """Depth ball of the rooted ``degree``-regular tree plus its exhaustion."""
    if int(depth) != depth or depth < 1:
        raise ConfigError("depth must be a positive integer")
    gen = TreeGenerator(degree, edge_weight, kappa, measure)
    return gen.truncation(depth), Exhaustion(root=0, generator=gen)


# ---------------------------------------------------------------------------
# JSON files


def _bfs_dist(n: int, src: np.ndarray, dst: np.ndarray, root: int) -> np.ndarray:
    adj = [[] for _ in range(n)]
    for s, d in zip(src.tolist(), dst.tolist()):
        adj[s].append(d)
    dist = np.full(n, -1, dtype=np.int64)
    dist[root] = 0
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def graph_from_dict(data: dict) -> WeightedGraph:
    try:
        root = int(data["root"])
        verts = data["vertices"]
        edges = data.get("edges", [])
        ids = np.array([int(v["id"]) for v in verts], dtype=np.int64)
        kappa = np.array([float(v.get("kappa", 0.0)) for v in verts])
        meas = np.array([float(v.get("m", 1.0)) for v in verts])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed graph file: {exc}") from exc
    if len(np.unique(ids)) != len(ids):
        raise ConfigError("duplicate vertex ids")
    if np.any(~(meas > 0)):
        bad = ids[~(meas > 0)].tolist()
        raise ConfigError(f"measure must be positive, violated at vertices {bad}")
    order = np.argsort(ids)
    ids, kappa, meas = ids[order], kappa[order], meas[order]
    pos = {int(v): i for i, v in enumerate(ids)}
    weights: dict[tuple[int, int], float] = {}
    for e in edges:
        try:
            u, v, b = int(e["u"]), int(e["v"]), float(e["b"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed edge {e!r}") from exc
        if u not in pos or v not in pos:
            raise ConfigError(f"edge ({u},{v}) references an unknown vertex")
        if u == v:
            if b != 0:
                raise ConfigError(f"self loop at {u} must have zero weight")
            continue
        if not (b >= 0 and np.isfinite(b)):
            raise ConfigError(f"edge ({u},{v}) has invalid weight {b}")
        key = (min(u, v), max(u, v))
        if key in weights and weights[key] != b:
            raise ConfigError(f"conflicting weights for edge {key}: {weights[key]} vs {b}")
        weights[key] = b
    keys = sorted(k for k, b in weights.items() if b > 0)
    a = np.array([pos[k[0]] for k in keys], dtype=np.int64)
    c = np.array([pos[k[1]] for k in keys], dtype=np.int64)
    w = np.array([weights[k] for k in keys])
    src, dst, wt = np.concatenate([a, c]), np.concatenate([c, a]), np.concatenate([w, w])
    if root not in pos:
        raise ConfigError(f"root {root} is not a vertex")
    dist = _bfs_dist(len(ids), src, dst, pos[root])
    if np.any(dist < 0):
        raise ConfigError("graph is not connected to the root")
    return WeightedGraph(ids=ids, src=src, dst=dst, weight=wt, kappa=kappa,
                         measure=meas, boundary=np.zeros(len(ids)), dist=dist,
                         root=root, source="file")


def load_graph(path):
    """Read a graph file; returns ``(graph, exhaustion)`` with BFS balls."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read graph file {path}: {exc}") from exc
    g = graph_from_dict(data)
    return g, Exhaustion.of_graph(g)


def graph_to_dict(g: WeightedGraph) -> dict:
    """Canonical JSON form: vertices by id, each undirected edge once."""
    if np.any(g.boundary):
        raise ConfigError("cannot export a truncation with cut edges as a finite graph")
    up = g.ids[g.src] < g.ids[g.dst]
    a, c, w = g.ids[g.src[up]], g.ids[g.dst[up]], g.weight[up]
    order = np.lexsort((c, a))
    return {
        "root": int(g.root),
        "vertices": [
            {"id": int(i), "kappa": float(k), "m": float(m)}
            for i, k, m in zip(g.ids, g.kappa, g.measure)
        ],
        "edges": [
            {"u": int(a[i]), "v": int(c[i]), "b": float(w[i])} for i in order
        ],
    }


def dump_graph(g: WeightedGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(g), indent=1) + "\n")
