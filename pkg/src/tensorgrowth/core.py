"""Lazy weighted fusion graphs and their finite truncations.

A growth problem is a pair ``(R, c)`` where ``R`` is a based algebra with
nonnegative structure constants and ``c`` is a basis element or a
nonnegative combination.  Multiplication by ``c`` is encoded as a weighted
directed graph: vertex ``j`` has an edge of weight ``m`` to vertex ``i``
whenever ``c_i`` occurs with multiplicity ``m`` in ``c * c_j``.  The action
matrix therefore has ``M[i][j] = m``, and column ``j`` lists the out-edges
of ``j``.

Graphs are presented by a neighbor oracle and expanded lazily, breadth
first, from the unit.  The expansion is memoized and numbered so that the
first ``|Gamma_k|`` indices are exactly the vertices at distance ``<= k``
from the unit, with the unit at index 0 and every layer sorted by key.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Hashable, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ExpansionCapError,
    InvalidKeyError,
    PresentationError,
    ScheduleError,
)

__all__ = [
    "DEFAULT_VERTEX_CAP",
    "WeightedEdge",
    "GrowthProblem",
    "Truncation",
    "RationalMatrix",
    "as_weight",
    "format_rational",
    "make_growth_problem",
    "out_edges",
    "exhaust",
    "expand_to_depth",
    "truncation_matrix",
    "filtration",
    "truncation_to_interchange",
    "problem_from_interchange",
]

DEFAULT_VERTEX_CAP = 200_000
VERTEX_CAP_ENV = "GROWTH_VERTEX_CAP"

VertexKey = Hashable


# ---------------------------------------------------------------------------
# scalars


def as_weight(value: Any) -> Fraction:
    """Convert ``value`` to an exact nonnegative rational.

    Accepts integers, :class:`fractions.Fraction`, strings such as ``"3"``
    or ``"2/7"`` and finite floats (converted through their shortest decimal
    representation, so ``0.5`` becomes ``1/2``).

    Raises
    ------
    PresentationError
        If the value cannot be parsed or is negative.
    """
    if isinstance(value, bool):
        raise PresentationError(f"boolean is not a weight: {value!r}")
    try:
        if isinstance(value, Rational):
            w = Fraction(value)
        elif isinstance(value, float):
            if not np.isfinite(value):
                raise ValueError("non-finite")
            w = Fraction(repr(value))
        elif isinstance(value, str):
            w = Fraction(value.strip())
        elif isinstance(value, np.integer):
            w = Fraction(int(value))
        elif isinstance(value, np.floating):
            return as_weight(float(value))
        else:
            raise TypeError(type(value).__name__)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise PresentationError(f"cannot parse weight {value!r}: {exc}") from None
    if w < 0:
        raise PresentationError(f"negative weight {value!r}")
    return w


def format_rational(x) -> str:
    """Render an exact rational as ``"p"`` or ``"p/q"``."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def _compact(w: Fraction):
    # integers propagate much faster than Fractions
    return w.numerator if w.denominator == 1 else w


@dataclass(frozen=True)
class WeightedEdge:
    """Edge ``source -> target`` of the fusion graph with exact weight."""

    source: VertexKey
    target: VertexKey
    weight: Fraction

    def as_tuple(self):
        return (self.target, self.weight)


# ---------------------------------------------------------------------------
# growth problems


def _env_cap() -> int:
    raw = os.environ.get(VERTEX_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_VERTEX_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise PresentationError(f"{VERTEX_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise PresentationError(f"{VERTEX_CAP_ENV} must be positive")
    return cap


class GrowthProblem:
    """Lazily expanded fusion graph of a growth problem ``(R, c)``.

    Parameters
    ----------
    oracle : callable
        ``oracle(key)`` returns an iterable of ``(target, weight)`` pairs, the
        decomposition of ``c * c_key``.  Repeated targets are merged and zero
        weights dropped.
    unit : hashable
        Key of the unit basis element.
    name : str
        Family tag, for reporting.
    params : dict, optional
        Family parameters, for reporting.
    validate_key : callable, optional
        Raises :class:`InvalidKeyError` on keys outside the family.
    sort_key : callable, optional
        Total order used to sort each breadth-first layer.
    degree_bound : callable or int, optional
        Upper bound on the out-degree of a vertex.
    dimension : callable, optional
        Dimension function on keys where the family has one.
    label : callable, optional
        Human-readable label of a key.
    known_pfdim : float, optional
        Exact PF dimension when known in closed form.
    finite : bool
        True when the vertex set is finite.
    vertex_cap : int, optional
        Maximal number of vertices that may be discovered.  Defaults to
        ``GROWTH_VERTEX_CAP`` from the environment, else 200000.
    """

    def __init__(
        self,
        oracle: Callable[[VertexKey], Iterable[tuple[VertexKey, Any]]],
        unit: VertexKey,
        *,
        name: str = "custom",
        params: dict | None = None,
        validate_key: Callable[[VertexKey], None] | None = None,
        sort_key: Callable[[VertexKey], Any] | None = None,
        degree_bound=None,
        dimension: Callable[[VertexKey], Any] | None = None,
        label: Callable[[VertexKey], str] | None = None,
        known_pfdim: float | None = None,
        finite: bool = False,
        vertex_cap: int | None = None,
    ):
        self._oracle = oracle
        self.name = name
        self.params = dict(params or {})
        self._validate = validate_key
        self.sort_key = sort_key or (lambda k: k)
        self._degree_bound = degree_bound
        self.dimension = dimension
        self._label = label
        self.known_pfdim = known_pfdim
        self.is_finite = finite
        self.vertex_cap = int(vertex_cap) if vertex_cap is not None else _env_cap()
        if self.vertex_cap < 1:
            raise PresentationError("vertex cap must be positive")
        self._lock = threading.RLock()
        self._memo: dict[VertexKey, tuple[WeightedEdge, ...]] = {}
        self.validate(unit)
        self.unit = unit
        # breadth-first numbering
        self._keys: list[VertexKey] = [unit]
        self._index: dict[VertexKey, int] = {unit: 0}
        self._depth_of: list[int] = [0]
        self._layer_end: list[int] = [1]  # layer d occupies [end[d-1], end[d])
        self._adj: list[list[tuple[int, Any]] | None] = [None]

    # -- keys -----------------------------------------------------------
    def validate(self, key: VertexKey) -> None:
        """Raise :class:`InvalidKeyError` if ``key`` is not a vertex."""
        if self._validate is not None:
            self._validate(key)

    def label(self, key: VertexKey) -> str:
        if self._label is not None:
            return self._label(key)
        if isinstance(key, tuple):
            return "(" + ",".join(str(x) for x in key) + ")"
        return str(key)

    def degree_bound(self, key: VertexKey) -> int | None:
        b = self._degree_bound
        if b is None:
            return None
        return b(key) if callable(b) else int(b)

    # -- oracle ---------------------------------------------------------
    def out_edges(self, key: VertexKey) -> tuple[WeightedEdge, ...]:
        """Memoized, canonicalized out-edges of ``key``."""
        try:
            edges = self._memo.get(key)
        except TypeError:
            raise InvalidKeyError(f"vertex key {key!r} is not hashable") from None
        if edges is not None:
            return edges
        with self._lock:
            edges = self._memo.get(key)
            if edges is not None:
                return edges
            self.validate(key)
            merged: dict[VertexKey, Fraction] = {}
            for target, w in self._oracle(key):
                w = as_weight(w)
                if w == 0:
                    continue
                merged[target] = merged.get(target, Fraction(0)) + w
            order = sorted(merged, key=self.sort_key)
            edges = tuple(WeightedEdge(key, t, merged[t]) for t in order)
            self._memo[key] = edges
            return edges

    # -- breadth-first expansion ---------------------------------------
    @property
    def expanded_depth(self) -> int:
        """Largest depth whose layer is fully numbered."""
        return len(self._layer_end) - 1

    @property
    def exhausted(self) -> bool:
        """True once the whole (finite) vertex set has been numbered."""
        return len(self._layer_end) >= 2 and self._layer_end[-1] == self._layer_end[-2]

    def ensure_depth(self, k: int) -> int:
        """Number all vertices at distance ``<= k``; return their count."""
        if k < 0:
            raise ValueError("depth must be nonnegative")
        with self._lock:
            while self.expanded_depth < k and not self.exhausted:
                self._grow_layer()
            d = min(k, self.expanded_depth)
            return self._layer_end[d]

    def _grow_layer(self) -> None:
        d = self.expanded_depth
        start = self._layer_end[d - 1] if d > 0 else 0
        stop = self._layer_end[d]
        new: set = set()
        for i in range(start, stop):
            for e in self.out_edges(self._keys[i]):
                if e.target not in self._index:
                    new.add(e.target)
        total = stop + len(new)
        if total > self.vertex_cap:
            raise ExpansionCapError(
                f"expanding {self.name} to depth {d + 1} needs {total} vertices, "
                f"cap is {self.vertex_cap}",
                discovered=total,
                cap=self.vertex_cap,
            )
        for key in sorted(new, key=self.sort_key):
            self._index[key] = len(self._keys)
            self._keys.append(key)
            self._depth_of.append(d + 1)
            self._adj.append(None)
        self._layer_end.append(total)

    def layer_bounds(self, d: int) -> tuple[int, int]:
        """Index range ``[lo, hi)`` of layer ``d`` (must be expanded)."""
        self.ensure_depth(d)
        if d > self.expanded_depth:
            n = self._layer_end[-1]
            return (n, n)
        lo = self._layer_end[d - 1] if d > 0 else 0
        return (lo, self._layer_end[d])

    def index_of(self, key: VertexKey) -> int:
        """Breadth-first index of ``key``, expanding until it is found."""
        idx = self._index.get(key)
        if idx is not None:
            return idx
        self.validate(key)
        with self._lock:
            while key not in self._index:
                if self.exhausted:
                    raise InvalidKeyError(f"vertex {key!r} is not reachable from the unit")
                self._grow_layer()
            return self._index[key]

    def key_of(self, index: int) -> VertexKey:
        return self._keys[index]

    def depth_of(self, key: VertexKey) -> int:
        return self._depth_of[self.index_of(key)]

    def keys(self, count: int | None = None) -> list:
        return list(self._keys if count is None else self._keys[:count])

    def adjacency(self, index: int) -> list[tuple[int, Any]]:
        """Out-edges of vertex ``index`` as ``(target index, weight)``.

        Integer weights are returned as ``int`` for fast propagation.
        """
        row = self._adj[index]
        if row is not None:
            return row
        with self._lock:
            self.ensure_depth(self._depth_of[index] + 1)
            row = [(self._index[e.target], _compact(e.weight)) for e in self.out_edges(self._keys[index])]
            self._adj[index] = row
            return row

    def reach_count(self, depth: int) -> int:
        """Number of vertices at distance ``<= depth``."""
        return self.ensure_depth(depth)

    def __repr__(self):
        p = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"GrowthProblem({self.name}{'(' + p + ')' if p else ''})"


# ---------------------------------------------------------------------------
# truncations


@dataclass(frozen=True)
class RationalMatrix:
    """Sparse square matrix with exact nonnegative rational entries.

    ``entries`` maps ``(row, col)`` to a positive :class:`Fraction`.
    """

    size: int
    entries: dict = field(default_factory=dict)

    @property
    def shape(self):
        return (self.size, self.size)

    def __getitem__(self, ij) -> Fraction:
        return self.entries.get(tuple(ij), Fraction(0))

    def toarray(self, dtype=float) -> np.ndarray:
        """Dense numpy array (``dtype=object`` keeps Fractions)."""
        if dtype is object:
            a = np.full((self.size, self.size), Fraction(0), dtype=object)
            for (i, j), w in self.entries.items():
                a[i, j] = w
            return a
        a = np.zeros((self.size, self.size), dtype=dtype)
        for (i, j), w in self.entries.items():
            a[i, j] = float(w)
        return a

    def tocsr(self) -> sp.csr_matrix:
        if not self.entries:
            return sp.csr_matrix((self.size, self.size))
        ij = np.array(list(self.entries.keys()), dtype=np.int64)
        vals = np.array([float(w) for w in self.entries.values()])
        return sp.csr_matrix((vals, (ij[:, 0], ij[:, 1])), shape=self.shape)

    def rows(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.size for _ in range(self.size)]
        for (i, j), w in self.entries.items():
            out[i][j] = w
        return out

    def column(self, j: int) -> dict[int, Fraction]:
        return {i: w for (i, jj), w in self.entries.items() if jj == j}

    def scaled(self, s) -> "RationalMatrix":
        s = as_weight(s)
        return RationalMatrix(self.size, {k: w * s for k, w in self.entries.items() if w * s != 0})


@dataclass(frozen=True)
class Truncation:
    """Finite induced subgraph of a fusion graph.

    Attributes
    ----------
    depth : int or None
        Cutoff depth for naive truncations, ``None`` for explicit vertex sets.
    vertices : tuple
        Vertex keys, unit first.
    columns : tuple
        ``columns[j]`` lists ``(i, weight)`` for the kept out-edges of
        vertex ``j``; weights are exact.
    problem : GrowthProblem
        The problem the truncation was cut from.
    """

    depth: int | None
    vertices: tuple
    columns: tuple
    problem: GrowthProblem | None = field(default=None, compare=False, repr=False)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def __len__(self):
        return len(self.vertices)

    def index(self, key) -> int:
        try:
            return self.vertices.index(key)
        except ValueError:
            raise InvalidKeyError(f"vertex {key!r} is not in the truncation") from None

    def matrix(self) -> RationalMatrix:
        ent = {}
        for j, col in enumerate(self.columns):
            for i, w in col:
                ent[(i, j)] = Fraction(w)
        return RationalMatrix(self.size, ent)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.size, self.size))
        for j, col in enumerate(self.columns):
            for i, w in col:
                a[i, j] = float(w)
        return a

    def to_sparse(self) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for j, col in enumerate(self.columns):
            for i, w in col:
                rows.append(i)
                cols.append(j)
                vals.append(float(w))
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))

    def labels(self) -> list[str]:
        if self.problem is None:
            return [str(v) for v in self.vertices]
        return [self.problem.label(v) for v in self.vertices]


def _explicit_problem(matrix, unit: int, name: str = "explicit", labels=None) -> GrowthProblem:
    """Finite problem reading columns of a square nonnegative matrix."""
    if isinstance(matrix, RationalMatrix):
        matrix = matrix.rows()
    elif sp.issparse(matrix):
        matrix = matrix.toarray()
    rows = [list(r) for r in matrix]
    n = len(rows)
    if n == 0:
        raise PresentationError("matrix is empty")
    if any(len(r) != n for r in rows):
        raise PresentationError("matrix is not square")
    cols: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            w = as_weight(x)
            if w:
                cols[j].append((i, w))
    if isinstance(unit, bool) or not isinstance(unit, (int, np.integer)):
        raise PresentationError(f"unit must be an integer index, got {unit!r}")
    unit = int(unit)
    if not 0 <= unit < n:
        raise PresentationError(f"unit index {unit} out of range for {n}x{n} matrix")
    if labels is not None and len(labels) != n:
        raise PresentationError("label list does not match matrix size")

    def validate(k):
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or not 0 <= k < n:
            raise InvalidKeyError(f"explicit vertex must be an index in [0, {n}), got {k!r}")

    def label(k):
        return str(labels[k]) if labels is not None else str(k)

    return GrowthProblem(
        lambda j: cols[j],
        unit,
        name=name,
        params={"size": n, "unit": unit},
        validate_key=validate,
        degree_bound=n,
        label=label,
        finite=True,
    )


def make_growth_problem(presentation, **options) -> GrowthProblem:
    """Build a :class:`GrowthProblem` from a family tag or an explicit matrix.

    Parameters
    ----------
    presentation
        One of

        * a family name such as ``"sl2"`` or ``"klein-four"`` (parameters
          passed as keyword options, e.g. ``weight=1``);
        * a square matrix (nested sequence or array) of nonnegative
          rationals, with ``unit`` given as an option (default 0);
        * a dict in the JSON interchange format;
        * an existing :class:`GrowthProblem`, returned unchanged.
    **options
        Family parameters, ``unit`` for matrices, ``vertex_cap``.

    Raises
    ------
    PresentationError
        Malformed presentation, negative weight or missing unit.
    """
    if isinstance(presentation, GrowthProblem):
        return presentation
    if isinstance(presentation, str):
        from .families import build_family

        return build_family(presentation, **options)
    if isinstance(presentation, dict):
        gp = problem_from_interchange(presentation)
    else:
        unit = options.pop("unit", 0)
        try:
            gp = _explicit_problem(presentation, unit)
        except TypeError as exc:
            raise PresentationError(f"unsupported presentation: {exc}") from None
    if "vertex_cap" in options:
        gp.vertex_cap = int(options["vertex_cap"])
    return gp


def out_edges(gp: GrowthProblem, v: VertexKey) -> list[WeightedEdge]:
    """Decomposition of ``c * c_v``: out-edges of ``v`` sorted by target key."""
    return list(gp.out_edges(v))


def _truncate(gp: GrowthProblem, keys: Sequence, depth: int | None) -> Truncation:
    pos = {k: i for i, k in enumerate(keys)}
    cols = []
    for k in keys:
        cols.append(tuple((pos[e.target], e.weight) for e in gp.out_edges(k) if e.target in pos))
    return Truncation(depth, tuple(keys), tuple(cols), gp)


def expand_to_depth(gp: GrowthProblem, k: int) -> Truncation:
    """Naive cutoff: all vertices reachable from the unit in ``<= k`` steps.

    Raises
    ------
    ExpansionCapError
        If numbering the layers would exceed the vertex cap.
    """
    if k < 0:
        raise ValueError("depth must be nonnegative")
    n = gp.ensure_depth(k)
    return _truncate(gp, gp.keys(n), k)


def exhaust(gp: GrowthProblem) -> Truncation:
    """Cutoff equal to the whole graph of a finite problem.

    Raises
    ------
    PresentationError
        If the problem is not declared finite.
    ExpansionCapError
        If the graph is larger than the vertex cap.
    """
    if not gp.is_finite:
        raise PresentationError(f"{gp.name} is infinite; use expand_to_depth")
    gp.ensure_depth(10**9)
    return expand_to_depth(gp, gp.expanded_depth)


def truncation_matrix(t: Truncation) -> RationalMatrix:
    """Action matrix of a truncation, ``M[i][j]`` = weight of edge ``j -> i``."""
    return t.matrix()


def filtration(gp: GrowthProblem, strategy="naive", depths: Iterable[int] | None = None) -> Iterator[Truncation]:
    """Stream of nested truncations.

    Parameters
    ----------
    strategy : "naive" or sequence of vertex collections
        ``"naive"`` yields the naive cutoffs at ``depths`` (default
        ``0, 1, 2, ...``, stopping when a finite graph is exhausted).
        Otherwise an explicit nested schedule starting with ``{unit}``.

    Raises
    ------
    ScheduleError
        Explicit schedules that are not nested or omit the unit.
    """
    if isinstance(strategy, str):
        if strategy != "naive":
            raise ScheduleError(f"unknown filtration strategy {strategy!r}")
        return _naive_stream(gp, depths)
    return _explicit_stream(gp, [list(s) for s in strategy])


def _naive_stream(gp, depths):
    if depths is None:
        k = 0
        while True:
            t = expand_to_depth(gp, k)
            yield t
            if gp.exhausted and k >= gp.expanded_depth - 1:
                return
            k += 1
    else:
        last = -1
        for k in depths:
            if k <= last:
                raise ScheduleError("depth schedule must be strictly increasing")
            last = k
            yield expand_to_depth(gp, k)


def _explicit_stream(gp, schedule):
    if not schedule:
        raise ScheduleError("empty schedule")
    first = set(schedule[0])
    if first != {gp.unit}:
        raise ScheduleError("explicit schedule must start with the unit alone")
    order: list = []
    seen: set = set()
    prev: set = set()
    checked = []
    for step, verts in enumerate(schedule):
        cur = set(verts)
        if gp.unit not in cur:
            raise ScheduleError(f"schedule step {step} omits the unit")
        if not prev <= cur:
            raise ScheduleError(f"schedule step {step - 1} is not contained in step {step}")
        for v in cur:
            gp.validate(v)
        fresh = sorted(cur - seen, key=gp.sort_key)
        order.extend(fresh)
        seen |= cur
        prev = cur
        checked.append(list(order))
    for keys in checked:
        yield _truncate(gp, keys, None)


# ---------------------------------------------------------------------------
# JSON interchange


def truncation_to_interchange(t: Truncation) -> dict:
    """JSON-ready dict ``{"vertices", "unit", "edges"}`` of a truncation."""
    edges = []
    for j, col in enumerate(t.columns):
        for i, w in col:
            edges.append([j, i, format_rational(w)])
    return {"vertices": t.labels(), "unit": 0, "edges": edges}


def problem_from_interchange(obj) -> GrowthProblem:
    """Finite problem from the JSON interchange format (dict, str or path).

    Edges are ``[src, dst, "p/q"]`` with indices into ``vertices``.
    """
    if isinstance(obj, (str, os.PathLike)) and not str(obj).lstrip().startswith("{"):
        try:
            with open(obj, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise PresentationError(f"cannot read {obj}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise PresentationError(f"invalid JSON: {exc}") from None
    elif isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise PresentationError("interchange document must be a JSON object")
    for field_name in ("vertices", "unit", "edges"):
        if field_name not in obj:
            raise PresentationError(f"interchange document lacks {field_name!r}")
    labels = obj["vertices"]
    if not isinstance(labels, list) or not labels:
        raise PresentationError("'vertices' must be a nonempty list")
    n = len(labels)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for e in obj["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 3:
            raise PresentationError(f"edge must be [src, dst, weight], got {e!r}")
        s, d, w = e
        for x in (s, d):
            if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < n:
                raise PresentationError(f"edge endpoint {x!r} out of range")
        rows[d][s] += as_weight(w)
    label_strs = [json.dumps(x) if not isinstance(x, str) else x for x in labels]
    return _explicit_problem(rows, obj["unit"], name=obj.get("name", "explicit"), labels=label_strs)
