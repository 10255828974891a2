"""Built-in growth problems and ingestion of user matrices.

Every family is a neighbor oracle plus bookkeeping (key validation, degree
bound, dimension function where one exists).  Keys are canonical integers
or integer tuples:

=================  =========================================  ============
family             vertex key                                  unit
=================  =========================================  ============
fibonacci          0 (unit), 1 (the generator)                 0
sl2                highest weight ``m >= 0``                   0
sl3-vector         2-part partition ``(a, b)``, ``a >= b``     ``(0, 0)``
gl2-vector         ``(a, b)`` with ``a >= b >= 0``             ``(0, 0)``
klein-four         odd ``k`` for ``I_k`` (1 is the unit), 4    1
                   for the projective ``P_4``
sl2-f2             ``i >= 1`` standing for ``T(i-1)``          1
psl2-f7-cutoff     row index 0..15 of the shipped matrix       4
star               0 (center), 1..N (leaves)                   0
jordan             ``i >= 0``                                  0
line-Z             any integer                                 0
young-lattice      partition as a weakly decreasing tuple      ``()``
=================  =========================================  ============
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .core import GrowthProblem, _explicit_problem, as_weight, problem_from_interchange
from .errors import InvalidKeyError, PresentationError

__all__ = [
    "FAMILIES",
    "sl2_clebsch_gordan",
    "build_family",
    "load_explicit",
    "psl2_f7_document",
    "normalize_family_name",
]

_ALIASES = {
    "fib": "fibonacci",
    "sl3": "sl3-vector",
    "gl2": "gl2-vector",
    "klein": "klein-four",
    "klein4": "klein-four",
    "sl2f2": "sl2-f2",
    "sl2-F2": "sl2-f2",
    "psl2-f7": "psl2-f7-cutoff",
    "psl2f7": "psl2-f7-cutoff",
    "line-z": "line-Z",
    "line": "line-Z",
    "z": "line-Z",
    "young": "young-lattice",
}


def normalize_family_name(name: str) -> str:
    """Canonical family tag for ``name`` (accepts a few short aliases)."""
    key = name.strip()
    if key in FAMILIES:
        return key
    if key in _ALIASES:
        return _ALIASES[key]
    low = key.lower()
    for tag in FAMILIES:
        if tag.lower() == low:
            return tag
    if low in _ALIASES:
        return _ALIASES[low]
    raise PresentationError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}")


def _int_param(value, name, minimum):
    if isinstance(value, bool):
        raise PresentationError(f"{name} must be an integer")
    try:
        f = Fraction(value) if not isinstance(value, float) else Fraction(repr(value))
    except (TypeError, ValueError):
        raise PresentationError(f"{name} must be an integer, got {value!r}") from None
    if f.denominator != 1:
        raise PresentationError(f"{name} must be an integer, got {value!r}")
    v = int(f)
    if v < minimum:
        raise PresentationError(f"{name} must be >= {minimum}, got {v}")
    return v


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


# ---------------------------------------------------------------------------
# SL2 in characteristic zero


def sl2_clebsch_gordan(lam: int, mu: int) -> list[int]:
    """Highest weights in ``L(lam) (x) L(mu)``, each with multiplicity one.

    >>> sl2_clebsch_gordan(3, 2)
    [1, 3, 5]
    """
    if lam < 0 or mu < 0:
        raise PresentationError("weights must be nonnegative")
    return list(range(abs(lam - mu), lam + mu + 1, 2))


def _sl2(weight=1):
    lam = _int_param(weight, "weight", 1)

    def validate(k):
        if not _is_int(k) or k < 0:
            raise InvalidKeyError(f"sl2 vertex must be an integer >= 0, got {k!r}")

    return GrowthProblem(
        lambda m: [(t, 1) for t in sl2_clebsch_gordan(lam, m)],
        0,
        name="sl2",
        params={"weight": lam},
        validate_key=validate,
        degree_bound=lambda m: min(lam, m) + 1,
        dimension=lambda m: m + 1,
        known_pfdim=float(lam + 1),
    )


# ---------------------------------------------------------------------------
# small finite examples


def _fibonacci():
    table = {0: [(1, 1)], 1: [(0, 1), (1, 1)]}

    def validate(k):
        if k not in (0, 1) or isinstance(k, bool):
            raise InvalidKeyError(f"fibonacci vertex must be 0 or 1, got {k!r}")

    return GrowthProblem(
        table.__getitem__,
        0,
        name="fibonacci",
        validate_key=validate,
        degree_bound=2,
        label=lambda k: "1" if k == 0 else "X",
        known_pfdim=(1 + math.sqrt(5)) / 2,
        finite=True,
    )


def _star(N=1):
    n = _int_param(N, "N", 1)

    def oracle(k):
        if k == 0:
            return [(i, 1) for i in range(1, n + 1)]
        return [(0, 1)]

    def validate(k):
        if not _is_int(k) or not 0 <= k <= n:
            raise InvalidKeyError(f"star vertex must be in [0, {n}], got {k!r}")

    return GrowthProblem(
        oracle,
        0,
        name="star",
        params={"N": n},
        validate_key=validate,
        degree_bound=lambda k: n if k == 0 else 1,
        known_pfdim=math.sqrt(n),
        finite=True,
    )


def _jordan(alpha=1):
    a = as_weight(alpha)

    def validate(k):
        if not _is_int(k) or k < 0:
            raise InvalidKeyError(f"jordan vertex must be an integer >= 0, got {k!r}")

    return GrowthProblem(
        lambda i: [(i, a), (i + 1, 1)],
        0,
        name="jordan",
        params={"alpha": a},
        validate_key=validate,
        degree_bound=2,
        known_pfdim=float(a),
    )


def _line():
    def validate(k):
        if not _is_int(k):
            raise InvalidKeyError(f"line-Z vertex must be an integer, got {k!r}")

    return GrowthProblem(
        lambda i: [(i - 1, 1), (i + 1, 1)],
        0,
        name="line-Z",
        validate_key=validate,
        degree_bound=2,
        dimension=lambda i: 1,
        known_pfdim=2.0,
    )


# ---------------------------------------------------------------------------
# SL3 and GL2 vector representations


def _sl3():
    # (a, b) is the partition (a, b, 0); adding to the third row completes a
    # column, which is stripped
    def oracle(key):
        a, b = key
        out = [((a + 1, b), 1)]
        if b < a:
            out.append(((a, b + 1), 1))
        if b > 0:
            out.append(((a - 1, b - 1), 1))
        return out

    def validate(k):
        if not (isinstance(k, tuple) and len(k) == 2 and all(_is_int(x) for x in k) and k[0] >= k[1] >= 0):
            raise InvalidKeyError(f"sl3 vertex must be a pair (a, b) with a >= b >= 0, got {k!r}")

    def dim(key):
        a, b = key
        # Weyl dimension with highest weight (a - b, b)
        return (a - b + 1) * (b + 1) * (a + 2) // 2

    return GrowthProblem(
        oracle,
        (0, 0),
        name="sl3-vector",
        validate_key=validate,
        degree_bound=3,
        dimension=dim,
        known_pfdim=3.0,
    )


def _gl2():
    def oracle(key):
        a, b = key
        out = [((a + 1, b), 1)]
        if a >= b + 1:
            out.append(((a, b + 1), 1))
        return out

    def validate(k):
        if not (isinstance(k, tuple) and len(k) == 2 and all(_is_int(x) for x in k) and k[0] >= k[1] >= 0):
            raise InvalidKeyError(f"gl2 vertex must be a pair (a, b) with a >= b >= 0, got {k!r}")

    return GrowthProblem(
        oracle,
        (0, 0),
        name="gl2-vector",
        validate_key=validate,
        degree_bound=2,
        known_pfdim=2.0,
    )


# ---------------------------------------------------------------------------
# Klein four group in characteristic two


def _klein_label(k):
    if k == 1:
        return "1"
    if k == 4:
        return "P_4"
    return f"I_{k}"


def _klein():
    def oracle(key):
        if key == 4:
            return [(4, 3)]
        if key == 1:
            return [(3, 1)]
        k = (key - 1) // 2
        return [(key + 2, 1), (4, k)]

    def validate(k):
        if not _is_int(k) or not (k == 4 or (k >= 1 and k % 2 == 1)):
            raise InvalidKeyError(f"klein-four vertex must be odd >= 1 or 4, got {k!r}")

    return GrowthProblem(
        oracle,
        1,
        name="klein-four",
        validate_key=validate,
        degree_bound=2,
        dimension=lambda k: k,
        label=_klein_label,
        known_pfdim=3.0,
    )


# ---------------------------------------------------------------------------
# SL2 in characteristic two, tilting modules


def _sl2_f2_out(i: int) -> list[tuple[int, int]]:
    # vertex i is the tilting module T(i-1), so i = 1 is the unit.
    # T(1) (x) T(m) = T(m+1) + 2 * sum_{j=1..v} T(m+1-2^j) with 2^v the exact
    # power of two dividing m+2; in vertex labels the targets are i+1 and
    # i+1-2^j >= 1
    s = i + 1
    out = [(s, 1)]
    v = (s & -s).bit_length() - 1
    for j in range(1, v + 1):
        t = s - (1 << j)
        if t >= 1:
            out.append((t, 2))
    return out


def _sl2_f2():
    def validate(k):
        if not _is_int(k) or k < 1:
            raise InvalidKeyError(f"sl2-f2 vertex must be an integer >= 1, got {k!r}")

    return GrowthProblem(
        _sl2_f2_out,
        1,
        name="sl2-f2",
        validate_key=validate,
        degree_bound=lambda i: 1 + max(0, ((i + 1) & -(i + 1)).bit_length() - 1),
        label=lambda i: f"T({i - 1})",
        known_pfdim=2.0,
    )


# ---------------------------------------------------------------------------
# PSL2(F7) in characteristic two, shipped cutoff


def psl2_f7_document() -> dict:
    """Interchange document of the shipped 16-vertex PSL2(F7) cutoff."""
    text = resources.files(__package__).joinpath("data/psl2_f7_cutoff.json").read_text(encoding="utf-8")
    return json.loads(text)


def _psl2_f7():
    doc = psl2_f7_document()
    gp = problem_from_interchange(doc)
    gp.name = "psl2-f7-cutoff"
    dims = doc["dimensions"]
    gp.dimension = lambda k: dims[k]
    return gp


# ---------------------------------------------------------------------------
# Young lattice


def _young():
    def oracle(p):
        out = []
        n = len(p)
        for i in range(n + 1):
            row = p[i] if i < n else 0
            if i == 0 or p[i - 1] > row:
                q = list(p)
                if i < n:
                    q[i] += 1
                else:
                    q.append(1)
                out.append((tuple(q), 1))
        for i in range(n):
            nxt = p[i + 1] if i + 1 < n else 0
            if p[i] > nxt:
                q = list(p)
                q[i] -= 1
                if q[i] == 0:
                    q.pop()
                out.append((tuple(q), 1))
        return out

    def validate(k):
        ok = isinstance(k, tuple) and all(_is_int(x) and x > 0 for x in k)
        if not ok or any(k[i] < k[i + 1] for i in range(len(k) - 1)):
            raise InvalidKeyError(f"young-lattice vertex must be a partition tuple, got {k!r}")

    def bound(p):
        # corners that can be removed plus cells that can be added
        corners = sum(1 for i in range(len(p)) if i + 1 == len(p) or p[i] > p[i + 1])
        return 2 * corners + 1

    return GrowthProblem(
        oracle,
        (),
        name="young-lattice",
        validate_key=validate,
        sort_key=lambda p: (sum(p), p),
        degree_bound=bound,
        label=lambda p: "(" + ",".join(map(str, p)) + ")" if p else "()",
        known_pfdim=math.inf,
    )


FAMILIES = {
    "fibonacci": _fibonacci,
    "sl2": _sl2,
    "sl3-vector": _sl3,
    "gl2-vector": _gl2,
    "klein-four": _klein,
    "sl2-f2": _sl2_f2,
    "psl2-f7-cutoff": _psl2_f7,
    "star": _star,
    "jordan": _jordan,
    "line-Z": _line,
    "young-lattice": _young,
}

# accepted parameter spellings per family
_PARAM_ALIASES = {
    "sl2": {"weight": "weight", "lambda": "weight", "lam": "weight", "lambda_weight": "weight",
            "lambda-weight": "weight", "l": "weight"},
    "star": {"N": "N", "n": "N"},
    "jordan": {"alpha": "alpha", "a": "alpha"},
}


def build_family(spec, **params) -> GrowthProblem:
    """Growth problem of a built-in family.

    Parameters
    ----------
    spec : str or dict
        Family tag, or ``{"name": tag, **params}``.  ``"explicit"`` requires
        ``matrix`` (or ``path``) and optionally ``unit``.
    **params
        Family parameters: ``weight`` for sl2 (``>= 1``), ``N`` for star
        (``>= 1``), ``alpha`` for jordan (rational ``>= 0``).

    Raises
    ------
    PresentationError
        Unknown family or invalid parameters.
    """
    if isinstance(spec, dict):
        params = {**{k: v for k, v in spec.items() if k != "name"}, **params}
        spec = spec.get("name")
        if spec is None:
            raise PresentationError("family spec lacks a name")
    vertex_cap = params.pop("vertex_cap", None)
    if str(spec).strip().lower() == "explicit":
        if "matrix" in params:
            gp = _explicit_problem(params["matrix"], params.get("unit", 0))
        elif "path" in params:
            gp = load_explicit(params["path"], params.get("unit"))
        else:
            raise PresentationError("explicit family needs 'matrix' or 'path'")
    else:
        name = normalize_family_name(str(spec))
        aliases = _PARAM_ALIASES.get(name, {})
        kwargs = {}
        for k, v in params.items():
            canon = aliases.get(k, aliases.get(k.lower()))
            if canon is None:
                raise PresentationError(f"family {name} has no parameter {k!r}")
            kwargs[canon] = v
        try:
            gp = FAMILIES[name](**kwargs)
        except TypeError as exc:
            raise PresentationError(str(exc)) from None
    if vertex_cap is not None:
        gp.vertex_cap = int(vertex_cap)
    return gp


def _parse_matrix_text(text: str):
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").replace(";", " ").split() if p]
        rows.append(parts)
    return rows


def load_explicit(path, unit: int | None = None) -> GrowthProblem:
    """Finite growth problem from a matrix file.

    Accepted formats are the JSON interchange document, a JSON list of rows,
    and plain text with one row per line (entries separated by whitespace
    or commas, rationals as ``p/q``).  Column ``j`` lists the out-edges of
    vertex ``j``.  ``unit`` overrides the unit stored in an interchange
    document and defaults to 0 otherwise.

    Raises
    ------
    PresentationError
        Unreadable file, parse failure, negative entry or bad unit.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise PresentationError(f"cannot read {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"invalid JSON in {path}: {exc}") from None
        if unit is not None:
            doc = {**doc, "unit": unit}
        return problem_from_interchange(doc)
    if stripped.startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"invalid JSON in {path}: {exc}") from None
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise PresentationError("JSON matrix must be a list of rows")
    else:
        rows = _parse_matrix_text(text)
    return _explicit_problem(rows, 0 if unit is None else unit)
