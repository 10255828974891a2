from __future__ import annotations

import json
import threading
from fractions import Fraction

import numpy as np
import pytest

from tensorgrowth import (
    build_family,
    exhaust,
    expand_to_depth,
    filtration,
    make_growth_problem,
    out_edges,
    truncation_matrix,
)
from tensorgrowth.core import (
    GrowthProblem,
    RationalMatrix,
    as_weight,
    format_rational,
    problem_from_interchange,
    truncation_to_interchange,
)
from tensorgrowth.errors import (
    ExpansionCapError,
    GrowthError,
    InvalidKeyError,
    PresentationError,
    ScheduleError,
)

ALL_FAMILIES = [
    ("fibonacci", {}),
    ("sl2", {}),
    ("sl2", {"weight": 3}),
    ("sl3-vector", {}),
    ("gl2-vector", {}),
    ("klein-four", {}),
    ("sl2-f2", {}),
    ("psl2-f7-cutoff", {}),
    ("star", {"N": 6}),
    ("jordan", {"alpha": Fraction(2, 3)}),
    ("line-Z", {}),
    ("young-lattice", {}),
]


def _ids(params):
    name, kw = params
    return name + "".join(f"-{v}" for v in kw.values())


# -- scalars -----------------------------------------------------------------


@pytest.mark.parametrize(
    "raw, want",
    [(3, Fraction(3)), ("2/7", Fraction(2, 7)), (" 4 ", Fraction(4)), (0.5, Fraction(1, 2)),
     (Fraction(6, 4), Fraction(3, 2)), (np.int64(5), Fraction(5)), (0.1, Fraction(1, 10))],
)
def test_as_weight_parses_exact_rationals(raw, want):
    assert as_weight(raw) == want


@pytest.mark.parametrize("raw", [-1, "-1/2", "abc", True, None, float("nan"), "1/0", [1]])
def test_as_weight_rejects(raw):
    with pytest.raises(PresentationError):
        as_weight(raw)


def test_format_rational():
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(0) == "0"


# -- make_growth_problem -----------------------------------------------------


def test_fibonacci_presentation():
    gp = make_growth_problem("fibonacci")
    assert gp.expanded_depth == 0
    t = exhaust(gp)
    assert t.size == 2
    assert truncation_matrix(t).rows() == [[0, 1], [1, 1]]


def test_single_vertex_matrix():
    gp = make_growth_problem([[1]])
    assert [(e.target, e.weight) for e in out_edges(gp, 0)] == [(0, 1)]
    assert exhaust(gp).size == 1


def test_sl2_presentation_keys_are_nonnegative_integers():
    gp = make_growth_problem("sl2", weight=1)
    assert gp.unit == 0
    with pytest.raises(InvalidKeyError):
        out_edges(gp, -1)
    with pytest.raises(InvalidKeyError):
        out_edges(gp, "1")


def test_matrix_presentations_agree():
    rows = [[0, 1], [1, 1]]
    a = make_growth_problem(rows)
    b = make_growth_problem(np.array(rows))
    c = make_growth_problem(RationalMatrix(2, {(0, 1): Fraction(1), (1, 0): Fraction(1), (1, 1): Fraction(1)}))
    for gp in (a, b, c):
        assert truncation_matrix(exhaust(gp)).rows() == rows


@pytest.mark.parametrize(
    "bad",
    [[[0, -1], [1, 1]], [[1, 2, 3], [4, 5, 6]], [], [["x"]]],
)
def test_malformed_matrices(bad):
    with pytest.raises(PresentationError):
        make_growth_problem(bad)


def test_missing_or_bad_unit():
    with pytest.raises(PresentationError):
        make_growth_problem([[1, 0], [0, 1]], unit=2)
    with pytest.raises(PresentationError):
        make_growth_problem({"vertices": ["a"], "edges": []})


def test_unknown_family():
    with pytest.raises(PresentationError):
        make_growth_problem("e8-adjoint")


def test_existing_problem_passes_through():
    gp = build_family("sl2")
    assert make_growth_problem(gp) is gp


# -- out_edges ----------------------------------------------------------------


def test_out_edges_examples():
    sl2 = build_family("sl2", weight=1)
    assert [e.as_tuple() for e in out_edges(sl2, 0)] == [(1, 1)]
    assert [e.as_tuple() for e in out_edges(sl2, 3)] == [(2, 1), (4, 1)]
    star = build_family("star", N=3)
    assert [e.as_tuple() for e in out_edges(star, 0)] == [(1, 1), (2, 1), (3, 1)]


def test_out_edges_merges_and_drops_zero():
    gp = GrowthProblem(lambda k: [(k + 1, 1), (k + 1, "1/2"), (k + 2, 0)], 0)
    assert [e.as_tuple() for e in out_edges(gp, 0)] == [(1, Fraction(3, 2))]


def test_out_edges_weights_positive_everywhere():
    for name, kw in ALL_FAMILIES:
        gp = build_family(name, **kw)
        t = expand_to_depth(gp, 6)
        for v in t.vertices:
            assert all(e.weight > 0 for e in out_edges(gp, v)), name


@pytest.mark.parametrize("params", ALL_FAMILIES, ids=_ids)
def test_determinism(params):
    name, kw = params
    a, b = build_family(name, **kw), build_family(name, **kw)
    ta, tb = expand_to_depth(a, 8), expand_to_depth(b, 8)
    assert ta.vertices == tb.vertices
    for v in ta.vertices:
        assert out_edges(a, v) == out_edges(a, v) == out_edges(b, v)


def test_concurrent_readers_share_memo():
    gp = build_family("young-lattice")
    results = []

    def work():
        results.append(expand_to_depth(gp, 9).vertices)

    threads = [threading.Thread(target=work) for _ in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len(set(results)) == 1


# -- truncations ---------------------------------------------------------------


def test_expand_examples():
    assert expand_to_depth(build_family("sl2"), 3).vertices == (0, 1, 2, 3)
    k = expand_to_depth(build_family("klein-four"), 2)
    assert sorted(k.labels()) == sorted(["1", "I_3", "I_5", "P_4"])
    y = expand_to_depth(build_family("young-lattice"), 2)
    assert set(y.vertices) == {(), (1,), (2,), (1, 1)}
    assert expand_to_depth(build_family("sl2"), 0).vertices == (0,)
    with pytest.raises(ValueError):
        expand_to_depth(build_family("sl2"), -1)


def test_truncation_matrix_examples():
    M = truncation_matrix(expand_to_depth(build_family("sl2"), 6)).toarray()
    assert M.shape == (7, 7)
    assert np.array_equal(M, np.eye(7, k=1) + np.eye(7, k=-1))
    J = truncation_matrix(expand_to_depth(build_family("jordan", alpha="1/2"), 3)).rows()
    half = Fraction(1, 2)
    assert J == [[half, 0, 0, 0], [1, half, 0, 0], [0, 1, half, 0], [0, 0, 1, half]]


@pytest.mark.parametrize("params", ALL_FAMILIES, ids=_ids)
def test_nesting_connectivity_projection(params):
    name, kw = params
    gp = build_family(name, **kw)
    top = 12 if name == "young-lattice" else 30
    prev = set()
    for k in range(top + 1):
        t = expand_to_depth(gp, k)
        vs = set(t.vertices)
        assert prev <= vs
        prev = vs
    t = expand_to_depth(gp, top)
    pos = {v: i for i, v in enumerate(t.vertices)}
    # projection law: column j is out_edges(j) restricted to the cutoff
    M = truncation_matrix(t)
    for j, v in enumerate(t.vertices):
        want = {pos[e.target]: e.weight for e in out_edges(gp, v) if e.target in pos}
        assert M.column(j) == want
    # connectivity within depth: BFS inside the cutoff reaches everything
    dist = {0: 0}
    frontier = [0]
    while frontier:
        nxt = []
        for j in frontier:
            for i in M.column(j):
                if i not in dist:
                    dist[i] = dist[j] + 1
                    nxt.append(i)
        frontier = nxt
    assert len(dist) == t.size and max(dist.values()) <= top


@pytest.mark.parametrize("params", ALL_FAMILIES, ids=_ids)
def test_finite_degree_bound(params):
    name, kw = params
    gp = build_family(name, **kw)
    t = expand_to_depth(gp, 12 if name == "young-lattice" else 60)
    for v in t.vertices[:1000]:
        bound = gp.degree_bound(v)
        assert bound is not None
        assert len(out_edges(gp, v)) <= bound


def test_vertex_order_is_breadth_first_by_key():
    gp = build_family("young-lattice")
    t = expand_to_depth(gp, 4)
    depths = [gp.depth_of(v) for v in t.vertices]
    assert depths == sorted(depths)
    for d in range(5):
        layer = [v for v in t.vertices if gp.depth_of(v) == d]
        assert layer == sorted(layer, key=gp.sort_key)


# -- vertex cap ----------------------------------------------------------------


def test_vertex_cap_option():
    gp = build_family("young-lattice", vertex_cap=50)
    with pytest.raises(ExpansionCapError) as exc:
        expand_to_depth(gp, 12)
    assert exc.value.cap == 50 and exc.value.discovered > 50
    assert isinstance(exc.value, GrowthError)


def test_vertex_cap_environment(monkeypatch):
    monkeypatch.setenv("GROWTH_VERTEX_CAP", "20")
    gp = build_family("young-lattice")
    assert gp.vertex_cap == 20
    with pytest.raises(ExpansionCapError):
        expand_to_depth(gp, 10)
    monkeypatch.setenv("GROWTH_VERTEX_CAP", "lots")
    with pytest.raises(PresentationError):
        build_family("sl2")


def test_exhaust_rejects_infinite():
    with pytest.raises(PresentationError):
        exhaust(build_family("sl2"))


# -- filtrations ---------------------------------------------------------------


def test_naive_filtration_sl2_line_graphs():
    ts = list(filtration(build_family("sl2"), "naive", range(1, 8)))
    assert [t.size for t in ts] == list(range(2, 9))


def test_naive_filtration_stops_on_finite_graph():
    ts = list(filtration(build_family("star", N=4)))
    assert ts[-1].size == 5 and len(ts) <= 3


def test_klein_cutoffs_contain_projective():
    for t in filtration(build_family("klein-four"), "naive", range(2, 12)):
        assert "P_4" in t.labels()


def test_gl2_cutoffs_strictly_lower_triangular():
    for t in filtration(build_family("gl2-vector"), "naive", range(0, 15)):
        M = truncation_matrix(t).toarray()
        assert np.array_equal(M, np.tril(M, -1))


def test_explicit_schedule():
    gp = build_family("sl2")
    ts = list(filtration(gp, [[0], [0, 1], [0, 1, 2, 3]]))
    assert [t.vertices for t in ts] == [(0,), (0, 1), (0, 1, 2, 3)]
    assert ts[-1].depth is None


@pytest.mark.parametrize(
    "schedule",
    [[[1]], [[0], [1, 2]], [[0], [0, 1], [0, 2]], []],
)
def test_bad_schedules(schedule):
    with pytest.raises(ScheduleError):
        list(filtration(build_family("sl2"), schedule))


def test_bad_naive_depths():
    with pytest.raises(ScheduleError):
        list(filtration(build_family("sl2"), "naive", [3, 2]))
    with pytest.raises(ScheduleError):
        list(filtration(build_family("sl2"), "verlinde"))


def test_schedule_with_invalid_key():
    with pytest.raises(InvalidKeyError):
        list(filtration(build_family("sl2"), [[0], [0, -4]]))


# -- interchange ---------------------------------------------------------------


@pytest.mark.parametrize("params", [("klein-four", {}), ("jordan", {"alpha": "2/5"}), ("psl2-f7-cutoff", {})], ids=_ids)
def test_interchange_round_trip(params, tmp_path):
    name, kw = params
    gp = build_family(name, **kw)
    t = expand_to_depth(gp, 6)
    doc = truncation_to_interchange(t)
    text = json.dumps(doc)
    for src in (doc, text):
        back = problem_from_interchange(src)
        assert truncation_matrix(exhaust(back)).rows() == truncation_matrix(t).rows()
    p = tmp_path / "g.json"
    p.write_text(text)
    assert exhaust(problem_from_interchange(p)).labels() == t.labels()
    assert all(isinstance(w, str) for _, _, w in doc["edges"])


@pytest.mark.parametrize(
    "doc",
    [
        "{not json",
        {"vertices": [], "unit": 0, "edges": []},
        {"vertices": ["a"], "unit": 0, "edges": [[0, 1, "1"]]},
        {"vertices": ["a"], "unit": 0, "edges": [[0, 0, "-1"]]},
        {"vertices": ["a"], "unit": 0, "edges": [[0, 0]]},
        [1, 2],
    ],
)
def test_interchange_errors(doc):
    with pytest.raises(PresentationError):
        problem_from_interchange(doc)
