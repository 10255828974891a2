from __future__ import annotations

import json
import math

import mpmath as mp
import pytest

from tensorgrowth import (
    bn_sequence,
    build_family,
    evaluate_model,
    exhaust,
    expand_to_depth,
    fit_asymptotic_model,
    make_growth_problem,
    model_from_truncation,
    variance_report,
)
from tensorgrowth.asymptotics import AsymptoticModel
from tensorgrowth.errors import ImaginaryResidueError, NoFinalBasicClassError, NotStabilizedError

PHI = (1 + math.sqrt(5)) / 2


def test_fibonacci_model():
    m = fit_asymptotic_model(build_family("fibonacci"))
    assert m.h == 1 and abs(m.lam - PHI) < 1e-12
    assert abs(m.kappa[0] - PHI / math.sqrt(5)) < 1e-12
    assert abs(evaluate_model(m, 10) - 88.998) < 1e-3
    assert m.hp is not None


def test_klein_model():
    m = fit_asymptotic_model(build_family("klein-four"))
    assert abs(m.lam - 3) < 1e-12
    assert abs(m.kappa[0] - 0.25) < 1e-9
    assert abs(evaluate_model(m, 0) - 0.25) < 1e-9
    assert m.provenance["family"] == "klein-four"
    assert len(m.provenance["schedule"]) >= 2


def test_klein_kappa_stable_over_depths():
    gp = build_family("klein-four")
    errs = [abs(model_from_truncation(expand_to_depth(gp, k)).kappa[0] - 0.25) for k in (20, 50, 100, 200)]
    # the cutoff loses mass of order 3^-depth
    assert errs[0] < 1e-8
    assert all(e < 1e-12 for e in errs[1:])


@pytest.mark.parametrize("name", ["klein-four", "fibonacci", "psl2-f7-cutoff"])
def test_relative_error_small_at_60(name):
    gp = build_family(name)
    m = fit_asymptotic_model(gp)
    b = bn_sequence(gp, 60).terms[60]
    assert abs(b / evaluate_model(m, 60) - 1) < 0.05


def test_fibonacci_difference_against_binet():
    # b_n - a_n = -(phi - 1)^(n+1) / sqrt(5) * (-1)^(n+1), computed in mpmath
    gp = build_family("fibonacci")
    m = fit_asymptotic_model(gp)
    rep = variance_report(gp, m, 40)
    with mp.workdps(50):
        psi = (1 - mp.sqrt(5)) / 2
        for n, b, a, d, r in rep.rows:
            want = abs(-psi ** (n + 1) / mp.sqrt(5))
            assert abs(d - float(want)) <= 1e-12 * max(1.0, float(want)) + 1e-15


def test_variance_klein():
    gp = build_family("klein-four")
    m = fit_asymptotic_model(gp)
    rep = variance_report(gp, m, 25)
    # b_n - 3^n / 4 = 3/4 - n/2; a double-precision model resolves it while 3^n stays below ~1e12
    for n, b, a, d, r in rep.rows:
        assert abs(d - abs(0.75 - n / 2)) < 1e-3
    assert rep.reference_ratio is not None and rep.reference_ratio < 1e-9
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n,b_n,a_n,abs_diff,ratio" and len(lines) == 27


def test_variance_psl2_ratio():
    gp = build_family("psl2-f7-cutoff")
    m = fit_asymptotic_model(gp)
    rep = variance_report(gp, m, 120, fit_from=20)
    assert abs(rep.reference_ratio - math.sqrt(2) / 3) < 1e-9
    assert abs(rep.fitted_ratio - math.sqrt(2) / 3) < 0.15


@pytest.mark.parametrize(
    "name, kw, depth",
    [("sl2", {}, 20), ("sl2", {"weight": 2}, 20), ("sl3-vector", {}, 10), ("klein-four", {}, 30),
     ("psl2-f7-cutoff", {}, 20), ("star", {"N": 4}, 2)],
)
def test_model_values_are_real(name, kw, depth):
    m = model_from_truncation(expand_to_depth(build_family(name, **kw), depth))
    for n in range(0, 101):
        assert math.isfinite(evaluate_model(m, n))


def test_sl2_period_two_parity():
    m = model_from_truncation(expand_to_depth(build_family("sl2"), 20))
    assert m.h == 2
    # a(n) = (kappa_0 + (-1)^n kappa_1) lambda^n
    k0, k1 = m.kappa
    assert abs(evaluate_model(m, 1) - (k0 - k1).real * m.lam) < 1e-9
    assert abs(sum(m.kappa).real - evaluate_model(m, 0)) < 1e-12


def test_fit_refuses_transient():
    with pytest.raises(NoFinalBasicClassError):
        fit_asymptotic_model(build_family("sl2"))


def test_fit_not_stabilized():
    with pytest.raises(NotStabilizedError):
        fit_asymptotic_model(build_family("klein-four"), schedule=(5,), tol=1e-3)


def test_imaginary_residue_detected():
    m = AsymptoticModel(2.0, 2, [complex(0.5, 0), complex(0.5, 0.3)])
    with pytest.raises(ImaginaryResidueError):
        evaluate_model(m, 1)
    with pytest.raises(ValueError):
        evaluate_model(m, -1)


def test_json_round_trip():
    m = fit_asymptotic_model(build_family("psl2-f7-cutoff"))
    d = json.loads(m.to_json())
    assert set(d) == {"lambda", "h", "kappa", "provenance"}
    back = AsymptoticModel.from_dict(d)
    assert back.lam == m.lam and back.h == m.h and back.kappa == m.kappa
    for n in (0, 7, 30):
        assert evaluate_model(back, n) == evaluate_model(m, n)


def test_strongly_connected_explicit_matrix():
    gp = make_growth_problem([[1, 1], [1, 0]])
    m = fit_asymptotic_model(gp)
    assert m.provenance["vertices"] == exhaust(gp).size == 2
    assert abs(m.lam - PHI) < 1e-12
