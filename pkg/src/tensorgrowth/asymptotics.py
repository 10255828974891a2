"""Asymptotic model ``a(n) = (sum_s kappa_s zeta^(sn)) lambda^n`` and its error.

``kappa_s`` is the first-column sum of the rank one projector
``v_s w_s^T`` onto the eigenvalue ``zeta^s lambda``, that is
``w_s[unit] * sum(v_s)``, computed on a finite cutoff.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import GrowthProblem, Truncation, exhaust, expand_to_depth, format_rational
from .errors import ImaginaryResidueError, NoFinalBasicClassError, NotStabilizedError
from .series import _finite_fbc, bn_sequence
from .spectral import leading_eigendata, subdominant_modulus

__all__ = [
    "AsymptoticModel",
    "VarianceReport",
    "model_from_truncation",
    "fit_asymptotic_model",
    "evaluate_model",
    "variance_report",
]

# cutoffs up to this size also get a high-precision (mpmath) model
_HP_SIZE = 40
_HP_DIGITS = 50


@dataclass
class AsymptoticModel:
    """Coefficients of ``a(n)``; ``hp`` optionally holds mpmath values."""

    lam: float
    h: int
    kappa: list
    provenance: dict = field(default_factory=dict)
    second_modulus: float | None = None
    hp: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "h": self.h,
            "kappa": [[float(np.real(k)), float(np.imag(k))] for k in self.kappa],
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "AsymptoticModel":
        return cls(float(d["lambda"]), int(d["h"]), [complex(re, im) for re, im in d["kappa"]],
                   dict(d.get("provenance", {})))


def model_from_truncation(t: Truncation, h: int | None = None, precision: int | str | None = "auto") -> AsymptoticModel:
    """Model ``a_k(n)`` of a single cutoff from its leading eigendata."""
    if precision == "auto":
        precision = _HP_DIGITS if t.size <= _HP_SIZE else None
    ed = leading_eigendata(t, h=h, precision=precision)
    kappa = [complex(k) for k in ed.kappa(0)]
    try:
        sec = subdominant_modulus(t)
    except Exception:  # size cap, keep the model usable
        sec = None
    hp = None
    if ed.hp is not None:
        import mpmath as mp

        with mp.workdps(ed.hp["digits"]):
            hk = [ed.hp["left"][s][0] * mp.fsum(ed.hp["right"][s]) for s in range(ed.h)]
        hp = {"lam": ed.hp["lam"], "kappa": hk, "digits": ed.hp["digits"]}
    prov = {
        "depth": t.depth,
        "vertices": t.size,
        "basic_class_size": len(ed.basic_class),
        "max_residual": float(np.max(ed.residuals)),
    }
    return AsymptoticModel(ed.lam, ed.h, kappa, prov, sec, hp)


def fit_asymptotic_model(gp: GrowthProblem, schedule=None, tol: float = 1e-3,
                         precision: int | str | None = "auto") -> AsymptoticModel:
    """Stabilized model of a positively recurrent problem.

    Finite problems are exhausted and solved once.  Infinite problems need
    a finite final basic class (detected as for the recurrence verdict);
    ``kappa`` is then computed on the cutoffs of ``schedule`` (default
    ``25, 50, 100, 200``) until two successive depths agree within ``tol``.

    Raises
    ------
    NoFinalBasicClassError
        If no unique finite final basic class is detected.
    NotStabilizedError
        If the coefficients do not settle along the schedule.
    """
    fbc, lam_c = _finite_fbc(gp, None, 1e-9)
    if fbc is None:
        raise NoFinalBasicClassError(
            f"{gp.name}: no unique finite final basic class detected; the model needs a positively recurrent problem"
        )
    if gp.is_finite:
        t = exhaust(gp)
        m = model_from_truncation(t, precision=precision)
        m.provenance.update({"family": gp.name, "schedule": [t.depth], "deltas": []})
        return m
    schedule = list(schedule or (25, 50, 100, 200))
    prev = None
    deltas = []
    used = []
    for k in schedule:
        m = model_from_truncation(expand_to_depth(gp, k), precision=precision)
        used.append(k)
        if prev is not None:
            d = max(abs(a - b) for a, b in zip(m.kappa, prev.kappa)) if m.h == prev.h else math.inf
            deltas.append(d)
            if d < tol:
                m.provenance.update({"family": gp.name, "schedule": used, "deltas": deltas})
                return m
        prev = m
    raise NotStabilizedError(f"kappa did not stabilize within tol {tol} along depths {schedule}: deltas {deltas}")


def _oscillation(m: AsymptoticModel, n: int) -> complex:
    z = np.exp(2j * np.pi / m.h)
    return sum(k * z ** (s * n) for s, k in enumerate(m.kappa))


def evaluate_model(m: AsymptoticModel, n: int) -> float:
    """Real value of ``a(n)``.

    Raises
    ------
    ImaginaryResidueError
        If the imaginary part exceeds ``1e-9 |a(n)|``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    osc = _oscillation(m, n)
    scale = abs(osc) if abs(osc) > 0 else sum(abs(k) for k in m.kappa)
    if abs(osc.imag) > 1e-9 * max(abs(osc.real), 1e-12 * scale):
        raise ImaginaryResidueError(f"a({n}) has imaginary part {osc.imag:.3e} against real part {osc.real:.3e}")
    return float(osc.real) * m.lam**n


def _model_difference(m: AsymptoticModel, b: int, n: int):
    """``(a_n, b_n - a_n)``, in high precision when the model has it."""
    if m.hp is None:
        a = evaluate_model(m, n)
        return a, float(Fraction(b) - Fraction(a))
    import mpmath as mp

    with mp.workdps(m.hp["digits"]):
        z = mp.exp(2j * mp.pi / m.h)
        osc = mp.fsum(k * z ** (s * n) for s, k in enumerate(m.hp["kappa"]))
        a = mp.re(osc) * m.hp["lam"] ** n
        return float(a), float(mp.mpf(b) - a)


@dataclass
class VarianceReport:
    """Exact ``b_n`` against ``a(n)``.

    ``rows`` holds ``(n, b_n, a_n, |b_n - a_n|, b_n / a_n)``.
    ``fitted_ratio`` is ``exp`` of the least-squares slope of
    ``log|b_n / a_n - 1|``; ``reference_ratio`` is ``|lambda_sec / lambda|``.
    ``difference_slope`` is the slope of ``log|b_n - a_n|`` per step, which
    tends to 0 when the difference is polynomially bounded.
    """

    rows: list
    fitted_ratio: float | None
    reference_ratio: float | None
    difference_slope: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "b_n", "a_n", "abs_diff", "ratio"])
        for n, b, a, d, r in self.rows:
            w.writerow([n, format_rational(b), repr(a), repr(d), repr(r)])
        return buf.getvalue()


def _slope(xs, ys):
    if len(xs) < 2:
        return None
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def variance_report(gp: GrowthProblem, m: AsymptoticModel, N: int, fit_from: int = 0) -> VarianceReport:
    """Table of ``b_n`` and ``a_n`` for ``n <= N`` with geometric fits."""
    bs = bn_sequence(gp, N).terms
    rows = []
    fx, fy, dx, dy = [], [], [], []
    for n, b in enumerate(bs):
        a, diff = _model_difference(m, b, n)
        ratio = float(Fraction(b) / Fraction(a)) if a else math.nan
        rows.append((n, b, a, abs(diff), ratio))
        if n >= fit_from and diff != 0 and a:
            rel = abs(diff / a)
            if rel > 0:
                fx.append(n)
                fy.append(math.log(rel))
            dx.append(n)
            dy.append(math.log(abs(diff)))
    s = _slope(fx, fy)
    ds = _slope(dx, dy)
    ref = None
    if m.second_modulus is not None and m.lam > 0:
        ref = m.second_modulus / m.lam
    return VarianceReport(rows, None if s is None else math.exp(s), ref, ds)
