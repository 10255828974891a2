"""Perron-Frobenius analysis of finite cutoffs.

Spectral quantities are computed class by class.  A nonnegative matrix is
block triangular with respect to its strongly connected components, so its
spectrum is the union of the spectra of the diagonal blocks.  Singleton
classes contribute their loop weight exactly, which keeps long nilpotent
chains (as in the Klein four and GL2 cutoffs) from polluting the spectrum
with the rounding halo of a defective eigenvalue.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .core import GrowthProblem, RationalMatrix, Truncation, expand_to_depth, filtration
from .errors import (
    AcyclicClassError,
    ConvergenceError,
    ExpansionCapError,
    NoFinalBasicClassError,
    NormalizationError,
    SizeCapError,
)

__all__ = [
    "DENSE_CAP",
    "SCCDecomposition",
    "SpectralSummary",
    "EigenData",
    "FiltrationEstimate",
    "scc_decomposition",
    "period",
    "pf_eigenvalue",
    "class_spectra",
    "classify_classes",
    "leading_eigendata",
    "subdominant_modulus",
    "pfdim_filtration",
    "track_final_basic",
]

DENSE_CAP = 1500
SHIFT = 1e-3
# blocks up to this size use repeated squaring of the shifted matrix
_SQUARING_CAP = 600
# accepted Collatz-Wielandt gap once squaring has reached rounding level
_STALL_TOL = 1e-10


def _csr(m) -> sp.csr_matrix:
    if isinstance(m, Truncation):
        return m.to_sparse()
    if isinstance(m, RationalMatrix):
        return m.tocsr()
    if sp.issparse(m):
        return sp.csr_matrix(m, dtype=float)
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    return sp.csr_matrix(a)


# ---------------------------------------------------------------------------
# strongly connected components


@dataclass(frozen=True)
class SCCDecomposition:
    """Strongly connected classes and their condensation DAG.

    ``labels[v]`` is the class id of vertex ``v``; classes are numbered by
    their smallest vertex index, so the unit's class is 0.  ``dag`` holds
    ``(a, b)`` when some edge leads from class ``a`` to class ``b``.
    """

    labels: np.ndarray
    classes: tuple
    dag: frozenset

    @property
    def count(self) -> int:
        return len(self.classes)

    def successors(self, a: int) -> list[int]:
        return sorted(b for (x, b) in self.dag if x == a)

    def downstream(self, a: int) -> set[int]:
        """Classes reachable from class ``a`` (excluding ``a``)."""
        succ: dict[int, list[int]] = {}
        for x, y in self.dag:
            succ.setdefault(x, []).append(y)
        seen: set[int] = set()
        stack = list(succ.get(a, ()))
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(succ.get(c, ()))
        return seen

    def upstream(self, a: int) -> set[int]:
        """Classes from which class ``a`` is reachable (excluding ``a``)."""
        pred: dict[int, list[int]] = {}
        for x, y in self.dag:
            pred.setdefault(y, []).append(x)
        seen: set[int] = set()
        stack = list(pred.get(a, ()))
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(pred.get(c, ()))
        return seen


def scc_decomposition(t) -> SCCDecomposition:
    """Strongly connected components of the fusion graph of ``t``."""
    M = _csr(t)
    n = M.shape[0]
    # graph edge j -> i for M[i, j] > 0
    G = M.T.tocsr()
    _, raw = connected_components(G, directed=True, connection="strong")
    first: dict[int, int] = {}
    for v, c in enumerate(raw):
        first.setdefault(int(c), v)
    order = sorted(first, key=first.get)
    renum = {c: k for k, c in enumerate(order)}
    labels = np.array([renum[int(c)] for c in raw], dtype=np.int64)
    members: list[list[int]] = [[] for _ in order]
    for v in range(n):
        members[labels[v]].append(v)
    coo = M.tocoo()
    dag = set()
    for i, j, w in zip(coo.row, coo.col, coo.data):
        if w > 0 and labels[i] != labels[j]:
            dag.add((int(labels[j]), int(labels[i])))
    return SCCDecomposition(labels, tuple(tuple(m) for m in members), frozenset(dag))


def period(t, class_id: int, scc: SCCDecomposition | None = None) -> int:
    """Period of a class: gcd of its closed-walk lengths.

    Computed from breadth-first levels on the directed class: the period is
    the gcd of ``level(u) + 1 - level(v)`` over edges ``u -> v`` inside it.

    Raises
    ------
    AcyclicClassError
        If the class carries no closed walk (a singleton without loop).
    """
    M = _csr(t)
    scc = scc or scc_decomposition(M)
    members = scc.classes[class_id]
    inside = set(members)
    csc = M.tocsc()
    out: dict[int, list[int]] = {}
    for j in members:
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        out[j] = [int(i) for i, w in zip(csc.indices[lo:hi], csc.data[lo:hi]) if w > 0 and i in inside]
    if not any(out[j] for j in members):
        raise AcyclicClassError(f"class {class_id} has no closed walk")
    level = {members[0]: 0}
    queue = [members[0]]
    for u in queue:
        for v in out[u]:
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u in members:
        for v in out[u]:
            g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g)


# ---------------------------------------------------------------------------
# Perron-Frobenius eigenvalue


def _power_block(B: sp.csr_matrix, tol: float, max_iter: int, shift: float) -> float:
    """Spectral radius of an irreducible block by shifted power iteration.

    Iterates on ``B + shift*I`` from the all-ones vector and stops when the
    Collatz-Wielandt bounds ``min (Ax)_i/x_i <= rho <= max (Ax)_i/x_i`` agree
    to relative ``tol``.  Small blocks advance the iterate by repeated
    squaring, which reaches ``A^(2^k) x`` in ``k`` products; all quantities
    are nonnegative so no cancellation occurs.
    """
    n = B.shape[0]
    scale = float(abs(B).max()) if B.nnz else 0.0
    if scale == 0.0:
        return 0.0
    # the iteration runs on B/scale so the shift is relative
    x = np.ones(n)
    used = 0
    if n <= _SQUARING_CAP:
        A = B.toarray() / scale + shift * np.eye(n)
        P = np.eye(n)
        gaps: list[float] = []
        while True:
            x = P @ np.ones(n)
            x /= x.max()
            r = (A @ x) / x
            lo, hi = r.min(), r.max()
            gap = hi - lo
            if gap <= tol * hi:
                return ((lo + hi) / 2 - shift) * scale
            gaps.append(gap)
            # computing A^m by squaring costs about m ulps of relative
            # accuracy; once the bracket stops shrinking it sits at that
            # floor, and it still encloses the spectral radius
            stalled = len(gaps) >= 3 and gaps[-1] > 0.5 * gaps[-3] and gap <= 1e-8 * hi
            if stalled and gap <= _STALL_TOL * hi:
                return ((lo + hi) / 2 - shift) * scale
            if stalled or used >= max_iter:
                break
            if used == 0:
                P = A.copy()
                used = 1
            else:
                P = P @ P
                used *= 2
            P /= P.max()
    # plain iteration corrects its own rounding errors
    A = (B / scale + shift * sp.identity(n, format="csr")).tocsr()
    for it in range(1, max_iter - min(used, max_iter) + 2):
        y = A @ x
        if it % 8 == 0:
            r = y / x
            lo, hi = r.min(), r.max()
            if hi - lo <= tol * hi:
                return ((lo + hi) / 2 - shift) * scale
        x = y / y.max()
    raise ConvergenceError(f"power iteration did not converge after {max_iter} steps")


def _block_pf(M: sp.csr_matrix, members: Sequence[int], method: str, tol: float, max_iter: int, shift: float) -> float:
    if len(members) == 1:
        v = members[0]
        return float(M[v, v])
    B = M[members][:, members]
    if method == "dense" or (method == "auto" and len(members) <= DENSE_CAP):
        ev = np.linalg.eigvals(B.toarray())
        return float(np.max(np.abs(ev)))
    return _power_block(B.tocsr(), tol, max_iter, shift)


def class_spectra(t, scc: SCCDecomposition | None = None, method: str = "power", tol: float = 1e-12,
                  max_iter: int = 10**6, shift: float = SHIFT) -> list[float]:
    """Per-class PF values (spectral radius of each diagonal block)."""
    M = _csr(t)
    scc = scc or scc_decomposition(M)
    return [_block_pf(M, list(c), method, tol, max_iter, shift) for c in scc.classes]


def pf_eigenvalue(matrix, tol: float = 1e-12, max_iter: int = 10**6, shift: float = SHIFT,
                  method: str = "power") -> float:
    """PF eigenvalue (spectral radius) of a nonnegative square matrix.

    Parameters
    ----------
    matrix : Truncation, RationalMatrix, array or sparse matrix
    tol : float
        Relative tolerance of the Collatz-Wielandt bracket.
    max_iter : int
        Iteration budget per irreducible block.
    shift : float
        Shift ``eps`` added to the (max-normalized) block, so periodic blocks
        still converge; it is subtracted again afterwards.
    method : {"power", "dense", "auto"}
        ``"dense"`` uses LAPACK eigenvalues per block, ``"auto"`` does so for
        blocks up to ``DENSE_CAP`` vertices.

    Raises
    ------
    ConvergenceError
        If a block does not converge within ``max_iter`` steps.
    """
    M = _csr(matrix)
    if M.shape[0] == 0:
        return 0.0
    if M.nnz and M.data.min() < 0:
        raise ValueError("matrix has negative entries")
    return max(class_spectra(M, None, method, tol, max_iter, shift))


# ---------------------------------------------------------------------------
# class classification


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral data of a finite cutoff.

    Attributes
    ----------
    lam : float
        PF eigenvalue ``lambda_k``.
    second_modulus : float
        Largest modulus after removing the ``h`` peripheral eigenvalues of
        the basic class (``nan`` when blocks exceed the dense cap).
    period : int
        Period of the final basic class (1 if acyclic or absent).
    scc : SCCDecomposition
    class_pf : tuple of float
    basic : tuple of bool
    final_basic : tuple of bool
    """

    lam: float
    second_modulus: float
    period: int
    scc: SCCDecomposition
    class_pf: tuple
    basic: tuple
    final_basic: tuple
    tol: float = 1e-9

    @property
    def labels(self):
        return self.scc.labels

    @property
    def basic_classes(self) -> list[int]:
        return [c for c, b in enumerate(self.basic) if b]

    @property
    def final_basic_classes(self) -> list[int]:
        return [c for c, b in enumerate(self.final_basic) if b]

    def fbc_vertices(self) -> list[tuple]:
        return [self.scc.classes[c] for c in self.final_basic_classes]


def _block_eigenvalues(M: sp.csr_matrix, members: Sequence[int]) -> np.ndarray:
    if len(members) == 1:
        v = members[0]
        return np.array([complex(M[v, v])])
    if len(members) > DENSE_CAP:
        raise SizeCapError(f"class of {len(members)} vertices exceeds dense cap {DENSE_CAP}")
    return np.linalg.eigvals(M[members][:, members].toarray())


def classify_classes(t, tol: float = 1e-9, method: str = "auto") -> SpectralSummary:
    """Classes, per-class PF values and (final) basic flags of a cutoff.

    A class is basic when its PF value is within ``tol * lambda`` of the
    maximum, and final basic when no condensation path leads from it to a
    different basic class.
    """
    M = _csr(t)
    scc = scc_decomposition(M)
    pfs = class_spectra(M, scc, method=method)
    lam = max(pfs) if pfs else 0.0
    slack = tol * lam
    basic = [p >= lam - slack for p in pfs]
    final = []
    for c, b in enumerate(basic):
        if not b:
            final.append(False)
            continue
        final.append(not any(basic[d] for d in scc.downstream(c)))
    fbcs = [c for c, f in enumerate(final) if f]
    h = 1
    if fbcs:
        try:
            h = period(M, fbcs[0], scc)
        except AcyclicClassError:
            h = 1
    try:
        sec = _second_modulus(M, scc, pfs, lam, fbcs, h)
    except SizeCapError:
        sec = float("nan")
    return SpectralSummary(lam, sec, h, scc, tuple(pfs), tuple(basic), tuple(final), tol)


def _second_modulus(M, scc, pfs, lam, fbcs, h) -> float:
    ev = []
    target = fbcs[0] if fbcs else int(np.argmax(pfs))
    for c, members in enumerate(scc.classes):
        vals = list(_block_eigenvalues(M, list(members)))
        if c == target and lam > 0:
            zeta = np.exp(2j * np.pi / h)
            for s in range(h):
                mu = lam * zeta**s
                k = int(np.argmin([abs(x - mu) for x in vals]))
                vals.pop(k)
        ev.extend(vals)
    if not ev:
        return 0.0
    return float(max(abs(x) for x in ev))


def subdominant_modulus(t) -> float:
    """Largest eigenvalue modulus after removing the peripheral ones.

    Raises
    ------
    SizeCapError
        If a class exceeds the dense cap.
    """
    M = _csr(t)
    scc = scc_decomposition(M)
    pfs = class_spectra(M, scc, method="auto")
    lam = max(pfs) if pfs else 0.0
    basic = [p >= lam * (1 - 1e-9) for p in pfs]
    fbcs = [c for c, b in enumerate(basic) if b and not any(basic[d] for d in scc.downstream(c))]
    h = 1
    if fbcs:
        try:
            h = period(M, fbcs[0], scc)
        except AcyclicClassError:
            h = 1
    return _second_modulus(M, scc, pfs, lam, fbcs, h)


# ---------------------------------------------------------------------------
# leading eigendata


@dataclass
class EigenData:
    """Normalized peripheral eigenpairs of a cutoff.

    ``right[s]`` and ``left[s]`` satisfy ``M v = mu_s v``,
    ``w^T M = mu_s w^T`` and ``w^T v = 1`` with ``mu_s = zeta^s lam``.
    """

    lam: float
    h: int
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residuals: np.ndarray
    basic_class: tuple
    hp: dict | None = field(default=None, repr=False)

    @property
    def zeta(self) -> complex:
        return complex(np.exp(2j * np.pi / self.h))

    def kappa(self, unit: int = 0) -> np.ndarray:
        """``kappa_s = w_s[unit] * sum(v_s)``."""
        return np.array([self.left[s][unit] * self.right[s].sum() for s in range(self.h)])


def _unique_basic(M, tol):
    scc = scc_decomposition(M)
    pfs = class_spectra(M, scc, method="auto")
    lam = max(pfs)
    basic = [c for c, p in enumerate(pfs) if p >= lam - tol * lam]
    if lam <= 0 or len(basic) != 1:
        raise NoFinalBasicClassError(
            f"leading eigendata needs a unique basic class with lambda > 0, found {len(basic)} (lambda={lam})"
        )
    return scc, pfs, lam, basic[0]


def leading_eigendata(t, h: int | None = None, tol: float = 1e-9, precision: int | None = None) -> EigenData:
    """Normalized left and right eigenvectors for ``zeta^s lam``.

    The basic class ``C`` is solved first (dense, or power iteration for
    aperiodic classes above the dense cap).  Right vectors are extended to
    the classes downstream of ``C`` and left vectors to the classes upstream
    by solving ``(mu - M_SS) x_S = M_SC x_C``, which is regular because
    ``mu`` is not an eigenvalue of the non-basic blocks.

    Parameters
    ----------
    h : int, optional
        Number of peripheral eigenvalues; defaults to the period of ``C``.
    precision : int, optional
        Decimal digits for an additional mpmath computation, stored in
        ``EigenData.hp``.  Only sensible for small cutoffs.

    Raises
    ------
    NoFinalBasicClassError
        If there is no unique basic class.
    NormalizationError
        If ``w^T v`` vanishes.
    SizeCapError
        If ``C`` exceeds the dense cap and ``h > 1``.
    """
    M = _csr(t)
    n = M.shape[0]
    scc, pfs, lam, c = _unique_basic(M, tol)
    C = list(scc.classes[c])
    if h is None:
        h = period(M, c, scc)
    down = sorted(v for d in scc.downstream(c) for v in scc.classes[d])
    up = sorted(v for d in scc.upstream(c) for v in scc.classes[d])
    zeta = np.exp(2j * np.pi / h)
    mus = np.array([lam * zeta**s for s in range(h)])
    Mc = M[C][:, C].toarray()
    if len(C) <= DENSE_CAP:
        ev, vl, vr = sla.eig(Mc, left=True, right=True)
        pairs = []
        for mu in mus:
            k = int(np.argmin(np.abs(ev - mu)))
            pairs.append((vr[:, k], np.conj(vl[:, k])))
    elif h == 1:
        vr = _power_vector(sp.csr_matrix(Mc))
        vl = _power_vector(sp.csr_matrix(Mc.T))
        pairs = [(vr, vl)]
    else:
        raise SizeCapError(f"basic class of {len(C)} vertices with period {h} exceeds dense cap")
    R = np.zeros((h, n), dtype=complex)
    L = np.zeros((h, n), dtype=complex)
    for s, (vc, wc) in enumerate(pairs):
        mu = mus[s]
        vc = vc / vc[np.argmax(np.abs(vc))]
        R[s, C] = vc
        if down:
            A = (mu * sp.identity(len(down), format="csc") - M[down][:, down]).tocsc()
            R[s, down] = _solve(A, M[down][:, C] @ vc)
        L[s, C] = wc
        if up:
            A = (mu * sp.identity(len(up), format="csc") - M[up][:, up].T).tocsc()
            L[s, up] = _solve(A, M[C][:, up].T @ wc)
        norm = L[s] @ R[s]
        if abs(norm) < 1e-14 * np.abs(L[s]).max() * np.abs(R[s]).max():
            raise NormalizationError("left and right eigenvectors are orthogonal")
        L[s] /= norm
    res = np.array([np.abs(M @ R[s] - mus[s] * R[s]).max() / max(np.abs(R[s]).max(), 1e-300) for s in range(h)])
    hp = None
    if precision:
        hp = _eigendata_mp(M, C, up, down, h, precision)
    return EigenData(lam, h, mus, R, L, res, tuple(C), hp)


def _solve(A, b):
    if A.shape[0] == 1:
        return np.array([b[0] / A[0, 0]])
    return np.atleast_1d(spsolve(A, b.astype(complex)))


def _power_vector(A: sp.csr_matrix, tol: float = 1e-13, max_iter: int = 10**6) -> np.ndarray:
    n = A.shape[0]
    A = (A / abs(A).max() + SHIFT * sp.identity(n, format="csr")).tocsr()
    x = np.ones(n)
    for _ in range(max_iter):
        y = A @ x
        y /= y.max()
        if np.abs(y - x).max() <= tol:
            return y
        x = y
    raise ConvergenceError("eigenvector iteration did not converge")


def _eigendata_mp(M, C, up, down, h, digits):
    import mpmath as mp

    Md = M.toarray()
    with mp.workdps(digits):
        def sub(rows, cols):
            return mp.matrix([[mp.mpf(Md[i, j]) for j in cols] for i in rows])

        Mc = sub(C, C)
        ev, vl, vr = mp.eig(Mc, left=True, right=True)
        lam = max(abs(e) for e in ev)
        zeta = mp.exp(2j * mp.pi / h)
        out = {"lam": lam, "mu": [], "right": [], "left": [], "digits": digits}
        n = Md.shape[0]
        for s in range(h):
            mu = lam * zeta**s
            k = min(range(len(ev)), key=lambda i: abs(ev[i] - mu))
            v = [mp.mpc(0)] * n
            w = [mp.mpc(0)] * n
            vc = [vr[i, k] for i in range(len(C))]
            big = max(vc, key=abs)
            vc = [x / big for x in vc]
            wc = [vl[k, i] for i in range(len(C))]
            for a, i in enumerate(C):
                v[i] = vc[a]
                w[i] = wc[a]
            if down:
                A = mu * mp.eye(len(down)) - sub(down, down)
                b = sub(down, C) * mp.matrix(vc)
                x = mp.lu_solve(A, b)
                for a, i in enumerate(down):
                    v[i] = x[a]
            if up:
                A = mu * mp.eye(len(up)) - sub(up, up).T
                b = sub(C, up).T * mp.matrix(wc)
                x = mp.lu_solve(A, b)
                for a, i in enumerate(up):
                    w[i] = x[a]
            norm = mp.fsum(w[i] * v[i] for i in range(n))
            w = [x / norm for x in w]
            out["mu"].append(mu)
            out["right"].append(v)
            out["left"].append(w)
        return out


# ---------------------------------------------------------------------------
# filtration limits


@dataclass
class FiltrationEstimate:
    """PF eigenvalues along a filtration and a convergence verdict.

    ``verdict`` is ``"finite"``, ``"infinite"`` or ``"undecided"``;
    ``value`` is the extrapolated limit for finite verdicts, ``last`` the
    final computed ``lambda_k``.
    """

    sequence: list
    verdict: str
    value: float | None
    tolerance: float
    window: int
    threshold: float
    notes: list = field(default_factory=list)

    @property
    def depths(self) -> list[int]:
        return [k for k, _ in self.sequence]

    @property
    def values(self) -> list[float]:
        return [x for _, x in self.sequence]

    @property
    def last(self) -> float | None:
        return self.sequence[-1][1] if self.sequence else None

    @property
    def tag(self) -> str:
        return "superexponential" if self.verdict == "infinite" else ("exponential" if self.verdict == "finite" else "unknown")

    def to_dict(self) -> dict:
        return {
            "sequence": [[k, x] for k, x in self.sequence],
            "verdict": self.verdict,
            "value": self.value,
            "growth": self.tag,
            "tolerance": self.tolerance,
            "window": self.window,
            "threshold": self.threshold,
            "notes": list(self.notes),
        }


def _decay_slope(ks, incs) -> float:
    """Least-squares slope of log(increment) against log(depth)."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.log(np.asarray(incs, dtype=float))
    if len(x) < 2 or np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def _verdict(seq, tol, window, threshold, exhausted):
    """Apply the finite / infinite rules to a (depth, lambda) sequence."""
    notes = []
    vals = [x for _, x in seq]
    if not vals:
        return "undecided", None, notes
    if max(vals) > threshold:
        notes.append(f"lambda_k exceeded divergence threshold {threshold}")
        return "infinite", None, notes
    if exhausted:
        notes.append("graph exhausted, cutoff equals the whole graph")
        return "finite", vals[-1], notes
    if len(seq) < window + 1:
        return "undecided", None, notes
    tail = seq[-(window + 1):]
    incs = [b[1] - a[1] for a, b in zip(tail, tail[1:])]
    ks = [b[0] for b in tail[1:]]
    if all(d < tol for d in incs):
        value = vals[-1]
        pos = [(k, d) for k, d in zip(ks, incs) if d > 0]
        if len(pos) >= 3:
            p = -_decay_slope([k for k, _ in pos], [d for _, d in pos])
            if p > 1.2:
                # tail of a power law c k^-p summed past the last depth
                k_last, d_last = pos[-1]
                c = d_last * k_last**p
                K = ks[-1]
                value = vals[-1] + c * K ** (1 - p) / (p - 1)
                notes.append(f"extrapolated with increments ~ k^-{p:.2f}")
        return "finite", value, notes
    if all(d > tol for d in incs):
        k_last = seq[-1][0]
        half = [x for k, x in seq if k <= k_last // 2]
        doubling = bool(half) and half[-1] > 0 and vals[-1] > 2 * half[-1]
        slope = _decay_slope(ks, incs)
        if doubling or slope > -1.0:
            notes.append(f"increments bounded below by tol, log-log decay slope {slope:.2f}")
            return "infinite", None, notes
    return "undecided", None, notes


def pfdim_filtration(gp, strategy="naive", depths: Iterable[int] | None = None, tol: float = 1e-3,
                     window: int = 5, threshold: float = 50.0, stop_early: bool = True,
                     max_depth: int = 40) -> FiltrationEstimate:
    """Limit of cutoff PF eigenvalues along a filtration.

    Parameters
    ----------
    gp : GrowthProblem
    strategy : "naive" or explicit schedule
    depths : iterable of int, optional
        Depth schedule for the naive strategy, default ``0..max_depth``.
    tol : float
        Increments below ``tol`` over the last ``window`` steps give a finite
        verdict.  Increments above ``tol`` that decay slower than ``1/k``
        (or double ``lambda`` between ``k/2`` and ``k``) give an infinite one.
    threshold : float
        ``lambda_k`` above this value is an infinite verdict outright.
    stop_early : bool
        Stop as soon as a verdict is infinite or the graph is exhausted.

    Notes
    -----
    Verdicts are evidence from finitely many cutoffs, not proofs.
    """
    if depths is None and isinstance(strategy, str):
        depths = range(0, max_depth + 1)
    seq: list[tuple[int, float]] = []
    notes: list[str] = []
    exhausted = False
    stream = filtration(gp, strategy, depths) if isinstance(strategy, str) else filtration(gp, strategy)
    try:
        for step, t in enumerate(stream):
            k = t.depth if t.depth is not None else step
            lam = pf_eigenvalue(t)
            if seq and lam < seq[-1][1] - 1e-12 * max(1.0, lam):
                notes.append(f"monotonicity violated at depth {k}")
            seq.append((k, lam))
            exhausted = gp.exhausted and t.size == gp.ensure_depth(gp.expanded_depth)
            if stop_early:
                v, _, _ = _verdict(seq, tol, window, threshold, exhausted)
                if v == "infinite" or exhausted:
                    break
    except ExpansionCapError as exc:
        notes.append(f"expansion cap hit: {exc}")
        return FiltrationEstimate(seq, "undecided", None, tol, window, threshold, notes)
    verdict, value, vnotes = _verdict(seq, tol, window, threshold, exhausted)
    return FiltrationEstimate(seq, verdict, value, tol, window, threshold, notes + vnotes)


def track_final_basic(gp: GrowthProblem, depths: Iterable[int], tol: float = 1e-9) -> dict:
    """Final basic classes of naive cutoffs at several depths.

    Returns a dict with ``per_depth`` (depth -> list of FBC key tuples) and
    ``stable`` (True when every depth has the same unique FBC).
    """
    per = {}
    for k in depths:
        t = expand_to_depth(gp, k)
        s = classify_classes(t, tol=tol)
        per[k] = [tuple(t.vertices[i] for i in cls) for cls in s.fbc_vertices()]
    sets = [tuple(sorted(map(frozenset, v), key=len)) for v in per.values()]
    stable = bool(sets) and all(len(s) == 1 for s in sets) and len(set(sets)) == 1
    return {"per_depth": per, "stable": stable}
