"""Subproblem solvers for the IDS policies.

``solve_p1`` minimizes the information ratio ``(pi.delta)^2 / (pi.v)`` over
the simplex; ``solve_constrained_lp`` minimizes ``pi.delta`` subject to
``pi.v >= c``. Both optima are attained on distributions supported on at
most two arms, so both solvers enumerate arm pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NoInformationError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
P1_TOL = 1e-10
FEAS_TOL = 1e-12
TIE_TOL = 1e-12
NEG_TOL = 1e-9


@dataclass(frozen=True)
class RatioProblem:
    """Expected regrets ``delta`` and aggregated information gains ``v``."""

    delta: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delta, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if d.shape != v.shape or d.ndim != 1:
            raise ValueError("delta and v must be vectors of equal length")
        if d.min() < -NEG_TOL or v.min() < -NEG_TOL:
            raise ValueError("delta and v must be non-negative")
        # regrets and gains computed on a grid can dip below zero by rounding
        object.__setattr__(self, "delta", np.maximum(d, 0.0))
        object.__setattr__(self, "v", np.maximum(v, 0.0))


def information_ratio(pi, delta, v) -> float:
    """``(pi.delta)^2 / (pi.v)``, with 0 for zero regret and inf for zero information."""
    num = float(np.dot(pi, delta))
    den = float(np.dot(pi, v))
    if num == 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    return num * num / den


def _pair_ratio(q, di, dj, vi, vj):
    num = q * di + (1.0 - q) * dj
    den = q * vi + (1.0 - q) * vj
    if num == 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    return num * num / den


def _golden_min(di, dj, vi, vj, tol=P1_TOL):
    """Minimize the convex pair ratio over the weight ``q`` on arm ``i``."""
    # ratio(q) = (dj + q*dd)^2 / (vj + q*dv), inlined for speed
    dd, dv = di - dj, vi - vj
    inf = math.inf
    lo, hi = 0.0, 1.0
    x1 = hi - GOLDEN
    x2 = GOLDEN
    n1, e1 = dj + x1 * dd, vj + x1 * dv
    f1 = 0.0 if n1 == 0.0 else (n1 * n1 / e1 if e1 > 0.0 else inf)
    n2, e2 = dj + x2 * dd, vj + x2 * dv
    f2 = 0.0 if n2 == 0.0 else (n2 * n2 / e2 if e2 > 0.0 else inf)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            n1, e1 = dj + x1 * dd, vj + x1 * dv
            f1 = 0.0 if n1 == 0.0 else (n1 * n1 / e1 if e1 > 0.0 else inf)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            n2, e2 = dj + x2 * dd, vj + x2 * dv
            f2 = 0.0 if n2 == 0.0 else (n2 * n2 / e2 if e2 > 0.0 else inf)
    q = 0.5 * (lo + hi)
    fq = _pair_ratio(q, di, dj, vi, vj)
    # the minimum may sit on an endpoint; report it exactly
    f0, f1 = _pair_ratio(0.0, di, dj, vi, vj), _pair_ratio(1.0, di, dj, vi, vj)
    if f1 <= fq and f1 <= f0:
        return 1.0, f1
    if f0 <= fq:
        return 0.0, f0
    return q, fq


def _better(obj, key, best_obj, best_key):
    """Candidate ordering: lower objective, then the smaller tie-break key."""
    if best_obj is None:
        return True
    if not math.isfinite(best_obj):
        return obj < best_obj or (obj == best_obj and key < best_key)
    tol = TIE_TOL * max(abs(obj), abs(best_obj))
    if obj < best_obj - tol:
        return True
    if obj <= best_obj + tol:
        return key < best_key
    return False


def _distribution(k, weights: dict) -> np.ndarray:
    pi = np.zeros(k)
    for i, w in weights.items():
        pi[i] = w
    return pi


def solve_p1(problem: RatioProblem):
    """Minimize the information ratio over the simplex.

    Returns ``(pi, objective)``. Every pure vertex with positive information
    (or zero regret) and every pair of arms is examined; pair weights are
    found by golden-section search to width 1e-10. Ties go to the lower
    objective, then the lexicographically smaller support, then the larger
    weight on the lower index.

    Raises NoInformationError when no distribution has a finite ratio.
    """
    d, v = problem.delta, problem.v
    k = len(d)
    dl, vl = d.tolist(), v.tolist()
    best_obj, best_key, best_w = None, None, None
    for i in range(k):
        if vl[i] > 0.0 or dl[i] == 0.0:
            obj = _pair_ratio(1.0, dl[i], 0.0, vl[i], 0.0)
            key = (i, i, -1.0)
            if _better(obj, key, best_obj, best_key):
                best_obj, best_key, best_w = obj, key, {i: 1.0}
    for i in range(k):
        for j in range(i + 1, k):
            vhi = max(vl[i], vl[j])
            if vhi <= 0.0:
                continue
            # no mixture of i and j can beat min(d)^2 / max(v)
            lower = min(dl[i], dl[j]) ** 2 / vhi
            if best_obj is not None and lower > best_obj * (1.0 + 1e-9) + 1e-300:
                continue
            q, obj = _golden_min(dl[i], dl[j], vl[i], vl[j])
            if q == 0.0 or q == 1.0:
                continue  # a vertex, already a candidate
            key = (i, j, -q)
            if _better(obj, key, best_obj, best_key):
                best_obj, best_key, best_w = obj, key, {i: q, j: 1.0 - q}
    if best_obj is None or not math.isfinite(best_obj):
        raise NoInformationError("every candidate has zero information gain and positive regret")
    return _distribution(k, best_w), best_obj


def solve_constrained_lp(delta, v, c):
    """Minimize ``pi.delta`` over the simplex subject to ``pi.v >= c``.

    Candidates are the feasible vertices plus, for every pair straddling the
    constraint, the mixture that makes it tight. Returns ``(pi, objective)``.
    Feasibility is judged up to ``FEAS_TOL * max(v)``, so the result does not
    depend on the overall scale of ``v``. Raises InfeasibleError if ``c``
    exceeds ``max(v)`` and NoInformationError if every arm has zero
    information.
    """
    d = np.asarray(delta, dtype=float)
    v = np.asarray(v, dtype=float)
    c = float(c)
    k = len(d)
    vmax = float(v.max())
    if vmax <= 0.0:
        raise NoInformationError("every arm has zero information gain")
    tol = FEAS_TOL * vmax
    if c > vmax + tol:
        raise InfeasibleError(f"constraint level {c!r} exceeds max information {vmax!r}")
    dl, vl = d.tolist(), v.tolist()
    best_obj, best_key, best_w = None, None, None
    for i in range(k):
        if vl[i] >= c - tol:
            key = (i, i, -1.0)
            if _better(dl[i], key, best_obj, best_key):
                best_obj, best_key, best_w = dl[i], key, {i: 1.0}
    for i in range(k):
        for j in range(i + 1, k):
            lo, hi = sorted((vl[i], vl[j]))
            if not lo < c < hi:
                continue
            lam_i = (vl[j] - c) / (vl[j] - vl[i])
            obj = lam_i * dl[i] + (1.0 - lam_i) * dl[j]
            key = (i, j, -lam_i)
            if _better(obj, key, best_obj, best_key):
                best_obj, best_key, best_w = obj, key, {i: lam_i, j: 1.0 - lam_i}
    return _distribution(k, best_w), best_obj
