"""Dense two-phase primal simplex for LPs in the master's standard form:

    maximize c.x  subject to  A x <= b,  x >= 0

Returns primal values, objective, and one non-negative dual per row.
Dantzig pricing with a switch to Bland's rule after a degenerate streak, so
the solver always terminates.  Warm starts from a previous basis are
supported when columns were appended; correctness never depends on them.
"""

from dataclasses import dataclass

import numpy as np

EPS_FEAS = 1e-7   # primal feasibility tolerance
EPS_OPT = 1e-9    # reduced-cost optimality tolerance
EPS_DUAL = 1e-6   # strong-duality / complementary-slackness tolerance
_EPS_PIVOT = 1e-9
_MAX_ITER = 100_000


class SimplexError(RuntimeError):
    """Structural problem: dimension mismatch or a pivot-loop breakdown."""


@dataclass
class LinearProgram:
    """max c.x s.t. A x <= b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.A.ndim != 2:
            raise SimplexError("A must be a matrix")
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,):
            raise SimplexError(
                f"dimension mismatch: A is {m}x{n}, c has {self.c.shape}, b has {self.b.shape}")
        if not (np.isfinite(self.A).all() and np.isfinite(self.b).all()
                and np.isfinite(self.c).all()):
            raise SimplexError("coefficients must be finite")


@dataclass
class LpResult:
    status: str                     # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    basis: tuple[int, ...] | None = None  # stable encoding: j structural, -(i+1) slack i


def _encode_basis(basis: np.ndarray, n: int) -> tuple[int, ...]:
    return tuple(int(j) if j < n else -(int(j) - n + 1) for j in basis)


def _decode_basis(basis: tuple[int, ...], n: int) -> list[int]:
    return [j if j >= 0 else n + (-j - 1) for j in basis]


def _pivot_loop(T: np.ndarray, rhs: np.ndarray, r: np.ndarray, basis: np.ndarray,
                n_allowed: int, m: int) -> str:
    """Run primal pivots in place until optimal or unbounded.

    Only columns < n_allowed may enter (this keeps phase-1 artificials out of
    phase 2).  Starts with Dantzig pricing; after 2*(m + n_allowed) consecutive
    degenerate pivots switches to Bland's rule for guaranteed termination.
    """
    bland = False
    degenerate_streak = 0
    switch_at = 2 * (m + n_allowed)
    for _ in range(_MAX_ITER):
        cand = r[:n_allowed]
        if bland:
            improving = np.flatnonzero(cand > EPS_OPT)
            if improving.size == 0:
                return "optimal"
            e = int(improving[0])
        else:
            e = int(np.argmax(cand))
            if cand[e] <= EPS_OPT:
                return "optimal"
        col = T[:, e]
        pos = np.flatnonzero(col > _EPS_PIVOT)
        if pos.size == 0:
            return "unbounded"
        ratios = rhs[pos] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + _EPS_PIVOT]
        leave = int(ties[np.argmin(basis[ties])])
        piv = T[leave, e]
        T[leave] /= piv
        rhs[leave] /= piv
        theta = rhs[leave]
        other = col.copy()
        other[leave] = 0.0
        T -= np.outer(other, T[leave])
        rhs -= other * theta
        r -= r[e] * T[leave]
        basis[leave] = e
        np.maximum(rhs, 0.0, out=rhs)  # clip pivot noise; rhs stays >= 0
        if theta <= _EPS_PIVOT:
            degenerate_streak += 1
            if degenerate_streak > switch_at:
                bland = True
        else:
            degenerate_streak = 0
    raise SimplexError("pivot limit exceeded")


def _phase2(A: np.ndarray, b: np.ndarray, c: np.ndarray,
            basis: list[int]) -> LpResult | None:
    """Phase 2 from a (claimed feasible) basis over [A | I].  None if the basis
    is unusable, so the caller can fall back to a cold start."""
    m, n = A.shape
    D = np.hstack([A, np.eye(m)])
    B = D[:, basis]
    try:
        T = np.linalg.solve(B, D)
        rhs = np.linalg.solve(B, b)
    except np.linalg.LinAlgError:
        return None
    if (rhs < -EPS_FEAS).any():
        return None
    np.maximum(rhs, 0.0, out=rhs)
    cc = np.concatenate([c, np.zeros(m)])
    basis_arr = np.array(basis, dtype=np.int64)
    r = cc - cc[basis_arr] @ T
    status = _pivot_loop(T, rhs, r, basis_arr, n_allowed=n + m, m=m)
    if status == "unbounded":
        return LpResult(status="unbounded")
    x = np.zeros(n + m)
    x[basis_arr] = rhs
    duals = -r[n:n + m]
    np.maximum(duals, 0.0, out=duals)
    obj = float(c @ x[:n])
    return LpResult(status="optimal", x=x[:n], objective=obj, duals=duals,
                    basis=_encode_basis(basis_arr, n))


def _phase1_basis(A: np.ndarray, b: np.ndarray) -> list[int] | None:
    """Feasible basis over [A | I] via artificial variables, or None if the LP
    is infeasible."""
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    Af = A * sign[:, None]
    Sf = np.diag(sign)
    neg_rows = np.flatnonzero(b < 0)
    k = neg_rows.size
    E = np.zeros((m, k))
    for t, i in enumerate(neg_rows):
        E[i, t] = 1.0
    T = np.hstack([Af, Sf, E])
    rhs = b * sign
    cc = np.zeros(n + m + k)
    cc[n + m:] = -1.0
    basis = np.empty(m, dtype=np.int64)
    art_of_row = {}
    for i in range(m):
        basis[i] = n + i
    for t, i in enumerate(neg_rows):
        basis[i] = n + m + t
        art_of_row[n + m + t] = i
    r = cc - cc[basis] @ T
    status = _pivot_loop(T, rhs, r, basis, n_allowed=n + m + k, m=m)
    if status != "optimal":
        raise SimplexError("phase 1 cannot be unbounded")
    residual = float(rhs[basis >= n + m].sum())
    if residual > EPS_FEAS:
        return None
    out = []
    for i in range(m):
        j = int(basis[i])
        if j >= n + m:
            # artificial stuck at zero: its column is the (sign-flipped) slack
            # of its origin row, so that slack keeps the basis invertible
            j = n + art_of_row[j]
        out.append(j)
    return out


def solve_lp(lp: LinearProgram, basis: tuple[int, ...] | None = None) -> LpResult:
    """Solve the LP; optionally warm-start phase 2 from a previous basis.

    The returned basis uses a stable encoding (slack i is -(i+1)) that stays
    valid when structural columns are appended later.
    """
    m, n = lp.A.shape
    if n == 0:
        if (lp.b < -EPS_FEAS).any():
            return LpResult(status="infeasible")
        return LpResult(status="optimal", x=np.zeros(0), objective=0.0,
                        duals=np.zeros(m), basis=_encode_basis(np.arange(m), 0))
    if m == 0:
        if (lp.c > EPS_OPT).any():
            return LpResult(status="unbounded")
        return LpResult(status="optimal", x=np.zeros(n), objective=0.0,
                        duals=np.zeros(0), basis=())

    if basis is not None and len(basis) == m:
        warm = _phase2(lp.A, lp.b, lp.c, _decode_basis(basis, n))
        if warm is not None:
            return warm

    if (lp.b >= 0).all():
        feasible = list(range(n, n + m))  # slack basis
    else:
        feasible = _phase1_basis(lp.A, lp.b)
        if feasible is None:
            return LpResult(status="infeasible")
    result = _phase2(lp.A, lp.b, lp.c, feasible)
    if result is None:
        raise SimplexError("phase-1 basis was rejected by phase 2")
    return result
