"""Dense two-phase primal simplex for small linear programs.

Problems are stated as maximisation with ``<=``, ``>=`` and ``=`` rows and
per-variable bounds.  The solver works on a full tableau; sizes here are a
handful of rows and a few dozen columns.

Pivoting
    Entering column: largest reduced-cost improvement, lowest index on ties.
    Leaving row: minimum ratio, lowest basic-variable index on ties.
    After ``STALL_LIMIT`` consecutive degenerate pivots the entering rule
    switches to Bland's (first improving index) until a non-degenerate pivot
    happens, which rules out cycling.

Certificates
    The final basis is re-solved against the original (scaled) matrix, so
    the reported primal and dual vectors do not carry tableau drift.  An
    ``optimal`` status is only returned when primal feasibility, dual
    feasibility and the duality gap all pass ``TAU_FEAS`` / ``TAU_GAP``;
    otherwise the status is ``failed``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TextIO

import numpy as np

from .errors import DimensionError

TAU_FEAS = 1e-9
TAU_GAP = 1e-8
PIVOT_TOL = 1e-11
STALL_LIMIT = 50

RELATIONS = ("<=", ">=", "=")

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "failed"


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[float, ...]
    relation: str
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x subject to constraints and bounds.

    ``lower`` defaults to 0 for every variable; ``None`` means unbounded below.
    ``upper`` entries of ``None`` mean no upper bound.
    """

    objective: tuple[float, ...]
    constraints: tuple[Constraint, ...]
    lower: tuple[float | None, ...] | None = None
    upper: tuple[float | None, ...] | None = None

    @classmethod
    def build(cls, objective, constraints=(), lower=None, upper=None) -> "LinearProgram":
        cons = tuple(
            c if isinstance(c, Constraint) else Constraint(tuple(float(v) for v in c[0]), c[1], float(c[2]))
            for c in constraints
        )
        return cls(
            objective=tuple(float(v) for v in objective),
            constraints=cons,
            lower=None if lower is None else tuple(None if v is None else float(v) for v in lower),
            upper=None if upper is None else tuple(None if v is None else float(v) for v in upper),
        )

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def validate(self):
        n = self.n_vars
        if n == 0:
            raise DimensionError("objective has no variables")
        if not np.all(np.isfinite(self.objective)):
            raise DimensionError("objective contains NaN or infinite coefficients")
        for i, c in enumerate(self.constraints):
            if len(c.coefficients) != n:
                raise DimensionError(f"constraint {i} has {len(c.coefficients)} coefficients, expected {n}")
            if c.relation not in RELATIONS:
                raise DimensionError(f"constraint {i} has unknown relation {c.relation!r}")
            if not np.all(np.isfinite(c.coefficients)) or not np.isfinite(c.rhs):
                raise DimensionError(f"constraint {i} contains NaN or infinite values")
        for name, b in (("lower", self.lower), ("upper", self.upper)):
            if b is not None and len(b) != n:
                raise DimensionError(f"{name} bounds have length {len(b)}, expected {n}")
            if b is not None and any(v is not None and not np.isfinite(v) for v in b):
                raise DimensionError(f"{name} bounds must be finite or None")


@dataclass
class LpSolution:
    status: str
    objective_value: float = float("nan")
    primal: np.ndarray = field(default_factory=lambda: np.empty(0))
    dual: np.ndarray = field(default_factory=lambda: np.empty(0))
    bound_dual: np.ndarray = field(default_factory=lambda: np.empty(0))
    dual_objective: float = float("nan")
    iterations: int = 0
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int], trace: TextIO | None):
        self.T = T
        self.basis = basis
        self.trace = trace
        self.iterations = 0

    def pivot(self, r: int, j: int):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        if self.trace is not None:
            self.trace.write(f"pivot {self.iterations}: leave x{self.basis[r]} enter x{j} (row {r})\n")
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int) -> str:
        """Optimise the objective row over columns flagged in ``allowed``."""
        T = self.T
        m = T.shape[0] - 1
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                return FAILED
            z = T[-1, :-1]
            scale = max(1.0, np.max(np.abs(z)))
            candidates = np.flatnonzero(allowed & (z < -TAU_FEAS * scale))
            if candidates.size == 0:
                return OPTIMAL
            if degenerate >= STALL_LIMIT:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmin(z[candidates])])  # argmin returns the lowest index on ties
            colj = T[:m, j]
            rows = np.flatnonzero(colj > PIVOT_TOL)
            if rows.size == 0:
                return UNBOUNDED
            ratios = T[rows, -1] / colj[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            if self.trace is not None:
                self.trace.write(f"  obj {T[-1, -1]:.12g} step {best:.6g}{' (bland)' if degenerate >= STALL_LIMIT else ''}\n")
            degenerate = degenerate + 1 if best <= PIVOT_TOL else 0
            self.pivot(r, j)


def solve(lp: LinearProgram, trace: TextIO | None = None) -> LpSolution:
    """Solve ``lp``; pass a text stream as ``trace`` to log every pivot."""
    lp.validate()
    n = lp.n_vars
    c = np.asarray(lp.objective, dtype=float)
    lower = [0.0] * n if lp.lower is None else list(lp.lower)
    upper = [None] * n if lp.upper is None else list(lp.upper)

    for lo, up in zip(lower, upper):
        if lo is not None and up is not None and up < lo:
            return LpSolution(INFEASIBLE, message="empty variable bounds")

    # structural columns: (original variable, sign); free variables are split
    cols: list[tuple[int, float]] = []
    for j in range(n):
        cols.append((j, 1.0))
        if lower[j] is None:
            cols.append((j, -1.0))
    shift = np.array([0.0 if lo is None else lo for lo in lower])
    P = np.zeros((n, len(cols)))  # x = shift + P @ x_struct
    for k, (j, s) in enumerate(cols):
        P[j, k] = s

    rows_A, rows_b, rows_rel, origin = [], [], [], []
    for i, con in enumerate(lp.constraints):
        a = np.asarray(con.coefficients, dtype=float)
        rows_A.append(a)
        rows_b.append(con.rhs)
        rows_rel.append(con.relation)
        origin.append(("con", i))
    for j, up in enumerate(upper):
        if up is not None:
            a = np.zeros(n)
            a[j] = 1.0
            rows_A.append(a)
            rows_b.append(up)
            rows_rel.append("<=")
            origin.append(("ub", j))

    m_all = len(rows_A)
    A0 = np.array(rows_A).reshape(m_all, n)
    b0 = np.array(rows_b, dtype=float)
    As = A0 @ P if m_all else np.zeros((0, len(cols)))
    bs = b0 - A0 @ shift if m_all else np.zeros(0)
    cs = c @ P
    const = float(c @ shift)

    # row equilibration and sign normalisation (rhs >= 0)
    keep, scale, sign, rel = [], [], [], []
    for i in range(m_all):
        amax = np.max(np.abs(As[i])) if As.shape[1] else 0.0
        if amax == 0.0:
            bi = bs[i]
            tol = TAU_FEAS * max(1.0, abs(b0[i]))
            violated = ((rows_rel[i] == "<=" and bi < -tol) or (rows_rel[i] == ">=" and bi > tol)
                        or (rows_rel[i] == "=" and abs(bi) > tol))
            if violated:
                return LpSolution(INFEASIBLE, message=f"constraint {i} has no coefficients and cannot hold")
            continue
        s = 1.0 / amax
        r = rows_rel[i]
        sg = 1.0
        if bs[i] * s < 0:
            sg = -1.0
            r = {"<=": ">=", ">=": "<=", "=": "="}[r]
        keep.append(i)
        scale.append(s)
        sign.append(sg)
        rel.append(r)

    m = len(keep)
    ns = len(cols)
    A = np.array([As[i] * scale[k] * sign[k] for k, i in enumerate(keep)]).reshape(m, ns)
    b = np.array([bs[i] * scale[k] * sign[k] for k, i in enumerate(keep)])

    n_slack = sum(1 for r in rel if r != "=")
    n_art = sum(1 for r in rel if r != "<=")
    N = ns + n_slack + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, :ns] = A
    T[:m, -1] = b
    basis = [-1] * m
    slack_col = ns
    art_col = ns + n_slack
    art_cols = []
    for i, r in enumerate(rel):
        if r == "<=":
            T[i, slack_col] = 1.0
            basis[i] = slack_col
            slack_col += 1
        elif r == ">=":
            T[i, slack_col] = -1.0
            slack_col += 1
        if r != "<=":
            T[i, art_col] = 1.0
            basis[i] = art_col
            art_cols.append(art_col)
            art_col += 1

    # full standard-form matrix for certificate recomputation
    A_std = T[:m, :N].copy()
    c_std = np.zeros(N)
    c_std[:ns] = cs

    tab = _Tableau(T, basis, trace)
    max_iter = 50 * (m + N) + 1000
    is_art = np.zeros(N, dtype=bool)
    is_art[art_cols] = True
    rows_alive = np.ones(m, dtype=bool)

    if art_cols:
        if trace is not None:
            trace.write("phase 1\n")
        # maximise -sum(artificials): z-row = -(sum of artificial rows) on non-artificial columns
        T[-1, :] = 0.0
        for i in range(m):
            if is_art[basis[i]]:
                T[-1, :] -= T[i, :]
        T[-1, art_cols] = 0.0
        status = tab.run(np.ones(N, dtype=bool), max_iter)
        if status == FAILED:
            return LpSolution(FAILED, iterations=tab.iterations, message="iteration limit in phase 1")
        infeas = -T[-1, -1]
        if infeas > TAU_FEAS * max(1.0, np.max(np.abs(b)) if m else 1.0):
            return LpSolution(INFEASIBLE, iterations=tab.iterations,
                              message=f"phase 1 residual {infeas:.3g}")
        # drive zero-level artificials out of the basis
        for i in range(m):
            if is_art[basis[i]]:
                cand = np.flatnonzero(~is_art & (np.abs(T[i, :N]) > PIVOT_TOL))
                if cand.size:
                    tab.pivot(i, int(cand[0]))
                else:
                    rows_alive[i] = False

    if trace is not None:
        trace.write("phase 2\n")
    # z_j - c_j row for the true objective over the current basis
    T[-1, :] = 0.0
    T[-1, :N] = -c_std
    for i in range(m):
        if rows_alive[i] and c_std[basis[i]] != 0.0:
            T[-1, :] += c_std[basis[i]] * T[i, :]
    dead = np.flatnonzero(~rows_alive)
    if dead.size:
        T[dead, :] = 0.0
        for i in dead:
            basis[i] = -1 - i  # placeholder, never selected by min-ratio (row is all zero)
    status = tab.run(~is_art, max_iter)
    if status == FAILED:
        return LpSolution(FAILED, iterations=tab.iterations, message="iteration limit in phase 2")
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=tab.iterations)

    # certificates from the final basis on the untouched matrix
    live = np.flatnonzero(rows_alive)
    bcols = [basis[i] for i in live]
    Bm = A_std[np.ix_(live, bcols)]
    try:
        xB = np.linalg.solve(Bm, b[live])
        y_live = np.linalg.solve(Bm.T, c_std[bcols])
    except np.linalg.LinAlgError:
        return LpSolution(FAILED, iterations=tab.iterations, message="singular final basis")
    x_std = np.zeros(N)
    x_std[bcols] = xB
    y = np.zeros(m)
    y[live] = y_live

    bscale = max(1.0, np.max(np.abs(b)) if m else 1.0)
    cscale = max(1.0, np.max(np.abs(c_std)))
    primal_res = np.max(np.abs(A_std @ x_std - b)) if m else 0.0
    neg = -min(0.0, x_std.min()) if N else 0.0
    reduced = c_std - A_std.T @ y if m else c_std
    dual_res = max(0.0, reduced[~is_art].max()) if N else 0.0
    primal_obj = float(c_std @ x_std) + const
    dual_obj = float(y @ b) + const
    gap = abs(primal_obj - dual_obj) / max(1.0, abs(primal_obj))
    if primal_res > TAU_FEAS * bscale or neg > TAU_FEAS * bscale or dual_res > TAU_FEAS * cscale or gap > TAU_GAP:
        return LpSolution(FAILED, iterations=tab.iterations,
                          message=(f"certificate check failed: primal {primal_res:.3g}, bound {neg:.3g}, "
                                   f"dual {dual_res:.3g}, gap {gap:.3g}"))
    x_std = np.maximum(x_std, 0.0)
    x = shift + P @ x_std[:ns]

    # map duals back to the unscaled, unflipped original rows
    y_rows = np.zeros(m_all)
    for k, i in enumerate(keep):
        y_rows[i] = y[k] * sign[k] * scale[k]
    dual = np.zeros(len(lp.constraints))
    bound_dual = np.zeros(n)
    for i, (kind, idx) in enumerate(origin):
        if kind == "con":
            dual[idx] = y_rows[i]
        else:
            bound_dual[idx] = y_rows[i]

    return LpSolution(
        status=OPTIMAL,
        objective_value=float(c @ x),
        primal=x,
        dual=dual,
        bound_dual=bound_dual,
        dual_objective=dual_obj,
        iterations=tab.iterations,
    )
