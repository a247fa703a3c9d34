"""Balanced-curtailment quadratic program and a dual active-set solver.

For one sampled system state the program minimizes

    sum_i  c_i^2 / (2 d_i) + c_i          over curtailments c and flows f

subject to flow bounds, 0 <= c_i <= d_i, and nodal balance
d_i - g_i <= net_import_i + c_i <= d_i.  The quadratic term is positive
definite in c; a tiny ridge on the flows makes the whole program strictly
convex so the minimizer is unique and the active-set method is stable.
Curtailments are insensitive to the ridge (checked against the grid
oracle in the tests).

The solver is the dual active-set scheme for strictly convex QPs: start
at the unconstrained minimum, repeatedly add the most violated
constraint, taking dual steps that drop blocking constraints along the
way.  Factorizations are recomputed per active-set change; problems here
have at most a few hundred variables so this costs nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

FLOW_RIDGE = 1e-8  # scaled by 1/max(demand); see module docstring


class QPError(RuntimeError):
    pass


@dataclass
class QPProblem:
    """Curtailment QP data; variable layout is [active curtailments, flows]."""

    demands: np.ndarray               # (n,) MW, >= 0
    gens: np.ndarray                  # (n,) MW available, >= 0
    edges: list[tuple[int, int]]      # (i, j) with i < j
    flow_lo: np.ndarray               # (E,) MW
    flow_hi: np.ndarray               # (E,) MW
    active_nodes: np.ndarray = field(init=False)   # nodes with d > 0
    quad_diag: np.ndarray = field(init=False)      # diagonal of the Hessian
    linear: np.ndarray = field(init=False)
    cons_matrix: np.ndarray = field(init=False)    # rows m_k: m_k . x >= rhs_k
    cons_rhs: np.ndarray = field(init=False)

    @property
    def n_nodes(self) -> int:
        return self.demands.size

    @property
    def n_vars(self) -> int:
        return self.active_nodes.size + len(self.edges)

    def to_dict(self) -> dict:
        return {
            "demands": self.demands.tolist(),
            "gens": self.gens.tolist(),
            "edges": [list(e) for e in self.edges],
            "flow_lo": self.flow_lo.tolist(),
            "flow_hi": self.flow_hi.tolist(),
        }


def build_curtailment_qp(demands, gens, edges, flow_lo=None, flow_hi=None) -> QPProblem:
    """Assemble the QP for one state.

    Zero-demand nodes get their curtailment variable eliminated (fixed to
    zero); their balance constraints remain.  Always feasible: c_i = d_i,
    f = 0 satisfies everything.
    """
    demands = np.asarray(demands, dtype=float)
    gens = np.asarray(gens, dtype=float)
    edges = [tuple(e) for e in edges]
    n, n_edges = demands.size, len(edges)
    flow_lo = np.zeros(0) if flow_lo is None else np.asarray(flow_lo, dtype=float)
    flow_hi = np.zeros(0) if flow_hi is None else np.asarray(flow_hi, dtype=float)
    if gens.size != n or flow_lo.size != n_edges or flow_hi.size != n_edges:
        raise QPError("inconsistent problem dimensions")
    if np.any(demands < 0) or np.any(gens < 0):
        raise QPError("demands and generation must be nonnegative")
    if np.any(flow_lo > flow_hi):
        raise QPError("flow lower bound exceeds upper bound")
    for i, j in edges:
        if not 0 <= i < j < n:
            raise QPError(f"edge ({i}, {j}) must satisfy 0 <= i < j < n_nodes")

    problem = QPProblem(demands, gens, edges, flow_lo, flow_hi)
    problem.active_nodes = np.flatnonzero(demands > 0)
    m = problem.active_nodes.size
    nv = m + n_edges

    scale = demands.max() if demands.max() > 0 else 1.0
    ridge = FLOW_RIDGE / scale
    problem.quad_diag = np.concatenate(
        [1.0 / demands[problem.active_nodes], np.full(n_edges, 2.0 * ridge)]
    )
    problem.linear = np.concatenate([np.ones(m), np.zeros(n_edges)])

    # node-by-edge incidence: +1 into the higher-indexed node, -1 out of the lower
    incidence = np.zeros((n, n_edges))
    for e, (i, j) in enumerate(edges):
        incidence[j, e] = 1.0
        incidence[i, e] = -1.0

    scatter = np.zeros((n, m))
    scatter[problem.active_nodes, np.arange(m)] = 1.0
    balance = np.hstack([scatter, incidence])  # (net import + c) per node

    eye_c = np.hstack([np.eye(m), np.zeros((m, n_edges))])
    eye_f = np.hstack([np.zeros((n_edges, m)), np.eye(n_edges)])
    problem.cons_matrix = np.vstack(
        [eye_c, -eye_c, eye_f, -eye_f, balance, -balance]
    )
    problem.cons_rhs = np.concatenate(
        [
            np.zeros(m),
            -demands[problem.active_nodes],
            flow_lo,
            -flow_hi,
            demands - gens,
            -demands,
        ]
    )
    return problem


@dataclass
class QPSolution:
    curtailment: np.ndarray     # (n,) MW, zero-demand nodes included
    flows: np.ndarray           # (E,) MW
    objective: float            # original objective, without the flow ridge
    status: str                 # "optimal" | "iteration_limit"
    iterations: int
    kkt_residual: float
    active_set: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "curtailment": self.curtailment.tolist(),
            "flows": self.flows.tolist(),
            "objective": self.objective,
            "status": self.status,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
        }


def _objective(problem: QPProblem, c_full: np.ndarray) -> float:
    act = problem.active_nodes
    d = problem.demands[act]
    c = c_full[act]
    return float(np.sum(c * c / (2.0 * d) + c))


def _kkt_residual(problem, x, lam) -> float:
    slack = problem.cons_matrix @ x - problem.cons_rhs
    if not slack.size:
        return 0.0
    stationarity = problem.quad_diag * x + problem.linear - problem.cons_matrix.T @ lam
    primal = max(0.0, float(-slack.min()))
    dual = max(0.0, float(-lam.min()))
    comp = float(np.max(np.abs(lam * slack)))
    stat = float(np.max(np.abs(stationarity))) if x.size else 0.0
    return max(primal, dual, comp, stat)


def _polish(problem, active):
    """Re-solve the equality KKT system on the final active set.

    The augmented solve is backward stable, so its KKT residuals stay at
    machine level even though the flow ridge makes the Hessian nearly
    singular (the incremental updates of the main loop lose ~1e-6 there).
    """
    nv = problem.n_vars
    g, q = problem.quad_diag, problem.linear
    if not active:
        return -q / g, np.zeros(problem.cons_rhs.size)
    N = problem.cons_matrix[active]
    m = len(active)
    K = np.zeros((nv + m, nv + m))
    K[:nv, :nv] = np.diag(g)
    K[:nv, nv:] = -N.T
    K[nv:, :nv] = N
    rhs = np.concatenate([-q, problem.cons_rhs[active]])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    lam = np.zeros(problem.cons_rhs.size)
    lam[active] = sol[nv:]
    return sol[:nv], lam


def _finish(problem, x, multipliers, active, status, iterations, tolerance):
    lam = np.zeros(problem.cons_rhs.size)
    for k, u in zip(active, multipliers):
        lam[k] = max(u, 0.0)
    x, lam, kkt = _best_iterate(problem, x, lam, active, status)

    m = problem.active_nodes.size
    c_full = np.zeros(problem.n_nodes)
    c_full[problem.active_nodes] = x[:m]
    return QPSolution(
        curtailment=c_full,
        flows=x[m:].copy(),
        objective=_objective(problem, c_full),
        status=status,
        iterations=iterations,
        kkt_residual=kkt,
        active_set=list(active),
    )


def _best_iterate(problem, x, lam, active, status):
    kkt = _kkt_residual(problem, x, lam)
    if status == "optimal" and problem.n_vars:
        x_p, lam_p = _polish(problem, active)
        kkt_p = _kkt_residual(problem, x_p, lam_p)
        if kkt_p < kkt:
            return x_p, lam_p, kkt_p
    return x, lam, kkt


def solve(
    problem: QPProblem,
    tolerance: float = 1e-7,
    warm_active=None,
    max_iterations: int | None = None,
) -> QPSolution:
    """Dual active-set solve; KKT residuals at `tolerance` (MW scale).

    ``warm_active`` seeds the active set, e.g. from the previous Monte
    Carlo state; invalid seeds are repaired by dropping negative-dual
    constraints before the main loop.
    """
    nv = problem.n_vars
    M, v = problem.cons_matrix, problem.cons_rhs
    g = problem.quad_diag
    q = problem.linear
    if nv == 0:
        return _finish(problem, np.zeros(0), [], [], "optimal", 0, tolerance)

    # all-surplus shortcut: x = 0 with the c >= 0 bounds active (unit
    # multipliers cancel the linear term) satisfies every KKT condition
    if np.all(problem.demands <= problem.gens):
        m = problem.active_nodes.size
        return _finish(problem, np.zeros(nv), [1.0] * m, list(range(m)),
                       "optimal", 0, tolerance)

    w = 1.0 / np.sqrt(g)                 # scaling G = D^2, work with y = D x
    Mw = M * w                           # rows of scaled normals
    q_t = q * w

    x = -q / g
    active: list[int] = []
    u: list[float] = []

    if max_iterations is None:
        max_iterations = 100 * (nv + 2) + 4 * v.size

    # repair a warm-started active set into a valid dual-feasible pair
    if warm_active:
        cand = [k for k in dict.fromkeys(warm_active) if 0 <= k < v.size][:nv]
        while cand:
            Nw = Mw[cand].T
            Q, R = np.linalg.qr(Nw, mode="reduced")
            if abs(np.diag(R)).min() < 1e-10 * max(1.0, abs(np.diag(R)).max()):
                cand.pop()
                continue
            x_eq, lam_full = _polish(problem, cand)
            lam = lam_full[cand]
            if np.all(lam >= -tolerance):
                x = x_eq
                active = list(cand)
                u = list(np.maximum(lam, 0.0))
                break
            cand.pop(int(np.argmin(lam)))

    iterations = 0
    guard = 0
    while True:
        iterations += 1
        if iterations > max_iterations:
            return _finish(problem, x, u, active, "iteration_limit",
                           iterations, tolerance)
        slack = M @ x - v
        for k in active:
            slack[k] = 0.0  # active constraints are tight by construction
        p = int(np.argmin(slack))
        if slack[p] >= -tolerance:
            return _finish(problem, x, u, active, "optimal", iterations, tolerance)

        n_t = Mw[p]
        s_p = slack[p]
        u_p = 0.0
        # inner loop: take partial (dual) steps until p can be added
        while True:
            guard += 1
            if guard > max_iterations * 4:
                return _finish(problem, x, u, active, "iteration_limit",
                               iterations, tolerance)
            if active:
                Q, R = np.linalg.qr(Mw[active].T, mode="reduced")
                proj = Q.T @ n_t
                z_t = n_t - Q @ proj
                r = solve_triangular(R, proj, lower=False)
            else:
                z_t = n_t
                r = np.zeros(0)
            z = z_t * w
            denom = float(n_t @ z_t)     # = |z_t|^2 >= 0

            t1 = np.inf
            drop = -1
            for idx, (uk, rk) in enumerate(zip(u, r)):
                if rk > 1e-12 and uk / rk < t1:
                    t1 = uk / rk
                    drop = idx
            t2 = -s_p / denom if denom > 1e-14 else np.inf
            t = min(t1, t2)
            if not np.isfinite(t):
                raise QPError("dual QP step unbounded; problem is infeasible")

            if t2 < np.inf:
                x = x + t * z
                s_p = s_p + t * denom
            u = [uk - t * rk for uk, rk in zip(u, r)]
            u_p += t

            if t == t2 and t2 <= t1:
                active.append(p)
                u.append(u_p)
                # re-derive the equality-constrained point: incremental
                # updates drift (steps along nearly-free flow directions
                # have huge |z|), which would leave active slacks of
                # ~1e-6 and later stall the dual steps
                x_eq, lam_full = _polish(problem, active)
                resolved = lam_full[active]
                if np.isfinite(x_eq).all() and np.all(resolved >= -tolerance):
                    x = x_eq
                    u = list(np.maximum(resolved, 0.0))
                break
            # partial step: drop the blocking constraint, keep pushing p
            del active[drop]
            del u[drop]


@dataclass
class OracleSolution:
    curtailment: np.ndarray
    flows: np.ndarray
    objective: float


def _grid(lo: float, hi: float, resolution: float) -> np.ndarray:
    pts = np.arange(lo, hi, resolution)
    return np.append(pts, hi)


def brute_force_oracle(problem: QPProblem, resolution: float) -> OracleSolution:
    """Exhaustive grid minimization; test support for tiny instances only.

    Flows are gridded at ``resolution``.  Given flows, the objective and
    the remaining constraints separate per node, so scanning each node's
    curtailment grid independently equals scanning the full product grid.
    Interval endpoints join the grid so every feasible box is sampled.
    """
    if problem.n_vars > 3:
        raise QPError(f"oracle limited to 3 variables, problem has {problem.n_vars}")
    n_edges = len(problem.edges)
    d, gens = problem.demands, problem.gens
    act = problem.active_nodes
    act_set = set(act.tolist())

    incidence = np.zeros((problem.n_nodes, n_edges))
    for e, (i, j) in enumerate(problem.edges):
        incidence[j, e] = 1.0
        incidence[i, e] = -1.0

    flow_grids = [
        _grid(problem.flow_lo[e], problem.flow_hi[e], resolution)
        for e in range(n_edges)
    ]
    if n_edges:
        mesh = np.meshgrid(*flow_grids, indexing="ij")
        flow_combos = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        flow_combos = np.zeros((1, 0))

    def node_cost(i, c):
        return c * c / (2.0 * d[i]) + c

    # grid values per node computed once; each flow combo scans a window
    c_grids = {i: _grid(0.0, d[i], resolution) for i in act}
    c_vals = {i: node_cost(i, c_grids[i]) for i in act}

    best = None
    for f in flow_combos:
        net = incidence @ f
        feasible = True
        c_full = np.zeros(problem.n_nodes)
        total = 0.0
        for i in range(problem.n_nodes):
            lo_c = max(0.0, d[i] - gens[i] - net[i])
            hi_c = min(d[i], d[i] - net[i])
            if lo_c > hi_c + 1e-9:
                feasible = False
                break
            if i not in act_set:
                if lo_c > 1e-9:  # c fixed at 0 but the balance needs more
                    feasible = False
                    break
                continue
            grid = c_grids[i]
            i0 = int(np.searchsorted(grid, lo_c, side="left"))
            i1 = int(np.searchsorted(grid, hi_c, side="right"))
            # interval endpoints always join the candidate set
            c_best, v_best = lo_c, node_cost(i, lo_c)
            v_hi = node_cost(i, hi_c)
            if v_hi < v_best:
                c_best, v_best = hi_c, v_hi
            if i1 > i0:
                k = i0 + int(np.argmin(c_vals[i][i0:i1]))
                if c_vals[i][k] < v_best:
                    c_best, v_best = grid[k], c_vals[i][k]
            c_full[i] = c_best
            total += v_best
        if not feasible:
            continue
        if best is None or total < best[0]:
            best = (total, c_full.copy(), f.copy())

    if best is None:
        raise QPError("no feasible grid point found")  # cannot happen: c=d, f=0
    return OracleSolution(curtailment=best[1], flows=best[2], objective=best[0])
