"""Independent gamma* oracle for the dropout system and its path-dependent lifts.

Bisection on the same slack program as the C++ code, solved with cvxpy
(Clarabel, CVXOPT as fallback). The printed intervals are frozen into
tests/estimator_test.cpp.

    python3 tests/oracles/gamma_oracle.py 0 4
"""
import sys

import cvxpy as cp
import numpy as np

MODES = {
    1: np.array([[0.94, 0.56], [-0.35, 0.73]]),
    2: np.array([[0.94, 0.56], [0.14, 0.73]]),
    3: np.array([[0.94, 0.56], [-0.35, 0.46]]),
    4: np.array([[0.94, 0.56], [0.14, 0.46]]),
}
ALLOWED = {1: [1, 2, 3, 4], 2: [1, 3], 3: [1, 2], 4: [1]}
EDGES = [(v - 1, w - 1, w) for v in ALLOWED for w in ALLOWED[v]]
KAPPA = 1e3


def paths(length):
    out = [[e] for e in range(len(EDGES))]
    for _ in range(length - 1):
        out = [p + [e] for p in out for e in range(len(EDGES)) if EDGES[p[-1]][1] == EDGES[e][0]]
    return out


def path_dependent(m):
    if m == 0:
        return 4, EDGES
    nodes = {tuple(p): i for i, p in enumerate(paths(m))}
    edges = [(nodes[tuple(p[:-1])], nodes[tuple(p[1:])], EDGES[p[-1]][2]) for p in paths(m + 1)]
    return len(nodes), edges


def slack(num_nodes, edges, gamma):
    q = [cp.Variable((2, 2), symmetric=True) for _ in range(num_nodes)]
    t = cp.Variable()
    cons = [qv >> np.eye(2) for qv in q] + [qv << KAPPA * np.eye(2) for qv in q]
    for v, w, s in edges:
        a = MODES[s]
        cons.append(a.T @ q[w] @ a - gamma * gamma * q[v] << t * np.eye(2))
    prob = cp.Problem(cp.Minimize(t), cons)
    try:
        prob.solve(solver="CLARABEL")
    except cp.error.SolverError:
        prob.solve(solver="CVXOPT")
    return t.value


def gamma_star(num_nodes, edges, lo=0.9, hi=1.3, tol=1e-7):
    while hi - lo > tol:
        g = 0.5 * (lo + hi)
        if slack(num_nodes, edges, g) <= 1e-8:
            hi = g
        else:
            lo = g
    return lo, hi


if __name__ == "__main__":
    first, last = int(sys.argv[1]), int(sys.argv[2])
    for m in range(first, last + 1):
        n, e = path_dependent(m)
        lo, hi = gamma_star(n, e)
        print(f"M={m} nodes={n} edges={len(e)} gamma*=[{lo:.9f}, {hi:.9f}]", flush=True)
