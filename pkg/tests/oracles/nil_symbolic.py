"""Symbolic curvature of the Heisenberg (Nil) metric dx^2 + dy^2 + (dz - x dy)^2.

Run once by hand; the printed numbers are frozen into tests/test_metric_chart.py.
Convention: R_{lkij} = <R(d_i, d_j) d_k, d_l>, R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
"""
import itertools

import sympy as sp

x, y, z = X = sp.symbols("x y z", real=True)
g = sp.Matrix([[1, 0, 0], [0, 1 + x**2, -x], [0, -x, 1]])
ginv = sp.simplify(g.inv())
n = 3

Gam = [[[sp.simplify(sum(ginv[k, l] * (sp.diff(g[l, i], X[j]) + sp.diff(g[l, j], X[i])
                                        - sp.diff(g[i, j], X[l])) for l in range(n)) / 2)
         for j in range(n)] for i in range(n)] for k in range(n)]


def riem_up(l, k, i, j):
    expr = sp.diff(Gam[l][j][k], X[i]) - sp.diff(Gam[l][i][k], X[j])
    expr += sum(Gam[l][i][m] * Gam[m][j][k] - Gam[l][j][m] * Gam[m][i][k] for m in range(n))
    return sp.simplify(expr)


Rup = {(l, k, i, j): riem_up(l, k, i, j) for l, k, i, j in itertools.product(range(n), repeat=4)}
R = {(l, k, i, j): sp.simplify(sum(g[l, p] * Rup[(p, k, i, j)] for p in range(n)))
     for l, k, i, j in itertools.product(range(n), repeat=4)}
Ric = sp.Matrix(n, n, lambda b, c: sp.simplify(sum(Rup[(a, c, a, b)] for a in range(n))))
# Ric(Y,Z) = trace of W -> R(W, Y) Z, i.e. R^a_{c a b}
scal = sp.simplify(sum(ginv[i, j] * Ric[i, j] for i in range(n) for j in range(n)))


def cov_ric(a, b, c):
    expr = sp.diff(Ric[b, c], X[a])
    expr -= sum(Gam[d][a][b] * Ric[d, c] + Gam[d][a][c] * Ric[b, d] for d in range(n))
    return sp.simplify(expr)


nablaRic = {(a, b, c): cov_ric(a, b, c) for a, b, c in itertools.product(range(n), repeat=3)}

# left-invariant orthonormal frame E1 = d_x, E2 = d_y + x d_z, E3 = d_z
E = sp.Matrix([[1, 0, 0], [0, 1, 0], [0, x, 1]])  # columns
Ric_f = sp.simplify(E.T * Ric * E)
nab_f = {}
for a, b, c in itertools.product(range(n), repeat=3):
    nab_f[(a, b, c)] = sp.simplify(sum(E[p, a] * E[q, b] * E[r, c] * nablaRic[(p, q, r)]
                                       for p in range(n) for q in range(n) for r in range(n)))


def sec(i, j):
    return sp.simplify(sum(E[p, i] * E[q, j] * E[r, j] * E[t, i] * R[(t, r, p, q)]
                           for p in range(n) for q in range(n) for r in range(n) for t in range(n)))


if __name__ == "__main__":
    print("scal", scal)
    print("Ric (orthonormal frame)", Ric_f.tolist())
    print("Ric (coords)", Ric.tolist())
    print("sectional 12 13 23", sec(0, 1), sec(0, 2), sec(1, 2))
    print("nabla Ric (orthonormal frame, nonzero)",
          {k: v for k, v in nab_f.items() if v != 0})
    pt = {x: sp.Rational(3, 10), y: sp.Rational(-1, 5), z: sp.Rational(1, 2)}
    print("Gamma at (0.3,-0.2,0.5), nonzero",
          {(k, i, j): float(Gam[k][i][j].subs(pt)) for k, i, j in itertools.product(range(n), repeat=3)
           if Gam[k][i][j].subs(pt) != 0})
    print("R_0101 R_0202 R_1212 R_0102 at pt",
          [float(R[idx].subs(pt)) for idx in [(0, 1, 0, 1), (0, 2, 0, 2), (1, 2, 1, 2), (0, 1, 0, 2)]])
