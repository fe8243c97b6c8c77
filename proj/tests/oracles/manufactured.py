"""Reference values for the manufactured solutions, computed symbolically.

Run with `python3 tests/oracles/manufactured.py`; the printed numbers are
frozen into tests/unit/test_physics.cpp.
"""

import mpmath as mp
import sympy as sp

x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
X = (x1, x2, x3)
pi = sp.pi


def lap(u, xs):
    return sum(sp.diff(u, v, 2) for v in xs)


def show(label, expr, point):
    print(f"{label}: {sp.N(expr.subs(point), 20)}")


u_disk = 10 * (x1 * x2 + sp.sin(pi * x1) * sp.sin(pi * x2) * (1 - x1**2 - x2**2))
show("disk f(0.3,-0.4)", -lap(u_disk, (x1, x2)), {x1: sp.Rational(3, 10), x2: sp.Rational(-4, 10)})

u_kpp = 10 * sp.sin(3 * pi * x3) * sp.sin(2 * pi * x1) * sp.sin(pi * x1) * sp.sin(pi * x2) * sp.sin(pi * x3)
p = {x1: sp.Rational(3, 10), x2: sp.Rational(45, 100), x3: sp.Rational(2, 10)}
show("fisher u", u_kpp, p)
show("fisher f", -(lap(u_kpp, X) + sp.Rational(1, 2) * u_kpp * (1 - u_kpp)), p)

u_heat = 2 * x3 * (1 + sp.sin(2 * pi * x1) * sp.sin(2 * pi * x2))
kappa = 1 + x3
p = {x1: sp.Rational(3, 10), x2: sp.Rational(45, 100), x3: sp.Rational(7, 10)}
show("heat u", u_heat, p)
show("heat f", -sum(sp.diff(kappa * sp.diff(u_heat, v), v) for v in X), p)

u0 = 25
r = sp.sqrt((x2 - sp.Rational(1, 2)) ** 2 + (x3 - sp.Rational(1, 2)) ** 2)
u_pipe = [sp.Integer(0), u0 * (x2 - sp.Rational(1, 2)) * r * sp.sin(pi * x1),
          u0 * (x3 - sp.Rational(1, 2)) * r * sp.sin(pi * x1)]
E, nu = sp.Integer(1), sp.Rational(3, 10)
lam, mu = E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu))
eps = [[(sp.diff(u_pipe[k], X[l]) + sp.diff(u_pipe[l], X[k])) / 2 for l in range(3)] for k in range(3)]
div_u = sum(eps[k][k] for k in range(3))
sigma = [[lam * div_u * int(i == j) + 2 * mu * eps[i][j] for j in range(3)] for i in range(3)]
p = {x1: sp.Rational(3, 10), x2: sp.Rational(75, 100), x3: sp.Rational(4, 10)}
for i in range(3):
    show(f"pipe u{i}", u_pipe[i], p)
    show(f"pipe f{i}", -sum(sp.diff(sigma[i][j], X[j]) for j in range(3)), p)

mp.mp.dps = 30
k = lambda t: 1 + mp.sin(20 * mp.pi * t) / 2
F = lambda t: 100 / mp.pi * (1 - mp.cos(mp.pi * t))
nodes = [mp.mpf(i) / 20 for i in range(21)]
C = mp.quad(lambda t: F(t) / k(t), nodes) / mp.quad(lambda t: 1 / k(t), nodes)
print("bar C:", C)
for xv in (0.25, 0.5, 0.75, 1.0):
    sub = [t for t in nodes if t < xv] + [mp.mpf(xv)]
    print(f"bar u({xv}):", mp.quad(lambda t: (C - F(t)) / k(t), sub))
