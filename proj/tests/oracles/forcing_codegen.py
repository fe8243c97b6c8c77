"""Writes tests/acceptance/oracle_forcing.hpp: the manufactured forcing of the
four catalog problems as closed-form C++, derived symbolically.

Run with `python3 tests/oracles/forcing_codegen.py` from the repository root.
"""

import sympy as sp

x1, x2, x3 = sp.symbols("x1 x2 x3", real=True)
X = (x1, x2, x3)
pi = sp.pi


def lap(u, xs):
    return sum(sp.diff(u, v, 2) for v in xs)


u_disk = 10 * (x1 * x2 + sp.sin(pi * x1) * sp.sin(pi * x2) * (1 - x1**2 - x2**2))
f_disk = -lap(u_disk, (x1, x2))

u_kpp = 10 * sp.sin(3 * pi * x3) * sp.sin(2 * pi * x1) * sp.sin(pi * x1) * sp.sin(pi * x2) * sp.sin(pi * x3)
f_kpp = -(lap(u_kpp, X) + sp.Rational(1, 2) * u_kpp * (1 - u_kpp))

u_heat = 2 * x3 * (1 + sp.sin(2 * pi * x1) * sp.sin(2 * pi * x2))
f_heat = -sum(sp.diff((1 + x3) * sp.diff(u_heat, v), v) for v in X)

u0 = 25
r = sp.sqrt((x2 - sp.Rational(1, 2)) ** 2 + (x3 - sp.Rational(1, 2)) ** 2)
u_pipe = [sp.Integer(0), u0 * (x2 - sp.Rational(1, 2)) * r * sp.sin(pi * x1),
          u0 * (x3 - sp.Rational(1, 2)) * r * sp.sin(pi * x1)]
E, nu = sp.Integer(1), sp.Rational(3, 10)
lam, mu = E * nu / ((1 + nu) * (1 - 2 * nu)), E / (2 * (1 + nu))
eps = [[(sp.diff(u_pipe[k], X[l]) + sp.diff(u_pipe[l], X[k])) / 2 for l in range(3)] for k in range(3)]
div_u = sum(eps[k][k] for k in range(3))
sigma = [[lam * div_u * int(i == j) + 2 * mu * eps[i][j] for j in range(3)] for i in range(3)]
f_pipe = [-sum(sp.diff(sigma[i][j], X[j]) for j in range(3)) for i in range(3)]


def body(exprs):
    subs, reduced = sp.cse([sp.simplify(e) for e in exprs], symbols=sp.numbered_symbols("t"))
    lines = [f"  const double {s} = {sp.ccode(v)};" for s, v in subs]
    return lines, [sp.ccode(e) for e in reduced]


out = [
    "// Generated by tests/oracles/forcing_codegen.py; do not edit.",
    "#pragma once",
    "",
    "#include <array>",
    "#include <cmath>",
    "",
    "namespace alpinn::oracle {",
    "",
    "using std::cos;",
    "using std::pow;",
    "using std::sin;",
    "using std::sqrt;",
    "",
]
for name, exprs, dims in [("disk_forcing", [f_disk], 2), ("fisher_forcing", [f_kpp], 3),
                          ("heat_forcing", [f_heat], 3), ("pipe_forcing", f_pipe, 3)]:
    args = ", ".join(f"double x{i + 1}" for i in range(dims))
    lines, values = body(exprs)
    if len(values) == 1:
        out.append(f"inline double {name}({args}) {{")
        out += lines
        out.append(f"  return {values[0]};")
    else:
        out.append(f"inline std::array<double, {len(values)}> {name}({args}) {{")
        out += lines
        out.append("  return {" + ", ".join(values) + "};")
    out += ["}", ""]
out.append("}  // namespace alpinn::oracle")

with open("tests/acceptance/oracle_forcing.hpp", "w") as fh:
    fh.write("\n".join(out) + "\n")
