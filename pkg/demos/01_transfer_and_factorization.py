"""Transfer matrices and normal-ordered factorizations on a worked example.

The three-site operator

    F = exp(a(-c1+ c2 + c1+ c3+ + c3 c2+ + c1 c3))

has a fully analytic transfer matrix, so every factorization step can be
compared against closed forms by eye.
"""

import numpy as np

from fermigauss.quadratic import (
    QuadraticGenerator,
    bbd_antinormal,
    bbd_normal,
    transfer_of,
)

np.set_printoptions(precision=4, suppress=True, linewidth=120)

a = 0.7
m = np.zeros((6, 6))
m[0, 1], m[0, 5] = -a, a
m[1, 2], m[2, 3] = -a, -a
m[3, 2], m[4, 3] = a, a
m[5, 0], m[5, 4] = -a, a

gen = QuadraticGenerator(m)
t = transfer_of(gen)
print("generator M (rows c+, columns (c, c+)):\n", m.real, "\n")
print("transfer matrix T = exp(M); entries are cos(a), -sin(a), 1-cos(a):\n",
      t.t.real, "\n")
print("canonical-pair preservation, max |T J T^T - J| =", t.j_defect(), "\n")

fac = bbd_normal(t)
print("normal ordering: F = exp(c+.X.c+/2) exp(c+.Y.c - trY/2) exp(c.Z.c/2)")
print("X (creation pairs); X[0,2] should be tan(a) =", np.tan(a))
print(fac.x.real, "\n")
print("Y (number sector); Y[0,0] should be -log(cos a) =", -np.log(np.cos(a)))
print(fac.y.real, "\n")
print("Z (annihilation pairs):\n", fac.z.real, "\n")
print("scalar prefactor exp(-trY/2) = det(T22)^(1/2) =", fac.prefactor,
      " (cos a =", np.cos(a), ")\n")

fa = bbd_antinormal(t)
print("antinormal ordering puts the annihilation pairs on the left:")
print("X (now annihilation pairs):\n", fa.x.real)
print("prefactor:", fa.prefactor, " (1/cos a =", 1 / np.cos(a), ")")
