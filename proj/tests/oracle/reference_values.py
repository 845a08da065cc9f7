#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# Independent reference values for the unit tests.
# Written against numpy/scipy only; the printed numbers are frozen into tests/*.cpp.
# Run: python3 tests/oracle/reference_values.py

import numpy as np
from scipy.spatial.transform import Rotation

C = 299792458.0
FC = 100e9
LAM = C / FC
K = 2 * np.pi / LAM


def rot(u):
    # Local-to-global rotation: transpose of the intrinsic z-y-x rotation by (gamma, beta, alpha)
    a, b, g = u
    return Rotation.from_euler("ZYX", [g, b, a]).as_matrix().T


def upa(rows, cols, s):
    out = []
    for r in range(rows):
        for c in range(cols):
            out.append(np.array([0.0, (c - (cols - 1) / 2) * s, (r - (rows - 1) / 2) * s]))
    return out


def local_angles(v):
    v = v / np.linalg.norm(v)
    return np.arctan2(v[1], v[0]), np.arcsin(np.clip(v[2], -1, 1))


def gain_dbi(az, el, gmax=8.0, t3=np.deg2rad(65), p3=np.deg2rad(65), sla=30.0, am=30.0):
    av = min(12 * (el / t3) ** 2, sla)
    ah = min(12 * (az / p3) ** 2, am)
    return gmax - min(av + ah, am)


def lin_gain(v):
    az, el = local_angles(v)
    if abs(az) > np.pi / 2:
        return 0.0
    return 10 ** (gain_dbi(az, el) / 10)


def doa(az, el):
    return np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])


def fmt(x):
    return f"{x:.17g}"


def cfmt(z):
    return f"{{{fmt(z.real)}, {fmt(z.imag)}}}"


def section(name):
    print(f"\n// ---- {name} ----")


section("rotation (0.3, -0.7, 1.9)")
print(", ".join(fmt(x) for x in rot([0.3, -0.7, 1.9]).ravel()))
section("rotation (5.0, 2.2, 4.4)")
print(", ".join(fmt(x) for x in rot([5.0, 2.2, 4.4]).ravel()))

section("global antenna position, pose q=(0.1,-0.2,0.15) u=(0.3,1.1,2.0), upa 2x3, s=lambda/2, n=4")
q = np.array([0.1, -0.2, 0.15])
u = [0.3, 1.1, 2.0]
lay = upa(2, 3, LAM / 2)
print(", ".join(fmt(x) for x in q + rot(u) @ lay[4]))

section("directive gain dBi at local (az, el)")
for az, el in [(0.4, -0.3), (1.2, 0.9), (1.5, 1.2), (0.0, 0.0)]:
    print(f"({az}, {el}) -> {fmt(gain_dbi(az, el))}")

section("far steering vector: pose q=(0.1,-0.2,0.15) u=(0.3,1.1,2.0), upa 2x2, doa (0.7, 0.2)")
lay = upa(2, 2, LAM / 2)
f = doa(0.7, 0.2)
R = rot(u)
print(", ".join(cfmt(np.exp(1j * K * f @ (q + R @ r))) for r in lay))

section("hybrid channel: 2 poses, upa 2x2, user d=25 az=0.5 el=0.3, nu=lambda/(4 pi d)")
poses = [(np.array([0.2, 0.1, 0.05]), [0.0, 5.9, 5.8]), (np.array([-0.1, 0.2, -0.15]), [0.0, 0.4, 0.6])]
d, az, el = 25.0, 0.5, 0.3
p = d * doa(az, el)
nu = LAM / (4 * np.pi * d)
hyb = []
for qb, ub in poses:
    off = p - qb
    db = np.linalg.norm(off)
    fb = off / db
    loc = rot(ub).T @ fb
    g = lin_gain(loc)
    for r in lay:
        hyb.append(nu * np.sqrt(g) * np.exp(-1j * K * db) * np.exp(1j * K * loc @ r))
print(", ".join(cfmt(z) for z in hyb))

section("near channel (free-space taper), same setup")
near = []
for qb, ub in poses:
    Rb = rot(ub)
    for r in lay:
        rg = qb + Rb @ r
        off = p - rg
        dn = np.linalg.norm(off)
        g = lin_gain(Rb.T @ (off / dn))
        near.append(nu * (d / dn) * np.sqrt(g) * np.exp(-1j * K * dn))
print(", ".join(cfmt(z) for z in near))

section("far channel, same setup")
far = []
for qb, ub in poses:
    Rb = rot(ub)
    g = lin_gain(Rb.T @ doa(az, el))
    for r in lay:
        far.append(nu * np.sqrt(g) * np.exp(-1j * K * d) * np.exp(1j * K * doa(az, el) @ (qb + Rb @ r)))
print(", ".join(cfmt(z) for z in far))

section("path gain at 100 m, Rayleigh distance at A = 0.5 m")
print(fmt(LAM / (4 * np.pi * 100.0)), fmt(2 * (0.5 * np.sqrt(3)) ** 2 / LAM))

section("sum capacity, H 3x2, noise 1, tx 2")
H = np.array([[1 + 1j, 0.5], [0.2 - 0.3j, -1j], [0.0, 0.7 + 0.1j]])
print(fmt(np.log2(np.linalg.det(np.eye(2) + 2 * H.conj().T @ H).real)))

section("Fibonacci poses M=5, side 0.5")
ga = np.pi * (3 - np.sqrt(5))
for i in range(5):
    z = 1 - (2 * i + 1) / 5
    rr = np.sqrt(1 - z * z)
    n = np.array([rr * np.cos(ga * i), rr * np.sin(ga * i), z])
    print(", ".join(fmt(x) for x in 0.25 * n))

section("whitening: W 2x3, y")
W = np.array([[1 + 1j, 0.5, -0.2j], [0.3, 2.0 - 1j, 0.1]])
y = np.array([0.4 - 0.2j, -1.0 + 0.5j])
D = np.diag(np.sqrt(np.sum(np.abs(W) ** 2, axis=1)))
print("ybar:", ", ".join(cfmt(z) for z in np.linalg.solve(D, y)))
print("gamma:", ", ".join(cfmt(z) for z in np.linalg.solve(D, W).ravel()))
print("min-norm:", ", ".join(cfmt(z) for z in np.linalg.pinv(W) @ y))

section("coarse objective: pose q=(0.1,0.05,-0.1) u=(0,6,0.5), upa 2x2, T=3, candidate (50, 0.2, 0.1)")
q2 = np.array([0.1, 0.05, -0.1])
u2 = [0.0, 6.0, 0.5]
W3 = np.array([[1, 1j, -1, -1j], [1, -1, 1, -1], [1j, 1, 1j, -1]], dtype=complex) / 2
y3 = np.array([0.3 + 0.1j, -0.2 + 0.4j, 0.05 - 0.3j])
cand = (50.0, 0.2, 0.1)
pc = cand[0] * doa(cand[1], cand[2])
off = pc - q2
dm = np.linalg.norm(off)
loc = rot(u2).T @ (off / dm)
g = lin_gain(loc)
a = np.array([np.exp(1j * K * loc @ r) for r in lay])
atom = np.sqrt(g) * np.exp(-1j * K * dm) * a
D3 = np.diag(np.sqrt(np.sum(np.abs(W3) ** 2, axis=1)))
G3 = np.linalg.solve(D3, W3)
yb = np.linalg.solve(D3, y3)
x = G3 @ atom
print("objective:", fmt(abs(np.vdot(x, yb)) ** 2 / np.vdot(x, x).real))
print("nu:", cfmt(np.vdot(x, yb) / np.vdot(x, x).real))
