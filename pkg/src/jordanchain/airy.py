"""Airy function Ai on the real line without special-function libraries.

- Maclaurin series on [-8, 4] (cancellation stays below ~1e-10 there).
- Decaying asymptotic series for z >= 9.
- 4 < z < 9: Taylor stepping of Ai'' = z Ai backward from z = 9 (the
  stable direction for the decaying solution) to cached nodes, then one
  local Taylor step to the target.
- Oscillatory asymptotic series for z < -8.
"""

import math

import numpy as np

AI0 = 0.355028053887817239260   # 3^{-2/3}/Gamma(2/3)
AIP0 = -0.258819403792806798405  # -3^{-1/3}/Gamma(1/3)


def _series(z):
    z = np.asarray(z, dtype=float)
    z3 = z ** 3
    f = np.ones_like(z)
    g = z.copy()
    tf, tg = np.ones_like(z), z.copy()
    fp, gp = np.zeros_like(z), np.ones_like(z)  # derivatives
    tfp, tgp = np.zeros_like(z), np.ones_like(z)
    for k in range(1, 80):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        f = f + tf
        g = g + tg
        fp = fp + 3 * k * tf / np.where(z == 0, 1.0, z)
        gp = gp + (3 * k + 1) * tg / np.where(z == 0, 1.0, z)
        if np.all(np.abs(tf) + np.abs(tg) < 1e-18 * (np.abs(f) + np.abs(g))):
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _u_coeffs(n):
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216 * k * (2 * k - 1)))
    return u


_U = _u_coeffs(40)
_V = [1.0] + [-(6 * k + 1) / (6 * k - 1) * _U[k] for k in range(1, 40)]


def _asym_pos(z):
    zeta = 2.0 / 3.0 * z ** 1.5
    sa = np.zeros_like(z)
    sd = np.zeros_like(z)
    for k in range(40):
        ta = (-1) ** k * _U[k] / zeta ** k
        td = (-1) ** k * _V[k] / zeta ** k
        sa = sa + ta
        sd = sd + td
        if np.all(np.abs(ta) < 1e-17):
            break
    pref = np.exp(-zeta) / (2 * math.sqrt(math.pi))
    return pref * sa / z ** 0.25, -pref * sd * z ** 0.25


def _asym_neg(x):
    # Ai(-x) for x > 0
    zeta = 2.0 / 3.0 * x ** 1.5
    even = np.zeros_like(x)
    odd = np.zeros_like(x)
    for k in range(20):
        te = (-1) ** k * _U[2 * k] / zeta ** (2 * k)
        to = (-1) ** k * _U[2 * k + 1] / zeta ** (2 * k + 1)
        even = even + te
        odd = odd + to
        if np.all(np.abs(te) + np.abs(to) < 1e-17):
            break
    ph = zeta - math.pi / 4
    return (np.cos(ph) * even + np.sin(ph) * odd) / (math.sqrt(math.pi) * x ** 0.25)


def _taylor_step(z0, a0, a1, h, terms=40):
    """Advance (Ai, Ai') of y'' = z y from z0 by h using the local series."""
    c = [a0, a1, 0.5 * z0 * a0]
    for n in range(3, terms):
        c.append((z0 * c[n - 2] + c[n - 3]) / (n * (n - 1)))
    y = sum(cn * h ** n for n, cn in enumerate(c))
    yp = sum(n * cn * h ** (n - 1) for n, cn in enumerate(c) if n)
    return y, yp


_NODE_STEP = 0.25
_NODES = None


def _bridge_nodes():
    """(Ai, Ai') at z = 9, 8.75, ..., 4, stepped backward from the asymptotics."""
    global _NODES
    if _NODES is None:
        z = 9.0
        a, ap = _asym_pos(np.array([z]))
        a, ap = float(a[0]), float(ap[0])
        zs, vals = [z], [(a, ap)]
        while z > 4.0 + 1e-12:
            a, ap = _taylor_step(z, a, ap, -_NODE_STEP)
            z -= _NODE_STEP
            zs.append(z)
            vals.append((a, ap))
        _NODES = (np.array(zs), np.array(vals))
    return _NODES


def _bridge(z):
    zs, vals = _bridge_nodes()
    # nearest node at or above z, then one local Taylor step down
    idx = np.clip(np.floor((9.0 - z) / _NODE_STEP).astype(int), 0, len(zs) - 1)
    z0 = zs[idx]
    a0, a1 = vals[idx, 0], vals[idx, 1]
    h = z - z0
    c = [a0, a1, 0.5 * z0 * a0]
    for n in range(3, 40):
        c.append((z0 * c[n - 2] + c[n - 3]) / (n * (n - 1)))
    y = np.zeros_like(z)
    for cn in c[::-1]:
        y = y * h + cn
    return y


def airy_ai(z):
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    m_ser = (z >= -8.0) & (z <= 4.0)
    m_pos = z >= 9.0
    m_mid = (z > 4.0) & (z < 9.0)
    m_neg = z < -8.0
    if m_ser.any():
        out[m_ser] = _series(z[m_ser])[0]
    if m_pos.any():
        out[m_pos] = _asym_pos(z[m_pos])[0]
    if m_neg.any():
        out[m_neg] = _asym_neg(-z[m_neg])
    if m_mid.any():
        out[m_mid] = _bridge(z[m_mid])
    return out[0] if scalar else out
