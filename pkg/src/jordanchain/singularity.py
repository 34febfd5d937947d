"""Gradient catastrophes: location, order, normal form and exponents.

A point is in stratum S_k of an N-component potential when
W_1 = ... = W_{N+k} = 0 and W_{N+k+1} != 0 (u_1-partials).  Near it the
expansion

    W(x0 + y, t0 + tau, u0 + v) = sum_m W_m(x, t, u0) P_m(v)

holds exactly (Schur polynomials are multiplicative under shifts), so the
normal form is read off without any Taylor fitting.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    Degenerate,
    InsufficientData,
    JordanChainError,
    OrderMismatch,
    ValidationError,
)
from .hodograph import derivatives_via_formula, solve_point
from .numerics import RootSolveSpec, fit_loglog_slope, newton_solve
from .potential import eval_partials
from .schur import FieldVector, schur_all


@dataclass(frozen=True)
class CatastrophePoint:
    x0: float
    t0: float
    u0: FieldVector
    order_k: int
    A_coeff: float
    balance: tuple
    times: tuple = ()

    @property
    def N(self):
        return self.u0.N

    @property
    def schur_coeff(self):
        """Weight of P_{N+k+1} in the expansion, i.e. W_{N+k+1} itself."""
        return self.A_coeff * math.factorial(self.N + self.order_k + 1)


def balance_exponents(N, k):
    """(alpha, beta, gamma) with alpha = 1."""
    return (1, N + k - 1, N + k)


def _spec_at(spec, times):
    return spec.with_times(*times)


def classify_order(spec, point, tol=1e-7):
    """Smallest k >= 0 with W_{N+k+1} above the threshold.

    ``point`` is (x, t, u); higher times are taken from ``spec``.  The
    threshold is tol times the local scale max(1, max_m |W_m|).
    """
    x, t, u = point
    u = list(u.u) if isinstance(u, FieldVector) else list(u)
    N = spec.N
    sp = spec.with_times(x, t)
    D = max(sp.degree, N + 1)
    W = eval_partials(sp, u, D)
    scale = max(1.0, max(abs(w) for w in W[1:]))
    thr = tol * scale
    if max(abs(w) for w in W[1:N + 1]) > thr:
        raise ValidationError("point is not a critical point of W")
    for m in range(N + 1, D + 1):
        if abs(W[m]) > thr:
            return m - N - 1
    raise Degenerate("all u_1-partials vanish up to the polynomial degree")


def find_catastrophe(spec, k, seed_u, free_times=None, rs=RootSolveSpec(), tol=1e-7):
    """Solve W_1 = ... = W_{N+k} = 0 for (u, free times).

    By default the free times are t_0 = x, ..., t_{k-1}; the other times
    keep the values stored in ``spec`` (which also seed the free ones).
    """
    N = spec.N
    free = tuple(range(k)) if free_times is None else tuple(free_times)
    if len(free) != k:
        raise ValidationError(f"order {k} needs exactly {k} free times, got {len(free)}")
    if k < 1:
        raise ValidationError("catastrophe order must be >= 1")
    tilde_deg = max([n for n, c in enumerate(spec.tilde_coeffs) if c != 0.0], default=0)
    if tilde_deg < N + k + 1:
        raise OrderMismatch(
            f"free part has degree {tilde_deg}; order {k} needs degree >= {N + k + 1}")
    times0 = list(spec.times)
    while len(times0) <= max(free):
        times0.append(0.0)
    seed_u = list(seed_u.u) if isinstance(seed_u, FieldVector) else list(seed_u)
    z0 = np.array(seed_u + [times0[i] for i in free], dtype=float)
    M = N + k

    def unpack(z):
        times = list(times0)
        for j, i in enumerate(free):
            times[i] = z[N + j]
        return times, list(z[:N])

    def F(z):
        times, u = unpack(z)
        W = eval_partials(spec.with_times(*times), u, M)
        return np.array(W[1:M + 1])

    def J(z):
        times, u = unpack(z)
        W = eval_partials(spec.with_times(*times), u, M + N)
        p = schur_all(u, M + 1)
        rows = []
        for m in range(1, M + 1):
            row = [W[m + l] for l in range(1, N + 1)]
            row += [p[i + 1 - m] if i + 1 - m >= 0 else 0.0 for i in free]
            rows.append(row)
        return np.array(rows)

    z = newton_solve(F, J, z0, rs)
    times, u = unpack(z)
    sp = spec.with_times(*times)
    got = classify_order(sp, (times[0], times[1], u), tol)
    if got != k:
        raise OrderMismatch(f"converged to stratum k={got}, expected k={k}")
    W = eval_partials(sp, u, M + 1)
    return CatastrophePoint(
        x0=float(times[0]), t0=float(times[1]), u0=FieldVector(u), order_k=k,
        A_coeff=float(W[M + 1] / math.factorial(M + 1)),
        balance=balance_exponents(N, k), times=tuple(float(v) for v in times))


@dataclass(frozen=True)
class NormalForm:
    """W* = y P_1(v) + tau P_2(v) + S P_{N+k+1}(v), with y Galilean-shifted.

    ``A`` is the Taylor coefficient W_{N+k+1}/(N+k+1)!; ``schur_coeff`` is
    S = W_{N+k+1}.  For one component S P_{k+2}(v) = A v^{k+2}.
    """

    N: int
    k: int
    A: float
    schur_coeff: float
    galilean_velocity: float

    def evaluate(self, y, tau, v):
        v = list(v)
        p = schur_all(v, self.N + self.k + 1)
        return y * p[1] + tau * p[2] + self.schur_coeff * p[self.N + self.k + 1]

    def hodograph(self, y, tau, v):
        """dW*/dv_l = d^l W*/dv_1^l for l = 1..N, the corrected index set."""
        v = list(v)
        M = self.N + self.k
        p = schur_all(v, M + 1)
        out = []
        for l in range(1, self.N + 1):
            val = self.schur_coeff * p[M + 1 - l]
            if l == 1:
                val += y + tau * p[1]
            elif l == 2:
                val += tau
            out.append(val)
        return out


def normal_form(spec, cat):
    sp = _spec_at(spec, cat.times) if cat.times else spec.with_times(cat.x0, cat.t0)
    N, k = cat.N, cat.order_k
    W = eval_partials(sp, cat.u0, N + k + 1)
    S = W[N + k + 1]
    return NormalForm(N, k, S / math.factorial(N + k + 1), S, cat.u0.u[0])


def galilean_expansion(spec, cat):
    """One-component coefficients of W*(y, tau, v) after the Galilean shift."""
    if cat.N != 1:
        raise ValidationError("expansion coefficients are tabulated for one component")
    nf = normal_form(spec, cat)
    return {"y*v": 1.0, "tau*v": 0.0, "tau*v^2": 0.5, f"v^{cat.order_k + 2}": nf.A}


def naive_expansion(spec, cat):
    """Same coefficients from a plain binomial expansion around (x0, t0, u0).

    W is written in monomials, u = u0 + v is substituted term by term and
    no Galilean change of variable is made, so a tau*v term u0 survives.
    """
    if cat.N != 1:
        raise ValidationError("expansion coefficients are tabulated for one component")
    sp = _spec_at(spec, cat.times)
    C = sp.combined()
    u0 = cat.u0.u[0]
    a = np.array([C[n] / math.factorial(n) for n in range(len(C))])  # monomial weights
    j = cat.order_k + 2
    coeff_vj = sum(a[n] * math.comb(n, j) * u0 ** (n - j) for n in range(j, len(a)))
    # x u and t u^2/2 are the only places y and tau enter
    return {"y*v": 1.0, "tau*v": u0, "tau*v^2": 0.5, f"v^{j}": float(coeff_vj)}


def predicted_exponent(N, k, l):
    if not (1 <= l <= N) or k < 1:
        raise ValidationError(f"invalid indices (N, k, l) = ({N}, {k}, {l})")
    return Fraction(-(N + k - l), N + k)


def _scaled_normal_form_root(N, k, sign_S, side, sigma, rs):
    """Root w of the rescaled normal-form hodograph (all O(1) entries)."""
    M = N + k

    def F(w):
        p = schur_all(list(w), M)
        out = [side + sigma * w[0] + sign_S * p[M]]
        if N >= 2:
            out.append(sigma + sign_S * p[M - 1])
        for m in range(3, N + 1):
            out.append(sign_S * p[M + 1 - m])
        return np.array(out)

    def J(w):
        p = schur_all(list(w), M)
        rows = []
        for m in range(1, N + 1):
            n = M + 1 - m
            row = [sign_S * (p[n - l] if n - l >= 0 else 0.0) for l in range(1, N + 1)]
            if m == 1:
                row[0] += sigma
            rows.append(row)
        return np.array(rows)

    rng = np.random.default_rng(12345)
    found = []
    for _ in range(200):
        w0 = rng.normal(scale=1.5, size=N)
        try:
            w = newton_solve(F, J, w0, rs)
        except JordanChainError:
            continue
        if not any(np.allclose(w, f, atol=1e-8) for f in found):
            found.append(w)
        if len(found) >= 6:
            break
    if not found:
        return None
    # prefer the generic branch: every component of order one
    return max(found, key=lambda w: (np.min(np.abs(w)), -np.linalg.norm(w)))


def default_offsets(n=13):
    return list(np.geomspace(1e-2, 1e-5, n))


def scaling_samples(spec, cat, component, offsets, time_ratio=0.0, rs=RootSolveSpec()):
    """(delta, |du_l/dx|) pairs on each side of the catastrophe.

    Points are x = x0 + side*delta - u0_1*tau, t = t0 + tau with
    tau = time_ratio*|S|*lambda^(N+k-1) and lambda = (delta/|S|)^(1/(N+k)),
    i.e. along the balance curve in Galilean-shifted variables.  Newton is
    seeded from the rescaled normal-form root.
    """
    N, k = cat.N, cat.order_k
    M = N + k
    sp = _spec_at(spec, cat.times)
    nf = normal_form(spec, cat)
    S = nf.schur_coeff
    u0 = np.array(cat.u0.u)
    samples = {}
    for side in (1.0, -1.0):
        w = _scaled_normal_form_root(N, k, math.copysign(1.0, S), side, time_ratio, rs)
        if w is None:
            continue
        pairs = []
        for d in sorted(offsets, reverse=True):
            lam = (d / abs(S)) ** (1.0 / M)
            tau = time_ratio * abs(S) * lam ** (M - 1)
            x = cat.x0 + side * d - u0[0] * tau
            t = cat.t0 + tau
            seed = u0 + np.array([lam ** (l + 1) * w[l] for l in range(N)])
            try:
                sol = solve_point(sp, x, t, seed, rs)
                du = derivatives_via_formula(sp, sol, 0)
            except JordanChainError:
                continue
            # drop solutions that wandered to a far branch
            if np.max(np.abs(np.array(sol.u.u) - u0)) > 10 * lam:
                continue
            pairs.append((d, abs(du[component - 1])))
        samples[side] = pairs
    return samples


def scaling_exponent_fit(spec, cat, component, offsets=None, time_ratio=0.0, rs=RootSolveSpec()):
    """Log-log slope of |du_l/dx| against the offset from the catastrophe."""
    if not 1 <= component <= cat.N:
        raise ValidationError(f"component must lie in 1..{cat.N}")
    offsets = default_offsets() if offsets is None else list(offsets)
    if any(o <= 0 for o in offsets):
        raise ValidationError("offsets must be positive")
    samples = scaling_samples(spec, cat, component, offsets, time_ratio, rs)
    best = max(samples.values(), key=len, default=[])
    if len(best) < 5:
        raise InsufficientData(f"only {len(best)} offsets converged on the better side")
    return fit_loglog_slope(best)
