"""Generating potentials W^(N) and their critical-point structure.

A potential is stored as

    W = sum_k t_k p_{k+1}(u) + sum_n c_n p_n(u),

with t_0 = x, t_1 = t and the free part in the Schur basis.  Because
dp_n/du_k = p_{n-k}, every u_k-partial of W is a u_1-partial, so nothing
beyond the coefficient list is needed to differentiate.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kvformat
from .errors import FitResidualTooLarge, NonMonotoneDatum, ValidationError
from .schur import FieldVector, schur_all


@dataclass(frozen=True)
class PotentialSpec:
    N: int
    times: tuple
    tilde_coeffs: tuple
    fit_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "tilde_coeffs", tuple(float(c) for c in self.tilde_coeffs))
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N}")
        if len(self.times) < 2:
            raise ValidationError("times must hold at least (x, t)")
        if not all(math.isfinite(v) for v in self.times + self.tilde_coeffs):
            raise ValidationError("potential entries must be finite")

    @property
    def x(self):
        return self.times[0]

    @property
    def t(self):
        return self.times[1]

    @property
    def degree(self):
        """Degree of W in the Schur basis (largest n with nonzero weight)."""
        c = self.combined()
        nz = np.nonzero(c)[0]
        return int(nz[-1]) if len(nz) else 0

    def combined(self):
        """Coefficient C_n of p_n in W, times included."""
        n = max(len(self.tilde_coeffs), len(self.times) + 1)
        C = np.zeros(n)
        C[:len(self.tilde_coeffs)] += self.tilde_coeffs
        for k, tk in enumerate(self.times):
            C[k + 1] += tk
        return C

    def with_times(self, *values, start=0):
        times = list(self.times)
        for i, v in enumerate(values):
            while start + i >= len(times):
                times.append(0.0)
            times[start + i] = v
        return replace(self, times=tuple(times))

    def with_N(self, N):
        return replace(self, N=N)


def tilde_from_derivative_monomials(b):
    """Schur coefficients of W~ given dW~/du = sum_m b_m u^m (one component).

    u^{m+1}/(m+1) = m! p_{m+1}, so c_{m+1} = m! b_m.
    """
    c = [0.0] * (len(b) + 1)
    for m, bm in enumerate(b):
        c[m + 1] = math.factorial(m) * bm
    return tuple(c)


def _fields(u):
    return list(u.u) if isinstance(u, FieldVector) else list(u)


def eval_partials(spec, u, max_order):
    """[d^m W/du_1^m for m = 0..max_order]; entry k is also dW/du_k."""
    if max_order < 1:
        raise ValidationError("max_order must be >= 1")
    comps = _fields(u)
    if len(comps) != spec.N:
        raise ValidationError(f"expected {spec.N} fields, got {len(comps)}")
    C = spec.combined()
    D = len(C) - 1
    p = schur_all(comps, D)
    out = []
    for m in range(max_order + 1):
        acc = 0.0
        for n in range(m, D + 1):
            if C[n] != 0.0:
                acc = acc + C[n] * p[n - m]
        out.append(acc)
    return out


def eval_W(spec, u):
    return eval_partials(spec, u, 1)[0]


@dataclass(frozen=True)
class InitialDatum:
    """Monotone initial profile u_0(x).

    Either closed form (``forward`` with its ``inverse`` on ``interval``)
    or a table of samples (x_i, u_i).
    """

    forward: object = None
    inverse: object = None
    interval: tuple = None
    table_x: tuple = None
    table_u: tuple = None

    @classmethod
    def closed_form(cls, forward, inverse, interval):
        return cls(forward=forward, inverse=inverse, interval=tuple(interval))

    @classmethod
    def from_table(cls, xs, us):
        return cls(table_x=tuple(map(float, xs)), table_u=tuple(map(float, us)))

    def samples(self, n=2001):
        if self.table_x is not None:
            return np.array(self.table_x), np.array(self.table_u)
        xs = np.linspace(self.interval[0], self.interval[1], n)
        return xs, np.array([self.forward(x) for x in xs], dtype=float)


def _check_monotone(xs, us):
    order = np.argsort(xs)
    du = np.diff(us[order])
    if not (np.all(du > 0) or np.all(du < 0)):
        raise NonMonotoneDatum("initial datum is not strictly monotone on its interval")


def datum_from_initial(datum, degree):
    """One-component potential with dW~/du = -u_0^{-1}(u).

    The inverse is fitted by a polynomial of degree ``degree - 1`` (so W~
    has the requested degree); Chebyshev nodes in u are used when the
    inverse is known in closed form.
    """
    if degree < 2:
        raise ValidationError("degree must be >= 2")
    xs, us = datum.samples()
    _check_monotone(xs, us)
    if datum.inverse is not None:
        lo, hi = float(np.min(us)), float(np.max(us))
        k = np.arange(4 * degree + 8)
        nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * (k + 0.5) / len(k))
        fit_u = nodes
        fit_x = np.array([datum.inverse(v) for v in nodes], dtype=float)
    else:
        fit_u, fit_x = us, xs
    cheb = np.polynomial.Chebyshev.fit(fit_u, -fit_x, degree - 1)
    resid = float(np.max(np.abs(cheb(fit_u) + fit_x)))
    scale = float(np.ptp(xs)) or 1.0
    if resid > 1e-8 * scale:
        raise FitResidualTooLarge(f"inverse fit residual {resid:.3g} exceeds {1e-8 * scale:.3g}")
    b = cheb.convert(kind=np.polynomial.Polynomial).coef
    b = np.where(np.abs(b) < 1e-13 * max(1.0, np.max(np.abs(b))), 0.0, b)
    return PotentialSpec(1, (0.0, 0.0), tilde_from_derivative_monomials(b), fit_residual=resid)


def lift_potential(spec1, N_target):
    """Replace u^n/n! by p_n(u_1..u_N): the G^(N)-average of a one-field potential."""
    if spec1.N != 1:
        raise ValidationError("lift_potential expects a one-component potential")
    if N_target < 1:
        raise ValidationError("N_target must be >= 1")
    return replace(spec1, N=N_target)


def write_potential(path, spec):
    kvformat.write_file(path, {
        "N": spec.N,
        "times": list(spec.times),
        "tilde_coeffs": list(spec.tilde_coeffs),
    })


def read_potential(path):
    return potential_from_mapping(kvformat.read_file(path))


def potential_from_mapping(m):
    missing = [k for k in ("N", "times", "tilde_coeffs") if k not in m]
    if missing:
        raise ValidationError(f"potential file lacks keys: {', '.join(missing)}")
    times = m["times"] if isinstance(m["times"], list) else [m["times"]]
    coeffs = m["tilde_coeffs"] if isinstance(m["tilde_coeffs"], list) else [m["tilde_coeffs"]]
    try:
        return PotentialSpec(int(m["N"]), tuple(float(v) for v in times),
                             tuple(float(v) for v in coeffs))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad potential entry: {exc}") from None
