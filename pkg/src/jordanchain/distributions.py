"""Generalized Airy-type densities G^(N) and averages against them.

G^(N)(u) = (1/2pi) int dlam exp(i lam (u_1 - u) + sum_{k>=2} (i lam)^k u_k)

is Gaussian for N = 2, Airy for N = 3 and Pearcey for N = 4.  Its
moments are <u^n/n!> = p_n(u_1..u_N), which is what lifts a one-field
potential to N fields.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .airy import airy_ai
from .errors import DiracPointwiseEval, DomainViolation, NonDecayingIntegrand, ValidationError
from .numerics import QuadratureSpec, converged_panel_quad, damped_oscillatory_quad, kernel_integral, panel_quad
from .potential import eval_W, lift_potential
from .schur import schur_eval

REGULATOR_EPS = (4e-3, 2e-3, 1e-3)


@dataclass(frozen=True)
class DistributionSpec:
    N: int
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.N < 1 or len(self.params) != self.N:
            raise ValidationError(f"need N >= 1 parameters, got N={self.N}, {len(self.params)} values")
        lead = self.params[-1]
        if self.N % 4 == 2 and not lead > 0:
            raise DomainViolation(f"N={self.N} requires u_N > 0")
        if self.N % 4 == 0 and not lead < 0:
            raise DomainViolation(f"N={self.N} requires u_N < 0")
        if self.N % 2 == 1 and self.N > 1 and lead == 0:
            raise DomainViolation(f"N={self.N} requires u_N != 0")

    @property
    def u1(self):
        return self.params[0]

    @property
    def absolutely_convergent(self):
        return self.N % 2 == 0


@dataclass(frozen=True)
class SpectralDensity:
    """Weight f(lam) for generalized Airy-type functions.

    ``support`` restricts integration to an interval; ``analytic`` says f
    accepts complex arguments, needed when the contour is rotated.
    """

    f: object
    support: tuple = None
    analytic: bool = False


def gaussian_density(u, u1, u2):
    return np.exp(-(u1 - u) ** 2 / (4 * u2)) / np.sqrt(4 * math.pi * u2)


def airy_density(u, u1, u2, u3):
    """Closed form of G^(3) obtained by shifting lam to cancel lam^2.

    Derivation: lam -> mu + i u2/(3 u3) removes the quadratic term and
    leaves a pure Airy integral in the rescaled variable.
    """
    w = u1 - np.asarray(u, dtype=float)
    s = 3 * u3
    c = np.cbrt(s)
    expo = 2 * u2 ** 3 / (27 * u3 ** 2) - w * u2 / s
    z = u2 ** 2 / (s * c) - w / c
    return np.exp(expo) * airy_ai(z) / abs(c) if u3 > 0 else _airy_negative(u, u1, u2, u3)


def _airy_negative(u, u1, u2, u3):
    # u3 < 0: G(u1 - u, u2, u3) = G(u - u1, u2, -u3) by lam -> -lam
    return airy_density(2 * u1 - np.asarray(u, dtype=float), u1, u2, -u3)


def _cosine_panels(phase_at, lam_max, y_span, tol, y_count):
    """Converged Gauss-Legendre panels for (1/pi) int_0^lam_max Re(...) dlam.

    ``phase_at(lam)`` returns a (y_count, len(lam)) array of integrand
    values; panels double until the result settles.
    """
    nodes, weights = np.polynomial.legendre.leggauss(24)
    n = max(16, int(2 * lam_max * (y_span + 2)))
    prev = None
    for _ in range(8):
        edges = np.linspace(0.0, lam_max, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        lam = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        cur = phase_at(lam) @ w / math.pi
        if prev is not None and np.max(np.abs(cur - prev)) < tol * max(1.0, np.max(np.abs(cur))):
            return cur
        prev = cur
        n *= 2
    return cur


def _chunked(fn, y, size=256):
    return np.concatenate([fn(y[i:i + size]) for i in range(0, len(y), size)]) if len(y) else y


def pearcey_lambda(x, y, tol=1e-13):
    """(1/2pi) int exp(i lam y - lam^2 x - lam^4) dlam for real x, array y."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    # exp(-lam^2 x - lam^4) < 1e-19 beyond lam_max
    lam_max = math.sqrt((-x + math.sqrt(x * x + 4 * 44.0)) / 2)
    if x < 0:
        lam_max = max(lam_max, math.sqrt(-x) * 1.5)

    def block(yb):
        at = lambda lam: np.cos(np.outer(yb, lam)) * np.exp(-lam ** 2 * x - lam ** 4)[None, :]
        return _cosine_panels(at, lam_max, np.max(np.abs(yb)), tol, len(yb))

    return _chunked(block, y)


def even_density_quad(params, u, tol=1e-13):
    """G^(N) for even N by real-line quadrature of the defining integral.

    Only the even powers contribute to the modulus; they make the
    integrand decay like exp(-|u_N| lam^N).
    """
    N = len(params)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    # real part of the exponent: sum over even k of (-1)^{k/2} u_k lam^k
    even = [(k, (-1) ** (k // 2) * params[k - 1]) for k in range(2, N + 1, 2)]
    odd = [(k, (-1) ** ((k - 1) // 2) * params[k - 1]) for k in range(3, N + 1, 2)]
    lam_max = 1.0
    while sum(c * lam_max ** k for k, c in even) > -44.0:
        lam_max *= 1.25

    def block(ub):
        w = params[0] - ub

        def at(lam):
            mod = np.exp(sum(c * lam ** k for k, c in even))
            ph = np.outer(w, lam) + sum(c * lam ** k for k, c in odd)
            return np.cos(ph) * mod[None, :]
        return _cosine_panels(at, lam_max, np.max(np.abs(w)), tol, len(ub))

    return _chunked(block, u)


def pearcey_density(u, u1, u2, u3, u4):
    """Closed form via the Pearcey integral, with a quadrature fallback.

    The prefactor exp(w u3 / 4a^4) grows in one tail while the Pearcey
    factor decays there, so where it exceeds e^2 the product would only
    amplify quadrature noise and the defining integral is used instead.
    """
    a = (-u4) ** 0.25
    u = np.atleast_1d(np.asarray(u, dtype=float))
    w = u1 - u
    expo = 3 * u3 ** 4 / (256 * a ** 12) + u2 * u3 ** 2 / (16 * a ** 8) + w * u3 / (4 * a ** 4)
    X = 3 * u3 ** 2 / (8 * a ** 6) + u2 / a ** 2
    Y = u3 ** 3 / (8 * a ** 9) + u2 * u3 / (2 * a ** 5) + w / a
    out = np.empty_like(u)
    ok = expo <= 2.0
    if ok.any():
        out[ok] = np.exp(expo[ok]) * pearcey_lambda(X, Y[ok]) / a
    if (~ok).any():
        out[~ok] = even_density_quad((u1, u2, u3, u4), u[~ok])
    return out


def _phase(spec, u):
    c = [0.0, spec.params[0] - u] + list(spec.params[1:])
    return c


def density_direct(spec, u, quad=QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13)):
    """Quadrature of the defining integral (rotated contour when N is odd)."""
    if spec.N == 1:
        raise DiracPointwiseEval("G^(1) is a Dirac delta; use the sifting rule")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return np.array([damped_oscillatory_quad(_phase(spec, v), quad) for v in u])


def density_eval(spec, u):
    if spec.N == 1:
        raise DiracPointwiseEval("G^(1) is a Dirac delta; use the sifting rule")
    p = spec.params
    if spec.N == 2:
        return gaussian_density(np.asarray(u, dtype=float), p[0], p[1])
    if spec.N == 3:
        return airy_density(u, *p)
    if spec.N == 4:
        out = pearcey_density(u, *p)
        return out if np.ndim(u) else float(out[0])
    out = even_density_quad(p, u) if spec.N % 2 == 0 else density_direct(spec, u)
    return out if np.ndim(u) else float(out[0])


def _scale(spec):
    """Rough width of G^(N) around u_1."""
    return max(abs(spec.params[k - 1]) ** (1.0 / k) for k in range(2, spec.N + 1))


def _window(spec):
    """Integration window containing all non-negligible mass (even N)."""
    s = _scale(spec)
    u1 = spec.u1
    lo, hi = u1 - 12 * s - 4, u1 + 12 * s + 4
    for _ in range(12):
        edge = np.abs(density_eval(spec, np.array([lo, hi])))
        if np.max(edge) < 1e-14:
            break
        lo, hi = u1 - 1.5 * (u1 - lo), u1 + 1.5 * (hi - u1)
    return lo, hi


def _plain_average(spec, h, quad):
    lo, hi = _window(spec)
    n0 = max(16, int(hi - lo))
    return converged_panel_quad(lambda v: h(v) * density_eval(spec, v), lo, hi, quad, n_start=n0)


def _regulated(spec, h, quad, eps):
    """int h G exp(-eps u^2) du for N = 3.

    The density decays on one side of u_1 and oscillates with growing
    frequency sqrt|z|/c on the other; the Gaussian cuts the latter off at
    r = sqrt(42/eps), where exp(-eps r^2) < 1e-18.
    """
    if spec.N != 3:
        raise ValidationError("the regulated route is implemented for N = 3")
    u1, u3 = spec.u1, spec.params[2]
    c = abs(3 * u3) ** (1.0 / 3.0)
    r = math.sqrt(42.0 / eps)
    pad = 12 * _scale(spec) + 4
    lo, hi = (min(-r, u1 - pad), u1 + pad) if u3 > 0 else (u1 - pad, max(r, u1 + pad))
    zmax = max(abs(lo - u1), abs(hi - u1)) / c
    n0 = max(32, int((hi - lo) * math.sqrt(zmax + 1) / c / 2))
    f = lambda v: h(v) * np.exp(-eps * v * v) * density_eval(spec, v)
    # cancellation is measured against int |f|, not the (small) result
    mag = panel_quad(lambda v: np.abs(f(v)), lo, hi, n0)
    tol = replace(quad, abs_tol=max(quad.abs_tol, quad.rel_tol * mag))
    return converged_panel_quad(f, lo, hi, tol, n_start=n0)


def average(spec, h, quad=QuadratureSpec(abs_tol=1e-10, rel_tol=1e-10, max_subdivisions=60000)):
    """<h>_N.  Returns (value, regulated flag).

    Odd N: the integral is only conditionally convergent, so the Gaussian
    regulator exp(-eps u^2) is applied at three eps values and the result
    Richardson-extrapolated to eps -> 0 (cancels the eps and eps^2 terms).
    """
    if spec.N == 1:
        return float(h(np.array([spec.u1]))[0]), False
    if spec.absolutely_convergent:
        return float(_plain_average(spec, h, quad)), False
    if spec.N == 3 and spec.params[1] < 0:
        # exp(-w u2 / 3 u3) then wins over the Airy decay on the oscillatory side
        raise NonDecayingIntegrand("G^(3) grows exponentially in one tail when u_2 < 0")
    e = REGULATOR_EPS
    I = [_regulated(spec, h, quad, x) for x in e]
    # eps, eps/2, eps/4: weights (1, -6, 8)/3
    return float((I[0] - 6 * I[1] + 8 * I[2]) / 3), True


def moment(dspec, n, quad=None):
    """Numerical <u^n/n!>; compare against schur_eval."""
    if n < 0:
        raise ValidationError("moment order must be >= 0")
    fact = math.factorial(n)
    h = lambda v: v ** n / fact
    val, _ = average(dspec, h) if quad is None else average(dspec, h, quad)
    return val


def normalization_check(spec, quad=None):
    if spec.N == 1:
        return 1.0
    val, _ = average(spec, lambda v: np.ones_like(v)) if quad is None else \
        average(spec, lambda v: np.ones_like(v), quad)
    return val


@dataclass(frozen=True)
class AveragedPotential:
    lifted: object
    regulated: bool

    def exact(self, params):
        return eval_W(self.lifted, list(params))


def average_potential(spec1, dspec):
    """Both routes for <W^(1)>_N.

    Returns (AveragedPotential, numeric) where numeric(params) integrates
    W^(1) against G^(N) with the given parameters, and the averaged
    object evaluates the exact Schur-basis lift.
    """
    if spec1.N != 1:
        raise ValidationError("average_potential expects a one-component potential")
    lifted = lift_potential(spec1, dspec.N)

    def numeric(params=None):
        ds = dspec if params is None else DistributionSpec(dspec.N, params)
        h = lambda v: eval_W(spec1, [v])
        return average(ds, h)[0]

    return AveragedPotential(lifted, not dspec.absolutely_convergent), numeric


def maxwell_view(dspec):
    """Temperature T = 2 u_2 of the N = 2 (Gaussian) density."""
    if dspec.N != 2:
        raise DomainViolation("the Maxwell view needs N = 2")
    return 2 * dspec.params[1]


def maxwell_density(u, mean, T):
    return np.exp(-(np.asarray(u, dtype=float) - mean) ** 2 / (2 * T)) / math.sqrt(2 * math.pi * T)


def generalized_airy(fdens, dspec, quad=QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)):
    """Real part of int dlam f(lam) exp(sum_k (i lam)^k u_k)."""
    coeffs = [0.0] + list(dspec.params)

    def kernel(lam):
        z = 1j * lam
        ph = np.zeros_like(z)
        for c in coeffs[::-1]:
            ph = ph * z + c
        return np.exp(ph)

    if fdens.support is not None:
        a, b = fdens.support
        g = lambda lam: fdens.f(lam) * kernel(lam)
        return float(converged_panel_quad(g, a, b, quad, n_start=64).real)
    if dspec.N >= 2 and dspec.absolutely_convergent:
        # real line, truncated where the Gaussian/quartic factor is negligible
        L = 1.0
        while abs(kernel(np.array([L]))[0]) > 1e-20:
            L *= 1.5
        g = lambda lam: fdens.f(lam) * kernel(lam)
        return float(converged_panel_quad(g, -L, L, quad, n_start=64).real)
    if not fdens.analytic:
        raise ValidationError("odd N needs an analytic spectral density for contour rotation")
    return float(kernel_integral(coeffs, quad, fdens.f).real)


def moment_reference(dspec, n):
    return schur_eval(list(dspec.params), n)
