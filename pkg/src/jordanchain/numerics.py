"""Shared numerical kernels.

Quadrature (adaptive, panelled Gauss-Legendre, damped oscillatory),
damped Newton, grid derivatives and log-log slope fits.  Everything here
is a pure function of its inputs.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import (
    InsufficientData,
    NoConvergence,
    NonDecayingIntegrand,
    NonFinite,
    NonPositiveSample,
    OrderUnsupported,
    SingularJacobian,
    SubdivisionLimit,
    ValidationError,
)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_subdivisions: int = 400
    truncation_radius: float = 40.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValidationError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValidationError("max_subdivisions must be >= 1")
        if not self.truncation_radius > 0:
            raise ValidationError("truncation_radius must be positive")


@dataclass(frozen=True)
class RootSolveSpec:
    residual_tol: float = 1e-12
    max_iterations: int = 60
    damping_min: float = 1.0 / 1024

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValidationError("residual_tol must be positive")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not (0 < self.damping_min <= 1):
            raise ValidationError("damping_min must lie in (0, 1]")


@dataclass
class GridField:
    """Uniform 1-D grid.  ``values`` has shape (n,) or (n, components)."""

    x_min: float
    dx: float
    values: np.ndarray
    periodic: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.dx > 0:
            raise ValidationError("grid spacing must be positive")
        if self.values.ndim not in (1, 2) or self.values.shape[0] < 2:
            raise ValidationError("a grid needs at least two points")

    @property
    def n_points(self):
        return self.values.shape[0]

    @property
    def components(self):
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def x(self):
        return self.x_min + self.dx * np.arange(self.n_points)

    def with_values(self, values):
        return GridField(self.x_min, self.dx, values, self.periodic)

    @classmethod
    def linspace(cls, a, b, n, values=None):
        dx = (b - a) / (n - 1)
        if values is None:
            values = np.zeros(n)
        return cls(a, dx, values)

    @classmethod
    def periodic_grid(cls, a, length, n, values=None):
        if values is None:
            values = np.zeros(n)
        return cls(a, length / n, values, periodic=True)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    n_samples: int


def _checked(f):
    def g(x):
        y = f(x)
        if not np.all(np.isfinite(y)):
            raise NonFinite(f"integrand returned a non-finite value near {x}")
        return y

    return g


def adaptive_quad(f, a, b, spec=QuadratureSpec()):
    """Adaptive Gauss-Kronrod integral of a scalar function.

    Infinite limits are clipped to +-truncation_radius; the caller picks
    the radius so the discarded tail is negligible.
    """
    R = spec.truncation_radius
    a = max(a, -R) if math.isinf(a) else a
    b = min(b, R) if math.isinf(b) else b
    g = _checked(f)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(
            g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, full_output=1)[:3]
    if err > spec.abs_tol + spec.rel_tol * abs(val):
        # quad reports ier != 0 for its own reasons; trust the error estimate
        # only to within a factor, since it is usually pessimistic
        if err > 100 * (spec.abs_tol + spec.rel_tol * abs(val)):
            raise SubdivisionLimit(
                f"quad error estimate {err:.3g} above tolerance after "
                f"{info['last']} subdivisions")
    return val


_GL_CACHE = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def panel_quad(f, a, b, n_panels, order=16):
    """Composite Gauss-Legendre rule; f must accept arrays (real or complex)."""
    nodes, weights = _gauss_legendre(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(f(pts))
    if not np.all(np.isfinite(vals)):
        raise NonFinite("integrand returned a non-finite value")
    vals = vals.reshape(n_panels, order)
    # fixed summation order: panels left to right
    return np.sum((vals * weights[None, :]).sum(axis=1) * half)


def converged_panel_quad(f, a, b, spec=QuadratureSpec(), n_start=8, order=16):
    """Double the panel count until two successive estimates agree."""
    n = n_start
    prev = panel_quad(f, a, b, n, order)
    cap = max(spec.max_subdivisions, 8 * n_start)
    change = math.inf
    while n < cap:
        n *= 2
        cur = panel_quad(f, a, b, n, order)
        change = abs(cur - prev)
        if change <= spec.abs_tol + spec.rel_tol * abs(cur):
            return cur
        prev = cur
    raise SubdivisionLimit(
        f"panel quadrature did not settle with {n} panels (last change {change:.3g})")


def _ray_angle(c_lead, degree, side):
    """Rotation angle for the ray lambda = side * r * exp(i theta).

    Picks the angle closest to the real axis at which the leading term
    decays fastest; returns None if the wedge swept from the real axis
    would contain growth.
    """
    s = complex(1j * side) ** degree * c_lead
    # want s * exp(i d theta) = -|s|
    base = (math.pi - np.angle(s)) / degree
    cands = base + 2 * math.pi * np.arange(-degree, degree + 1) / degree
    theta = cands[np.argmin(np.abs(cands))]
    if abs(theta) > math.pi / (2 * degree) + 1e-12:
        return None
    return float(theta)


def _ray_integral(coeffs, side, theta, spec, factor=None):
    coeffs = np.asarray(coeffs, dtype=complex)
    d = len(coeffs) - 1
    rot = side * np.exp(1j * theta)

    def g(r):
        lam = rot * r
        z = 1j * lam
        phase = np.zeros_like(z)
        for c in coeffs[::-1]:
            phase = phase * z + c
        val = np.exp(phase)
        if factor is not None:
            val = val * factor(lam)
        # orientation: the negative half line is traversed from 0 outward
        return val * np.exp(1j * theta)

    # radius where the leading term dominates and the integrand is tiny
    mags = np.abs(coeffs)
    R = 1.0
    for _ in range(200):
        lower = sum(mags[k] * R ** k for k in range(d))
        if mags[d] * R ** d > 2 * lower + 1 and abs(g(np.array([R]))[0]) < spec.abs_tol * 1e-3:
            break
        R *= 1.25
    else:
        raise NonDecayingIntegrand("could not find a truncation radius")
    # panels resolve the oscillation scale of the integrand near the origin
    return converged_panel_quad(g, 0.0, R, spec, n_start=max(8, int(4 * R)))


def kernel_integral(phase_poly, spec=QuadratureSpec(), factor=None):
    """Integral over the real line of factor(lam) * exp(sum_k c_k (i lam)^k).

    Each half line is rotated into the complex plane by the angle that
    makes the leading term decay; for even degree with the right sign that
    angle is zero.  ``factor`` must then be analytic in the swept wedge.
    """
    c = np.trim_zeros(np.asarray(phase_poly, dtype=complex), "b")
    d = len(c) - 1
    if d < 2:
        raise NonDecayingIntegrand("phase polynomial must have degree >= 2")
    total = 0.0 + 0.0j
    for side in (1.0, -1.0):
        theta = _ray_angle(c[d], d, side)
        if theta is None:
            raise NonDecayingIntegrand(
                f"leading coefficient {c[d]} gives growth on the real axis "
                f"and no admissible rotation")
        total += _ray_integral(c, side, theta, spec, factor)
    return total


def damped_oscillatory_quad(phase_poly, spec=QuadratureSpec()):
    """(1/2pi) * integral over the real line of exp(sum_k c_k (i lam)^k).

    ``phase_poly`` lists c_0, c_1, ..., c_d.
    """
    total = kernel_integral(phase_poly, spec) / (2 * math.pi)
    c = np.asarray(phase_poly)
    if np.isrealobj(c) and abs(total.imag) > max(spec.abs_tol, 1e-10 * abs(total.real)):
        raise NonFinite(f"imaginary part {total.imag:.3g} too large")
    return float(total.real)


def newton_solve(F, jacobian, x0, spec=RootSolveSpec()):
    """Damped Newton with step halving.

    Raises SingularJacobian when the condition number passes
    1/sqrt(eps) and NoConvergence after max_iterations.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    fx = np.atleast_1d(np.asarray(F(x), dtype=float))
    res = np.max(np.abs(fx))
    cond_limit = 1.0 / math.sqrt(EPS)
    for _ in range(spec.max_iterations):
        if res <= spec.residual_tol:
            return x
        J = np.atleast_2d(np.asarray(jacobian(x), dtype=float))
        if not np.all(np.isfinite(J)):
            raise NonFinite("jacobian is not finite")
        cond = np.linalg.cond(J)
        if not cond < cond_limit:
            raise SingularJacobian(f"jacobian condition {cond:.3g} at {x}")
        step = np.linalg.solve(J, -fx)
        lam = 1.0
        while True:
            xn = x + lam * step
            fn = np.atleast_1d(np.asarray(F(xn), dtype=float))
            rn = np.max(np.abs(fn))
            if rn < res or lam <= spec.damping_min:
                break
            lam *= 0.5
        x, fx, res = xn, fn, rn
    if res <= spec.residual_tol:
        return x
    raise NoConvergence(f"residual {res:.3g} after {spec.max_iterations} iterations")


def fd_weights(offsets, order):
    """Fornberg's recursion for finite-difference weights at 0."""
    z = np.asarray(offsets, dtype=float)
    n = len(z)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, z[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, z[i]
        for j in range(i):
            c3 = z[i] - z[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _fd_derivative(v, dx, order):
    n = v.shape[0]
    width = order + 4 - (1 if order % 2 == 0 else 0)  # 5,5,7,7 points
    width += (width + 1) % 2  # keep odd width for the centred part
    half = width // 2
    if n < width + 1:
        raise ValidationError("grid too small for fourth-order differences")
    out = np.empty_like(v)
    w = fd_weights(np.arange(-half, half + 1), order) / dx ** order
    inner = sum(w[j] * v[j:n - width + 1 + j] for j in range(width))
    out[half:n - half] = inner
    # one-sided closures keep fourth order with one extra point
    wide = order + 4
    for i in list(range(half)) + list(range(n - half, n)):
        start = 0 if i < half else n - wide
        offs = np.arange(start, start + wide) - i
        wi = fd_weights(offs, order) / dx ** order
        out[i] = np.tensordot(wi, v[start:start + wide], axes=(0, 0))
    return out


def spectral_derivative(field_, order):
    """d^order/dx^order of a grid field.

    Periodic grids use the FFT; otherwise fourth-order finite
    differences with one-sided closure at the edges (order <= 4).
    """
    if order < 0:
        raise ValidationError("derivative order must be >= 0")
    v = field_.values
    if order == 0:
        return field_.with_values(v.copy())
    if field_.periodic:
        n = field_.n_points
        k = 2 * math.pi * np.fft.fftfreq(n, d=field_.dx)
        mult = (1j * k) ** order
        if order % 2 == 1 and n % 2 == 0:
            mult[n // 2] = 0.0
        shape = (n,) + (1,) * (v.ndim - 1)
        out = np.fft.ifft(mult.reshape(shape) * np.fft.fft(v, axis=0), axis=0).real
        return field_.with_values(out)
    if order > 4:
        raise OrderUnsupported(f"finite-difference mode supports order <= 4, got {order}")
    return field_.with_values(_fd_derivative(v, field_.dx, order))


def fit_loglog_slope(pairs):
    pairs = list(pairs)
    if len(pairs) < 3:
        raise InsufficientData(f"need at least 3 samples, got {len(pairs)}")
    d = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs], dtype=float)
    if np.any(d <= 0) or np.any(v <= 0):
        raise NonPositiveSample("log-log fit needs positive samples")
    X, Y = np.log(d), np.log(v)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_tot = np.sum((Y - Y.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - np.sum(resid ** 2) / ss_tot)
    return SlopeFit(float(slope), float(intercept), float(min(r2, 1.0)), len(pairs))
