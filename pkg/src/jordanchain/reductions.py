"""Differential reductions of the Jordan chain.

Burgers: u_1 = nu psi_x / psi with psi_t = nu psi_xx (Cole-Hopf); the
higher fields follow from p_n(u) = nu^n psi^(n) / psi.

KdV: u_1,t = 3 u_1 u_1,x + u_1,xxx / 4 with u_2 = u_1^2 + u_1,xx / 4.

Euler-Lagrange regularisation of the catastrophe normal forms:
a v_yy = y + tau v + (k+2) A v^(k+1) as a two-point boundary problem.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded
from scipy.sparse.linalg import spsolve
from scipy.special import log_ndtr

from .errors import (
    AlgebraicBranchAmbiguity,
    BlowupDetected,
    JordanChainError,
    MeanAmbiguity,
    NoConvergence,
    NonUniqueBranch,
    PsiNonPositive,
    RouteMismatch,
    ValidationError,
)
from .jordan import JordanState
from .numerics import GridField, RootSolveSpec, newton_solve, spectral_derivative
from .schur import schur_all, schur_inverse


def _d(field_, order=1):
    return spectral_derivative(field_, order).values


# ---------------------------------------------------------------- Burgers

@dataclass
class BurgersConfig:
    nu: float
    initial: GridField

    def __post_init__(self):
        if not self.nu > 0:
            raise ValidationError("viscosity must be positive")
        if not np.all(np.isfinite(self.initial.values)):
            raise ValidationError("initial data must be finite")
        if self.initial.values.ndim != 1:
            raise ValidationError("initial data must be a scalar field")

    @property
    def grid(self):
        return self.initial


@dataclass
class HeatFunction:
    """psi(x, t) = exp(drift * x) * psi.values.

    On periodic grids the drift carries the mean of u_1 (divided by nu)
    so that the stored factor stays periodic.  Only ratios psi^(n)/psi
    matter, so psi is kept up to an overall constant.
    """

    psi: GridField
    time: float
    drift: float = 0.0
    log_values: np.ndarray = None

    def __post_init__(self):
        if self.log_values is not None:
            # psi itself may underflow for small nu; its logarithm must be finite
            if not np.all(np.isfinite(self.log_values)):
                raise PsiNonPositive("log psi is not finite: psi vanished or overflowed")
        elif not np.all(self.psi.values > 0):
            raise PsiNonPositive("heat function must stay positive for Cole-Hopf quotients")

    def jet(self, n):
        """psi^(n) / psi on the grid (Leibniz rule over the drift factor)."""
        chi = self.psi.values
        out = np.zeros_like(chi)
        for j in range(n + 1):
            dj = chi if j == 0 else _d(self.psi, j)
            out = out + math.comb(n, j) * self.drift ** (n - j) * dj / chi
        return out


def _antiderivative(field_):
    """Antiderivative vanishing at the left edge.

    Periodic grids: spectral integral of the zero-mean part plus the
    linear part from the mean.  Otherwise composite Simpson/trapezoid
    through cumulative sums of a cubic interpolant.
    """
    v = field_.values
    x = field_.x
    if field_.periodic:
        n = field_.n_points
        m = float(np.mean(v))
        k = 2 * math.pi * np.fft.fftfreq(n, d=field_.dx)
        vh = np.fft.fft(v - m)
        ih = np.zeros_like(vh)
        nz = k != 0
        ih[nz] = vh[nz] / (1j * k[nz])
        if n % 2 == 0:
            ih[n // 2] = 0.0
        F = np.fft.ifft(ih).real + m * (x - x[0])
        return F - F[0]
    # fourth-order cumulative rule: trapezoid with end corrections per cell
    d1 = _d(field_, 1)
    h = field_.dx
    cell = 0.5 * h * (v[1:] + v[:-1]) - h * h / 12 * (d1[1:] - d1[:-1])
    return np.concatenate([[0.0], np.cumsum(cell)])


def _heat_periodic(cfg, t):
    g = cfg.initial
    nu = cfg.nu
    m = float(np.mean(g.values))
    Phi = _antiderivative(g.with_values(g.values - m)) / nu
    chi0 = np.exp(Phi - np.max(Phi))
    n = g.n_points
    k = 2 * math.pi * np.fft.fftfreq(n, d=g.dx)
    # chi_t = nu chi_xx + 2 m chi_x (the constant m^2/nu growth is dropped)
    mult = np.exp((-nu * k * k + 2j * m * k) * t)
    if n % 2 == 0:
        mult[n // 2] = np.exp(-nu * k[n // 2] ** 2 * t)
    chi = np.fft.ifft(mult * np.fft.fft(chi0)).real
    return HeatFunction(g.with_values(chi), t, m / nu)


def _log_gauss_tail(x, S, slope, nu, t, right):
    """log int over the tail beyond S of the heat kernel times exp(slope s / nu).

    Closed form for data that are constant (= slope) outside the window,
    written with log_ndtr so large exponents stay finite.
    """
    s2 = 2 * nu * t  # kernel variance
    mu = x + slope * 2 * t  # completed-square centre
    shift = (mu ** 2 - x ** 2) / (2 * s2)
    z = (mu - S) / math.sqrt(s2) if right else (S - mu) / math.sqrt(s2)
    return shift + log_ndtr(z)


def _heat_kernel_window(cfg, t, x_eval):
    """log psi and u_1 at x_eval by direct heat-kernel quadrature.

    Inside the data window the integral is done with the trapezoid rule on
    the data grid (spectrally accurate for the rapidly decaying Gaussian
    weight when the kernel width spans several cells); outside, phi is
    continued by its edge values and the tails are integrated exactly.
    """
    g = cfg.initial
    nu = cfg.nu
    s = g.x
    phi = g.values
    Phi = _antiderivative(g)  # vanishes at the left edge
    if math.sqrt(2 * nu * t) < 2 * g.dx:
        raise ValidationError("kernel width below two data cells; refine the data grid")
    X = np.asarray(x_eval, dtype=float)[:, None]
    expo = -(X - s[None, :]) ** 2 / (4 * nu * t) + Phi[None, :] / nu
    w = np.full(len(s), g.dx)
    w[0] = w[-1] = 0.5 * g.dx
    top = np.max(expo, axis=1, keepdims=True)
    E = np.exp(expo - top) * w[None, :]
    core = E.sum(axis=1)
    core_m = (E * s[None, :]).sum(axis=1)
    xv = X[:, 0]
    # tails: exponent -(x-s)^2/4 nu t + (Phi_edge + phi_edge (s - S))/nu
    sL, sR = s[0], s[-1]
    pL, pR = phi[0], phi[-1]
    cR = (Phi[-1] - pR * sR) / nu
    cL = (Phi[0] - pL * sL) / nu
    norm = -0.5 * math.log(4 * math.pi * nu * t)
    lR = _log_gauss_tail(xv, sR, pR, nu, t, True) + cR + 0.5 * math.log(4 * math.pi * nu * t)
    lL = _log_gauss_tail(xv, sL, pL, nu, t, False) + cL + 0.5 * math.log(4 * math.pi * nu * t)
    # tail first moments: int s K e^{...} = mean * mass, truncated-Gaussian mean
    sig = math.sqrt(2 * nu * t)
    muR = xv + 2 * pR * t
    muL = xv + 2 * pL * t
    zR = (muR - sR) / sig
    zL = (sL - muL) / sig
    mR = muR + sig * np.exp(-0.5 * zR ** 2 - log_ndtr(zR)) / math.sqrt(2 * math.pi)
    mL = muL - sig * np.exp(-0.5 * zL ** 2 - log_ndtr(zL)) / math.sqrt(2 * math.pi)
    top = top[:, 0]
    big = np.maximum(np.maximum(top, lR), lL)
    mass = core * np.exp(top - big) + np.exp(lR - big) + np.exp(lL - big)
    first = core_m * np.exp(top - big) + mR * np.exp(lR - big) + mL * np.exp(lL - big)
    log_psi = big + np.log(mass) + norm
    u1 = (first / mass - xv) / (2 * t)
    return log_psi, u1


def burgers_cole_hopf_solve(cfg, t, x_eval=None):
    """Exact viscous solution of u_t = 2 u u_x + nu u_xx at time t.

    Periodic initial grids are evolved in Fourier space (exact heat
    flow).  Otherwise psi is the heat-kernel integral of psi(., 0) =
    exp(int phi / nu), and u_1 follows from the kernel-weighted mean of
    the source point, u_1 = (<s> - x) / 2t.
    Returns (u1 GridField, HeatFunction).
    """
    if not t > 0:
        raise ValidationError("Cole-Hopf evaluation needs t > 0")
    g = cfg.initial
    if g.periodic:
        hf = _heat_periodic(cfg, t)
        u1 = hf.drift * cfg.nu + cfg.nu * _d(hf.psi, 1) / hf.psi.values
        return g.with_values(u1), hf
    grid = g if x_eval is None else x_eval
    log_psi, u1 = _heat_kernel_window(cfg, t, grid.x)
    rel = np.exp(log_psi - np.max(log_psi))
    return grid.with_values(u1), HeatFunction(grid.with_values(rel), t, 0.0, log_psi)


def burgers_residual(u_prev, u_mid, u_next, dt, nu):
    """sup |u_t - 2 u u_x - nu u_xx| with a centred time difference."""
    ut = (u_next.values - u_prev.values) / (2 * dt)
    u = u_mid.values
    return float(np.max(np.abs(ut - 2 * u * _d(u_mid, 1) - nu * _d(u_mid, 2))))


def _operator_powers(u1, nu, n_max):
    """p_0..p_{n_max} with p_n = (nu d + u_1)^n 1."""
    p = [np.ones_like(u1.values)]
    for _ in range(n_max):
        prev = u1.with_values(p[-1])
        p.append(nu * _d(prev, 1) + u1.values * p[-1])
    return p


def burgers_momenta_formulas(u1, nu):
    """u_2, u_3, u_4 written out in u_1 and its derivatives."""
    u = u1.values
    d1, d2, d3 = _d(u1, 1), _d(u1, 2), _d(u1, 3)
    u2 = u * u / 2 + nu * d1
    u3 = u ** 3 / 3 + 2 * nu * u * d1 + nu ** 2 * d2
    u4 = (u ** 4 / 4 + 3 * nu * u * u * d1 + 2.5 * nu ** 2 * d1 * d1
          + 3 * nu ** 2 * u * d2 + nu ** 3 * d3)
    return [u, u2, u3, u4]


def momenta_from_burgers(u1, nu, M, tol=1e-8):
    """JordanState (u_1..u_M) induced by a Burgers field.

    The Schur inversion of p_n = (nu d + u_1)^n 1 is checked against the
    explicit u_2..u_4 formulas; RouteMismatch if they differ by > tol
    (relative to the field size).
    """
    if M < 1:
        raise ValidationError("need at least one momentum")
    p = _operator_powers(u1, nu, M)
    fields = np.array(schur_inverse(p, M))
    explicit = burgers_momenta_formulas(u1, nu)
    for j in range(1, min(M, 4)):
        scale = max(1.0, float(np.max(np.abs(explicit[j]))))
        gap = float(np.max(np.abs(fields[j] - explicit[j])))
        if gap > tol * scale:
            raise RouteMismatch(f"u_{j + 1}: operator route and formula differ by {gap:.3g}")
    return JordanState(u1.with_values(fields[0]), fields, 0.0)


def route_gap(u1, nu, M=4):
    """Largest difference between the two constructions of u_2..u_min(M,4)."""
    p = _operator_powers(u1, nu, M)
    fields = schur_inverse(p, M)
    explicit = burgers_momenta_formulas(u1, nu)
    return max(float(np.max(np.abs(fields[j] - explicit[j]))) for j in range(1, min(M, 4)))


def cole_hopf_jet_residual(psi, nu, state, n):
    """sup |nu^n psi^(n)/psi - p_n(u)|."""
    if not 1 <= n <= 5:
        raise ValidationError("jet identity is checked for 1 <= n <= 5")
    lhs = nu ** n * psi.jet(n)
    rhs = schur_all(list(state.fields), n)[n]
    return float(np.max(np.abs(lhs - rhs)))


def burgers_hierarchy_flow(u1, nu, k):
    """du_1/dt_k = ((nu d + u_1)^k u_1)_x."""
    if not 1 <= k <= 4:
        raise ValidationError("hierarchy flows are provided for 1 <= k <= 4")
    p = _operator_powers(u1, nu, k + 1)
    return u1.with_values(_d(u1.with_values(p[k + 1]), 1))


def constrained_reduction_residual(state, N):
    """sup |u_{N+1} - mean u_{N+1}|: zero iff the N-field truncation is exact."""
    if state.N < N + 1:
        raise ValidationError(f"state has {state.N} fields; need at least {N + 1}")
    v = state.fields[N]
    return float(np.max(np.abs(v - np.mean(v))))


def resolvent_series(u1, nu, lam, K):
    """sum_{k<=K} (i lam)^k (nu d + u_1)^k 1, truncated resolvent."""
    if K < 0:
        raise ValidationError("truncation order must be >= 0")
    p = _operator_powers(u1, nu, K)
    return sum((1j * lam) ** k * p[k] for k in range(K + 1))


# ---------------------------------------------------------------- KdV

def _kdv_rhs_hat(vh, k, dealias):
    u = np.fft.ifft(vh).real
    return 1.5j * k * dealias * np.fft.fft(u * u)


def kdv_solve(initial, t, dt=None):
    """u_t = 3 u u_x + u_xxx / 4 on a periodic grid.

    Integrating factor for the dispersive term (exact in time) and RK4 for
    the nonlinear part with 2/3 dealiasing.  The nonlinear step needs
    roughly dt <= dx / (3 max|u|); the default uses a fifth of that with
    a ceiling of 1e-3.
    """
    if not initial.periodic:
        raise ValidationError("the KdV solver needs a periodic grid")
    if t < 0:
        raise ValidationError("t must be non-negative")
    u0 = initial.values
    top0 = float(np.max(np.abs(u0)))
    if t == 0 or top0 == 0:
        return initial.with_values(u0.copy())
    if dt is None:
        dt = min(1e-3, 0.2 * initial.dx / (3 * top0))
    n = initial.n_points
    k = 2 * math.pi * np.fft.fftfreq(n, d=initial.dx)
    dealias = (np.abs(k) < (2.0 / 3.0) * np.max(np.abs(k))).astype(float)
    L = -0.25j * k ** 3  # (ik)^3 / 4
    steps = max(1, int(math.ceil(t / dt - 1e-9)))
    h = t / steps
    E = np.exp(L * h / 2)
    E2 = E * E
    vh = np.fft.fft(u0)
    for s in range(steps):
        a = h * _kdv_rhs_hat(vh, k, dealias)
        b = h * _kdv_rhs_hat(E * (vh + a / 2), k, dealias)
        c = h * _kdv_rhs_hat(E * vh + b / 2, k, dealias)
        d = h * _kdv_rhs_hat(E2 * vh + E * c, k, dealias)
        vh = E2 * vh + (E2 * a + 2 * E * (b + c) + d) / 6
        if s % 50 == 0 or s == steps - 1:
            top = float(np.max(np.abs(np.fft.ifft(vh).real)))
            if not np.isfinite(top) or top > 1e6 * top0:
                raise BlowupDetected(f"KdV amplitude grew to {top:.3g}")
    return initial.with_values(np.fft.ifft(vh).real)


def kdv_time_derivative(u1):
    u = u1.values
    return 3 * u * _d(u1, 1) + 0.25 * _d(u1, 3)


def kdv_momenta_formulas(u1):
    u = u1.values
    d1, d2, d4 = _d(u1, 1), _d(u1, 2), _d(u1, 4)
    u2 = u * u + 0.25 * d2
    u3 = 4.0 / 3.0 * u ** 3 + 0.625 * d1 * d1 + u * d2 + d4 / 16
    return [u, u2, u3]


def _kdv_recursive(u1, M, eps):
    """u_1..u_M from u_{n+1},x = u_n,t - u_1 u_n,x.

    u_n,t is the directional derivative of the map u_1 -> u_n along the
    KdV velocity, taken by a central difference of size eps.
    """
    if M == 1:
        return [u1.values.copy()]
    lower = _kdv_recursive(u1, M - 1, eps)
    un = lower[-1]
    ut = kdv_time_derivative(u1)
    if M == 2:
        un_t = ut
    else:
        scale = eps / max(1e-300, float(np.max(np.abs(ut))))
        plus = _kdv_recursive(u1.with_values(u1.values + scale * ut), M - 1, eps)[-1]
        minus = _kdv_recursive(u1.with_values(u1.values - scale * ut), M - 1, eps)[-1]
        un_t = (plus - minus) / (2 * scale)
    g = un_t - u1.values * _d(u1.with_values(un), 1)
    return lower + [_antiderivative(u1.with_values(g))]


def kdv_momenta(u1, M, eps=1e-4):
    """JordanState of the KdV reduction: formulas for u_2, u_3, recursion beyond.

    The recursion fixes each integration constant by u_n -> 0 at the left
    edge, appropriate for localised data on a wide periodic box.
    """
    if M < 1:
        raise ValidationError("need at least one momentum")
    f = kdv_momenta_formulas(u1)
    fields = f[:M]
    if M > 3:
        fields = f + _kdv_recursive(u1, M, eps)[3:]
    return JordanState(u1.with_values(fields[0]), np.array(fields), 0.0)


def kdv_route_gap(u1, eps=1e-4):
    """sup |u_3 formula - u_3 recursion|."""
    rec = _kdv_recursive(u1, 3, eps)[2]
    return float(np.max(np.abs(rec - kdv_momenta_formulas(u1)[2])))


def kdv_recursion_operator(u1, f, mean_tol=1e-10):
    """R f = f_xx / 4 + u_1 f + d^{-1}(u_1 f_x), d^{-1} anchored at the left edge."""
    if abs(float(np.mean(u1.values))) > mean_tol * max(1.0, float(np.max(np.abs(u1.values)))):
        raise MeanAmbiguity("u_1 has nonzero mean; the d^{-1} constant is undetermined")
    F = u1.with_values(f)
    return 0.25 * _d(F, 2) + u1.values * f + _antiderivative(u1.with_values(u1.values * _d(F, 1)))


def kdv_recursion_check(u1, k):
    """sup |p_k(momenta) - R^k 1| on zero-mean data."""
    if not 1 <= k <= 3:
        raise ValidationError("recursion check is provided for 1 <= k <= 3")
    f = np.ones_like(u1.values)
    for _ in range(k):
        f = kdv_recursion_operator(u1, f)
    st = kdv_momenta(u1, k)
    pk = schur_all(list(st.fields), k)[k]
    return float(np.max(np.abs(pk - f)))


def kdv_soliton(x, t, c):
    return c / np.cosh(math.sqrt(c) * (x + c * t)) ** 2


# ---------------------------------------------------------------- Euler-Lagrange

@dataclass(frozen=True)
class ElProblem:
    """a v_yy = y + tau v + (k+2) A v^(k+1) on [y_min, y_max].

    ``boundary`` optionally fixes (v(y_min), v(y_max)) when the outer
    equation has several real roots at an edge.
    """

    k: int
    a: float
    tau: float
    A: float
    domain: tuple
    n_points: int
    boundary: tuple = None

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.a == 0:
            raise ValidationError("a must be nonzero")
        if self.A == 0:
            raise ValidationError("A must be nonzero")
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValidationError("domain must be a finite interval")
        if self.n_points < 50:
            raise ValidationError("n_points must be >= 50")

    @property
    def y(self):
        return np.linspace(self.domain[0], self.domain[1], self.n_points)


def outer_roots(k, tau, A, y):
    """Real roots of y + tau v + (k+2) A v^(k+1) = 0, sorted."""
    c = np.zeros(k + 2)
    c[0] = (k + 2) * A
    c[-2] += tau
    c[-1] += y
    r = np.roots(c)
    return np.sort(r[np.abs(r.imag) < 1e-9 * (1 + np.abs(r.real))].real)


def _boundary_root(prob, y):
    r = outer_roots(prob.k, prob.tau, prob.A, y)
    if len(r) != 1:
        raise NonUniqueBranch(
            f"outer equation has {len(r)} real roots at y={y:g}: {list(np.round(r, 12))}")
    return float(r[0])


def _outer_seed(k, tau, A, y, left, right):
    """Pointwise outer root: nearest the left value on the left half, right value on the right."""
    mid = 0.5 * (y[0] + y[-1])
    out = np.empty_like(y)
    for i, yi in enumerate(y):
        r = outer_roots(k, tau, A, yi)
        target = left if yi < mid else right
        out[i] = r[np.argmin(np.abs(r - target))]
    return out


def _damped_newton(residual, solve_step, v0, tol, max_iter=200):
    v = v0.copy()
    r = residual(v)
    nr = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if nr < tol:
            return v, nr
        dv = solve_step(v, r)
        lam = 1.0
        while lam >= 1.0 / 4096:
            trial = v - lam * dv
            rt = residual(trial)
            nt = float(np.max(np.abs(rt)))
            if np.isfinite(nt) and nt < nr:
                v, r, nr = trial, rt, nt
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"damped Newton stalled at residual {nr:.3g}")
    if nr < tol:
        return v, nr
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {nr:.3g})")


def el_solve(prob, tol=1e-8, seed=None):
    """Second-order finite differences plus damped Newton.

    The residual is measured in the undivided form
    a (v_{i+1} - 2 v_i + v_{i-1})/h^2 - y_i - tau v_i - (k+2) A v_i^(k+1).
    """
    y = prob.y
    h = y[1] - y[0]
    k, a, tau, A = prob.k, prob.a, prob.tau, prob.A
    if prob.boundary is not None:
        left, right = (float(v) for v in prob.boundary)
    else:
        left, right = _boundary_root(prob, y[0]), _boundary_root(prob, y[-1])
    v0 = _outer_seed(k, tau, A, y, left, right) if seed is None else np.asarray(seed, dtype=float).copy()
    v0[0], v0[-1] = left, right
    c = (k + 2) * A

    def residual(v):
        r = np.zeros_like(v)
        r[1:-1] = a * (v[2:] - 2 * v[1:-1] + v[:-2]) / h ** 2 - y[1:-1] - tau * v[1:-1] - c * v[1:-1] ** (k + 1)
        return r

    def step(v, r):
        m = len(v) - 2
        ab = np.zeros((3, m))
        ab[0, 1:] = a / h ** 2
        ab[2, :-1] = a / h ** 2
        ab[1] = -2 * a / h ** 2 - tau - c * (k + 1) * v[1:-1] ** k
        dv = np.zeros_like(v)
        dv[1:-1] = solve_banded((1, 1), ab, r[1:-1])
        return dv

    # below this the residual is rounding noise of the stencil itself
    vmax = float(np.max(np.abs(v0)))
    noise = 16 * np.finfo(float).eps * (4 * abs(a) / h ** 2 * vmax + np.max(np.abs(y))
                                        + abs(tau) * vmax + abs(c) * vmax ** (k + 1))
    v, _ = _damped_newton(residual, step, v0, max(tol, noise))
    return GridField(y[0], h, v)


def richardson_rate(coarse, mid, fine):
    """Observed order from solutions on h, h/2, h/4 compared at the coarse nodes."""
    c = coarse.values
    m = mid.values[::2]
    f = fine.values[::4]
    if not (len(c) == len(m) == len(f)):
        raise ValidationError("grids must nest by factors of two")
    e1 = float(np.max(np.abs(c - m)))
    e2 = float(np.max(np.abs(m - f)))
    if e2 == 0:
        return math.inf
    return math.log2(e1 / e2)


def el_family(k, a, A, taus, domain, n_points, tol=1e-12):
    """el_solve over a tau sequence, each slice seeded by the previous one."""
    out = []
    seed = None
    for tau in taus:
        sol = el_solve(ElProblem(k, a, tau, A, domain, n_points), tol=tol, seed=seed)
        seed = sol.values
        out.append((float(tau), sol))
    return out


def _family_arrays(family):
    if len(family) < 3:
        raise ValidationError("need at least three tau slices")
    taus = np.array([t for t, _ in family])
    dt = np.diff(taus)
    if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
        raise ValidationError("tau slices must be increasing and equally spaced")
    g = family[0][1]
    V = np.array([s.values for _, s in family])
    if V.ndim != 2:
        raise ValidationError("tau slices must share the y grid")
    return taus, float(dt[0]), g, V


def _slice_derivs(g, v):
    f = g.with_values(v)
    return _d(f, 1), _d(f, 2), _d(f, 3)


def _tau_stencil(n_slices):
    """Centred tau-derivative weights: fourth order with five or more slices."""
    if n_slices >= 5:
        return np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    return np.array([-0.5, 0.0, 0.5])


def _tau_derivs(family):
    """(g, [(v, v_tau, v_yy_tau)]) at every slice where the stencil fits."""
    taus, dt, g, V = _family_arrays(family)
    w = _tau_stencil(len(taus))
    half = len(w) // 2
    Vyy = np.array([_slice_derivs(g, v)[1] for v in V])
    out = []
    for j in range(half, len(taus) - half):
        sl = slice(j - half, j + half + 1)
        vt = np.tensordot(w, V[sl], axes=(0, 0)) / dt
        vyyt = np.tensordot(w, Vyy[sl], axes=(0, 0)) / dt
        out.append((V[j], vt, vyyt))
    return g, out


def el_pde_residual(family, a, trim=2):
    """sup over interior slices of |v_tau - v v_y + a (v_yytau v_y - v_yyy v_tau)|.

    Centred tau differences (fourth order from five slices up); fourth-order
    y differences.  ``trim`` drops that many points at each y edge.
    """
    g, rows = _tau_derivs(family)
    worst = 0.0
    for v, vt, vyyt in rows:
        vy, _, vyyy = _slice_derivs(g, v)
        r = vt - v * vy + a * (vyyt * vy - vyyy * vt)
        worst = max(worst, float(np.max(np.abs(r[trim:len(r) - trim]))))
    return worst


def small_a_defect(family, a, trim=2):
    """sup |v_tau - v v_y + 3 a v_y^2 v_yy|: the first-order-in-a law."""
    g, rows = _tau_derivs(family)
    worst = 0.0
    for v, vt, _ in rows:
        vy, vyy, _ = _slice_derivs(g, v)
        r = vt - v * vy + 3 * a * vy * vy * vyy
        worst = max(worst, float(np.max(np.abs(r[trim:len(r) - trim]))))
    return worst


@dataclass
class RegularizedSolution:
    grid: GridField
    fields: np.ndarray  # (N, n)
    residual: float


def _algebraic_rows(N, k, tau, S, v):
    """tau + S P_{N+k-1} = 0 and P_{N+k-l+1} = 0 (l = 3..N) at one point."""
    p = schur_all(list(v), N + k)
    rows = [tau + S * p[N + k - 1]]
    for l in range(3, N + 1):
        rows.append(p[N + k - l + 1])
    return np.array(rows)


def _algebraic_branches(N, k, tau, S, v1, rs=RootSolveSpec()):
    """All real (v_2..v_N) solving the algebraic subsystem for fixed v_1."""
    def F(w):
        return _algebraic_rows(N, k, tau, S, [v1] + list(w))

    def J(w):
        v = [v1] + list(w)
        p = schur_all(v, N + k)
        idx = [N + k - 1] + [N + k - l + 1 for l in range(3, N + 1)]
        rows = []
        for r, n in enumerate(idx):
            coef = S if r == 0 else 1.0
            rows.append([coef * (p[n - m] if n - m >= 0 else 0.0) for m in range(2, N + 1)])
        return np.array(rows)

    rng = np.random.default_rng(2024)
    found = []
    for _ in range(60):
        try:
            w = newton_solve(F, J, rng.normal(scale=2.0, size=N - 1), rs)
        except JordanChainError:
            continue
        if not any(np.allclose(w, f, atol=1e-8) for f in found):
            found.append(w)
    return found


def _outer_point(N, k, tau, S, y, seed):
    """Solve the full a = 0 system y + tau v_1 + S P_{N+k} = 0 plus algebraic rows."""
    def F(v):
        p = schur_all(list(v), N + k)
        return np.concatenate([[y + tau * v[0] + S * p[N + k]], _algebraic_rows(N, k, tau, S, v)])

    def J(v):
        p = schur_all(list(v), N + k)
        idx = [N + k, N + k - 1] + [N + k - l + 1 for l in range(3, N + 1)]
        rows = []
        for r, n in enumerate(idx):
            coef = 1.0 if r >= 2 else S
            row = [coef * (p[n - m] if n - m >= 0 else 0.0) for m in range(1, N + 1)]
            if r == 0:
                row[0] += tau
            rows.append(row)
        return np.array(rows)

    return newton_solve(F, J, seed, RootSolveSpec(residual_tol=1e-11, max_iterations=200))


def _outer_path(N, k, tau, A, y):
    """a = 0 solution along y by continuation from the left edge.

    Interior points where Newton fails (the cusp of the outer profile)
    inherit the previous value; they only seed the regularised solve.
    The two edge values are always genuine roots.
    """
    n = len(y)
    out = np.zeros((n, N))
    rng = np.random.default_rng(7)
    seed = np.zeros(N)
    seed[0] = 1.0
    for _ in range(50):
        try:
            out[0] = _outer_point(N, k, tau, A, y[0], seed)
            break
        except JordanChainError:
            seed = rng.normal(scale=2.0, size=N)
    else:
        raise NoConvergence(f"no outer root at y={y[0]:g}")
    for i in range(1, n):
        try:
            out[i] = _outer_point(N, k, tau, A, y[i], out[i - 1])
        except JordanChainError:
            if i == n - 1:
                raise
            out[i] = out[i - 1]
    return out


def regularized_jordan_normal_form(N, k, a, A, tau, domain, n_points, tol=1e-8):
    """Fields v_1..v_N of the regularised N-component normal form.

    a v_1,yy = y + tau v_1 + A P_{N+k}(v), with tau + A P_{N+k-1}(v) = 0 and
    P_{N+k-l+1}(v) = 0 for l = 3..N holding pointwise; A is the weight of
    P_{N+k+1} in the normal form.  The full system is solved by sparse
    Newton; boundary values of v_1 come from the a = 0 problem.
    """
    if N < 2:
        raise ValidationError("use el_solve for one component")
    if n_points < 50:
        raise ValidationError("n_points must be >= 50")
    y = np.linspace(domain[0], domain[1], n_points)
    h = y[1] - y[0]
    n = n_points
    outer = _outer_path(N, k, tau, A, y)
    for end in (0, n - 1):
        br = _algebraic_branches(N, k, tau, A, outer[end, 0])
        if len(br) > 1:
            raise AlgebraicBranchAmbiguity(
                f"{len(br)} algebraic branches at y={y[end]:g}: {[list(np.round(b, 10)) for b in br]}")
    left, right = outer[0, 0], outer[-1, 0]
    m = N + k

    def residual(V):
        v = V.reshape(N, n)
        p = schur_all(list(v), m)
        r = np.zeros((N, n))
        r[0, 1:-1] = (a * (v[0, 2:] - 2 * v[0, 1:-1] + v[0, :-2]) / h ** 2
                      - y[1:-1] - tau * v[0, 1:-1] - A * p[m][1:-1])
        r[0, 0] = v[0, 0] - left
        r[0, -1] = v[0, -1] - right
        r[1] = tau + A * p[m - 1]
        for l in range(3, N + 1):
            r[l - 1] = p[m - l + 1]
        return r.ravel()

    def step(V, r):
        v = V.reshape(N, n)
        p = schur_all(list(v), m)
        blocks = [[None] * N for _ in range(N)]
        # EL row block
        main = np.zeros(n)
        main[1:-1] = -2 * a / h ** 2 - tau - A * p[m - 1][1:-1]
        main[0] = main[-1] = 1.0
        up = np.zeros(n - 1)
        lo = np.zeros(n - 1)
        up[1:] = a / h ** 2
        lo[:-1] = a / h ** 2
        blocks[0][0] = sparse.diags([lo, main, up], [-1, 0, 1])
        interior = np.ones(n)
        interior[0] = interior[-1] = 0.0
        for col in range(2, N + 1):
            blocks[0][col - 1] = sparse.diags(-A * p[m - col] * interior if m - col >= 0 else np.zeros(n))
        rows_idx = [m - 1] + [m - l + 1 for l in range(3, N + 1)]
        for rr, nn in enumerate(rows_idx):
            coef = A if rr == 0 else 1.0
            for col in range(1, N + 1):
                d = coef * p[nn - col] if nn - col >= 0 else np.zeros(n)
                blocks[rr + 1][col - 1] = sparse.diags(np.broadcast_to(d, (n,)).astype(float))
        Jm = sparse.bmat(blocks, format="csc")
        return spsolve(Jm, r)

    V, res = _damped_newton(residual, step, outer.T.ravel().copy(), tol)
    return RegularizedSolution(GridField(y[0], h, V.reshape(N, n)[0]), V.reshape(N, n), res)


def outer_profile(N, k, tau, A, y):
    """a = 0 solution of the regularised normal form along y."""
    return _outer_path(N, k, tau, A, np.asarray(y, dtype=float))
