"""The N-component Jordan system as an evolution problem.

    u_l,t = u_1 u_l,x + u_{l+1},x,   l = 1..N,  u_{N+1} = 0.

The coefficient matrix is one Jordan block with eigenvalue u_1, so there
is a single characteristic family dx/dt = -u_1 and all components are
upwinded in the same direction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BlowupDetected, CflViolation, ValidationError
from .numerics import GridField, spectral_derivative
from .schur import schur_all

BLOWUP_GROWTH = 1e6


@dataclass
class JordanState:
    """``fields`` has shape (N, n): row l-1 holds u_l on the grid."""

    grid: GridField
    fields: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.fields, dtype=float))
        if f.shape[1] != self.grid.n_points:
            raise ValidationError(
                f"fields have {f.shape[1]} points, grid has {self.grid.n_points}")
        if not np.all(np.isfinite(f)):
            raise ValidationError("Jordan state contains non-finite values")
        self.fields = f
        self.time = float(self.time)

    @property
    def N(self):
        return self.fields.shape[0]

    @classmethod
    def from_grid_solution(cls, gsol):
        """State from a hodograph GridSolution (field values (n,) or (n, N))."""
        v = gsol.field.values
        f = v[None, :] if v.ndim == 1 else v.T
        return cls(gsol.field.with_values(f[0]), f, gsol.t)

    def component(self, l):
        return self.grid.with_values(self.fields[l - 1])


def _extend(u, periodic):
    """One ghost cell on each side (periodic wrap or linear extrapolation)."""
    if periodic:
        return np.concatenate([u[:, -1:], u, u[:, :1]], axis=1)
    left = 2 * u[:, :1] - u[:, 1:2]
    right = 2 * u[:, -1:] - u[:, -2:-1]
    return np.concatenate([left, u, right], axis=1)


def _shift_up(u):
    """(u_2, ..., u_N, 0): the coupling term of each equation."""
    return np.vstack([u[1:], np.zeros((1, u.shape[1]))])


def _rhs_upwind(u, dx, periodic):
    g = _extend(u, periodic)
    back = (g[:, 1:-1] - g[:, :-2]) / dx
    fwd = (g[:, 2:] - g[:, 1:-1]) / dx
    # speed -u_1 > 0 means information arrives from the left
    use_back = (u[0] < 0)[None, :]
    d = np.where(use_back, back, fwd)
    return u[0][None, :] * d + _shift_up(d)


def _one_sided(u, dx, periodic, forward):
    g = _extend(u, periodic)
    if forward:
        return (g[:, 2:] - g[:, 1:-1]) / dx
    return (g[:, 1:-1] - g[:, :-2]) / dx


def _step_maccormack(u, dt, dx, periodic):
    # non-conservative MacCormack: second order for u_t = A(u) u_x
    d = _one_sided(u, dx, periodic, True)
    pred = u + dt * (u[0][None, :] * d + _shift_up(d))
    d2 = _one_sided(pred, dx, periodic, False)
    return 0.5 * (u + pred + dt * (pred[0][None, :] * d2 + _shift_up(d2)))


def evolve_direct(state, dt, t_end, scheme="upwind"):
    """March the Jordan system from state.time to t_end.

    ``scheme`` is "upwind" (first order) or "lax_wendroff" (the
    MacCormack two-step form of Lax-Wendroff, second order).  The last
    step is shortened to land on t_end.
    """
    if scheme not in ("upwind", "lax_wendroff"):
        raise ValidationError(f"unknown scheme {scheme!r}")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if t_end < state.time:
        raise ValidationError("t_end lies before the state time")
    g = state.grid
    dx = g.dx
    u = state.fields.copy()
    start_max = max(np.max(np.abs(u)), 1e-300)
    t = state.time
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        h = min(dt, t_end - t)
        speed = np.max(np.abs(u[0]))
        if h * speed > 0.5 * dx * (1 + 1e-12):
            raise CflViolation(f"dt={h:.3g} exceeds 0.5 dx/max|u_1| = {0.5 * dx / speed:.3g}")
        if scheme == "upwind":
            u = u + h * _rhs_upwind(u, dx, g.periodic)
        else:
            u = _step_maccormack(u, h, dx, g.periodic)
        t += h
        top = np.max(np.abs(u))
        if not np.isfinite(top) or top > BLOWUP_GROWTH * start_max:
            raise BlowupDetected(f"max|u| grew past {BLOWUP_GROWTH:g}x its initial size at t={t:.6g}")
    return JordanState(g, u, t_end)


def _check_triplet(states):
    if len(states) != 3:
        raise ValidationError("need states at t - dt, t, t + dt")
    a, b, c = states
    if not (a.fields.shape == b.fields.shape == c.fields.shape):
        raise ValidationError("states have inconsistent shapes")
    if abs((c.time - b.time) - (b.time - a.time)) > 1e-9 * max(1.0, abs(c.time - a.time)):
        raise ValidationError("states must be equally spaced in time")
    return 0.5 * (c.time - a.time)


def chain_residual(states, l):
    """sup |u_l,t - u_1 u_l,x - u_{l+1},x| at the middle time.

    Centred second-order time difference; space derivatives are spectral
    on periodic grids and fourth order otherwise.  For l = N the missing
    u_{N+1} is taken as zero.
    """
    dt = _check_triplet(states)
    a, b, c = states
    N = b.N
    if not 1 <= l <= N:
        raise ValidationError(f"component index must lie in 1..{N}")
    ut = (c.fields[l - 1] - a.fields[l - 1]) / (2 * dt)
    ux = spectral_derivative(b.component(l), 1).values
    nxt = spectral_derivative(b.component(l + 1), 1).values if l < N else 0.0
    return float(np.max(np.abs(ut - b.fields[0] * ux - nxt)))


@dataclass
class MasState:
    """y_n = p_n(u_1..u_N) for n = 1..N+1 on the grid (rows)."""

    grid: GridField
    y: np.ndarray
    time: float = 0.0

    @property
    def N(self):
        return self.y.shape[0] - 1


def to_mas(state, truncate=False):
    """MAS variables of a Jordan state.

    The extra row y_{N+1} is p_{N+1}(u) itself, or zero when
    ``truncate`` is set (the algebraic truncation).
    """
    p = schur_all(list(state.fields), state.N + 1)
    y = np.array(p[1:])
    if truncate:
        y[-1] = 0.0
    return MasState(state.grid, y, state.time)


def from_mas(mas):
    """Invert y_n = p_n(u) pointwise."""
    from .schur import schur_inverse
    p = [np.ones(mas.y.shape[1])] + list(mas.y)
    return JordanState(mas.grid, np.array(schur_inverse(p, mas.N)), mas.time)


def mas_flow_residual(mstates):
    """sup over n = 1..N of |y_n,t - y_1 y_n,x + y_n y_1,x - y_{n+1},x|."""
    if len(mstates) != 3:
        raise ValidationError("need MAS states at t - dt, t, t + dt")
    a, b, c = mstates
    dt = 0.5 * (c.time - a.time)
    if not dt > 0:
        raise ValidationError("MAS states must be increasing in time")
    g = b.grid
    dy = [spectral_derivative(g.with_values(row), 1).values for row in b.y]
    worst = 0.0
    for n in range(b.N):
        yt = (c.y[n] - a.y[n]) / (2 * dt)
        r = yt - b.y[0] * dy[n] + b.y[n] * dy[0] - dy[n + 1]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def safe_horizon(t_catastrophe, t_start=0.0, fraction=0.8):
    """Default stopping time: a fraction of the way to the first catastrophe."""
    return t_start + fraction * (t_catastrophe - t_start)
