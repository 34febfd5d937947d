"""Critical points of W^(N): pointwise and grid hodograph solves.

The hodograph system is dW/du_k = W_k = 0 for k = 1..N, where W_m is the
m-th u_1-partial.  Its Jacobian is the Hankel matrix W_{j+l}.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import JordanChainError, RegularSectorViolated, ValidationError
from .numerics import GridField, RootSolveSpec, newton_solve
from .potential import eval_partials
from .schur import FieldVector, schur_all


@dataclass(frozen=True)
class HodographSolution:
    x: float
    t: float
    u: FieldVector
    residual: float
    jacobian_condition_estimate: float


def system(spec, x, t):
    """Residual and Jacobian closures of the hodograph system at (x, t)."""
    sp = spec.with_times(x, t)
    N = spec.N

    def F(u):
        W = eval_partials(sp, u, N)
        return np.array(W[1:N + 1])

    def J(u):
        W = eval_partials(sp, u, 2 * N)
        return np.array([[W[j + l] for l in range(1, N + 1)] for j in range(1, N + 1)])

    return sp, F, J


def real_roots_1d(spec, x, t):
    """Real roots of W_u = 0 for a one-component potential, sorted."""
    sp = spec.with_times(x, t)
    C = sp.combined()
    # W_u = sum_n C_n u^{n-1}/(n-1)!
    coeffs = np.array([C[n] / math.factorial(n - 1) for n in range(1, len(C))])
    coeffs = np.trim_zeros(coeffs, "b")
    if len(coeffs) <= 1:
        return np.array([])
    r = np.roots(coeffs[::-1])
    re = r[np.abs(r.imag) < 1e-7 * (1 + np.abs(r.real))].real
    return np.sort(re)


def solve_point(spec, x, t, seed, rs=RootSolveSpec()):
    seed = list(seed.u) if isinstance(seed, FieldVector) else list(seed)
    if len(seed) != spec.N:
        raise ValidationError(f"seed has {len(seed)} components, potential has N={spec.N}")
    sp, F, J = system(spec, x, t)
    u = newton_solve(F, J, seed, rs)
    res = float(np.max(np.abs(F(u))))
    cond = float(np.linalg.cond(J(u)))
    return HodographSolution(float(x), float(t), FieldVector(u), res, cond)


def regular_sector_ok(W, N):
    return abs(W[N + 1]) > 1e-8 * (1 + abs(W[N + 2]))


def derivatives_via_formula(spec, sol, time_index):
    """du_l/dt_k for l = 1..N from the triangular relation.

    Differentiating W_j = 0 along t_k gives
        sum_l W_{j+l} du_l/dt_k = -p_{k+1-j}(u),  j = 1..N,
    and W_{j+l} vanishes for j + l <= N on a solution, so the system is
    triangular with constant diagonal W_{N+1}.
    """
    N = spec.N
    sp = spec.with_times(sol.x, sol.t)
    W = eval_partials(sp, sol.u, 2 * N + 1)
    if not regular_sector_ok(W, N):
        raise RegularSectorViolated(
            f"|W_(N+1)| = {abs(W[N + 1]):.3g} is below the regular-sector threshold")
    k = time_index
    p = schur_all(list(sol.u.u), k + 1)
    rhs = [-(p[k + 1 - j] if k + 1 - j >= 0 else 0.0) for j in range(1, N + 1)]
    du = [0.0] * (N + 1)  # 1-based
    for j in range(1, N + 1):
        l = N + 1 - j
        acc = rhs[j - 1]
        for m in range(l + 1, N + 1):
            acc -= W[j + m] * du[m]
        du[l] = acc / W[N + 1]
    return np.array(du[1:])


@dataclass
class GridSolution:
    field: GridField
    residuals: np.ndarray
    failed: list
    t: float


def _initial_seed(spec, x, t, seed):
    if seed is not None:
        return list(seed.u) if isinstance(seed, FieldVector) else list(seed)
    if spec.N == 1:
        roots = real_roots_1d(spec, x, t)
        if len(roots):
            return [float(roots[np.argmin(np.abs(roots))])]
    return [0.0] * spec.N


def solve_grid(spec, grid, t, seed=None, rs=RootSolveSpec()):
    """Left-to-right continuation over the grid points at time t.

    Each point is seeded with the previous solution.  A point is flagged
    when Newton fails, when it lands outside the regular sector, or when
    it jumps by more than 10 dx max|u_x| from its neighbour (a branch
    change past a fold).
    """
    xs = grid.x
    if np.any(np.diff(xs) <= 0):
        raise ValidationError("grid must be strictly increasing")
    N = spec.N
    vals = np.full((len(xs), N), np.nan)
    res = np.full(len(xs), np.nan)
    failed = []
    current = _initial_seed(spec, xs[0], t, seed)
    prev_ux = None
    for i, x in enumerate(xs):
        try:
            sol = solve_point(spec, x, t, current, rs)
        except JordanChainError:
            failed.append(i)
            if spec.N == 1:
                roots = real_roots_1d(spec, x, t)
                if len(roots):
                    current = [float(roots[np.argmin(np.abs(roots - current[0]))])]
            continue
        u = np.array(sol.u.u)
        try:
            ux = np.abs(derivatives_via_formula(spec, sol, 0))
        except RegularSectorViolated:
            ux = None
        bad = ux is None
        if not bad and i > 0 and not np.isnan(vals[i - 1, 0]):
            bound = 10 * grid.dx * np.max(np.maximum(ux, prev_ux if prev_ux is not None else ux)) + 1e-12
            if np.max(np.abs(u - vals[i - 1])) > bound:
                bad = True
        vals[i] = u
        res[i] = sol.residual
        if bad:
            failed.append(i)
        prev_ux = ux
        current = list(u)
    values = vals[:, 0] if N == 1 else vals
    return GridSolution(grid.with_values(values), res, failed, float(t))


def trace_characteristic(spec, x_start, t_span, steps, seed=None, rs=RootSolveSpec()):
    """RK4 integration of dx/dt = -u_1(x, t).

    Returns a list of (x, t, u-tuple).  Each stage reuses the latest
    solution as a Newton seed.
    """
    t0, t1 = t_span
    h = (t1 - t0) / steps
    current = _initial_seed(spec, x_start, t0, seed)

    def speed(x, t):
        nonlocal current
        sol = solve_point(spec, x, t, current, rs)
        current = list(sol.u.u)
        return -sol.u.u[0], sol

    x, t = float(x_start), float(t0)
    _, sol = speed(x, t)
    path = [(x, t, sol.u.u)]
    for _ in range(steps):
        k1, _ = speed(x, t)
        k2, _ = speed(x + 0.5 * h * k1, t + 0.5 * h)
        k3, _ = speed(x + 0.5 * h * k2, t + 0.5 * h)
        k4, _ = speed(x + h * k3, t + h)
        x = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        t = t + h
        _, sol = speed(x, t)
        path.append((x, t, sol.u.u))
    return path


def characteristic_drift(path):
    """Spread of u_N along a characteristic; u_N is a Riemann invariant."""
    uN = np.array([p[2][-1] for p in path])
    return float(np.max(uN) - np.min(uN))
