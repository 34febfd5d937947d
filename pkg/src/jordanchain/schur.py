"""Elementary Schur polynomials p_n(u_1, ..., u_N).

They are the Taylor coefficients of exp(sum_k u_k z^k).  Evaluation uses
the recursion obtained from the log-derivative of that series,

    n p_n = sum_{k=1}^{min(n,N)} k u_k p_{n-k},

which costs O(n N) and works equally for floats, numpy arrays (the
fields of a grid) and exact rationals.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class FieldVector:
    u: tuple

    def __init__(self, u):
        object.__setattr__(self, "u", tuple(float(v) for v in u))
        if len(self.u) < 1:
            raise ValidationError("a field vector needs at least one component")

    @property
    def N(self):
        return len(self.u)

    def as_array(self):
        return np.array(self.u, dtype=float)


def _components(u):
    if isinstance(u, FieldVector):
        return list(u.u)
    return list(u)


def schur_all(u, n_max):
    """[p_0, ..., p_{n_max}].  Entries of u may be scalars or arrays."""
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    comps = _components(u)
    N = len(comps)
    p = [comps[0] * 0 + 1] if N else [1]
    for n in range(1, n_max + 1):
        acc = 0
        for k in range(1, min(n, N) + 1):
            acc = acc + k * comps[k - 1] * p[n - k]
        p.append(acc / n)
    return p


def schur_eval(u, n):
    """p_n(u); zero for negative n."""
    if n < 0:
        return 0.0
    return schur_all(u, n)[n]


def schur_inverse(p, N=None):
    """Recover (u_1, ..., u_N) from p_1..p_N: the log of the series.

    ``p`` lists p_0 = 1, p_1, ..., p_M.  Inverse recursion of schur_all.
    """
    M = len(p) - 1
    N = M if N is None else N
    u = []
    for n in range(1, N + 1):
        acc = n * p[n]
        for k in range(1, n):
            acc = acc - k * u[k - 1] * p[n - k]
        u.append(acc / n)
    return u


def schur_gradient(u, n):
    """Partial derivatives dp_n/du_k = p_{n-k}, k = 1..N."""
    comps = _components(u)
    p = schur_all(comps, max(n, 0))
    return [p[n - k] if n - k >= 0 else 0.0 for k in range(1, len(comps) + 1)]
