"""Hodograph potentials f(u, v) with f_vv + u f_uu = 0.

Every catalog potential is written symbolically in terms of ``u``, ``v``,
a few auxiliary radicals and logarithm arguments, and the model
parameters.  Partial derivatives are produced lazily by sympy using the
chain rule for the auxiliary symbols (so no fractional power ever reaches
numpy's principal branch), then compiled with :func:`sympy.lambdify`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

U, V = sp.symbols("u v")


class DomainError(ValueError):
    """Raised when a potential is requested outside its parameter range."""


@dataclass(frozen=True, eq=False)
class _Family:
    """Symbolic description shared by all members of a potential family."""

    name: str
    expr: sp.Expr
    params: tuple[sp.Symbol, ...]
    aux: tuple[sp.Symbol, ...]
    # aux symbol -> (d/du, d/dv) in terms of u, v, aux, params
    rules: dict[sp.Symbol, tuple[sp.Expr, sp.Expr]] = field(default_factory=dict)
    take_real: bool = False

    @functools.cached_property
    def _derivs(self) -> dict[tuple[int, int], sp.Expr]:
        return {(0, 0): self.expr}

    def symbolic(self, i: int, j: int) -> sp.Expr:
        cache = self._derivs
        if (i, j) in cache:
            return cache[(i, j)]
        if i > 0:
            base, var = self.symbolic(i - 1, j), U
        else:
            base, var = self.symbolic(i, j - 1), V
        k = 0 if var is U else 1
        out = sp.diff(base, var)
        for a in self.aux:
            out += sp.diff(base, a) * self.rules[a][k]
        cache[(i, j)] = out
        return out

    @functools.lru_cache(maxsize=None)
    def compiled(self, i: int, j: int) -> Callable:
        expr = self.symbolic(i, j)
        args = (U, V, *self.aux, *self.params)
        return sp.lambdify(args, expr, modules="numpy", cse=True)


class FOracle:
    """A potential f(u, v) together with all of its partial derivatives.

    ``partial(i, j, u, v)`` returns d^{i+j} f / du^i dv^j.  Inputs broadcast
    like numpy arrays.  ``u_range``/``v_range`` describe the region where the
    closed form is trusted.
    """

    max_order = 6

    def __init__(self, family: _Family, values: dict[str, complex],
                 aux_eval: Callable, label: str,
                 u_range=(0.0, math.inf), v_range=(-math.inf, math.inf)):
        self._family = family
        self._values = values
        self._aux_eval = aux_eval
        self.label = label
        self.u_range = u_range
        self.v_range = v_range

    def __repr__(self):
        return f"FOracle({self.label})"

    @property
    def params(self) -> dict[str, complex]:
        return dict(self._values)

    def _param_args(self):
        return [self._values[p.name] for p in self._family.params]

    def partial(self, i: int, j: int, u, v, branch: int = 0):
        if i < 0 or j < 0 or i + j > self.max_order:
            raise ValueError(f"derivative order ({i}, {j}) not available")
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        aux = self._aux_eval(u, v, self._values, branch)
        fn = self._family.compiled(i, j)
        val = fn(u, v, *aux, *self._param_args())
        val = np.asarray(val)
        if self._family.take_real or np.iscomplexobj(val):
            val = np.real(val)
        val = np.broadcast_to(val, np.broadcast(u, v).shape).astype(float)
        return val[()] if val.ndim == 0 else val

    def __call__(self, u, v, branch: int = 0):
        return self.partial(0, 0, u, v, branch)

    def jet(self, u, v, order: int = 3, branch: int = 0) -> dict[tuple[int, int], np.ndarray]:
        """All partials with total order <= ``order`` at (u, v)."""
        return {(i, n - i): self.partial(i, n - i, u, v, branch)
                for n in range(order + 1) for i in range(n + 1)}

    def pde_residual(self, u, v, branch: int = 0):
        """f_vv + u f_uu, which vanishes identically for an admissible f."""
        return (self.partial(0, 2, u, v, branch)
                + np.asarray(u) * self.partial(2, 0, u, v, branch))


# ---------------------------------------------------------------------------
# radical helpers

def _branch_sqrt(q, branch: int):
    # branch=+1/-1 moves the cut off the negative real axis so that values on
    # it are continued from above/below.
    q = np.asarray(q, dtype=complex)
    if branch == 0:
        return np.sqrt(q)
    rot = np.exp(0.25j * np.pi * branch)
    return rot * np.sqrt(q / rot ** 2)


def _sheet_log_arg(shift, d, u):
    # shift + d, evaluated without cancellation using (shift+d)(d-shift) = u
    direct = shift + d
    other = d - shift
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = u / other
    use = np.abs(direct) < np.abs(other)
    return np.where(use, stable, direct)


# ---------------------------------------------------------------------------
# symmetric family: u = A0^2 sech^2 x, v = -mu tanh x

_M, _A0, _MU = sp.symbols("M A0 mu")
_Dp, _Dm, _Lp, _Lm = sp.symbols("Dp Dm Lp Lm")


def _symmetric_family() -> _Family:
    # Lp = -v/2 + M + Dp, Lm = -v/2 - M + Dm, Dp^2 = (-v/2+M)^2 + u
    expr = (_MU / 2 * V - (V - 2 * _M) * _Dp / 4 - (V + 2 * _M) * _Dm / 4
            - U * sp.log(U) / 2 + U * (sp.log(_Lp) + sp.log(_Lm)) / 2)
    rules = {
        _Dp: (1 / (2 * _Dp), (V / 2 - _M) / (2 * _Dp)),
        _Dm: (1 / (2 * _Dm), (V / 2 + _M) / (2 * _Dm)),
        _Lp: (1 / (2 * _Dp), -_Lp / (2 * _Dp)),
        _Lm: (1 / (2 * _Dm), -_Lm / (2 * _Dm)),
    }
    return _Family("symmetric", expr, (_M, _MU), (_Dp, _Dm, _Lp, _Lm), rules,
                   take_real=True)


def _symmetric_aux(u, v, values, branch):
    m = values["M"]
    sp_ = -v / 2 + m
    sm = -v / 2 - m
    dp = _branch_sqrt(sp_ ** 2 + u, branch)
    if np.imag(m) != 0.0:
        dm = np.conj(dp)
    else:
        dm = _branch_sqrt(sm ** 2 + u, 0)
    return dp, dm, _sheet_log_arg(sp_, dp, u), _sheet_log_arg(sm, dm, u)


# ---------------------------------------------------------------------------
# mu = 2, A0 = 1 and its non-symmetric deformation f1 + alpha f2

_AL = sp.symbols("alpha")
_D, _L = sp.symbols("D L")


def _tvz_family() -> _Family:
    # D = sqrt(v^2/4 + u), L = -v/2 + D
    f1 = V - V / 2 * _D + U * (sp.log(_L) - sp.log(U) / 2)
    f2 = 2 * U * _D - sp.Rational(2, 3) * _D ** 3 + U * V * (sp.log(_L) - sp.log(U) / 2)
    rules = {
        _D: (1 / (2 * _D), V / (4 * _D)),
        _L: (1 / (2 * _D), -_L / (2 * _D)),
    }
    return _Family("tvz", f1 + _AL * f2, (_AL,), (_D, _L), rules)


def _tvz_aux(u, v, values, branch):
    d = np.sqrt(v ** 2 / 4 + u)
    return d, _sheet_log_arg(-v / 2, d, u)


@functools.lru_cache(maxsize=None)
def _family(name: str) -> _Family:
    return {"symmetric": _symmetric_family, "tvz": _tvz_family}[name]()


# ---------------------------------------------------------------------------
# public catalog

CATALOG = ("satsuma_yajima", "symmetric_mu", "tvz_mu2", "nonsymmetric")


def symmetric_mu(A0: float = 1.0, mu: float = 0.0) -> FOracle:
    """Potential for u(x,0) = A0^2 sech^2 x, v(x,0) = -mu tanh x."""
    if not A0 > 0:
        raise DomainError("A0 must be positive")
    if mu < 0:
        raise DomainError("mu must be non-negative")
    m = complex(np.sqrt(complex(mu ** 2 / 4 - A0 ** 2)))
    if m.imag == 0.0:
        m = complex(abs(m.real), 0.0)
    values = {"M": m, "mu": float(mu), "A0": float(A0)}
    label = f"symmetric_mu(A0={A0:g}, mu={mu:g})"
    return FOracle(_family("symmetric"), values, _symmetric_aux, label)


def satsuma_yajima(A0: float = 1.0) -> FOracle:
    """Potential for u(x,0) = A0^2 sech^2 x with zero initial velocity."""
    f = symmetric_mu(A0, 0.0)
    f.label = f"satsuma_yajima(A0={A0:g})"
    return f


def nonsymmetric(alpha: float) -> FOracle:
    """f1 + alpha f2, where f1 is the mu = 2 potential and f2_v = f1 - v."""
    if not abs(alpha) < 0.25:
        raise DomainError("nonsymmetric family needs |alpha| < 1/4")
    values = {"alpha": float(alpha)}
    return FOracle(_family("tvz"), values, _tvz_aux, f"nonsymmetric(alpha={alpha:g})")


def tvz_mu2() -> FOracle:
    """The mu = 2, A0 = 1 member written in real radicals."""
    f = nonsymmetric(0.0)
    f.label = "tvz_mu2"
    return f


def from_expression(expr: sp.Expr, label: str = "custom") -> FOracle:
    """Wrap a closed-form sympy expression in ``u`` and ``v``."""
    fam = _Family(label, sp.sympify(expr), (), ())
    return FOracle(fam, {}, lambda u, v, values, branch: (), label)


def nls_hamiltonian_density() -> FOracle:
    """f = (u v^2 - u^2) / 2, the dispersionless NLS Hamiltonian density."""
    return from_expression((U * V ** 2 - U ** 2) / 2, "nls_hamiltonian")


def toda_density() -> FOracle:
    """g = -v^2/2 + u (log u - 1), the Toda Hamiltonian density."""
    return from_expression(-V ** 2 / 2 + U * (sp.log(U) - 1), "toda")


def catalog_f(name: str, **params) -> FOracle:
    """Look up a catalog potential by name."""
    if name == "satsuma_yajima":
        return satsuma_yajima(params.get("A0", 1.0))
    if name == "symmetric_mu":
        return symmetric_mu(params.get("A0", 1.0), params.get("mu", 0.0))
    if name == "tvz_mu2":
        return tvz_mu2()
    if name == "nonsymmetric":
        return nonsymmetric(params.get("alpha", 0.1))
    raise KeyError(f"unknown potential {name!r}; choose from {CATALOG}")
