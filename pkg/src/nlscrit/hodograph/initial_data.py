"""Recover Cauchy data (u, v, S)(x) from a potential via x = f_u, f_v = 0."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq, minimize

from .potentials import FOracle


class InitialDataError(RuntimeError):
    """No root of the data equations near the continuation guess."""


class GibbsRiskWarning(UserWarning):
    """Analytic tails and the interior interpolant disagree at a splice point."""


def catalog_guess(f: FOracle, x):
    """Seed values for the data equations: the symmetric closed forms."""
    p = f.params
    x = np.asarray(x, dtype=float)
    if "alpha" in p:
        return 1.0 / np.cosh(x) ** 2, -2.0 * np.tanh(x)
    A0 = p.get("A0", 1.0)
    return A0 ** 2 / np.cosh(x) ** 2, -p.get("mu", 0.0) * np.tanh(x)


def _newton_point(f, x, u, v, tol=1e-13, maxiter=40):
    # unknowns (log u, v); symmetric data live on a branch cut whose side is
    # fixed by the sign of x
    br = 1 if x >= 0 else -1
    lu = math.log(u)
    for _ in range(maxiter):
        u = math.exp(lu)
        g1 = float(f.partial(1, 0, u, v, br)) - x
        g2 = float(f.partial(0, 1, u, v, br))
        if abs(g1) <= tol * (1 + abs(x)) and abs(g2) <= tol:
            return u, v
        a = float(f.partial(2, 0, u, v, br))
        b = float(f.partial(1, 1, u, v, br))
        c = float(f.partial(0, 2, u, v, br))
        J = np.array([[u * a, b], [u * b, c]])
        try:
            dlu, dv = np.linalg.solve(J, [g1, g2])
        except np.linalg.LinAlgError:
            break
        if not (np.isfinite(dlu) and np.isfinite(dv)):
            break
        step = 1.0
        while abs(step * dlu) > 2.0:
            step /= 2
        lu -= step * dlu
        v -= step * dv
    return None


def _simplex_point(f, x, u, v):
    br = 1 if x >= 0 else -1

    def obj(p):
        uu = math.exp(p[0])
        return ((float(f.partial(1, 0, uu, p[1], br)) - x) ** 2
                + float(f.partial(0, 1, uu, p[1], br)) ** 2)

    res = minimize(obj, [math.log(u), v], method="Nelder-Mead",
                   options=dict(xatol=1e-14, fatol=1e-28, maxiter=4000))
    return math.exp(res.x[0]), float(res.x[1])


def solve_data_equations(f: FOracle, x, guess=None):
    """Solve x = f_u(u, v), 0 = f_v(u, v) at each point of ``x``.

    Points are visited outward from the one nearest the origin; each solve
    starts from a linear extrapolation of its two predecessors (or the
    catalog guess near the seed).  A Nelder-Mead minimization of the squared
    residual is used when Newton fails, followed by a Newton polish.
    """
    x = np.asarray(x, dtype=float)
    gu, gv = catalog_guess(f, x) if guess is None else guess
    u = np.empty_like(x)
    v = np.empty_like(x)
    seed = int(np.argmin(np.abs(x)))
    order_right = [i for i in np.argsort(x) if x[i] >= x[seed]]
    order_left = [i for i in np.argsort(x)[::-1] if x[i] <= x[seed]]
    for order in (order_right, order_left):
        prev = []
        for i in order:
            if i == seed and prev == [] and order is order_left:
                prev.append(i)
                continue
            if len(prev) >= 2 and abs(x[prev[-1]] - x[prev[-2]]) > 0:
                j, k = prev[-1], prev[-2]
                w = (x[i] - x[j]) / (x[j] - x[k])
                lu = math.log(u[j]) + w * (math.log(u[j]) - math.log(u[k]))
                g = (math.exp(lu), v[j] + w * (v[j] - v[k]))
            elif prev:
                g = (u[prev[-1]], v[prev[-1]])
            else:
                g = (float(gu[i]), float(gv[i]))
            sol = _newton_point(f, x[i], *g)
            if sol is None:
                sol = _newton_point(f, x[i], *_simplex_point(f, x[i], *g))
            if sol is None:
                raise InitialDataError(f"no root of the data equations at x = {x[i]:.6g}")
            u[i], v[i] = sol
            prev.append(i)
    return u, v


# ---------------------------------------------------------------------------
# analytic tails of the non-symmetric family

def tail_velocities(alpha: float) -> tuple[float, float]:
    """Limits (v_plus at x -> -inf, v_minus at x -> +inf) of v for f1 + alpha f2.

    They are the roots of f_v(0, v) = 0, i.e. alpha v^2 + 2 v -+ 4 = 0.
    """
    if alpha == 0:
        return 2.0, -2.0
    return ((math.sqrt(1 + 4 * alpha) - 1) / alpha,
            (math.sqrt(1 - 4 * alpha) - 1) / alpha)


def tail_velocities_printed(alpha: float) -> tuple[float, float]:
    """(sqrt(1 +- alpha) - 1) / alpha, the constants as printed in the source."""
    return ((math.sqrt(1 + alpha) - 1) / alpha, (math.sqrt(1 - alpha) - 1) / alpha)


def tail_velocities_numeric(f: FOracle, u_small: float = 1e-14) -> tuple[float, float]:
    """Roots of f_v(u_small, v) = 0 nearest the origin, one of each sign.

    f_v(0, v) is quadratic in v with a second negative root near -2/alpha,
    so the brackets stop at |v| = 1/alpha.
    """
    g = lambda vv: float(f.partial(0, 1, u_small, vv))
    a = abs(float(f.params.get("alpha", 0.0))) or 0.1
    return (brentq(g, 0.05, 1 / a, xtol=1e-15, rtol=1e-15),
            brentq(g, -1 / a, -0.05, xtol=1e-15, rtol=1e-15))


def _tail_exponent(alpha: float, side: int):
    # u = v_inf^2 exp(k (x - x_star)); returns (v_inf, kappa, k, x_star)
    vp, vm = tail_velocities(alpha)
    vinf = vp if side < 0 else vm
    kappa = alpha * vinf
    sig = -side
    return vinf, kappa, 2 * sig / (1 + kappa), sig * alpha * vinf


def nonsymmetric_tails(alpha: float, x, side: int):
    """Leading-order (u, v) for x -> -inf (side=-1) or x -> +inf (side=+1).

    With v_inf the limiting velocity, kappa = alpha v_inf and g the exponent,
    u = v_inf^2 e^g and v = v_inf - v_inf e^g (2 + kappa - kappa g)/(1 + kappa).
    """
    x = np.asarray(x, dtype=float)
    vinf, kappa, k, xs = _tail_exponent(alpha, side)
    g = k * (x - xs)
    e = np.exp(g)
    return vinf ** 2 * e, vinf - vinf * e * (2 + kappa - kappa * g) / (1 + kappa)


def _tail_phase(alpha: float, x, side: int, x_join: float):
    # closed-form antiderivative of the tail v, zero at x_join
    vinf, kappa, k, xs = _tail_exponent(alpha, side)
    c0, c1 = (2 + kappa) / (1 + kappa), kappa / (1 + kappa)

    def prim(xx):
        g = k * (xx - xs)
        return vinf * xx - vinf * np.exp(g) * (c0 + c1 - c1 * g) / k

    return prim(np.asarray(x, dtype=float)) - prim(x_join)


# ---------------------------------------------------------------------------

@dataclass
class InitialDataCurve:
    """Cauchy data u(x) > 0, v(x), phase S(x) with S' = v.

    Samples live on Chebyshev points of ``interval``; evaluation elsewhere
    uses the analytic tails when the family provides them.
    """

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    S: np.ndarray
    interval: tuple[float, float]
    label: str = ""
    _series: dict = field(default_factory=dict, repr=False)
    alpha: float | None = None
    splice_mismatch: float = 0.0

    def __call__(self, xq):
        """(u, v, S) at arbitrary points."""
        xq = np.asarray(xq, dtype=float)
        a, b = self.interval
        inside = (xq >= a) & (xq <= b)
        u = np.zeros_like(xq)
        v = np.zeros_like(xq)
        S = np.zeros_like(xq)
        u[inside] = np.exp(self._series["logu"](xq[inside]))
        v[inside] = self._series["v"](xq[inside])
        S[inside] = self._series["S"](xq[inside])
        for side, mask, edge in ((-1, xq < a, a), (1, xq > b, b)):
            if not np.any(mask):
                continue
            if self.alpha is None:
                raise ValueError(f"{self.label}: no tail model outside {self.interval}")
            tu, tv = nonsymmetric_tails(self.alpha, xq[mask], side)
            u[mask] = tu
            v[mask] = tv
            S[mask] = self._series["S"](edge) + _tail_phase(self.alpha, xq[mask], side, edge)
        return u, v, S

    def to_csv(self, path, xq=None):
        xq = self.x if xq is None else np.asarray(xq)
        u, v, S = self(xq)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("x,u,v,S\n")
            for row in zip(xq, u, v, S):
                fh.write(",".join(f"{val:.17g}" for val in row) + "\n")


def chebyshev_points(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n + 1)
    return (a + b) / 2 + (b - a) / 2 * np.cos(np.pi * k / n)[::-1]


def reconstruct_initial_data(f: FOracle, interval=None, n: int = 513,
                             splice_tol: float = 1e-6) -> InitialDataCurve:
    """Cauchy data of the potential ``f`` on a Chebyshev grid.

    The default interval is [-15, 11] for the non-symmetric family, whose
    exponential tails are spliced in analytically outside it, and
    [-10 pi, 10 pi] for the symmetric families.  ``n`` should be odd for
    symmetric data so the branch point at x = 0 is not a node.
    """
    p = f.params
    alpha = p.get("alpha")
    if interval is None:
        interval = (-15.0, 11.0) if alpha is not None else (-10 * math.pi, 10 * math.pi)
    a, b = interval
    x = chebyshev_points(a, b, n)
    u, v = solve_data_equations(f, x)
    dom = [a, b]
    logu = C.Chebyshev.fit(x, np.log(u), n, domain=dom)
    vs = C.Chebyshev.fit(x, v, n, domain=dom)
    Ss = vs.integ()
    ref = 0.0 if a <= 0.0 <= b else a
    Ss = Ss - Ss(ref)
    curve = InitialDataCurve(x=x, u=u, v=v, S=Ss(x), interval=(a, b), label=f.label,
                             _series=dict(logu=logu, v=vs, S=Ss),
                             alpha=None if alpha is None else float(alpha))
    if alpha is not None:
        mism = 0.0
        for side, edge in ((-1, a), (1, b)):
            tu, tv = nonsymmetric_tails(alpha, edge, side)
            iu = math.exp(logu(edge))
            mism = max(mism, abs(float(tu) - iu) / iu, abs(float(tv) - vs(edge)))
        curve.splice_mismatch = mism
        if mism > splice_tol:
            warnings.warn(f"tail splice mismatch {mism:.2e}", GibbsRiskWarning, stacklevel=2)
    return curve
