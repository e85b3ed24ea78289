"""Implicit hodograph solutions and their elliptic-umbilic critical point."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .potentials import FOracle


class HodographError(RuntimeError):
    """Newton iteration for the hodograph system failed."""


class SingularJacobian(HodographError):
    """The hodograph Jacobian degenerates: at or past the catastrophe."""


class NonGenericCritical(ValueError):
    """f_uuv vanishes at the critical point."""


def solve_hodograph(f: FOracle, x, t: float, s: float = 0.0, guess=None,
                    tol: float = 1e-12, maxiter: int = 50, branch: int = 0):
    """Solve ``x = v t + f_u``, ``s = u t + f_v`` for ``(u, v)``.

    ``x`` may be an array; every entry is an independent 2x2 Newton solve
    started from ``guess`` (a pair of broadcastable arrays).  Steps are
    halved while they would drive ``u`` non-positive.
    """
    x = np.asarray(x, dtype=float)
    if guess is None:
        raise ValueError("solve_hodograph needs an initial guess (u, v)")
    u = np.array(np.broadcast_to(guess[0], x.shape), dtype=float)
    v = np.array(np.broadcast_to(guess[1], x.shape), dtype=float)
    scale = 1.0 + np.abs(x)
    for _ in range(maxiter):
        fu = f.partial(1, 0, u, v, branch)
        fv = f.partial(0, 1, u, v, branch)
        g1 = v * t + fu - x
        g2 = u * t + fv - s
        res = np.maximum(np.abs(g1), np.abs(g2)) / scale
        if np.all(res <= tol):
            break
        a = f.partial(2, 0, u, v, branch)
        b = f.partial(1, 1, u, v, branch) + t
        c = f.partial(0, 2, u, v, branch)
        det = a * c - b * b
        if np.any(det == 0.0) or not np.all(np.isfinite(det)):
            raise SingularJacobian("hodograph Jacobian is singular")
        du = (c * g1 - b * g2) / det
        dv = (a * g2 - b * g1) / det
        lam = np.ones_like(u)
        bad = u - du <= 0
        while np.any(bad):
            lam = np.where(bad, lam / 2, lam)
            bad = u - lam * du <= 0
            if np.any(lam < 1e-12):
                raise HodographError("Newton step keeps leaving u > 0")
        u = u - lam * du
        v = v - lam * dv
    else:
        raise HodographError(f"no convergence, max residual {np.max(res):.3e}")
    if u.ndim == 0:
        return float(u), float(v)
    return u, v


def hodograph_jacobian(f: FOracle, u, v, t: float, branch: int = 0):
    """Determinant f_uu f_vv - (t + f_uv)^2 of the hodograph map."""
    a = f.partial(2, 0, u, v, branch)
    b = f.partial(1, 1, u, v, branch) + t
    c = f.partial(0, 2, u, v, branch)
    return a * c - b * b


@dataclass(frozen=True)
class CriticalPoint:
    """Gradient-catastrophe data of a hodograph solution."""

    x0: float
    s0: float
    t0: float
    u0: float
    v0: float
    r: float
    psi: float
    f_uuu: float = math.nan
    f_uuv: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def a(self) -> complex:
        """f_uuv + i sqrt(u0) f_uuu = exp(-i psi) / r."""
        return complex(self.f_uuv, math.sqrt(self.u0) * self.f_uuu)


# starting points for the catalog Newton solves
def default_critical_guess(f: FOracle) -> tuple[float, float]:
    p = f.params
    if "alpha" in p:
        al = p["alpha"]
        return 4.0 * (1 - 16 * al * al), -16.0 * al
    A0 = p.get("A0", 1.0)
    mu = p.get("mu", 0.0)
    return 2.0 * A0 ** 2 + mu, 0.0


def find_critical_point(f: FOracle, guess=None, s: float = 0.0,
                        tol: float = 1e-13, maxiter: int = 60,
                        cos_margin: float = 1e-8) -> CriticalPoint:
    """Locate the catastrophe of the hodograph solution on the slice ``s``.

    Solves f_uu = 0 (equivalently f_vv = 0) together with
    f_v - u f_uv = s, then t0 = -f_uv, x0 = v0 t0 + f_u, s0 = u0 t0 + f_v.
    """
    if guess is None:
        guess = default_critical_guess(f)
    u, v = map(float, guess)
    for _ in range(maxiter):
        j = f.jet(u, v, order=3)
        g1 = j[(2, 0)]
        g2 = j[(0, 1)] - u * j[(1, 1)] - s
        if max(abs(g1), abs(g2)) < tol:
            break
        m = np.array([[j[(3, 0)], j[(2, 1)]],
                      [-u * j[(2, 1)], j[(0, 2)] - u * j[(1, 2)]]])
        du, dv = np.linalg.solve(m, [g1, g2])
        u, v = u - du, v - dv
        if u <= 0:
            raise HodographError("critical-point Newton left u > 0")
    else:
        raise HodographError("critical-point Newton did not converge")
    j = f.jet(u, v, order=3)
    t0 = -j[(1, 1)]
    x0 = v * t0 + j[(1, 0)]
    s0 = u * t0 + j[(0, 1)]
    a = complex(j[(2, 1)], math.sqrt(u) * j[(3, 0)])
    r = 1.0 / abs(a)
    psi = -math.atan2(a.imag, a.real)
    if psi <= -math.pi:
        psi += 2 * math.pi
    if abs(math.cos(psi)) < cos_margin:
        raise NonGenericCritical("f_uuv vanishes at the critical point")
    return CriticalPoint(x0=float(x0), s0=float(s0), t0=float(t0), u0=u, v0=v,
                         r=r, psi=psi, f_uuu=float(j[(3, 0)]), f_uuv=float(j[(2, 1)]))


def nonsymmetric_closed_form(alpha: float) -> dict:
    """Published closed forms of the critical point of f1 + alpha f2."""
    lg = math.log((1 + 4 * alpha) / (1 - 4 * alpha))
    u0 = 4 * (1 - 16 * alpha ** 2)
    return dict(u0=u0, v0=-16 * alpha, x0=lg / 2, t0=0.25 - alpha / 2 * lg, r=8 * u0,
                psi=-math.atan(alpha * math.sqrt(1 - 16 * alpha ** 2) / (0.125 - 4 * alpha ** 2)))


def semiclassical_profile(f: FOracle, x, t: float, ic_u, ic_v, nsteps: int | None = None,
                          s: float = 0.0):
    """Hodograph solution on a grid at time ``t`` by continuation in time.

    ``ic_u``/``ic_v`` are the t = 0 values on the same grid; the solution is
    followed through ``nsteps`` intermediate times with vectorized Newton.
    """
    x = np.asarray(x, dtype=float)
    u, v = np.array(ic_u, dtype=float), np.array(ic_v, dtype=float)
    if nsteps is None:
        nsteps = max(4, int(math.ceil(abs(t) / 0.01)))
    # first step guess from u_t = -(uv)_x, v_t = u_x - v v_x; symmetric data
    # sit on a branch cut at t = 0 and need to be pushed to the right side
    ux, vx = np.gradient(u, x), np.gradient(v, x)
    dt = t / nsteps
    u = u - dt * (u * vx + v * ux)
    v = v + dt * (ux - v * vx)
    for k in range(1, nsteps + 1):
        u, v = solve_hodograph(f, x, t * k / nsteps, s, guess=(u, v))
    return u, v
