"""Local structure of the dispersionless solution near the catastrophe."""

from __future__ import annotations

import math

import numpy as np

from .solve import CriticalPoint


class RestrictionError(ValueError):
    """(S + cos psi)^2 + (X + sin psi)^2 vanishes, or cos psi = 0."""


def _check(X, S, psi):
    c, s = math.cos(psi), math.sin(psi)
    if c == 0.0 or abs(c) < 1e-14:
        raise RestrictionError("cos(psi) = 0: non-generic critical point")
    if np.any((np.asarray(S) + c) ** 2 + (np.asarray(X) + s) ** 2 == 0.0):
        raise RestrictionError("(X, S) sits on the branch point")
    return c, s


def local_R_P0_Q0(X, S, psi: float):
    """The functions R, P0, Q0 of the rescaled local variables."""
    X = np.asarray(X, dtype=float)
    S = np.asarray(S, dtype=float)
    c, s = _check(X, S, psi)
    delta = np.sqrt(1 + 2 * (X * s + S * c) + X ** 2 + S ** 2)
    R = math.copysign(1.0, c) * np.sqrt(1 + X * s + S * c + delta)
    rot = X * c - S * s
    P0 = (R * c - rot * s / R) / math.sqrt(2) - c
    Q0 = (rot * c / R + R * s) / math.sqrt(2) - s
    if R.ndim == 0:
        return float(R), float(P0), float(Q0)
    return R, P0, Q0


def local_coords(cp: CriticalPoint, x, s, t):
    """(X, S, T) of a physical point relative to the critical point."""
    T = np.asarray(t, dtype=float) - cp.t0
    if np.any(T == 0):
        raise RestrictionError("local coordinates need t != t0")
    xb = np.asarray(x, dtype=float) - cp.x0
    sb = np.asarray(s, dtype=float) - cp.s0
    X = 2 * math.sqrt(cp.u0) * (xb - cp.v0 * T) / (cp.r * T ** 2)
    S = 2 * (sb - cp.u0 * T) / (cp.r * T ** 2)
    return X, S, T


def local_solution(cp: CriticalPoint, x, s, t):
    """Leading-order (u, v) of the dispersionless solution for t < t0."""
    X, S, T = local_coords(cp, x, s, t)
    if np.any(T > 0):
        raise RestrictionError("the local formula is for t < t0")
    _, P0, Q0 = local_R_P0_Q0(X, S, cp.psi)
    u = cp.u0 + cp.r * T * P0
    v = cp.v0 + cp.r / math.sqrt(cp.u0) * T * Q0
    return u, v


def from_local_coords(cp: CriticalPoint, X, S, T):
    """Physical (x, s, t) for given rescaled coordinates."""
    x = cp.x0 + cp.v0 * T + cp.r * np.asarray(X) * T ** 2 / (2 * math.sqrt(cp.u0))
    s = cp.s0 + cp.u0 * T + cp.r * np.asarray(S) * T ** 2 / 2
    return x, s, cp.t0 + T


def quadratic_root_w(X, S, psi: float, tbar: float, r: float):
    """The root w = u-bar + i sqrt(u0) v-bar of the local quadratic equation.

    Continued from the principal branch on the positive reals; for
    cos(psi) < 0 this is sign(cos psi) times the principal root.
    """
    if not tbar < 0:
        raise RestrictionError("the selected root is defined for tbar < 0")
    c, _ = _check(X, S, psi)
    e = np.exp(1j * psi)
    z = 1 + (np.asarray(S) + 1j * np.asarray(X)) / e
    return r * tbar * e * (math.copysign(1.0, c) * np.sqrt(z) - 1)


def quadratic_residual(w, X, S, psi: float, tbar: float, r: float):
    """z - tbar w - a w^2 / 2 with z = r tbar^2 (S + iX) / 2, a = exp(-i psi)/r."""
    z = r * tbar ** 2 * (np.asarray(S) + 1j * np.asarray(X)) / 2
    a = np.exp(-1j * psi) / r
    return z - tbar * w - a * w ** 2 / 2


def local_maximum(cp: CriticalPoint, S, T):
    """Location X* = S tan(psi) and value of max_X u for the local formula.

    Here ``S`` is the rescaled Toda-time and ``T`` < 0.  The value is
    u0 - r T cos(psi) - sqrt(r) |cos psi| sqrt(2 s'/cos psi + r T^2) with
    s' = r S T^2 / 2.
    """
    c = math.cos(cp.psi)
    sp_ = cp.r * np.asarray(S) * T ** 2 / 2
    X = np.asarray(S) * math.tan(cp.psi)
    val = cp.u0 - cp.r * T * c - math.sqrt(cp.r) * abs(c) * np.sqrt(2 * sp_ / c + cp.r * T ** 2)
    return X, val


def far_field(cp: CriticalPoint, x, tbar: float, side: int):
    """Large-|x| behaviour of the local solution (x is x-bar - v0 t-bar)."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    c, s = math.cos(cp.psi), math.sin(cp.psi)
    root = np.sqrt(cp.r * np.abs(x))
    q = cp.u0 ** 0.25
    u = -root * q * math.sqrt(1 - side * s) + cp.u0 - cp.r * tbar * c
    v = (-side * root / q * math.copysign(1.0, c) * math.sqrt(1 + side * s)
         + cp.v0 - cp.r / math.sqrt(cp.u0) * tbar * s)
    return u, v


def cusp_profile(cp: CriticalPoint, xhat):
    """u at t = t0 near x0 on the S = 0 chart, xhat = sqrt(u0)(x-bar - v0 t-bar)."""
    xhat = np.asarray(xhat, dtype=float)
    s = math.sin(cp.psi)
    k = np.where(xhat > 0, math.sqrt(1 - s), math.sqrt(1 + s))
    out = cp.u0 - np.sqrt(cp.r * np.abs(xhat)) * k
    return float(out) if out.ndim == 0 else out


def umbilic_potential(U, V, a_plus: float, a_minus: float):
    return (U ** 3 - 3 * U * V ** 2) / 6 + a_plus * U + a_minus * V


def umbilic_gradient(U, V, a_plus: float, a_minus: float):
    return (U ** 2 - V ** 2) / 2 + a_plus, -U * V + a_minus


def umbilic_stationary_points(a_plus: float, a_minus: float) -> list[tuple[float, float]]:
    """Both critical points of the elliptic-umbilic unfolding F."""
    if a_plus == 0 and a_minus == 0:
        raise ValueError("a_plus = a_minus = 0 is the degenerate umbilic itself")
    root = np.sqrt(complex(-2 * a_plus, -2 * a_minus))
    # root = U - iV
    return [(float(root.real), float(-root.imag)), (float(-root.real), float(root.imag))]
