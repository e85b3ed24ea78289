"""Painleve-I multiscale approximation near the gradient catastrophe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hodograph.solve import CriticalPoint, semiclassical_profile
from .nls import WaveField, to_madelung
from .painleve import ComplexLine, TritronqueeLine, solve_line


class ChartError(ValueError):
    pass


class Omega0Lines:
    """Tritronquee values along straight lines, one cached solve per line."""

    def __init__(self, h: float = 2.5e-3, tol: float = 1e-10, min_radius: float = 10.0):
        self.h = h
        self.tol = tol
        self.min_radius = min_radius
        self._cache: dict[tuple, TritronqueeLine] = {}

    def line_for(self, a: complex, b: complex, y_needed: float) -> TritronqueeLine:
        y0 = max(self.min_radius + abs(b) + 1.0, y_needed + 1.0)
        y0 = math.ceil(y0)
        key = (round(a.real, 14), round(a.imag, 14), round(b.real, 14), round(b.imag, 14), y0)
        sol = self._cache.get(key)
        if sol is None:
            n = int(math.ceil(2 * y0 / self.h))
            sol = solve_line(ComplexLine(a, b, y0, n), tol=self.tol)
            self._cache[key] = sol
        return sol

    def along(self, a: complex, b: complex, y):
        y = np.asarray(y, dtype=float)
        sol = self.line_for(a, b, float(np.max(np.abs(y))) if y.size else 0.0)
        # the line stores a canonical direction, possibly -a
        s = 1.0 if abs(sol.line.a - a) < 1e-12 else -1.0
        return sol(s * y)

    def __len__(self):
        return len(self._cache)


_DEFAULT_LINES = Omega0Lines()


@dataclass(frozen=True)
class ConjectureChart:
    """Affine map (x, t) -> zeta of the multiscale formula for the NLS flow."""

    cp: CriticalPoint
    epsilon: float

    def __post_init__(self):
        if not math.cos(self.cp.psi) > 0:
            raise ChartError("the multiscale formula is used only for cos(psi) > 0")
        if not self.epsilon > 0:
            raise ChartError("epsilon must be positive")

    @property
    def scale(self) -> float:
        """(3 r / u0^2)^(1/5)."""
        return (3 * self.cp.r / self.cp.u0 ** 2) ** 0.2

    @property
    def amplitude(self) -> complex:
        cp = self.cp
        return 2 * self.epsilon ** 0.4 * (3 * cp.r * math.sqrt(cp.u0)) ** 0.4 * np.exp(0.4j * cp.psi)

    @property
    def direction(self) -> complex:
        return 1j * np.exp(0.2j * self.cp.psi)

    def _B(self, t: float) -> complex:
        cp = self.cp
        tb = t - cp.t0
        return -cp.s0 - cp.u0 * tb + 0.5 * cp.r * np.exp(1j * cp.psi) * tb ** 2

    def offset(self, t: float) -> complex:
        return self.scale * np.exp(0.2j * self.cp.psi) * self._B(t) / self.epsilon ** 0.8

    def line_coordinate(self, x, t: float):
        cp = self.cp
        xh = np.asarray(x, dtype=float) - cp.x0 - cp.v0 * (t - cp.t0)
        return self.scale * math.sqrt(cp.u0) * xh / self.epsilon ** 0.8

    def zeta(self, x, t: float):
        return self.direction * self.line_coordinate(x, t) + self.offset(t)

    def center(self, t: float) -> float:
        """x minimizing |zeta| at time t (zeta = 0 when the offset allows)."""
        cp = self.cp
        tb = t - cp.t0
        return cp.x0 + cp.v0 * tb - cp.r * math.sin(cp.psi) * tb ** 2 / (2 * math.sqrt(cp.u0))


def conjecture_field(chart: ConjectureChart, x, t: float, omega: Omega0Lines | None = None):
    """(u, v) of the multiscale approximation at the points ``x`` and time ``t``."""
    omega = _DEFAULT_LINES if omega is None else omega
    cp = chart.cp
    y = chart.line_coordinate(x, t)
    Om = omega.along(chart.direction, chart.offset(t), y)
    w = (cp.u0 + 1j * math.sqrt(cp.u0) * cp.v0 - (t - cp.t0) * cp.r * np.exp(1j * cp.psi)
         + chart.amplitude * Om)
    return np.real(w), np.imag(w) / math.sqrt(cp.u0)


def t_schedule(cp: CriticalPoint, epsilon: float, beta: float = 0.1) -> tuple[float, float]:
    """(t_plus, t_minus) = t_c + u0/r - sqrt((u0/r)^2 +- eps^(4/5) beta)."""
    q = cp.u0 / cp.r
    d = epsilon ** 0.8 * beta
    if q * q - d < 0:
        raise ValueError("radicand of the minus branch is negative")
    return cp.t0 + q - math.sqrt(q * q + d), cp.t0 + q - math.sqrt(q * q - d)


@dataclass
class ComparisonReport:
    epsilon: float
    t: float
    center: float
    window: tuple[float, float]
    linf_u: float
    linf_v: float
    min_u_gap: float
    linf_u_semiclassical: float | None = None
    linf_v_semiclassical: float | None = None
    columns: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("epsilon", "t", "center", "window", "linf_u", "linf_v",
                                              "min_u_gap", "linf_u_semiclassical",
                                              "linf_v_semiclassical")}

    def to_csv(self, path):
        names = ("x", "u_nls", "v_nls", "u_conj", "v_conj", "u_semicl", "v_semicl")
        cols = [self.columns.get(n, np.full(len(self.columns["x"]), np.nan)) for n in names]
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(",".join(names) + "\n")
            for row in zip(*cols):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def semiclassical_on(f, curve, cp: CriticalPoint, x, t: float):
    """Hodograph solution at time t on points x (continued in time from t = 0)."""
    x = np.asarray(x, dtype=float)
    u0, v0, _ = curve(x)
    if abs(t - cp.t0) < 1e-14:
        # exactly at the catastrophe the map is degenerate at x0 itself
        near = np.abs(x - cp.x0) < 1e-12
        u = np.full_like(x, cp.u0)
        v = np.full_like(x, cp.v0)
        if np.any(~near):
            u[~near], v[~near] = semiclassical_profile(f, x[~near], t, u0[~near], v0[~near])
        return u, v
    return semiclassical_profile(f, x, t, u0, v0)


def compare_window(nls: WaveField, chart: ConjectureChart, gamma: float = 1.0,
                   omega: Omega0Lines | None = None, semiclassical=None,
                   floor: float = 1e-8, center: str = "zeta") -> ComparisonReport:
    """NLS vs multiscale (and optionally hodograph) on center +- gamma eps^(4/5).

    ``center`` is "zeta" (the point of the chart nearest zeta = 0) or
    "nls_max" (the NLS density maximum within two half-widths of it).
    ``semiclassical`` is a pair (f, curve) used for t <= t0.
    """
    t = nls.t
    xc = chart.center(t)
    half = gamma * chart.epsilon ** 0.8
    if abs(nls.epsilon - chart.epsilon) > 1e-15:
        raise ChartError("field and chart have different epsilon")
    x = nls.x
    u, v = to_madelung(nls, floor)
    if center == "nls_max":
        near = np.abs(x - xc) <= 2 * half
        if not np.any(near):
            raise ChartError("no grid points near the chart center")
        xc = float(x[near][np.argmax(u[near])])
    elif center != "zeta":
        raise ValueError("center must be 'zeta' or 'nls_max'")
    if xc - half < -nls.L or xc + half >= nls.L:
        raise ChartError("window exceeds the grid")
    sel = (x >= xc - half) & (x <= xc + half)
    if np.any(~np.isfinite(v[sel])):
        raise ChartError("Madelung mask intersects the window")
    xs = x[sel]
    uc, vc = conjecture_field(chart, xs, t, omega)
    cols = dict(x=xs, u_nls=u[sel], v_nls=v[sel], u_conj=uc, v_conj=vc)
    rep = ComparisonReport(epsilon=chart.epsilon, t=t, center=xc, window=(xc - half, xc + half),
                           linf_u=float(np.max(np.abs(u[sel] - uc))),
                           linf_v=float(np.max(np.abs(v[sel] - vc))),
                           min_u_gap=float(np.min(u[sel] - uc)), columns=cols)
    if semiclassical is not None and t <= chart.cp.t0 + 1e-14:
        f, curve = semiclassical
        us, vs = semiclassical_on(f, curve, chart.cp, xs, t)
        cols.update(u_semicl=us, v_semicl=vs)
        rep.linf_u_semiclassical = float(np.max(np.abs(u[sel] - us)))
        rep.linf_v_semiclassical = float(np.max(np.abs(v[sel] - vs)))
    return rep
