"""The tritronquee solution of Omega'' = 6 Omega^2 - zeta.

The solution is fixed by its asymptotics Omega ~ -sqrt(zeta/6) for
|arg zeta| < 4 pi/5.  It is computed along straight complex lines
zeta = a y + b by collocation with asymptotic boundary values, on the real
axis by shooting, and on a sector by solving Laplace's equation for the
real and imaginary parts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
from scipy.integrate import solve_ivp
from scipy.interpolate import BarycentricInterpolator
from scipy.sparse.linalg import spsolve

SECTOR_HALF_ANGLE = 4 * math.pi / 5
_SQ6 = math.sqrt(6.0)


class SeriesDomainError(ValueError):
    """The asymptotic series is not valid at the requested point."""


class LineDomainError(ValueError):
    """Query outside the solved segment of a line."""


class ConvergenceError(RuntimeError):
    """Newton iteration for a line solve did not converge."""

    def __init__(self, msg, last=None, residual=math.nan):
        super().__init__(msg)
        self.last = last
        self.residual = residual


class NoPoleFound(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# asymptotic series

@dataclass(frozen=True)
class AsymptoticSeries:
    """Coefficients a_0..a_K generated by the three-term recurrence.

    With these a_k the expansion solving Omega'' = 6 Omega^2 - zeta is
    Omega ~ -sqrt(zeta/6) sum (-1)^k a_k zeta^(-5k/2); the alternating
    sign is what substituting the series into the equation demands.
    """

    coefficients: np.ndarray

    @property
    def K(self) -> int:
        return len(self.coefficients) - 1

    @property
    def ode_coefficients(self) -> np.ndarray:
        """(-1)^k a_k, the coefficients multiplying zeta^(-5k/2)."""
        a = self.coefficients
        return a * (-1.0) ** np.arange(len(a))

    def ratios(self) -> np.ndarray:
        """|a_{k+1} / a_k| for k = 0..K-1."""
        a = self.coefficients
        return np.abs(a[1:] / a[:-1])


def series_coefficients(K: int = 40) -> AsymptoticSeries:
    """a_{k+1} = (25k^2 - 1)/(8 sqrt 6) a_k - 1/2 sum_{m=1}^{k} a_m a_{k+1-m}."""
    if K < 0:
        raise ValueError("K must be non-negative")
    a = np.zeros(K + 1)
    a[0] = 1.0
    for k in range(K):
        conv = float(np.dot(a[1:k + 1], a[k:0:-1])) if k else 0.0
        a[k + 1] = (25 * k * k - 1) / (8 * _SQ6) * a[k] - 0.5 * conv
    return AsymptoticSeries(a)


_DEFAULT_SERIES = series_coefficients(40)


def _check_series_domain(z, min_radius):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) < min_radius):
        raise SeriesDomainError(f"|zeta| < {min_radius}: asymptotic series not valid")
    if np.any(np.abs(np.angle(z)) >= SECTOR_HALF_ANGLE):
        raise SeriesDomainError("|arg zeta| >= 4 pi/5: outside the asymptotic sector")
    return z


def _truncated(series, z):
    # optimal truncation: drop the smallest term and everything after it
    a = series.ode_coefficients
    k = np.arange(len(a))
    pw = z[..., None] ** (-2.5 * k)
    terms = a * pw
    mag = np.abs(terms[..., 1:])
    kstar = np.argmin(mag, axis=-1) + 1
    keep = k < kstar[..., None]
    return terms, keep, kstar, mag


def evaluate_series(series: AsymptoticSeries | None, zeta, min_radius: float = 10.0):
    """Optimally truncated asymptotic value of the tritronquee at ``zeta``."""
    series = _DEFAULT_SERIES if series is None else series
    z = _check_series_domain(zeta, min_radius)
    terms, keep, _, _ = _truncated(series, z)
    val = -np.sqrt(z / 6) * np.sum(np.where(keep, terms, 0), axis=-1)
    return val[()] if val.ndim == 0 else val


def series_error_estimate(series: AsymptoticSeries | None, zeta, min_radius: float = 10.0):
    """(k*, |first omitted term|) of the optimally truncated series."""
    series = _DEFAULT_SERIES if series is None else series
    z = _check_series_domain(zeta, min_radius)
    _, _, kstar, mag = _truncated(series, z)
    omitted = np.abs(np.sqrt(z / 6)) * np.take_along_axis(mag, (kstar - 1)[..., None], -1)[..., 0]
    if np.ndim(kstar) == 0:
        return int(kstar), float(omitted)
    return kstar, omitted


def series_derivative(series: AsymptoticSeries | None, zeta, min_radius: float = 10.0):
    """d/dzeta of the truncated series (same truncation as the value)."""
    series = _DEFAULT_SERIES if series is None else series
    z = _check_series_domain(zeta, min_radius)
    terms, keep, _, _ = _truncated(series, z)
    k = np.arange(series.K + 1)
    d = -np.sqrt(z / 6) * np.sum(np.where(keep, terms * (0.5 - 2.5 * k), 0), axis=-1) / z
    return d[()] if d.ndim == 0 else d


# ---------------------------------------------------------------------------
# lines

@dataclass(frozen=True)
class ComplexLine:
    """Segment zeta = a y + b, |y| <= y0, sampled at n_points + 1 nodes.

    The direction is normalized to |a| = 1 with Im a >= 0 (Re a > 0 on the
    real axis); y0 is rescaled accordingly.
    """

    a: complex
    b: complex = 0j
    y0: float = 10.0
    n_points: int = 8000

    def __post_init__(self):
        a = complex(self.a)
        if a == 0:
            raise ValueError("line direction must be nonzero")
        y0 = float(self.y0) * abs(a)
        a = a / abs(a)
        if a.imag < 0 or (a.imag == 0 and a.real < 0):
            a = -a
        if not y0 > 0:
            raise ValueError("half length must be positive")
        if self.n_points < 16:
            raise ValueError("need at least 16 points")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "y0", y0)
        for z in self.endpoints():
            if abs(np.angle(z)) >= SECTOR_HALF_ANGLE:
                raise SeriesDomainError(f"endpoint {z:.4g} outside |arg zeta| < 4 pi/5")

    def endpoints(self):
        return self.a * (-self.y0) + self.b, self.a * self.y0 + self.b

    def zeta(self, y):
        return self.a * np.asarray(y) + self.b

    def grid(self, n=None):
        return np.linspace(-self.y0, self.y0, (n or self.n_points) + 1)


@dataclass(frozen=True)
class TritronqueeLine:
    """Collocation solution on a line; ``omega_prime`` is d Omega / dy."""

    line: ComplexLine
    y_grid: np.ndarray
    omega: np.ndarray
    omega_prime: np.ndarray
    residual: np.ndarray = field(repr=False)
    residual_norm: float = math.nan
    interior_residual: float = math.nan
    newton_iterations: int = 0

    @property
    def zeta(self) -> np.ndarray:
        return self.line.zeta(self.y_grid)

    def __call__(self, y):
        return evaluate_omega(self, y)

    def to_csv(self, path):
        z = self.zeta
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("y,re_zeta,im_zeta,re_omega,im_omega,residual\n")
            for row in zip(self.y_grid, z.real, z.imag, self.omega.real, self.omega.imag,
                           self.residual):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _collocation_residual(y, W, P, a, b, wl, wr):
    # Hermite-Simpson (Lobatto IIIA, 3 stage) for W' = P, P' = a^2 (6 W^2 - zeta)
    h = np.diff(y)
    a2 = a * a
    z = a * y + b
    F1 = a2 * (6 * W ** 2 - z)
    zm = a * (y[:-1] + h / 2) + b
    Wm = (W[:-1] + W[1:]) / 2 + h / 8 * (P[:-1] - P[1:])
    Pm = (P[:-1] + P[1:]) / 2 + h / 8 * (F1[:-1] - F1[1:])
    Fm1 = a2 * (6 * Wm ** 2 - zm)
    R0 = W[1:] - W[:-1] - h / 6 * (P[:-1] + 4 * Pm + P[1:])
    R1 = P[1:] - P[:-1] - h / 6 * (F1[:-1] + 4 * Fm1 + F1[1:])
    res = np.concatenate([[W[0] - wl], R0, R1, [W[-1] - wr]])
    return res, Wm


def _collocation_jacobian(y, W, Wm, a):
    n = len(y) - 1
    N = n + 1
    h = np.diff(y)
    a2 = a * a
    Ji, Jj, Jm = 12 * a2 * W[:-1], 12 * a2 * W[1:], 12 * a2 * Wm
    i = np.arange(n)
    r0, r1 = 1 + i, 1 + n + i
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(np.broadcast_to(np.asarray(v, dtype=complex), r.shape))

    # R0 = W_{i+1} - W_i - h/6 (P_i + 4 Pm + P_{i+1})
    add(r0, i, -1 - h / 6 * 4 * (h / 8) * Ji)
    add(r0, i + 1, 1 + h / 6 * 4 * (h / 8) * Jj)
    add(r0, N + i, -h / 6 * 3)
    add(r0, N + i + 1, -h / 6 * 3)
    # R1 = P_{i+1} - P_i - h/6 (F_i + 4 Fm + F_{i+1})
    add(r1, i, -h / 6 * (Ji + 2 * Jm))
    add(r1, i + 1, -h / 6 * (Jj + 2 * Jm))
    add(r1, N + i, -1 - h / 6 * 4 * Jm * h / 8)
    add(r1, N + i + 1, 1 + h / 6 * 4 * Jm * h / 8)
    add(np.array([0]), np.array([0]), 1.0)
    add(np.array([2 * n + 1]), np.array([n]), 1.0)
    return sps.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(2 * N, 2 * N))


def _newton_line(y, W, P, a, b, wl, wr, tol, maxiter):
    res, Wm = _collocation_residual(y, W, P, a, b, wl, wr)
    nrm = np.max(np.abs(res))
    for it in range(1, maxiter + 1):
        if nrm <= tol:
            return W, P, it - 1, nrm
        J = _collocation_jacobian(y, W, Wm, a)
        d = spsolve(J, res)
        N = len(y)
        lam = 1.0
        while True:
            Wn, Pn = W - lam * d[:N], P - lam * d[N:]
            rn, Wmn = _collocation_residual(y, Wn, Pn, a, b, wl, wr)
            nn = np.max(np.abs(rn))
            if np.isfinite(nn) and (nn < nrm or lam < 1e-3):
                break
            lam /= 2
        W, P, res, Wm, nrm = Wn, Pn, rn, Wmn, nn
    if nrm <= tol:
        return W, P, maxiter, nrm
    raise ConvergenceError("collocation Newton did not converge", last=(W, P), residual=nrm)


def ode_residual(y, W, P, a, b):
    """|dP/dy - a^2 (6 W^2 - zeta)| with dP/dy from 4th-order differences."""
    h = y[1] - y[0]
    d = np.empty_like(P)
    d[2:-2] = (P[:-4] - 8 * P[1:-3] + 8 * P[3:-1] - P[4:]) / (12 * h)
    c0 = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    c1 = np.array([-3, -10, 18, -6, 1]) / (12 * h)
    d[0], d[1] = c0 @ P[:5], c1 @ P[:5]
    d[-1], d[-2] = -(c0 @ P[::-1][:5]), -(c1 @ P[::-1][:5])
    return np.abs(d - a * a * (6 * W ** 2 - (a * y + b)))


def _initial_guess(y, a, b):
    z = a * y + b
    W = -np.sqrt(z / 6)
    # sqrt(z) has an infinite derivative where the line crosses the origin
    P = np.gradient(W, y)
    return W.astype(complex), P.astype(complex)


def solve_line(line: ComplexLine, tol: float = 1e-10, max_newton: int = 40,
               max_points: int = 64000, newton_tol: float = 1e-13) -> TritronqueeLine:
    """Tritronquee on ``line`` by 4th-order collocation with asymptotic ends.

    The mesh is uniform and doubled until the independently measured ODE
    residual on interior nodes is below ``tol``.  If plain Newton from
    -sqrt(zeta/6) fails, the half length is grown from the smallest value
    admitted by the asymptotic series, each stage seeding the next.
    """
    a, b = line.a, line.b
    wl, wr = (complex(evaluate_series(None, z)) for z in line.endpoints())
    n = line.n_points
    while True:
        y = line.grid(n)
        try:
            W, P = _initial_guess(y, a, b)
            W, P, its, _ = _newton_line(y, W, P, a, b, wl, wr, newton_tol, max_newton)
        except ConvergenceError:
            W, P, its = _continuation_in_length(line, n, tol=newton_tol, maxiter=max_newton)
        r = ode_residual(y, W, P, a, b)
        interior = float(np.max(r[2:-2]))
        if interior <= tol or 2 * n > max_points:
            break
        n *= 2
    return TritronqueeLine(line=line, y_grid=y, omega=W, omega_prime=P, residual=r,
                           residual_norm=float(np.max(r)), interior_residual=interior,
                           newton_iterations=its)


def _continuation_in_length(line, n, tol, maxiter, stages: int = 6):
    a, b = line.a, line.b
    y_min = 10.0 + abs(b)
    lengths = np.geomspace(min(y_min, line.y0), line.y0, stages)
    prev = None
    for L in lengths:
        sub = ComplexLine(a, b, L, n)
        y = sub.grid()
        W, P = _initial_guess(y, a, b)
        if prev is not None:
            py, pW, pP = prev
            inside = np.abs(y) <= py[-1]
            W[inside] = np.interp(y[inside], py, pW.real) + 1j * np.interp(y[inside], py, pW.imag)
            P[inside] = np.interp(y[inside], py, pP.real) + 1j * np.interp(y[inside], py, pP.imag)
        wl, wr = (complex(evaluate_series(None, z)) for z in sub.endpoints())
        W, P, its, _ = _newton_line(y, W, P, a, b, wl, wr, tol, maxiter)
        prev = (y, W, P)
    return W, P, its


def evaluate_omega(sol: TritronqueeLine, y):
    """Cubic Hermite interpolation of the stored values and y-derivatives."""
    y = np.asarray(y, dtype=float)
    yg = sol.y_grid
    if np.any(y < yg[0] - 1e-12) or np.any(y > yg[-1] + 1e-12):
        raise LineDomainError(f"y outside [{yg[0]}, {yg[-1]}]")
    h = yg[1] - yg[0]
    i = np.clip(np.floor((y - yg[0]) / h).astype(int), 0, len(yg) - 2)
    t = (y - yg[i]) / h
    W, P = sol.omega, sol.omega_prime
    h00 = (1 + 2 * t) * (1 - t) ** 2
    h10 = t * (1 - t) ** 2
    h01 = t * t * (3 - 2 * t)
    h11 = t * t * (t - 1)
    out = h00 * W[i] + h10 * h * P[i] + h01 * W[i + 1] + h11 * h * P[i + 1]
    return out[()] if out.ndim == 0 else out


def tritronquee_on_imaginary_axis(y0: float = 10.0, n_points: int = 8000, tol: float = 1e-10):
    """The reference solve along zeta = i y."""
    return solve_line(ComplexLine(1j, 0, y0, n_points), tol=tol)


# ---------------------------------------------------------------------------
# real-axis shooting

@dataclass(frozen=True)
class PoleReport:
    pole_location: float
    bracket: tuple[float, float]
    blowup_threshold: float
    crossing: float
    start: float

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo <= self.pole_location <= hi:
            raise ValueError("pole location outside its bracket")


def _pi_rhs(z, Y):
    return [Y[1], 6 * Y[0] ** 2 - z]


def _shoot(start, stop, threshold, rtol=1e-13, atol=1e-14):
    w = float(np.real(evaluate_series(None, start)))
    dw = float(np.real(series_derivative(None, start)))

    def blow(z, Y):
        return abs(Y[0]) - threshold

    blow.terminal = True
    return solve_ivp(_pi_rhs, (start, stop), [w, dw], method="DOP853", rtol=rtol, atol=atol,
                     events=blow, dense_output=True)


def real_axis_values(zeta, start: float = 12.0):
    """(Omega, Omega') at real points between the first pole and ``start``."""
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    lo = float(np.min(zeta))
    sol = _shoot(start, lo, 1e12)
    if sol.status == 1:
        raise NoPoleFound("requested points extend beyond the first pole") from None
    return sol.sol(zeta)


def locate_first_real_pole(start: float = 12.0, threshold: float = 1e6,
                           left_bound: float = -10.0) -> PoleReport:
    """First double pole of the tritronquee on the negative real axis.

    The real ODE is integrated leftward from series data at ``start`` until
    |Omega| reaches ``threshold``.  Near a double pole
    Omega = (zeta - zeta_p)^-2 (1 + O((zeta - zeta_p)^4)), so
    zeta_p = zeta_hit - |Omega|^{-1/2}.  Repeating with a larger threshold
    brackets the estimate.
    """
    if start < 10:
        raise SeriesDomainError("start must be >= 10")
    est = []
    for thr in (threshold, threshold * 100):
        sol = _shoot(start, left_bound, thr)
        if sol.status != 1 or not len(sol.t_events[0]):
            raise NoPoleFound(f"no blow-up before zeta = {left_bound}")
        zh = float(sol.t_events[0][0])
        wh = float(sol.y_events[0][0][0])
        # 1/sqrt(Omega) must shrink linearly along the final approach
        zz = np.linspace(zh + 0.05, zh, 6)
        mags = np.abs(sol.sol(zz)[0])
        if not np.all(np.diff(mags) > 0) or wh < 0:
            raise NoPoleFound("blow-up is not of double-pole type")
        est.append((zh - 1 / math.sqrt(wh), zh))
    p1, z1 = est[0]
    p2, _ = est[1]
    width = max(abs(p1 - p2), 1e-12)
    return PoleReport(pole_location=p2, bracket=(p2 - width, z1), blowup_threshold=threshold,
                      crossing=z1, start=start)


def scan_positive_axis(start: float = 12.0, stop: float | None = None, threshold: float = 1e6):
    """Max |Omega| on [0, stop] by shooting from ``start`` in both directions.

    A finite return value means no pole on that part of the positive axis.
    """
    stop = 4 * start if stop is None else stop
    m = 0.0
    for end in (0.0, stop):
        sol = _shoot(start, end, threshold)
        if sol.status == 1:
            raise NoPoleFound(f"blow-up on the positive axis near {sol.t_events[0][0]:.6g}")
        m = max(m, float(np.max(np.abs(sol.y[0]))))
    return m


# ---------------------------------------------------------------------------
# symmetry

def rotate_tritronquee(n: int, zeta, omega0_at):
    """Omega_n(zeta) = exp(4 pi i n/5) Omega_0(exp(2 pi i n/5) zeta)."""
    if n == 0:
        return omega0_at(zeta)
    if n not in (-2, -1, 1, 2):
        raise ValueError("n must be in {-2, -1, 0, 1, 2}")
    return np.exp(4j * math.pi * n / 5) * omega0_at(np.exp(2j * math.pi * n / 5) * np.asarray(zeta))


# ---------------------------------------------------------------------------
# sector

def _cheb(N):
    x = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2, np.ones(N - 1), 2]) * (-1) ** np.arange(N + 1)
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (dX + np.eye(N + 1))
    return D - np.diag(D.sum(axis=1)), x


@dataclass
class SectorSolution:
    """Omega on the polar grid r_i (descending, apex last), phi_j."""

    r: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    boundary_provenance: dict
    laplace_residual: float
    pi_residual: np.ndarray = field(repr=False, default=None)

    def along(self, phi: float) -> np.ndarray:
        """Values on the ray arg zeta = phi at the radial nodes."""
        if abs(phi) > self.phi[0] + 1e-14:
            raise ValueError("ray outside the sector")
        return np.array([BarycentricInterpolator(self.phi, row)(phi) for row in self.omega])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.omega)))


def solve_sector(R: float = 20.0, phi_max: float = SECTOR_HALF_ANGLE - 0.05,
                 n_r: int = 48, n_phi: int = 48, edge: TritronqueeLine | None = None,
                 apex: complex | None = None, corner_tol: float = 1e-6,
                 line_points: int = 16000) -> SectorSolution:
    """Harmonic extension of boundary data of the tritronquee into a sector.

    Real and imaginary parts satisfy r^2 u_rr + r u_r + u_phiphi = 0 on a
    Chebyshev x Chebyshev polar grid.  Data: the series on |zeta| = R, a line
    solve along arg zeta = phi_max (mirrored by conjugation to -phi_max) and
    the real-axis shooting value at the apex.
    """
    if not R > 10:
        raise ValueError("R must exceed 10")
    if not 0 < phi_max < SECTOR_HALF_ANGLE:
        raise ValueError("phi_max must lie in (0, 4 pi/5)")
    if edge is None:
        edge = solve_line(ComplexLine(np.exp(1j * phi_max), 0, R, line_points))
    if apex is None:
        # the edge line is close to a critical ray where its boundary data
        # are least accurate; the real-axis value is exact to integration
        # tolerance and real
        apex = complex(real_axis_values([0.0])[0][0])
    Dr, xr = _cheb(n_r)
    r = R * (xr + 1) / 2
    Dr = 2 * Dr / R
    Dp, xp = _cheb(n_phi)
    phi = phi_max * xp
    Dp = Dp / phi_max
    L = (np.kron(np.diag(r ** 2) @ (Dr @ Dr) + np.diag(r) @ Dr, np.eye(n_phi + 1))
         + np.kron(np.eye(n_r + 1), Dp @ Dp))
    RR, PP = np.meshgrid(r, phi, indexing="ij")
    vals = np.zeros(RR.shape, dtype=complex)
    top, bot = PP == phi_max, PP == -phi_max
    vals[top] = evaluate_omega(edge, RR[top])
    vals[bot] = np.conj(evaluate_omega(edge, RR[bot]))
    outer = RR == R
    series_rim = evaluate_series(None, R * np.exp(1j * phi))
    mism = max(abs(series_rim[0] - vals[0, 0]), abs(series_rim[-1] - vals[0, -1]))
    if mism > corner_tol:
        raise ValueError(f"corner mismatch {mism:.2e} between series and line data")
    vals[0, :] = series_rim
    vals[RR == 0] = apex
    bnd = (outer | top | bot | (RR == 0)).ravel()
    idx = np.flatnonzero(bnd)
    A = L.copy()
    A[idx, :] = 0.0
    A[idx, idx] = 1.0
    rhs = np.zeros(A.shape[0], dtype=complex)
    rhs[idx] = vals.ravel()[idx]
    U = np.linalg.solve(A, rhs).reshape(RR.shape)
    lap = (L @ U.ravel()).reshape(RR.shape)
    interior = ~bnd.reshape(RR.shape)
    lap_res = float(np.max(np.abs(lap[interior]) / np.maximum(RR[interior] ** 2, 1e-300)))
    # Omega_zeta_zeta = exp(-2 i phi) Omega_rr on each ray
    Wrr = (Dr @ Dr) @ U
    pi_res = np.full(RR.shape, np.nan)
    pi_res[interior] = np.abs(np.exp(-2j * PP) * Wrr - 6 * U ** 2 + RR * np.exp(1j * PP))[interior]
    prov = {"rim": "asymptotic series", "edge +phi_max": "line solve",
            "edge -phi_max": "conjugated line solve", "apex": "real-axis shooting",
            "corner_mismatch": float(mism)}
    return SectorSolution(r=r, phi=phi, omega=U, boundary_provenance=prov,
                          laplace_residual=lap_res, pi_residual=pi_res)
