"""Dispersive deformation of dispersionless first integrals, and NLS functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hodograph.potentials import FOracle
from .nls import WaveField, hamiltonian, mass


@dataclass(frozen=True)
class FieldJet:
    """u, v and their first two x-derivatives at one or many points."""

    u: np.ndarray
    v: np.ndarray
    u_x: np.ndarray
    v_x: np.ndarray
    u_xx: np.ndarray
    v_xx: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.u) <= 0):
            raise ValueError("the density u must be positive")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, u_range=(0.2, 3.0), scale=1.0):
        u = rng.uniform(*u_range, n)
        return cls(u, *(scale * rng.standard_normal((5, n))))


def _partials(f: FOracle, jet: FieldJet):
    # (i, j) -> d^{i+j} f / du^i dv^j at the jet's (u, v)
    need = [(2, 0), (3, 0), (2, 1), (4, 0), (3, 1), (5, 0), (4, 1), (6, 0), (5, 1)]
    return {ij: f.partial(*ij, jet.u, jet.v) for ij in need}


def density_blocks(f: FOracle, jet: FieldJet):
    """(f, eps^2 block, eps^4 block) of the deformed density, as printed.

    h_f = f + eps^2 * h2 + eps^4 * h4 + O(eps^6).
    """
    u, ux, vx, uxx, vxx = jet.u, jet.u_x, jet.v_x, jet.u_xx, jet.v_xx
    d = _partials(f, jet)
    f3u, f2u1v = d[(3, 0)], d[(2, 1)]
    f2u = d[(2, 0)]
    f4u, f3u1v = d[(4, 0)], d[(3, 1)]
    f5u, f4u1v = d[(5, 0)], d[(4, 1)]
    f6u, f5u1v = d[(6, 0)], d[(5, 1)]

    h2 = -((f3u + 1.5 / u * f2u) * ux ** 2 + 2 * f2u1v * ux * vx - u * f3u * vx ** 2) / 12

    h4 = ((f4u + 2.5 / u * f3u) * uxx ** 2 + 2 * f3u1v * uxx * vxx - u * f4u * vxx ** 2) / 120
    h4 = h4 - f4u * uxx * vx ** 2 / 80 - f3u1v * vxx * ux ** 2 / (48 * u)
    h4 = h4 - (30 * f3u - 9 * u * f4u + 12 * u ** 2 * f5u + 4 * u ** 3 * f6u) * ux ** 4 / (3456 * u ** 3)
    h4 = h4 - (-3 * f3u1v + 6 * u * f4u1v + 2 * u ** 2 * f5u1v) * ux ** 3 * vx / (432 * u ** 2)
    h4 = h4 + (9 * f4u + 9 * u * f5u + 2 * u ** 2 * f6u) * ux ** 2 * vx ** 2 / (288 * u)
    h4 = h4 + (9 * f4u1v + 10 * u * f5u1v) * ux * vx ** 3 / 2160
    h4 = h4 - u * (18 * f5u + 5 * u * f6u) * vx ** 4 / 4320
    return f(jet.u, jet.v), h2, h4


def deformed_density(f: FOracle, jet: FieldJet, epsilon: float):
    """h_f through O(eps^4)."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    h0, h2, h4 = density_blocks(f, jet)
    e2 = epsilon * epsilon
    return h0 + e2 * h2 + e2 * e2 * h4


def toda_blocks_closed_form(jet: FieldJet):
    """eps^2 and eps^4 blocks of the Toda density in closed form."""
    u, ux, vx, uxx, vxx = jet.u, jet.u_x, jet.v_x, jet.u_xx, jet.v_xx
    h2 = -(ux ** 2 + 2 * u * vx ** 2) / (24 * u ** 2)
    h4 = -(uxx ** 2 / (240 * u ** 3) + vxx ** 2 / (60 * u ** 2) + uxx * vx ** 2 / (40 * u ** 3)
           - ux ** 4 / (144 * u ** 5) - ux ** 2 * vx ** 2 / (24 * u ** 4) + vx ** 4 / (360 * u ** 3))
    return h2, h4


@dataclass(frozen=True)
class Functionals:
    mass: float
    hamiltonian: float
    hamiltonian_madelung: float
    madelung_reliable: bool


def nls_functionals(field: WaveField, floor: float = 1e-30, rel_tol: float = 1e-12) -> Functionals:
    """Mass and Hamiltonian, the latter in wave and Madelung form.

    The Madelung density 1/2 (u v^2 - u^2) + eps^2 u_x^2 / (8u) is summed only
    where u > floor; it is flagged unreliable when the excluded points carry
    more than ``rel_tol`` of the wave-form Hamiltonian.
    """
    psi = field.psi
    eps = field.epsilon
    m = mass(field)
    H = hamiltonian(field)
    px = field.derivative()
    u = np.abs(psi) ** 2
    ok = u > floor
    q = np.conj(psi[ok]) * px[ok]
    ux = 2 * q.real
    v = eps * q.imag / u[ok]
    dens = (u[ok] * v ** 2 - u[ok] ** 2) / 2 + eps ** 2 * ux ** 2 / (8 * u[ok])
    Hm = float(np.sum(dens) * field.dx)
    wave_dens = eps ** 2 / 2 * np.abs(px) ** 2 - u ** 2 / 2
    excluded = float(np.sum(np.abs(wave_dens[~ok])) * field.dx)
    reliable = excluded <= rel_tol * max(abs(H), 1e-300) if np.any(~ok) else True
    return Functionals(m, H, Hm, bool(reliable))
