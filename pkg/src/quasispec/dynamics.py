"""Wave-packet spreading on a finite box ``-N .. N`` with Dirichlet ends.

The Hamiltonian is diagonalized once.  With ``c = V^T psi0`` and
``G_jk = sum_n |n|^p v_j(n) c_j v_k(n) conj(c_k)`` the time-averaged moment is

    <<|X|^p>>(T) = sum_jk G_jk K_T(E_j - E_k),
    K_T(w) = (1 - exp(-i w T)) / (i w T),  K_T(0) = 1,

which is the exact time integral; no quadrature or time stepping is involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ContaminatedError, DomainError, PreconditionError
from .operator import Potential

EDGE_FRACTION = 0.1
EDGE_MASS = 1e-6
_CHUNK = 512


@dataclass(frozen=True, eq=False)
class LatticeHamiltonian:
    """``(H phi)(n) = phi(n+1) + phi(n-1) + V(n) phi(n)`` on sites ``-N .. N``."""

    N: int
    diagonal: np.ndarray

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    def to_dense(self) -> np.ndarray:
        off = np.ones(self.size - 1)
        return np.diag(self.diagonal) + np.diag(off, 1) + np.diag(off, -1)

    @cached_property
    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
        return eigh_tridiagonal(self.diagonal, np.ones(self.size - 1))


def build_box(V: Potential, N: int) -> LatticeHamiltonian:
    if N < 0:
        raise DomainError("N must be >= 0")
    return LatticeHamiltonian(N, np.array(V.window(-N, N), dtype=float))


def delta_state(H: LatticeHamiltonian, site: int = 0) -> np.ndarray:
    psi = np.zeros(H.size, dtype=complex)
    psi[site + H.N] = 1.0
    return psi


def kernel(omega, T: float) -> np.ndarray:
    """``K_T(omega) = (1 - exp(-i omega T)) / (i omega T)`` with ``K_T(0) = 1``."""
    x = np.asarray(omega, dtype=float) * T
    re = np.sinc(x / np.pi)
    im = -0.5 * x * np.sinc(x / (2 * np.pi)) ** 2
    return re + 1j * im


def _check_state(H: LatticeHamiltonian, psi0) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.size,):
        raise DomainError(f"state must have {H.size} entries")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise PreconditionError("initial state is not normalized")
    return psi0


class MomentEvaluator:
    """Moments of one initial state; the weight matrix ``G`` is cached per ``p``."""

    def __init__(self, H: LatticeHamiltonian, psi0):
        self.H = H
        self.psi0 = _check_state(H, psi0)
        self.energies, self.vectors = H.eigensystem
        self._real = bool(np.all(self.psi0.imag == 0))
        self.coeffs = self.vectors.T @ (self.psi0.real if self._real else self.psi0)
        self._G: dict[float, np.ndarray] = {}

    def _weights(self, p: float) -> np.ndarray:
        if p not in self._G:
            w = np.abs(self.H.sites).astype(float) ** p
            B = self.vectors * self.coeffs[None, :]
            self._G[p] = (B.T * w[None, :]) @ B.conj()
        return self._G[p]

    def moment(self, p: float, T) -> np.ndarray:
        """``<<|X|^p>>(T)`` for each ``T`` (scalar or array, all ``> 0``)."""
        if p < 0:
            raise DomainError("p must be >= 0")
        Ts = np.atleast_1d(np.asarray(T, dtype=float))
        if (Ts <= 0).any():
            raise DomainError("T must be positive")
        G = self._weights(p)
        E = self.energies
        out = np.zeros(Ts.size)
        for lo in range(0, E.size, _CHUNK):
            om = E[lo:lo + _CHUNK, None] - E[None, :]
            g = G[lo:lo + _CHUNK]
            for i, t in enumerate(Ts):
                x = om * t
                val = np.sum(g.real * np.sinc(x / np.pi))
                if not self._real:
                    val -= np.sum(g.imag * (-0.5 * x * np.sinc(x / (2 * np.pi)) ** 2))
                out[i] += val
        return out

    def state(self, t: float) -> np.ndarray:
        """``psi(t) = exp(-i H t) psi0``."""
        return self.vectors @ (np.exp(-1j * self.energies * t) * self.coeffs)

    def edge_mass(self, t: float) -> float:
        """Probability in the outer 10% of sites at time ``t``."""
        psi = self.state(t)
        edge = np.abs(self.H.sites) > (1.0 - EDGE_FRACTION) * self.H.N
        return float(np.sum(np.abs(psi[edge]) ** 2))

    def reflection_time(self, T_max: float, samples: int = 64) -> float | None:
        """First sampled time in ``[0, T_max]`` with edge mass above ``1e-6``."""
        for t in np.linspace(0.0, T_max, samples + 1)[1:]:
            if self.edge_mass(t) > EDGE_MASS:
                return float(t)
        return None


def evolve_moment(H: LatticeHamiltonian, psi0, p: float, T: float) -> float:
    return float(MomentEvaluator(H, psi0).moment(p, T)[0])


def evolve_state(H: LatticeHamiltonian, psi0, t: float) -> np.ndarray:
    return MomentEvaluator(H, psi0).state(t)


@dataclass(frozen=True, eq=False)
class MomentCurve:
    p: float
    T: np.ndarray
    values: np.ndarray
    N: int
    state_tag: str = "delta_0"
    contaminated: np.ndarray = field(default=None)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.contaminated is None:
            object.__setattr__(self, "contaminated", np.zeros(len(self.T), dtype=bool))

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(t), float(v)) for t, v in zip(self.T, self.values)]

    def to_json(self) -> dict:
        return {
            "p": self.p, "N": self.N, "state": self.state_tag,
            "samples": [{"T": float(t), "value": float(v), "contaminated": bool(c)}
                        for t, v, c in zip(self.T, self.values, self.contaminated)],
            **self.meta,
        }


def moment_curve(H: LatticeHamiltonian, psi0, p: float, T_grid, state_tag: str = "delta_0",
                 evaluator: MomentEvaluator | None = None) -> MomentCurve:
    """Moments on ``T_grid`` with every sample checked for boundary reflection."""
    ev = evaluator or MomentEvaluator(H, psi0)
    T = np.sort(np.asarray(T_grid, dtype=float))
    t_ref = ev.reflection_time(float(T.max()))
    bad = np.zeros(T.size, dtype=bool) if t_ref is None else T >= t_ref
    return MomentCurve(p, T, ev.moment(p, T), H.N, state_tag, bad)


class ExponentFit(NamedTuple):
    exponent: float
    intercept: float
    residual: float  # rms of log residuals


def transport_exponent(curve: MomentCurve, min_samples: int = 8,
                       min_decades: float = 1.5) -> ExponentFit:
    """Least-squares slope of ``log <<|X|^p>>`` against ``log T``."""
    T, y = np.asarray(curve.T, dtype=float), np.asarray(curve.values, dtype=float)
    if T.size < min_samples:
        raise DomainError(f"need at least {min_samples} samples")
    if np.log10(T.max() / T.min()) < min_decades - 1e-12:
        raise DomainError(f"samples must span at least {min_decades} decades in T")
    if np.any(curve.contaminated):
        raise ContaminatedError(
            f"{int(np.sum(curve.contaminated))} samples reached the outer 10% of the box")
    if np.any(y <= 0):
        raise DomainError("moments must be positive for a log-log fit")
    lx, ly = np.log(T), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    res = ly - (slope * lx + icpt)
    return ExponentFit(float(slope), float(icpt), float(np.sqrt(np.mean(res ** 2))))
