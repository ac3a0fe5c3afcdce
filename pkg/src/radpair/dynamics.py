"""Time evolution of the radical-pair density matrix.

The master equation is

    d rho/dt = -i [H, rho] - k_S/2 {Q_S, rho} - k_T/2 {Q_T, rho}

with H in rad/us. When k_S == k_T the decay terms collapse to -k rho
(Q_S + Q_T = 1) and the exact propagator e^{-kt} U rho U^dag applies.
Otherwise a fixed-step RK4 integrator is used, with step halving until the
result stops moving.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .spin import DensityMatrix, hermitian_defect, singlet_triplet_projectors

HERMITIAN_TOL = 1e-9


class DynamicsError(RuntimeError):
    pass


class StepSizeError(DynamicsError):
    pass


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, dim, dim)
    layout: tuple[str, ...]
    meta: dict[str, Any] = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def state(self, j: int) -> DensityMatrix:
        return DensityMatrix(self.states[j], self.layout)

    def traces(self) -> np.ndarray:
        return np.einsum("tii->t", self.states).real


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise DynamicsError("time grid must be a non-empty 1-D sequence")
    if times[0] != 0 or np.any(np.diff(times) <= 0):
        raise DynamicsError("time grid must start at 0 and increase strictly")
    return times


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    defect = hermitian_defect(h)
    if defect > HERMITIAN_TOL * max(1.0, float(np.max(np.abs(h)))):
        raise DynamicsError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {defect:.3g})")
    return h


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = _check_hermitian(h)
    return np.linalg.eigh((h + h.conj().T) / 2)


def propagate_exact_equal_rates(h, rho0: DensityMatrix, k: float, times) -> Trajectory:
    if k < 0:
        raise DynamicsError(f"decay rate must be >= 0, got {k}")
    times = _check_times(times)
    w, v = eigh(h)
    r = v.conj().T @ rho0.op @ v
    # rho~_mn(t) = rho~_mn(0) exp(-i (w_m - w_n) t - k t)
    phase = np.exp(-1j * np.outer(times, w))
    tilde = phase[:, :, None] * r[None] * phase.conj()[:, None, :]
    tilde *= np.exp(-k * times)[:, None, None]
    states = v[None] @ tilde @ v.conj().T[None]
    return Trajectory(times, states, rho0.layout, {"method": "exact_eigh", "k": float(k)})


def _rk4_segment(a: np.ndarray, rho: np.ndarray, h: float, n: int) -> np.ndarray:
    # rho' = A rho + rho A^dag with A = -iH - K/2
    ad = a.conj().T

    def f(x):
        return a @ x + x @ ad

    for _ in range(n):
        k1 = f(rho)
        k2 = f(rho + 0.5 * h * k1)
        k3 = f(rho + 0.5 * h * k2)
        k4 = f(rho + h * k3)
        rho = rho + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


def _substeps(times, h_max) -> np.ndarray:
    return np.maximum(1, np.ceil(np.diff(times) / h_max - 1e-12)).astype(int)


def _rk4_run(a, rho0, times, substeps):
    out = np.empty((len(times),) + rho0.shape, dtype=complex)
    out[0] = rho0
    rho = rho0
    for j, n in enumerate(substeps, start=1):
        rho = _rk4_segment(a, rho, (times[j] - times[j - 1]) / n, n)
        out[j] = rho
    return out


def _generator(h, layout, k_S, k_T, triplet="sum"):
    q_s, q_t = singlet_triplet_projectors(layout, triplet=triplet)
    return -1j * h - 0.5 * (k_S * q_s + k_T * q_t)


def integrate_rk4(h, rho0: DensityMatrix, k_S: float, k_T: float, times, max_step: float) -> np.ndarray:
    """Single fixed-step RK4 pass (no halving); returns the stacked states."""
    times = _check_times(times)
    a = _generator(_check_hermitian(h), rho0.layout, k_S, k_T)
    return _rk4_run(a, rho0.op, times, _substeps(times, max_step))


def propagate_general(
    h,
    rho0: DensityMatrix,
    k_S: float,
    k_T: float,
    times,
    step_factor: float = 0.1,
    tol: float = 1e-9,
    max_halvings: int = 12,
    triplet: str = "sum",
) -> Trajectory:
    """Integrate the full master equation with fixed-step RK4.

    The initial step satisfies ``h * (||H|| + k_S + k_T) <= step_factor``.
    Every step is then halved until the largest entrywise change of the
    trajectory drops below ``tol``; :class:`StepSizeError` is raised if
    that does not happen within ``max_halvings``.
    """
    if k_S < 0 or k_T < 0:
        raise DynamicsError("decay rates must be >= 0")
    times = _check_times(times)
    h = _check_hermitian(h)
    a = _generator(h, rho0.layout, k_S, k_T, triplet)
    scale = np.linalg.norm(h, 2) + k_S + k_T
    h_max = step_factor / scale if scale > 0 else (times[-1] or 1.0)

    substeps = _substeps(times, h_max) if len(times) > 1 else np.zeros(0, dtype=int)
    states = _rk4_run(a, rho0.op, times, substeps)
    delta = 0.0
    for _ in range(max_halvings):
        substeps = substeps * 2
        finer = _rk4_run(a, rho0.op, times, substeps)
        delta = float(np.max(np.abs(finer - states)))
        states = finer
        if delta < tol:
            break
    else:
        raise StepSizeError(
            f"RK4 did not converge to {tol:g} after {max_halvings} halvings (last change {delta:.3g})"
        )
    steps = np.diff(times) / substeps if substeps.size else np.zeros(0)
    meta = {
        "method": "rk4",
        "k_S": float(k_S),
        "k_T": float(k_T),
        "max_step": float(steps.max()) if steps.size else 0.0,
        "halving_change": delta,
    }
    return Trajectory(times, states, rho0.layout, meta)


def propagate(h, rho0: DensityMatrix, k_S: float, k_T: float, times, method: str = "auto") -> Trajectory:
    """Dispatch to the exact propagator when the rates agree."""
    if method not in ("auto", "exact", "general"):
        raise DynamicsError(f"unknown integration method {method!r}")
    if method == "exact" or (method == "auto" and k_S == k_T):
        if k_S != k_T:
            raise DynamicsError("exact propagator requires k_S == k_T")
        return propagate_exact_equal_rates(h, rho0, k_S, times)
    return propagate_general(h, rho0, k_S, k_T, times)


def evolve_pure(h, psi0, t: float | Sequence[float]) -> np.ndarray:
    """exp(-iHt) psi0; vectorised over ``t`` (rows of the result)."""
    w, v = eigh(h)
    c = v.conj().T @ np.asarray(psi0, dtype=complex)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    psi = (np.exp(-1j * np.outer(ts, w)) * c) @ v.T
    return psi[0] if np.ndim(t) == 0 else psi
