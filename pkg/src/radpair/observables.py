"""Triplet yield, electron-pair negativity and the two-time CHSH witness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dynamics import Trajectory, eigh, evolve_pure, propagate_exact_equal_rates
from .spin import (
    ELECTRONS,
    SINGLET,
    DensityMatrix,
    embed,
    partial_trace,
    partial_transpose,
    pauli,
    singlet_triplet_projectors,
    trace_norm,
)

NEGATIVITY_CLAMP = 1e-9
NORMALISATION_TOL = 1e-6
SURVIVAL_FLOOR = 1e-12


class ObservableError(ValueError):
    pass


@dataclass(frozen=True)
class YieldResult:
    phi_T: float
    phi_S: float
    method: str


@dataclass(frozen=True)
class CHSHConfig:
    """Detector directions and options for the two-time CHSH witness.

    ``combine="complex"`` sums the four correlators as complex numbers and
    takes the modulus last; ``"real"`` discards imaginary parts first.
    """

    a: tuple = (0.0, 0.0, 1.0)
    b: tuple = (0.0, 0.0, 1.0)
    lambda_max: float = 1.0
    apply_decay: bool = True
    k: float = 1.0
    combine: str = "complex"

    def __post_init__(self):
        for name in ("a", "b"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
                raise ObservableError(f"detector direction {name} must be a unit 3-vector")
            object.__setattr__(self, name, tuple(float(x) for x in v))
        if self.lambda_max <= 0:
            raise ObservableError("lambda_max must be positive")
        if self.k < 0:
            raise ObservableError("k must be >= 0")
        if self.combine not in ("complex", "real"):
            raise ObservableError(f"combine must be 'complex' or 'real', got {self.combine!r}")

    @property
    def threshold(self) -> float:
        return 2 * self.lambda_max**2


@dataclass(frozen=True)
class CurveSeries:
    label: str
    x_name: str
    x_unit: str
    x: np.ndarray
    y: np.ndarray  # NaN marks missing points
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.y)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "abscissa": {"name": self.x_name, "unit": self.x_unit},
            "x": [float(v) for v in self.x],
            "y": [None if np.isnan(v) else float(v) for v in self.y],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CurveSeries":
        y = np.array([np.nan if v is None else v for v in d["y"]], dtype=float)
        return cls(
            d["label"], d["abscissa"]["name"], d["abscissa"]["unit"],
            np.asarray(d["x"], dtype=float), y, d.get("meta", {}),
        )


@dataclass(frozen=True)
class Duration:
    time: float
    unterminated: bool


def yield_closed_form(h, rho0: DensityMatrix, k: float, q: np.ndarray) -> float:
    """k * int_0^inf Tr[q rho(t)] dt for equal decay rates, in the eigenbasis of h."""
    w, v = eigh(h)
    r = v.conj().T @ rho0.op @ v
    qt = v.conj().T @ q @ v
    omega = w[:, None] - w[None, :]
    return float((k * np.sum(qt.T * r / (k + 1j * omega))).real)


def triplet_yield(h, rho0: DensityMatrix, k: float, triplet: str = "sum") -> YieldResult:
    if not k > 0:
        raise ObservableError(f"triplet yield needs k > 0, got {k}")
    q_s, q_t = singlet_triplet_projectors(rho0.layout, triplet=triplet)
    return YieldResult(
        phi_T=yield_closed_form(h, rho0, k, q_t),
        phi_S=yield_closed_form(h, rho0, k, q_s),
        method="closed_form",
    )


def triplet_yield_quadrature(
    h, rho0: DensityMatrix, k: float, tail: float = 1e-8, nodes: int = 16, triplet: str = "sum"
) -> YieldResult:
    """Gauss-Legendre quadrature of k Tr[Q rho(t)] along the propagated trajectory.

    Integration stops at t_max with exp(-k t_max) < ``tail``; panels are
    sized from the largest Bohr frequency of ``h``.
    """
    if not k > 0:
        raise ObservableError(f"triplet yield needs k > 0, got {k}")
    q_s, q_t = singlet_triplet_projectors(rho0.layout, triplet=triplet)
    t_max = np.log(1 / tail) / k
    spread = float(np.ptp(np.linalg.eigvalsh(h))) if np.size(h) else 0.0
    width = min(1.0 / (spread + k), t_max)
    n_panels = int(np.ceil(t_max / width))
    edges = np.linspace(0.0, t_max, n_panels + 1)
    x, wts = np.polynomial.legendre.leggauss(nodes)
    acc_t = acc_s = 0.0
    for lo, hi in zip(np.array_split(edges[:-1], max(1, n_panels // 256)),
                      np.array_split(edges[1:], max(1, n_panels // 256))):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        t = (mid[:, None] + half[:, None] * x[None]).ravel()
        wt = (half[:, None] * wts[None]).ravel()
        order = np.argsort(t)
        grid = np.concatenate([[0.0], t[order]])
        traj = propagate_exact_equal_rates(h, rho0, k, grid)
        st = traj.states[1:]
        pt = np.einsum("ij,tji->t", q_t, st).real
        ps = np.einsum("ij,tji->t", q_s, st).real
        acc_t += float(np.dot(wt[order], pt))
        acc_s += float(np.dot(wt[order], ps))
    return YieldResult(phi_T=k * acc_t, phi_S=k * acc_s, method="quadrature")


def negativity(rho_e: DensityMatrix | np.ndarray) -> float:
    op = rho_e.op if isinstance(rho_e, DensityMatrix) else np.asarray(rho_e, dtype=complex)
    tr = np.trace(op).real
    if abs(tr - 1) > NORMALISATION_TOL:
        raise ObservableError(f"negativity needs a normalised state, trace = {tr:.9g}")
    n = (trace_norm(partial_transpose(op)) - 1) / 2
    if n < 0:
        if n < -NEGATIVITY_CLAMP:
            raise ObservableError(f"negativity {n:.3g} below zero; state is not positive")
        n = 0.0
    return min(n, 0.5)


def electron_state(rho: DensityMatrix) -> DensityMatrix:
    if rho.layout == ELECTRONS:
        return rho
    return partial_trace(rho, ELECTRONS)


def negativity_trajectory(traj: Trajectory, label: str = "negativity", meta=None) -> CurveSeries:
    """Negativity of the renormalised two-electron state at every time point."""
    y = np.full(len(traj), np.nan)
    for j in range(len(traj)):
        rho_e = electron_state(traj.state(j))
        survival = rho_e.trace()
        if survival < SURVIVAL_FLOOR:
            continue
        y[j] = negativity(rho_e.normalized())
    return CurveSeries(label, "time_us", "us", traj.times.copy(), y, dict(meta or {}))


def _detector(v) -> np.ndarray:
    return sum(c * pauli(ax) for c, ax in zip(v, "xyz"))


def measurement_operator(cfg: CHSHConfig) -> np.ndarray:
    """(sigma_1 . a)(sigma_2 . b) on the electron pair."""
    return embed(_detector(cfg.a), 0, ELECTRONS) @ embed(_detector(cfg.b), 1, ELECTRONS)


def chsh_curve(h, cfg: CHSHConfig, times) -> np.ndarray:
    """|E(0,0) + E(0,t) + E(t,0) - E(t,t)| for every t in ``times``."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ObservableError("CHSH times must be >= 0")
    m = measurement_operator(cfg)
    psi0 = SINGLET
    psi_t = evolve_pure(h, psi0, times)  # (T, 4)
    m_psi0 = m @ psi0
    e00 = np.vdot(psi0, m_psi0)
    e0t = psi_t @ (m.conj().T @ psi0).conj()  # <psi0|M|psi_t>
    et0 = psi_t.conj() @ m_psi0
    ett = np.einsum("ti,ij,tj->t", psi_t.conj(), m, psi_t)
    if cfg.apply_decay:
        d = np.exp(-cfg.k * times / 2)
        e0t, et0, ett = e0t * d, et0 * d, ett * d * d
    terms = (np.full_like(e0t, e00), e0t, et0, -ett)
    if cfg.combine == "real":
        return np.abs(sum(t.real for t in terms))
    return np.abs(sum(terms))


def chsh_witness(h, cfg: CHSHConfig, t: float) -> float:
    return float(chsh_curve(h, cfg, [t])[0])


def is_entangled(value: float, cfg: CHSHConfig) -> bool:
    return value > cfg.threshold


def entanglement_duration(series: CurveSeries, threshold: float = 2.0, atol: float = 1e-9) -> Duration:
    """First downward crossing of ``threshold``, linearly interpolated.

    ``atol`` absorbs round-off when the curve starts exactly on the
    threshold, as the singlet CHSH witness does.
    """
    x, y = series.x, series.y
    if y[0] < threshold - atol:
        raise ObservableError(
            f"series starts below threshold ({y[0]:.6g} < {threshold}); no initial entanglement"
        )
    below = np.nonzero(y[1:] < threshold - atol)[0]
    if below.size == 0:
        return Duration(float(x[-1]), True)
    j = below[0] + 1
    frac = float(np.clip((y[j - 1] - threshold) / (y[j - 1] - y[j]), 0.0, 1.0))
    return Duration(float(x[j - 1] + frac * (x[j] - x[j - 1])), False)
