"""Spin Hamiltonians for the radical pair.

Units throughout: time in microseconds, fields and hyperfine tensors in
Gauss, Hamiltonians in rad/us. ``gamma`` converts Gauss to rad/us.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import constants

from .spin import (
    ELECTRON_LAYOUT,
    HYPERFINE_LAYOUT,
    SINGLET,
    DensityMatrix,
    embed,
    hermitian_defect,
    spin_vector,
)

G_FACTOR = 2.0
# g * mu_B / hbar in rad us^-1 G^-1 (1 G = 1e-4 T, 1 us = 1e-6 s)
GAMMA_E = G_FACTOR * constants.physical_constants["Bohr magneton"][0] / constants.hbar * 1e-10

HYPERFINE = "hyperfine"
LOCAL_FIELD = "local-field"
KINDS = (HYPERFINE, LOCAL_FIELD)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class FieldVector:
    """External field: magnitude in Gauss, polar and azimuthal angles in degrees."""

    B0: float = 0.5
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not np.isfinite([self.B0, self.theta, self.phi]).all():
            raise ModelError("field parameters must be finite")
        if self.B0 < 0:
            raise ModelError(f"B0 must be >= 0, got {self.B0}")
        if not 0 <= self.theta <= 180:
            raise ModelError(f"theta must lie in [0, 180] degrees, got {self.theta}")
        if not 0 <= self.phi < 360:
            raise ModelError(f"phi must lie in [0, 360) degrees, got {self.phi}")

    def cartesian(self) -> np.ndarray:
        th, ph = np.radians(self.theta), np.radians(self.phi)
        return self.B0 * np.array(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
        )


_PRESETS = {
    "A_default": (np.diag([10.0, 10.0, 0.0]), np.diag([5.0, 5.0, 5.0])),
    "A_b": (
        np.diag([10.0, 10.0, 4.0]),
        np.array([[5.0, 5.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 5.0]]),
    ),
    "A_c": (
        np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 4.0]]),
        np.array([[0.0, 5.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    ),
}

# Body text uses B1 = 4 G; the figure caption quotes 5 G for both panel pairs.
LOCAL_FIELD_PRESETS = {
    "local_4_5": ((0.0, 0.0, 4.0), (0.0, 5.0, 0.0)),
    "local_5_5": ((0.0, 0.0, 5.0), (0.0, 5.0, 0.0)),
}


def preset(name: str) -> tuple[np.ndarray, np.ndarray]:
    """Return copies of a named hyperfine tensor pair (Gauss)."""
    try:
        a1, a2 = _PRESETS[name]
    except KeyError:
        raise ModelError(
            f"unknown hyperfine preset {name!r}; choose from {sorted(_PRESETS)}"
        ) from None
    return a1.copy(), a2.copy()


def _as_tensor(a) -> tuple[tuple[float, ...], ...]:
    arr = np.asarray(a, dtype=float)
    if arr.shape != (3, 3) or not np.isfinite(arr).all():
        raise ModelError("hyperfine tensors must be finite 3x3 matrices")
    return tuple(tuple(float(x) for x in row) for row in arr)


def _as_vector(v) -> tuple[float, float, float]:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.isfinite(arr).all():
        raise ModelError("local fields must be finite 3-vectors")
    return tuple(float(x) for x in arr)


@dataclass(frozen=True)
class ModelSpec:
    """Full physical configuration of one radical-pair model.

    Tensors and local fields are stored as nested tuples so specs stay
    hashable and serialise to plain JSON.
    """

    kind: str = HYPERFINE
    external: FieldVector = field(default_factory=FieldVector)
    tensors: tuple = field(default_factory=lambda: tuple(_as_tensor(a) for a in preset("A_default")))
    local_fields: tuple = LOCAL_FIELD_PRESETS["local_4_5"]
    k_S: float = 1.0
    k_T: float = 1.0
    gamma: float = GAMMA_E

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if isinstance(self.external, dict):
            object.__setattr__(self, "external", FieldVector(**self.external))
        if isinstance(self.tensors, str):
            object.__setattr__(self, "tensors", preset(self.tensors))
        if isinstance(self.local_fields, str):
            try:
                lf = LOCAL_FIELD_PRESETS[self.local_fields]
            except KeyError:
                raise ModelError(f"unknown local-field preset {self.local_fields!r}") from None
            object.__setattr__(self, "local_fields", lf)
        if len(self.tensors) != 2 or len(self.local_fields) != 2:
            raise ModelError("exactly two tensors and two local fields are required")
        object.__setattr__(self, "tensors", tuple(_as_tensor(a) for a in self.tensors))
        object.__setattr__(
            self, "local_fields", tuple(_as_vector(b) for b in self.local_fields)
        )
        if not (np.isfinite(self.k_S) and np.isfinite(self.k_T)):
            raise ModelError("decay rates must be finite")
        if self.k_S < 0 or self.k_T < 0:
            raise ModelError(f"decay rates must be >= 0, got k_S={self.k_S}, k_T={self.k_T}")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ModelError(f"gamma must be > 0, got {self.gamma}")

    @property
    def layout(self) -> tuple[str, ...]:
        return HYPERFINE_LAYOUT if self.kind == HYPERFINE else ELECTRON_LAYOUT

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["tensors"] = [[list(r) for r in a] for a in self.tensors]
        d["local_fields"] = [list(b) for b in self.local_fields]
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ModelSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        return cls(**d)


def hyperfine_preset_spec(name: str = "A_default", **kw) -> ModelSpec:
    return ModelSpec(kind=HYPERFINE, tensors=preset(name), **kw)


def local_field_preset_spec(name: str = "local_4_5", **kw) -> ModelSpec:
    return ModelSpec(kind=LOCAL_FIELD, local_fields=LOCAL_FIELD_PRESETS[name], **kw)


def _zeeman(b: np.ndarray, site: int, layout) -> np.ndarray:
    return sum(b[a] * embed(s, site, layout) for a, s in enumerate(spin_vector()))


def raw_hyperfine_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Hyperfine Hamiltonian before any Hermitisation."""
    if spec.kind != HYPERFINE:
        raise ModelError(f"expected a hyperfine model, got kind {spec.kind!r}")
    layout = HYPERFINE_LAYOUT
    s = spin_vector()
    b = spec.external.cartesian()
    h = np.zeros((16, 16), dtype=complex)
    for electron, nucleus, tensor in ((0, 2, spec.tensors[0]), (1, 3, spec.tensors[1])):
        h += _zeeman(b, electron, layout)
        for i in range(3):
            s_i = embed(s[i], electron, layout)
            for j in range(3):
                if tensor[i][j]:
                    h += tensor[i][j] * s_i @ embed(s[j], nucleus, layout)
    return spec.gamma * h


def build_hyperfine_hamiltonian(spec: ModelSpec, return_defect: bool = False):
    """16x16 Hamiltonian on (e1, e2, n1, n2), Hermitised as (H + H^dag) / 2.

    Each S_a I_b term is a product of commuting Hermitian factors, so the raw
    operator is already Hermitian even for non-symmetric tensors; the defect
    reported with ``return_defect=True`` is pure round-off.
    """
    h = raw_hyperfine_hamiltonian(spec)
    defect = hermitian_defect(h)
    h = (h + h.conj().T) / 2
    return (h, defect) if return_defect else h


def build_local_field_hamiltonian(spec: ModelSpec) -> np.ndarray:
    if spec.kind != LOCAL_FIELD:
        raise ModelError(f"expected a local-field model, got kind {spec.kind!r}")
    b = spec.external.cartesian()
    h = sum(
        _zeeman(b + np.asarray(local), site, ELECTRON_LAYOUT)
        for site, local in enumerate(spec.local_fields)
    )
    return spec.gamma * h


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    if spec.kind == HYPERFINE:
        return build_hyperfine_hamiltonian(spec)
    return build_local_field_hamiltonian(spec)


def initial_state(kind: str = HYPERFINE) -> DensityMatrix:
    """Electron singlet, with nuclei (hyperfine kind) fully mixed."""
    q_s = np.outer(SINGLET, SINGLET.conj())
    if kind == HYPERFINE:
        return DensityMatrix(np.kron(q_s, np.eye(4) / 4), HYPERFINE_LAYOUT)
    if kind == LOCAL_FIELD:
        return DensityMatrix(q_s, ELECTRON_LAYOUT)
    raise ModelError(f"unknown model kind {kind!r}")
