"""Dense spin-1/2 operator algebra.

Operators are plain ``numpy`` complex arrays. Multi-spin operators act on a
tensor product whose factor order is given by a *layout*, a tuple of site
labels such as ``("e1", "e2", "n1", "n2")``. Electrons always come first so
the two-electron block is the leading factor of every state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

ELECTRONS = ("e1", "e2")
HYPERFINE_LAYOUT = ("e1", "e2", "n1", "n2")
ELECTRON_LAYOUT = ELECTRONS

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
I2 = np.eye(2, dtype=complex)

# two-electron basis |uu>, |ud>, |du>, |dd>
SINGLET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
T_PLUS = np.array([1, 0, 0, 0], dtype=complex)
T_ZERO = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
T_MINUS = np.array([0, 0, 0, 1], dtype=complex)


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator together with the site labels of its factors."""

    op: np.ndarray
    layout: tuple[str, ...]

    def __post_init__(self):
        op = np.asarray(self.op, dtype=complex)
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "layout", tuple(self.layout))
        if op.shape != (2 ** len(self.layout),) * 2:
            raise LayoutError(
                f"operator shape {op.shape} does not match layout {self.layout}"
            )

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.op).real)

    def normalized(self) -> "DensityMatrix":
        return DensityMatrix(self.op / self.trace(), self.layout)


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def spin_vector() -> list[np.ndarray]:
    """Spin-1/2 operators (Sx, Sy, Sz) = sigma / 2."""
    return [_PAULI[a] / 2 for a in "xyz"]


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def embed(op: np.ndarray, site: int, layout: Sequence[str]) -> np.ndarray:
    """Place a single-spin operator at ``site``, identity on every other factor."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("embed expects a 2x2 operator")
    if not 0 <= site < len(layout):
        raise LayoutError(f"site {site} out of range for layout {tuple(layout)}")
    return kron_all([op if i == site else I2 for i in range(len(layout))])


def singlet_triplet_projectors(
    layout: Sequence[str] = HYPERFINE_LAYOUT, triplet: str = "sum"
) -> tuple[np.ndarray, np.ndarray]:
    """Singlet and triplet projectors on the electron pair, identity on nuclei.

    ``triplet="sum"`` gives the proper projector Q_T = 1 - Q_S. ``"rank1"``
    gives |T><T| with the unnormalised |T> = |T+> + |T0> + |T->, kept only
    for comparison runs; it is not a projector.
    """
    layout = tuple(layout)
    if layout[:2] != ELECTRONS:
        raise LayoutError(f"layout must start with electron sites, got {layout}")
    q_s = np.outer(SINGLET, SINGLET.conj())
    if triplet == "sum":
        q_t = sum(np.outer(v, v.conj()) for v in (T_PLUS, T_ZERO, T_MINUS))
    elif triplet == "rank1":
        t = T_PLUS + T_ZERO + T_MINUS
        q_t = np.outer(t, t.conj())
    else:
        raise ValueError(f"unknown triplet projector variant {triplet!r}")
    nuclear = np.eye(2 ** (len(layout) - 2), dtype=complex)
    return np.kron(q_s, nuclear), np.kron(q_t, nuclear)


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    keep = [s for s in rho.layout if s in set(keep)]
    if not keep:
        raise LayoutError("partial_trace needs at least one site to keep")
    unknown = set(keep) - set(rho.layout)
    if unknown:
        raise LayoutError(f"sites {sorted(unknown)} not in layout {rho.layout}")
    n = len(rho.layout)
    kept = [rho.layout.index(s) for s in keep]
    traced = [i for i in range(n) if i not in kept]
    t = rho.op.reshape((2,) * (2 * n))
    # bra axes live at offset n; contract traced pairs from the highest index down
    for i in sorted(traced, reverse=True):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    d = 2 ** len(kept)
    return DensityMatrix(t.reshape(d, d), tuple(keep))


def partial_transpose(rho, subsystem: str = "first") -> np.ndarray:
    """Transpose one qubit of a two-qubit operator."""
    op = rho.op if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if op.shape != (4, 4):
        raise ValueError(f"partial_transpose needs a 4x4 operator, got {op.shape}")
    t = op.reshape(2, 2, 2, 2)  # (a, b, a', b')
    if subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', got {subsystem!r}")
    return t.reshape(4, 4)


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if np.allclose(m, m.conj().T, atol=1e-12, rtol=0):
        return float(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
