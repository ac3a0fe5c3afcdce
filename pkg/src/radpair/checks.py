"""Cross-module invariant suite run by ``radpair check``."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dynamics import propagate_exact_equal_rates, propagate_general
from .model import (
    GAMMA_E,
    HYPERFINE,
    LOCAL_FIELD_PRESETS,
    FieldVector,
    ModelSpec,
    build_hamiltonian,
    initial_state,
    preset,
)
from .observables import negativity_trajectory, triplet_yield, triplet_yield_quadrature
from .spin import HYPERFINE_LAYOUT, hermitian_defect, singlet_triplet_projectors


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _models(base: dict) -> list[ModelSpec]:
    out = []
    for name in ("A_default", "A_b", "A_c"):
        out.append(ModelSpec(**{**base, "kind": HYPERFINE, "tensors": preset(name)}))
    for name in LOCAL_FIELD_PRESETS:
        out.append(ModelSpec(**{**base, "kind": "local-field", "local_fields": LOCAL_FIELD_PRESETS[name]}))
    return out


def _base(overrides: dict) -> dict:
    base = {"external": FieldVector(0.5, 68.0, 0.0), "k_S": 1.0, "k_T": 1.0, "gamma": GAMMA_E}
    ext = dict(dataclasses.asdict(base["external"]))
    for key, value in overrides.items():
        if key == "k":
            base["k_S"] = base["k_T"] = value
        elif key.startswith("external."):
            ext[key.split(".", 1)[1]] = value
        elif key in base:
            base[key] = value
    base["external"] = ext
    return base


def run_checks(overrides: dict | None = None) -> list[CheckResult]:
    overrides = overrides or {}
    base = _base(overrides)
    results = [
        CheckResult("gamma_positive", base["gamma"] > 0, f"gamma = {base['gamma']}"),
        CheckResult("rates_nonnegative", min(base["k_S"], base["k_T"]) >= 0,
                    f"k_S = {base['k_S']}, k_T = {base['k_T']}"),
    ]
    if not all(r.passed for r in results):
        return results
    try:
        base["external"] = FieldVector(**base["external"])
        models = _models(base)
    except ValueError as exc:
        return results + [CheckResult("model_construction", False, str(exc))]

    q_s, q_t = singlet_triplet_projectors(HYPERFINE_LAYOUT)
    results.append(CheckResult(
        "projector_completeness",
        np.max(np.abs(q_s + q_t - np.eye(16))) <= 1e-14 and np.max(np.abs(q_s @ q_t)) <= 1e-14,
    ))
    worst = max(hermitian_defect(build_hamiltonian(m)) for m in models)
    results.append(CheckResult("hamiltonian_hermitian", worst <= 1e-12, f"max defect {worst:.2e}"))

    times = np.linspace(0.0, 1.0, 201)
    k = 1.0
    decay_err = cross_err = 0.0
    neg_ok = True
    for m in models:
        h = build_hamiltonian(m)
        rho0 = initial_state(m.kind)
        exact = propagate_exact_equal_rates(h, rho0, k, times)
        decay_err = max(decay_err, float(np.max(np.abs(exact.traces() - np.exp(-k * times)))))
        general = propagate_general(h, rho0, k, k, times[:41])
        cross_err = max(cross_err, float(np.max(np.abs(general.states - exact.states[:41]))))
        y = negativity_trajectory(exact).y
        neg_ok &= bool(np.all((y >= 0) & (y <= 0.5)))
    results.append(CheckResult("trace_decay_law", decay_err <= 1e-8, f"max error {decay_err:.2e}"))
    results.append(CheckResult("propagator_cross_validation", cross_err <= 1e-8, f"max error {cross_err:.2e}"))
    results.append(CheckResult("negativity_bounds", neg_ok))

    cons = quad = 0.0
    for m in models:
        h = build_hamiltonian(m)
        rho0 = initial_state(m.kind)
        cf = triplet_yield(h, rho0, k)
        cons = max(cons, abs(cf.phi_T + cf.phi_S - 1))
        if m.kind == HYPERFINE:
            quad = max(quad, abs(triplet_yield_quadrature(h, rho0, k).phi_T - cf.phi_T))
    results.append(CheckResult("yield_conservation", cons <= 1e-6, f"max |phi_T + phi_S - 1| = {cons:.2e}"))
    results.append(CheckResult("yield_closed_form_vs_quadrature", quad <= 1e-6, f"max difference {quad:.2e}"))
    return results
