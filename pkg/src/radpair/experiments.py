"""Declarative parameter sweeps and the built-in figure presets."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .dynamics import propagate
from .model import (
    HYPERFINE,
    LOCAL_FIELD,
    FieldVector,
    ModelError,
    ModelSpec,
    build_hamiltonian,
    build_hyperfine_hamiltonian,
    hyperfine_preset_spec,
    initial_state,
    local_field_preset_spec,
)
from .observables import CHSHConfig, CurveSeries, chsh_curve, negativity_trajectory, triplet_yield

OBSERVABLES = ("triplet_yield", "yield_vs_angle", "negativity_curve", "chsh_curve")
TIME_CURVES = ("negativity_curve", "chsh_curve")

# parameter path -> (column name, label stem, label unit)
_AXES = {
    "external.B0": ("B0_G", "B0", "G"),
    "external.theta": ("theta_deg", "theta", "deg"),
    "external.phi": ("phi_deg", "phi", "deg"),
    "k": ("k_per_us", "k", "/us"),
    "k_S": ("kS_per_us", "kS", "/us"),
    "k_T": ("kT_per_us", "kT", "/us"),
    "gamma": ("gamma", "gamma", ""),
}

OPTION_DEFAULTS = {"triplet_projector": "sum", "integrator": "auto"}


class SweepError(ValueError):
    pass


def set_model_path(model: ModelSpec, path: str, value) -> ModelSpec:
    """Return ``model`` with one parameter replaced.

    ``k`` is shorthand for setting both decay rates.
    """
    if path == "k":
        return dataclasses.replace(model, k_S=float(value), k_T=float(value))
    head, _, rest = path.partition(".")
    names = {f.name for f in dataclasses.fields(model)}
    if head not in names:
        raise SweepError(f"unknown model parameter path {path!r}")
    if rest:
        if head != "external":
            raise SweepError(f"unknown model parameter path {path!r}")
        if rest not in {f.name for f in dataclasses.fields(FieldVector)}:
            raise SweepError(f"unknown model parameter path {path!r}")
        return dataclasses.replace(
            model, external=dataclasses.replace(model.external, **{rest: float(value)})
        )
    return dataclasses.replace(model, **{head: value})


def _axis(path: str):
    return _AXES.get(path, (path.replace(".", "_"), path.rsplit(".", 1)[-1], ""))


def point_label(path: str, value: float) -> str:
    _, stem, unit = _axis(path)
    return f"{stem}={value:g}{unit}"


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: an observable evaluated over a grid of one parameter.

    ``series_path``/``series_values`` add an optional second parameter that
    produces one curve per value (used for the decay-rate comparison).
    ``times`` is (t_max in us, number of samples) for time-curve observables.
    """

    name: str
    observable: str
    vary_path: str
    grid: tuple
    model: ModelSpec
    description: str = ""
    series_path: str | None = None
    series_values: tuple = ()
    times: tuple = (1.0, 2000)
    chsh: CHSHConfig = field(default_factory=CHSHConfig)
    options: dict = field(default_factory=dict)
    output: str | None = None

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise SweepError(f"observable must be one of {OBSERVABLES}, got {self.observable!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid or not np.isfinite(grid).all():
            raise SweepError(f"{self.name}: grid must be non-empty and finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "series_values", tuple(float(v) for v in self.series_values))
        if self.observable not in TIME_CURVES and np.any(np.diff(grid) <= 0):
            raise SweepError(f"{self.name}: grid must increase strictly")
        if isinstance(self.model, dict):
            object.__setattr__(self, "model", ModelSpec.from_dict(self.model))
        if isinstance(self.chsh, dict):
            object.__setattr__(self, "chsh", CHSHConfig(**self.chsh))
        unknown = set(self.options) - set(OPTION_DEFAULTS)
        if unknown:
            raise SweepError(f"{self.name}: unknown options {sorted(unknown)}")
        object.__setattr__(self, "options", {**OPTION_DEFAULTS, **self.options})
        t_max, n = self.times
        if not (t_max > 0 and int(n) >= 2):
            raise SweepError(f"{self.name}: times must be (t_max > 0, n >= 2)")
        object.__setattr__(self, "times", (float(t_max), int(n)))
        # validates both paths against the template
        set_model_path(self.model, self.vary_path, grid[0])
        if self.series_path is not None:
            if not self.series_values:
                raise SweepError(f"{self.name}: series_path given without series_values")
            set_model_path(self.model, self.series_path, self.series_values[0])

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.times[0], self.times[1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "description": self.description,
            "observable": self.observable,
            "vary_path": self.vary_path,
            "grid": list(self.grid),
            "series_path": self.series_path,
            "series_values": list(self.series_values),
            "times": list(self.times),
            "model": self.model.to_dict(),
            "chsh": dataclasses.asdict(self.chsh),
            "options": dict(self.options),
            "output": self.output,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SweepSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise SweepError(f"unknown sweep keys: {sorted(unknown)}")
        d = dict(d)
        if "chsh" in d and isinstance(d["chsh"], dict):
            d["chsh"] = CHSHConfig(**{k: tuple(v) if isinstance(v, list) else v for k, v in d["chsh"].items()})
        return cls(**d)

    def with_override(self, path: str, value) -> "SweepSpec":
        """Apply one ``section.key`` override; bare keys address the model."""
        head, _, rest = path.partition(".")
        if head == "chsh":
            if rest not in {f.name for f in dataclasses.fields(CHSHConfig)}:
                raise SweepError(f"unknown CHSH parameter {rest!r}")
            if isinstance(value, list):
                value = tuple(value)
            return dataclasses.replace(self, chsh=dataclasses.replace(self.chsh, **{rest: value}))
        if head == "options":
            if rest not in OPTION_DEFAULTS:
                raise SweepError(f"unknown option {rest!r}")
            return dataclasses.replace(self, options={**self.options, rest: value})
        if head == "times":
            idx = {"t_max": 0, "n": 1}.get(rest)
            if idx is None:
                raise SweepError(f"unknown times parameter {rest!r}")
            times = list(self.times)
            times[idx] = value
            return dataclasses.replace(self, times=tuple(times))
        if head == "model":
            path = rest
        try:
            model = set_model_path(self.model, path, value)
        except TypeError as exc:
            raise SweepError(f"bad value for {path!r}: {exc}") from None
        return dataclasses.replace(self, model=model)


def _evaluate(spec: SweepSpec, series_value, grid_value):
    """Compute one grid point; returns (y values, point metadata)."""
    model = spec.model
    if spec.series_path is not None:
        model = set_model_path(model, spec.series_path, series_value)
    model = set_model_path(model, spec.vary_path, grid_value)
    meta: dict[str, Any] = {}
    if model.kind == HYPERFINE:
        h, defect = build_hyperfine_hamiltonian(model, return_defect=True)
        meta["hermitian_defect"] = defect
    else:
        h = build_hamiltonian(model)
    rho0 = initial_state(model.kind)

    if spec.observable in ("triplet_yield", "yield_vs_angle"):
        if model.k_S != model.k_T:
            raise SweepError("triplet yield requires equal singlet and triplet rates")
        res = triplet_yield(h, rho0, model.k_S, triplet=spec.options["triplet_projector"])
        meta["integrator"] = {"method": res.method}
        return np.array([res.phi_T]), model, meta
    times = spec.time_grid()
    if spec.observable == "negativity_curve":
        traj = propagate(h, rho0, model.k_S, model.k_T, times, method=spec.options["integrator"])
        meta["integrator"] = traj.meta
        return negativity_trajectory(traj).y, model, meta
    if model.kind != LOCAL_FIELD:
        raise SweepError("chsh_curve is defined for the local-field model")
    meta["integrator"] = {"method": "pure_state_eigh"}
    return chsh_curve(h, spec.chsh, times), model, meta


def _evaluate_task(args):
    spec_dict, series_value, grid_value = args
    spec = SweepSpec.from_dict(spec_dict)
    try:
        return _evaluate(spec, series_value, grid_value)
    except (ModelError, SweepError, ValueError, RuntimeError) as exc:
        where = f"{spec.vary_path}={grid_value:g}"
        if spec.series_path is not None:
            where = f"{spec.series_path}={series_value:g}, " + where
        raise SweepError(f"{spec.name}: grid point {where}: {exc}") from exc


def _json_safe(meta):
    return {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in meta.items()}


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[CurveSeries]:
    """Run every grid point and assemble curves in grid order."""
    series_values = spec.series_values if spec.series_path is not None else (None,)
    tasks = [(spec.to_dict(), s, g) for s in series_values for g in spec.grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_task, tasks))
    else:
        results = [_evaluate_task(t) for t in tasks]

    base_meta = {"sweep": spec.to_dict(), "version": __version__}
    out = []
    if spec.observable in TIME_CURVES:
        times = spec.time_grid()
        for (_, s, g), (y, model, meta) in zip(tasks, results):
            label = point_label(spec.vary_path, g)
            if s is not None:
                label = point_label(spec.series_path, s) + "," + label
            m = {**base_meta, "point": {"series": s, "value": g}, "model": model.to_dict(),
                 **_json_safe(meta)}
            out.append(CurveSeries(label, "time_us", "us", times.copy(), np.asarray(y, dtype=float), m))
        return out

    x_name, _, x_unit = _axis(spec.vary_path)
    n = len(spec.grid)
    for i, s in enumerate(series_values):
        chunk = results[i * n:(i + 1) * n]
        y = np.array([r[0][0] for r in chunk])
        label = "phi_T" if s is None else point_label(spec.series_path, s)
        model = spec.model if s is None else set_model_path(spec.model, spec.series_path, s)
        defects = [r[2].get("hermitian_defect", 0.0) for r in chunk]
        m = {**base_meta, "point": {"series": s}, "model": model.to_dict(),
             "integrator": chunk[0][2]["integrator"], "hermitian_defect": float(max(defects))}
        out.append(CurveSeries(label, x_name, x_unit, np.asarray(spec.grid), y, m))
    return out


def _angles(step):
    return tuple(float(v) for v in np.arange(0, 181, step))


def builtin_experiments() -> list[SweepSpec]:
    yield_model = hyperfine_preset_spec("A_default", external=FieldVector(0.5, 68.0, 0.0))
    specs = [
        SweepSpec(
            name="fig2_decay_rates",
            description="triplet yield vs field magnitude for k = 0.1, 1, 10 /us (A_default, theta=68deg)",
            observable="triplet_yield",
            vary_path="external.B0",
            grid=tuple(np.logspace(-2, 1, 200)),
            series_path="k",
            series_values=(0.1, 1.0, 10.0),
            model=yield_model,
        ),
        SweepSpec(
            name="fig3_field_magnitudes",
            description="electron-pair negativity vs time for B0 in {0.1, 0.25, 0.5, 1, 5} G at theta=68deg",
            observable="negativity_curve",
            vary_path="external.B0",
            grid=(0.1, 0.25, 0.5, 1.0, 5.0),
            model=yield_model,
        ),
        SweepSpec(
            name="fig4_angle_yield",
            description="triplet yield vs polar angle on a 1deg grid (A_default, B0=0.5 G, k=1 /us)",
            observable="yield_vs_angle",
            vary_path="external.theta",
            grid=_angles(1),
            model=yield_model,
        ),
    ]
    for name, tensors, what in (
        ("fig5_angle_negativity_default", "A_default", "A_default"),
        ("fig6a_angle_negativity_Ab", "A_b", "A_b"),
        ("fig6b_angle_negativity_Ac", "A_c", "A_c"),
    ):
        specs.append(SweepSpec(
            name=name,
            description=f"negativity vs time for theta = 0..180deg step 30 ({what}, B0=0.5 G)",
            observable="negativity_curve",
            vary_path="external.theta",
            grid=_angles(30),
            model=hyperfine_preset_spec(tensors, external=FieldVector(0.5, 0.0, 0.0)),
        ))
    for preset_name in ("local_4_5", "local_5_5"):
        specs.append(SweepSpec(
            name=f"fig7_chsh_{preset_name}_azimuthal",
            description=f"CHSH witness vs time, phi = 0..150deg step 30 at theta=0 ({preset_name})",
            observable="chsh_curve",
            vary_path="external.phi",
            grid=tuple(float(v) for v in range(0, 151, 30)),
            times=(0.15, 1500),
            model=local_field_preset_spec(preset_name, external=FieldVector(0.5, 0.0, 0.0)),
        ))
        specs.append(SweepSpec(
            name=f"fig7_chsh_{preset_name}_polar",
            description=f"CHSH witness vs time, theta = 0..180deg step 30 at phi=90deg ({preset_name})",
            observable="chsh_curve",
            vary_path="external.theta",
            grid=_angles(30),
            times=(0.15, 1500),
            model=local_field_preset_spec(preset_name, external=FieldVector(0.5, 0.0, 90.0)),
        ))
    return specs


def builtin(name: str) -> SweepSpec:
    for spec in builtin_experiments():
        if spec.name == name:
            return spec
    raise SweepError(f"unknown builtin experiment {name!r}")
