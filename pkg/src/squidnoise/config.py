"""JSON run configuration.

Every key has a default taken from the packaged ``default_config.json``;
a user file overrides any subset.  Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import difflib
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from .potential import HamiltonianParams


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def default_config_dict() -> dict:
    text = resources.files("squidnoise").joinpath("data/default_config.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class NoiseSettings:
    delta: float
    omega_c: float
    dt: float


@dataclass(frozen=True)
class EnsembleSettings:
    n_realizations: int
    master_seed: int
    total_time: float | None
    sample_every: int | None
    initial_state: str | list


@dataclass(frozen=True)
class RunConfig:
    hamiltonian: HamiltonianParams
    n_basis: int
    isolation_min: float
    vx_range: tuple[float, float]
    noise: NoiseSettings
    ensemble: EnsembleSettings
    tolerances: dict
    output_directory: str
    output_formats: tuple[str, ...]
    defaulted: tuple[str, ...] = field(default=(), compare=False)
    source: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        """Resolved configuration in the on-disk layout."""
        return {
            "version": 1,
            "hamiltonian": asdict(self.hamiltonian),
            "basis": {"n_basis": self.n_basis},
            "calibration": {"isolation_min": self.isolation_min, "vx_range": list(self.vx_range)},
            "noise": asdict(self.noise),
            "ensemble": asdict(self.ensemble),
            "analysis": {"tolerances": dict(self.tolerances)},
            "output": {"directory": self.output_directory, "formats": list(self.output_formats)},
        }


def _merge(defaults: dict, user: dict, path: str, defaulted: list[str]) -> dict:
    if not isinstance(user, dict):
        raise ValidationError(path or "<root>", f"expected an object, got {type(user).__name__}")
    for key in user:
        if key not in defaults:
            hint = difflib.get_close_matches(key, list(defaults), n=1)
            where = f"{path}.{key}" if path else key
            raise ValidationError(where, "unknown key" + (f"; did you mean {hint[0]!r}?" if hint else ""))
    out = {}
    for key, dval in defaults.items():
        where = f"{path}.{key}" if path else key
        nested = isinstance(dval, dict) and key != "tolerances"
        if nested:
            out[key] = _merge(dval, user.get(key, {}), where, defaulted)
        elif key not in user:
            out[key] = copy.deepcopy(dval)
            defaulted.append(where)
        else:
            out[key] = user[key]
    return out


def _number(d: dict, key: str, path: str, *, positive=False, nonneg=False, integer=False, allow_none=False):
    v = d[key]
    where = f"{path}.{key}"
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(where, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ValidationError(where, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ValidationError(where, "must be finite")
    if positive and not v > 0:
        raise ValidationError(where, f"must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ValidationError(where, f"must be >= 0, got {v!r}")
    return int(v) if integer else float(v)


def config_from_dict(user: dict, source: str | None = None) -> RunConfig:
    defaulted: list[str] = []
    d = _merge(default_config_dict(), user, "", defaulted)
    if d["version"] != 1:
        raise ValidationError("version", f"unsupported config version {d['version']!r}")

    h = d["hamiltonian"]
    mu = _number(h, "mu", "hamiltonian", positive=True)
    v0 = _number(h, "v0", "hamiltonian", positive=True)
    beta = _number(h, "beta", "hamiltonian")
    phi_ext = _number(h, "phi_ext", "hamiltonian")
    hamiltonian = HamiltonianParams(mu=mu, beta=beta, v0=v0, phi_ext=phi_ext)

    n_basis = _number(d["basis"], "n_basis", "basis", integer=True)
    if n_basis < 8:
        raise ValidationError("basis.n_basis", "must be >= 8")

    c = d["calibration"]
    iso = _number(c, "isolation_min", "calibration", nonneg=True)
    vr = c["vx_range"]
    if not (isinstance(vr, list) and len(vr) == 2 and all(isinstance(x, (int, float)) for x in vr) and vr[0] < vr[1]):
        raise ValidationError("calibration.vx_range", f"expected [low, high] with low < high, got {vr!r}")

    n = d["noise"]
    noise = NoiseSettings(
        delta=_number(n, "delta", "noise", nonneg=True),
        omega_c=_number(n, "omega_c", "noise", positive=True),
        dt=_number(n, "dt", "noise", positive=True),
    )
    if noise.omega_c * noise.dt > 0.2:
        raise ValidationError("noise.dt", f"omega_c*dt = {noise.omega_c * noise.dt:.3g} exceeds 0.2")

    e = d["ensemble"]
    n_real = _number(e, "n_realizations", "ensemble", integer=True, positive=True)
    seed = _number(e, "master_seed", "ensemble", integer=True, nonneg=True)
    if seed >= 2**64:
        raise ValidationError("ensemble.master_seed", "must fit in 64 bits")
    init = e["initial_state"]
    if not (isinstance(init, str) or (isinstance(init, list) and len(init) == 2)):
        raise ValidationError("ensemble.initial_state", f"expected a selector string or [c_L, c_R], got {init!r}")
    ensemble = EnsembleSettings(
        n_realizations=n_real,
        master_seed=seed,
        total_time=_number(e, "total_time", "ensemble", positive=True, allow_none=True),
        sample_every=_number(e, "sample_every", "ensemble", integer=True, positive=True, allow_none=True),
        initial_state=init,
    )

    tol_defaults = default_config_dict()["analysis"]["tolerances"]
    tol = d["analysis"]["tolerances"]
    for key in tol:
        if key not in tol_defaults:
            raise ValidationError(f"analysis.tolerances.{key}", "unknown tolerance")
    tol = {**tol_defaults, **tol}
    for key in tol:
        _number(tol, key, "analysis.tolerances", positive=True)

    o = d["output"]
    if not isinstance(o["directory"], str):
        raise ValidationError("output.directory", "expected a string")
    formats = tuple(o["formats"])
    for f in formats:
        if f not in ("csv", "json"):
            raise ValidationError("output.formats", f"unsupported format {f!r}")

    return RunConfig(
        hamiltonian=hamiltonian,
        n_basis=n_basis,
        isolation_min=iso,
        vx_range=(float(vr[0]), float(vr[1])),
        noise=noise,
        ensemble=ensemble,
        tolerances={k: float(v) for k, v in tol.items()},
        output_directory=o["directory"],
        output_formats=formats,
        defaulted=tuple(defaulted),
        source=source,
    )


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read and validate a JSON config; ``None`` gives the packaged defaults."""
    if path is None:
        return config_from_dict({}, source="<defaults>")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config {p}: {exc.strerror or exc}") from exc
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(user, source=str(p))
