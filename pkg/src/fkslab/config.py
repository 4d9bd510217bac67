"""Line-based experiment configs: "section.key = value", '#' comments.

Kept deliberately flat so configs stay diffable and hashable; unknown keys
are hard errors.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import lattice, sampler

MC_CHECKS = ("thm31", "thm32i", "onsager", "lowtemp", "thm51", "prop43")
EXACT_CHECKS = ("prop21", "impl_npiani", "eq4", "rotation")
ALL_CHECKS = MC_CHECKS + EXACT_CHECKS


class ConfigError(ValueError):
    """Malformed or inconsistent experiment config."""


@dataclass(frozen=True)
class GraphSpec:
    kind: str = "cubic"          # cubic | slab
    d: int = 2
    n_layers: int = 2
    side: int = 16
    periodic: bool = False

    def build(self):
        if self.kind == "cubic":
            return lattice.build_cubic_box(self.d, self.side)
        return lattice.build_slab(self.n_layers, self.side,
                                  periodic_vertical=self.periodic)

    @property
    def resolved_kind(self):
        if self.kind == "cubic":
            return "cubic"
        return "slab_periodic" if self.periodic else "slab"


@dataclass(frozen=True)
class ModelSpec:
    betas: tuple
    j_horizontal: float = 1.0
    j_vertical: float = 1.0
    boundary: str = "plus"

    def params(self, beta):
        return sampler.ModelParams(beta=beta, j_horizontal=self.j_horizontal,
                                   j_vertical=self.j_vertical,
                                   boundary=self.boundary)


@dataclass(frozen=True)
class ScheduleSpec:
    sweeps: int
    burn_in: int
    thin: int = 1
    chains: int = 1
    base_seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec
    model: ModelSpec
    schedule: ScheduleSpec
    checks: tuple = ()
    out_dir: str = "out"
    raw_items: tuple = field(default=(), repr=False)

    def config_hash(self):
        canon = "\n".join(f"{k} = {v}" for k, v in sorted(self.raw_items))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


_BOOL = {"true": True, "false": False, "on": True, "off": False,
         "yes": True, "no": False, "1": True, "0": False}


def _to_bool(key, value):
    try:
        return _BOOL[value.lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {value!r}") from None


def _to_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _to_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


_KNOWN_KEYS = {
    "graph.kind", "graph.d", "graph.n", "graph.side", "graph.periodic",
    "model.beta", "model.beta_grid", "model.j_horizontal", "model.j_vertical",
    "model.boundary",
    "schedule.burn_in", "schedule.sweeps", "schedule.thin", "schedule.chains",
    "schedule.base_seed", "schedule.workers",
    "checks.run",
    "output.dir",
}

#: which graph kinds each check applies to
CHECK_REQUIRES = {
    "thm31": ("cubic",),
    "thm32i": ("cubic",),
    "onsager": ("cubic",),
    "lowtemp": ("cubic",),
    "prop21": ("cubic",),
    "eq4": ("cubic", "slab", "slab_periodic"),
    "thm51": ("slab",),
    "prop43": ("slab", "slab_periodic"),
    "impl_npiani": ("slab", "slab_periodic"),
    "rotation": ("slab_periodic",),
}


def parse_config(text):
    """Parse and validate config text into an ExperimentConfig."""
    items = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in items:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        items[key] = value

    kind = items.get("graph.kind", "cubic").lower()
    if kind not in ("cubic", "slab"):
        raise ConfigError("graph.kind must be cubic or slab")
    periodic = _to_bool("graph.periodic", items["graph.periodic"]) \
        if "graph.periodic" in items else False
    if kind == "cubic" and periodic:
        raise ConfigError("graph.periodic applies to slabs only")
    n_layers = _to_int("graph.n", items.get("graph.n", "2"))
    if periodic and n_layers < 3:
        raise ConfigError("graph.periodic with graph.N < 3 makes a degenerate "
                          "periodic edge")
    graph = GraphSpec(kind=kind,
                      d=_to_int("graph.d", items.get("graph.d", "2")),
                      n_layers=n_layers,
                      side=_to_int("graph.side", items.get("graph.side", "16")),
                      periodic=periodic)
    if graph.d < 1 or graph.side < 1 or graph.n_layers < 1:
        raise ConfigError("graph dimensions must be positive")

    if "model.beta" in items and "model.beta_grid" in items:
        raise ConfigError("give model.beta or model.beta_grid, not both")
    if "model.beta" in items:
        betas = (_to_float("model.beta", items["model.beta"]),)
    elif "model.beta_grid" in items:
        betas = tuple(_to_float("model.beta_grid", part.strip())
                      for part in items["model.beta_grid"].split(","))
        if len(betas) < 1 or any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ConfigError("model.beta_grid must be strictly increasing")
    else:
        raise ConfigError("model.beta (or model.beta_grid) is required")
    if any(b < 0 for b in betas):
        raise ConfigError("beta must be >= 0")
    boundary = items.get("model.boundary", "plus")
    if boundary not in sampler.BOUNDARY_MODES:
        raise ConfigError(f"model.boundary must be one of {sampler.BOUNDARY_MODES}")
    model = ModelSpec(
        betas=betas,
        j_horizontal=_to_float("model.j_horizontal",
                               items.get("model.j_horizontal", "1")),
        j_vertical=_to_float("model.j_vertical",
                             items.get("model.j_vertical", "1")),
        boundary=boundary)
    if model.j_horizontal <= 0 or model.j_vertical <= 0:
        raise ConfigError("couplings must be positive")

    if "schedule.sweeps" not in items:
        raise ConfigError("schedule.sweeps is required")
    default_burn = 10 * graph.side
    schedule = ScheduleSpec(
        sweeps=_to_int("schedule.sweeps", items["schedule.sweeps"]),
        burn_in=_to_int("schedule.burn_in",
                        items.get("schedule.burn_in", str(default_burn))),
        thin=_to_int("schedule.thin", items.get("schedule.thin", "1")),
        chains=_to_int("schedule.chains", items.get("schedule.chains", "1")),
        base_seed=_to_int("schedule.base_seed",
                          items.get("schedule.base_seed", "0")),
        workers=_to_int("schedule.workers", items.get("schedule.workers", "1")))
    if schedule.sweeps < 1 or schedule.burn_in < 0 or schedule.thin < 1:
        raise ConfigError("schedule entries must be positive")
    if schedule.chains < 1 or schedule.workers < 1:
        raise ConfigError("schedule.chains and schedule.workers must be >= 1")

    checks = ()
    if "checks.run" in items:
        checks = tuple(c.strip() for c in items["checks.run"].split(",") if c.strip())
        for c in checks:
            if c not in ALL_CHECKS:
                raise ConfigError(f"unknown check {c!r}")
            allowed = CHECK_REQUIRES[c]
            if graph.resolved_kind not in allowed:
                need = " or ".join(allowed)
                extra = ""
                if c == "thm51":
                    extra = " with N=2"
                raise ConfigError(
                    f"check {c!r} requires graph kind {need}{extra}, "
                    f"got {graph.resolved_kind}")
            if c == "thm51" and graph.n_layers != 2:
                raise ConfigError("check 'thm51' requires slab N=2")
            if c == "rotation" and graph.n_layers != 3:
                raise ConfigError("check 'rotation' requires periodic slab N=3")

    return ExperimentConfig(graph=graph, model=model, schedule=schedule,
                            checks=checks,
                            out_dir=items.get("output.dir", "out"),
                            raw_items=tuple(sorted(items.items())))


def parse_config_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
