"""Run configuration: structured key-value files (YAML) for reproducible runs.

A config selects exactly one mode: ``solve`` (mesh a described
structure and solve it), ``converge`` (run a named benchmark study),
or ``demo`` (a packaged demo structure).  Parsing and serialization
round-trip exactly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError
from .model import Load, Material, PlatePatch, StructureModel

__all__ = ["RunConfig", "parse_config", "serialize_config", "load_config", "structure_from_config"]

MODES = ("solve", "converge", "demo")


@dataclass
class PatchConfig:
    id: int
    vertices: list
    normal: Optional[list] = None
    sides: Optional[list] = None


@dataclass
class LoadConfig:
    patch: int
    force: list


@dataclass
class OutputConfig:
    directory: str = "out"
    vtk: bool = True
    deform_scale: float = 1.0
    matrix: bool = False
    mesh_dump: bool = False


@dataclass
class AdaptivityConfig:
    enabled: bool = False
    theta: float = 0.5
    steps: int = 2


@dataclass
class ConvergeConfig:
    benchmark: str = "ss_square"
    meshes: int = 4
    base_subdivisions: Optional[int] = None


@dataclass
class DemoConfig:
    name: str = "box"
    thickness: float = 0.01
    subdivisions: int = 8
    floor_fix: str = "edges"


@dataclass
class RunConfig:
    mode: str = "solve"
    material: Optional[dict] = None
    penalty_beta0: float = 10.0
    subdivisions: int = 4
    refinements: int = 0
    patches: list = field(default_factory=list)
    loads: list = field(default_factory=list)
    fixed_patches: list = field(default_factory=list)
    adaptivity: AdaptivityConfig = field(default_factory=AdaptivityConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    converge: ConvergeConfig = field(default_factory=ConvergeConfig)
    demo: DemoConfig = field(default_factory=DemoConfig)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "solve":
            if not self.patches:
                raise ConfigError("solve mode needs at least one patch")
            if self.material is None:
                raise ConfigError("solve mode needs a material section")
            ids = [p.id for p in self.patches]
            if len(set(ids)) != len(ids):
                raise ConfigError("duplicate patch ids in config")
            for ld in self.loads:
                if ld.patch not in ids:
                    raise ConfigError(f"load references unknown patch {ld.patch}")
            for pid in self.fixed_patches:
                if pid not in ids:
                    raise ConfigError(f"fixed_patches references unknown patch {pid}")
        if self.subdivisions < 1:
            raise ConfigError("subdivisions must be >= 1")
        if self.refinements < 0:
            raise ConfigError("refinements must be >= 0")
        if not 0.0 < self.adaptivity.theta <= 1.0:
            raise ConfigError("adaptivity theta must lie in (0, 1]")
        if self.demo.floor_fix not in ("edges", "face"):
            raise ConfigError("demo floor_fix must be 'edges' or 'face'")
        return self


def _get(d: dict, key: str, kind, default=None, where="config"):
    if key not in d:
        if default is not None or key in ("normal", "sides"):
            return default
        raise ConfigError(f"missing key {key!r} in {where}")
    return d[key]


def parse_config(text: str) -> RunConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as err:
        mark = getattr(err, "problem_mark", None)
        line = f" (line {mark.line + 1})" if mark is not None else ""
        raise ConfigError(f"config is not valid YAML{line}: {err}") from err
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    known = {
        "mode",
        "material",
        "penalty_beta0",
        "subdivisions",
        "refinements",
        "patches",
        "loads",
        "fixed_patches",
        "adaptivity",
        "output",
        "converge",
        "demo",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")

    cfg = RunConfig()
    cfg.mode = raw.get("mode", "solve")
    cfg.material = raw.get("material")
    cfg.penalty_beta0 = float(raw.get("penalty_beta0", 10.0))
    cfg.subdivisions = int(raw.get("subdivisions", 4))
    cfg.refinements = int(raw.get("refinements", 0))
    cfg.patches = [
        PatchConfig(
            id=int(_get(p, "id", int, where="patch")),
            vertices=_get(p, "vertices", list, where="patch"),
            normal=p.get("normal"),
            sides=p.get("sides"),
        )
        for p in raw.get("patches", [])
    ]
    cfg.loads = [
        LoadConfig(patch=int(_get(l, "patch", int, where="load")), force=_get(l, "force", list, where="load"))
        for l in raw.get("loads", [])
    ]
    cfg.fixed_patches = [int(x) for x in raw.get("fixed_patches", [])]
    if "adaptivity" in raw:
        a = raw["adaptivity"]
        cfg.adaptivity = AdaptivityConfig(
            enabled=bool(a.get("enabled", False)),
            theta=float(a.get("theta", 0.5)),
            steps=int(a.get("steps", 2)),
        )
    if "output" in raw:
        o = raw["output"]
        cfg.output = OutputConfig(
            directory=str(o.get("directory", "out")),
            vtk=bool(o.get("vtk", True)),
            deform_scale=float(o.get("deform_scale", 1.0)),
            matrix=bool(o.get("matrix", False)),
            mesh_dump=bool(o.get("mesh_dump", False)),
        )
    if "converge" in raw:
        c = raw["converge"]
        base = c.get("base_subdivisions")
        cfg.converge = ConvergeConfig(
            benchmark=str(c.get("benchmark", "ss_square")),
            meshes=int(c.get("meshes", 4)),
            base_subdivisions=None if base is None else int(base),
        )
    if "demo" in raw:
        d = raw["demo"]
        cfg.demo = DemoConfig(
            name=str(d.get("name", "box")),
            thickness=float(d.get("thickness", 0.01)),
            subdivisions=int(d.get("subdivisions", 8)),
            floor_fix=str(d.get("floor_fix", "edges")),
        )
    return cfg.validate()


def serialize_config(cfg: RunConfig) -> str:
    doc = {
        "mode": cfg.mode,
        "material": cfg.material,
        "penalty_beta0": cfg.penalty_beta0,
        "subdivisions": cfg.subdivisions,
        "refinements": cfg.refinements,
        "patches": [
            {k: v for k, v in asdict(p).items() if v is not None} for p in cfg.patches
        ],
        "loads": [asdict(l) for l in cfg.loads],
        "fixed_patches": cfg.fixed_patches,
        "adaptivity": asdict(cfg.adaptivity),
        "output": asdict(cfg.output),
        "converge": asdict(cfg.converge),
        "demo": asdict(cfg.demo),
    }
    if doc["material"] is None:
        del doc["material"]
    return yaml.safe_dump(doc, sort_keys=True, default_flow_style=None)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def material_from_config(cfg: RunConfig) -> Material:
    m = cfg.material or {}
    try:
        return Material(
            youngs_modulus=float(m["youngs_modulus"]),
            poisson_ratio=float(m["poisson_ratio"]),
            thickness=float(m["thickness"]),
        )
    except KeyError as err:
        raise ConfigError(f"material section is missing {err.args[0]!r}") from err


def structure_from_config(cfg: RunConfig) -> StructureModel:
    material = material_from_config(cfg)
    patches = []
    for p in cfg.patches:
        nverts = len(p.vertices)
        tags = tuple(p.sides) if p.sides is not None else ("free",) * nverts
        if len(tags) != nverts:
            raise ConfigError(f"patch {p.id}: {len(tags)} side tags for {nverts} sides")
        verts = np.asarray(p.vertices, dtype=float)
        if p.normal is None:
            n = np.cross(verts[1] - verts[0], verts[2] - verts[0])
            normal = n / np.linalg.norm(n)
        else:
            normal = np.asarray(p.normal, dtype=float)
        patches.append(
            PlatePatch(id=p.id, vertices=verts, normal=normal, boundary_tags=tags)
        )
    loads = tuple(
        Load(force=np.asarray(l.force, dtype=float), patch_id=l.patch) for l in cfg.loads
    )
    return StructureModel(
        patches=tuple(patches),
        material=material,
        loads=loads,
        penalty_beta0=cfg.penalty_beta0,
    )
