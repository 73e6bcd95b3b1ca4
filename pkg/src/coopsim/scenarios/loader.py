from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Any, Union

import pydantic
import yaml

from ..errors import ParseError, UnknownScenario, ValidationError
from ..world import Role
from .schema import ScenarioSpec

BUILTIN_NAMES = tuple([f"pipeline{i}" for i in range(1, 5)] + [f"coop{i}" for i in range(1, 9)])


def _loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def _check_references(spec: ScenarioSpec) -> None:
    lanes = {lane.id for lane in spec.map.lanes}

    def need_lane(path: str, lane: str) -> None:
        if lane not in lanes:
            raise ValidationError(path, f"lane {lane!r} is undefined")

    seen = set()
    for i, lane in enumerate(spec.map.lanes):
        if lane.id in seen:
            raise ValidationError(f"map.lanes[{i}].id", f"duplicate lane id {lane.id!r}")
        seen.add(lane.id)
        for side in ("left", "right"):
            nb = getattr(lane, side)
            if nb is not None:
                need_lane(f"map.lanes[{i}].{side}", nb)
    for i, (a, b) in enumerate(spec.map.connections):
        need_lane(f"map.connections[{i}][0]", a)
        need_lane(f"map.connections[{i}][1]", b)
    for i, c in enumerate(spec.map.controls):
        need_lane(f"map.controls[{i}].lane", c.lane)

    names = set()
    for i, a in enumerate(spec.agents):
        if a.name in names:
            raise ValidationError(f"agents[{i}].name", f"duplicate agent name {a.name!r}")
        names.add(a.name)
        if a.lane is not None:
            need_lane(f"agents[{i}].lane", a.lane)
    egos = [a for a in spec.agents if a.role is Role.EGO]
    if len(egos) != 1:
        raise ValidationError("agents", f"exactly one ego required, found {len(egos)}")
    need_lane("pipeline.goal.lane", spec.pipeline.goal.lane)
    goal_lane = next(lane for lane in spec.map.lanes if lane.id == spec.pipeline.goal.lane)
    if not -len(goal_lane.points) <= spec.pipeline.goal.index < len(goal_lane.points):
        raise ValidationError("pipeline.goal.index", "index outside the goal lane")
    for i, p in enumerate(spec.pipeline.participants):
        if p not in names:
            raise ValidationError(f"pipeline.participants[{i}]", f"agent {p!r} is undefined")
        role = spec.agent(p).role
        if role not in (Role.SPECTATOR, Role.RSU):
            raise ValidationError(f"pipeline.participants[{i}]", f"agent {p!r} is a {role.value}, not a spectator or RSU")
        if spec.agent(p).sensor is None:
            raise ValidationError(f"pipeline.participants[{i}]", f"agent {p!r} has no sensor")
    if egos[0].sensor is None:
        raise ValidationError("agents", "the ego needs a sensor")
    if spec.adversary is not None and spec.adversary not in names:
        raise ValidationError("adversary", f"agent {spec.adversary!r} is undefined")


def from_dict(doc: Any) -> ScenarioSpec:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a mapping at the top level")
    try:
        spec = ScenarioSpec.model_validate(doc)
    except pydantic.ValidationError as exc:
        err = exc.errors()[0]
        raise ValidationError(_loc(err["loc"]), err["msg"]) from None
    _check_references(spec)
    return spec


def load_scenario(text: str) -> ScenarioSpec:
    """Parse and validate a scenario document (YAML or JSON text)."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"malformed scenario document: {exc}") from None
    return from_dict(doc)


def load_path(path: Union[str, Path]) -> ScenarioSpec:
    return load_scenario(Path(path).read_text())


def to_dict(spec: ScenarioSpec) -> dict:
    return spec.model_dump(mode="json", exclude_none=True)


def dump_scenario(spec: ScenarioSpec) -> str:
    return yaml.safe_dump(to_dict(spec), sort_keys=False, default_flow_style=None, width=100)


def builtin_text(name: str) -> str:
    if name not in BUILTIN_NAMES:
        raise UnknownScenario(f"unknown scenario {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return resources.files("coopsim.scenarios").joinpath("data", f"{name}.yaml").read_text()


def builtin(name: str) -> ScenarioSpec:
    return load_scenario(builtin_text(name))


def resolve(name_or_path: str) -> ScenarioSpec:
    """A built-in name or a path to a scenario document."""
    if name_or_path in BUILTIN_NAMES:
        return builtin(name_or_path)
    p = Path(name_or_path)
    if p.exists():
        return load_path(p)
    raise UnknownScenario(f"{name_or_path!r} is neither a built-in scenario nor a file")
