from .loader import (
    BUILTIN_NAMES,
    builtin,
    builtin_text,
    dump_scenario,
    from_dict,
    load_path,
    load_scenario,
    resolve,
    to_dict,
)
from .schema import ScenarioSpec

__all__ = [
    "BUILTIN_NAMES",
    "ScenarioSpec",
    "builtin",
    "builtin_text",
    "dump_scenario",
    "from_dict",
    "load_path",
    "load_scenario",
    "resolve",
    "to_dict",
]
