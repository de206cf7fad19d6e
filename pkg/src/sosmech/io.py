"""JSON instance files (schema_version 1) and report helpers.

Rationals are always written as "num/den" strings so golden files never
drift through floats.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InvalidInstance
from .feasibility import FeasibilitySystem
from .instance import Instance
from .valuation import Setting, Valuation, check_all, check_separable, check_single_crossing_ud

SCHEMA_VERSION = 1
CLAIMS = ("sos", "strong_sos", "separable", "single_crossing")


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _nested(arr):
    if not isinstance(arr, np.ndarray):
        return rat(arr)
    if arr.ndim == 0:
        return rat(arr[()])
    return [_nested(a) for a in arr]


def jsonable(obj):
    """Turn Fractions, tuples, sets and numpy scalars into plain JSON values."""
    if isinstance(obj, Fraction):
        return rat(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _nested(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def instance_to_dict(instance: Instance, claims=()) -> dict:
    val = instance.valuation
    if val.setting is Setting.COMB_MULTI_SIGNAL:
        grids = [[[rat(x) for x in dom] for dom in per] for per in val.grids]
    else:
        grids = [[rat(x) for x in dom] for dom in val.grids]
    if val.setting is Setting.SINGLE_PARAM:
        tables = [_nested(val.table(i)) for i in range(val.n)]
    else:
        tables = [[_nested(val.table(i, T)) for T in val.bundles] for i in range(val.n)]
    out = {
        "schema_version": SCHEMA_VERSION,
        "name": instance.name,
        "setting": val.setting.value,
        "n": val.n,
        "m": val.m,
        "strict": val.strict,
        "grids": grids,
        "valuations": tables,
        "claims": sorted(claims),
        "metadata": jsonable(instance.metadata),
    }
    if instance.system is not None:
        out["feasible_sets"] = sorted(sorted(s) for s in instance.system.feasible_sets)
    return out


def verify_claims(instance: Instance, claims) -> list[str]:
    """Names of claimed structure flags that do not hold."""
    failed = []
    val = instance.valuation
    for claim in claims:
        name, _, arg = claim.partition(":")
        if name == "sos":
            ok = check_all(val, Fraction(arg) if arg else 1).holds
        elif name == "strong_sos":
            ok = check_all(val, Fraction(arg) if arg else 1, strong=True).holds
        elif name == "separable":
            ok = check_separable(val) is not None
        elif name == "single_crossing":
            ok = check_single_crossing_ud(val).holds
        else:
            raise InvalidInstance(f"unknown structure claim {claim!r}")
        if not ok:
            failed.append(claim)
    return failed


def instance_from_dict(data: dict, *, check_closure: bool = True) -> Instance:
    """Build and validate an instance; claimed structure is re-checked, never trusted.

    ``check_closure=False`` accepts a feasibility family that is not
    downward closed, which only makes sense when auditing such a family.
    """
    if data.get("schema_version") != SCHEMA_VERSION:
        raise InvalidInstance(f"unsupported schema_version {data.get('schema_version')!r}")
    try:
        setting = Setting(data["setting"])
        val = Valuation(setting, data["grids"], data["valuations"], m=data.get("m", 0), strict=data.get("strict", True))
    except KeyError as exc:
        raise InvalidInstance(f"missing field {exc}") from None
    if val.n != data.get("n", val.n):
        raise InvalidInstance("n does not match the grids")
    system = None
    if setting is Setting.SINGLE_PARAM:
        if "feasible_sets" not in data:
            raise InvalidInstance("single_param instances need feasible_sets")
        system = FeasibilitySystem(val.n, data["feasible_sets"], check=check_closure)
    inst = Instance(val, system, name=data.get("name", ""), metadata=data.get("metadata", {}))
    failed = verify_claims(inst, data.get("claims", []))
    if failed:
        raise InvalidInstance(f"claimed structure does not hold: {', '.join(failed)}")
    return inst


def save_instance(instance: Instance, path, claims=()) -> str:
    text = dumps(instance_to_dict(instance, claims))
    Path(path).write_text(text)
    return text


def load_instance(path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))
