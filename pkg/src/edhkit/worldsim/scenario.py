"""ScenarioSpec: JSON scenario documents and the data-driven affordance table."""

import json

from .actions import ACTION_DEFS, INTERACTION_ACTIONS
from .state import InvalidScenario

SCHEMA_VERSION = 1


class SchemaError(Exception):
    """Raised with a dotted field path when a document fails validation."""

    def __init__(self, path, message=""):
        self.path = path
        super().__init__(f"{path}: {message}" if message else path)


def validate_scenario(doc):
    if not isinstance(doc, dict):
        raise SchemaError("", "scenario must be an object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"expected {SCHEMA_VERSION}")
    for key in ("name", "grid_size", "objects", "affordances"):
        if key not in doc:
            raise SchemaError(key, "missing")
    rows, cols = doc["grid_size"]
    if rows <= 0 or cols <= 0:
        raise SchemaError("grid_size", "must be positive")
    for i, obj in enumerate(doc["objects"]):
        if "type" not in obj:
            raise SchemaError(f"objects[{i}].type", "missing")
        if not obj.get("random_placement") and "position" not in obj:
            raise SchemaError(f"objects[{i}].position", "missing")
    for i, rule in enumerate(doc["affordances"]):
        act = rule.get("action")
        if act not in INTERACTION_ACTIONS:
            raise SchemaError(f"affordances[{i}].action", f"unknown interaction {act!r}")
        if "target" not in rule:
            raise SchemaError(f"affordances[{i}].target", "missing")
    return doc


def load_scenario(path):
    with open(path) as f:
        return validate_scenario(json.load(f))


def object_type_registry(scenario):
    """Stable type ordering used for render channels and object vocab."""
    if "object_types" in scenario:
        return list(scenario["object_types"])
    return sorted({o["type"] for o in scenario["objects"]})


class AffordanceTable:
    """Which interactions are legal on which types under which held item.

    Rules come from the scenario document. `held` in a rule may be:
      - "*"   : held item irrelevant
      - null  : hand must be empty
      - a type: that type must be held
    """

    def __init__(self, rules):
        self.rules = []
        for rule in rules:
            self.rules.append(
                {
                    "action": rule["action"],
                    "target": rule["target"],
                    "held": rule.get("held", "*"),
                }
            )

    def legal(self, action, target_type, held_type):
        if not ACTION_DEFS[action].requires_object:
            return True
        for rule in self.rules:
            if rule["action"] != action or rule["target"] != target_type:
                continue
            held = rule["held"]
            if held == "*" or held == held_type:
                return True
        return False

    def required_held(self, action, target_type):
        """Held-item requirement for the first matching rule, or '*' if none."""
        for rule in self.rules:
            if rule["action"] == action and rule["target"] == target_type:
                return rule["held"]
        return None
