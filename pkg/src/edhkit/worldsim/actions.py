"""Action vocabulary for the toy household simulator."""

from dataclasses import dataclass


@dataclass(frozen=True)
class ActionDef:
    name: str
    kind: str  # navigation | interaction | dialog | stop
    requires_object: bool

    def __post_init__(self):
        if self.kind == "interaction" and not self.requires_object:
            raise ValueError(f"interaction action {self.name} must require an object")
        if self.kind != "interaction" and self.requires_object:
            raise ValueError(f"{self.kind} action {self.name} cannot require an object")


NAVIGATION_ACTIONS = [
    "forward",
    "backward",
    "turn_left",
    "turn_right",
    "pan_left",
    "pan_right",
]

INTERACTION_ACTIONS = [
    "pickup",
    "place",
    "open",
    "close",
    "slice",
    "pour",
    "toggle_on",
    "toggle_off",
]

DIALOG_ACTIONS = ["speak"]

STOP_ACTION = "stop"

ACTION_DEFS = {}
for _name in NAVIGATION_ACTIONS:
    ACTION_DEFS[_name] = ActionDef(_name, "navigation", False)
for _name in INTERACTION_ACTIONS:
    ACTION_DEFS[_name] = ActionDef(_name, "interaction", True)
for _name in DIALOG_ACTIONS:
    ACTION_DEFS[_name] = ActionDef(_name, "dialog", False)
ACTION_DEFS[STOP_ACTION] = ActionDef(STOP_ACTION, "stop", False)

# Deterministic ordering used for model action indices.
ACTION_ORDER = NAVIGATION_ACTIONS + INTERACTION_ACTIONS + [STOP_ACTION]


def action_kind(name):
    return ACTION_DEFS[name].kind


def is_navigation(name):
    return action_kind(name) == "navigation"


def is_interaction(name):
    return action_kind(name) == "interaction"
