"""Template-generated (verbose instruction, simplified directive) text pairs.

Used to pre-train a text encoder on instruction simplification; the agent can
load that encoder as an alternative initialization.
"""

import random

_FILLERS = [
    "turn around and walk across the room",
    "go past the {obj} and look to your left",
    "head over to the counter by the wall",
    "move forward a few steps and turn right",
    "walk back to where you started",
]

_VERBOSE = {
    "slice": "find the knife then {filler} and cut the {obj} into pieces",
    "pickup": "{filler} then reach out and take the {obj} from its spot",
    "place": "carry what you hold and {filler} then set it down on the {obj}",
    "toggle_on": "{filler} and press the switch so the {obj} starts running",
    "pour": "{filler} then tip your container over the {obj} slowly",
}

_SIMPLE = {
    "slice": "slice the {obj}",
    "pickup": "pick up the {obj}",
    "place": "put it on the {obj}",
    "toggle_on": "turn on the {obj}",
    "pour": "pour it on the {obj}",
}

_OBJECTS = ["bread", "knife", "mug", "potato", "table", "toaster", "plant", "cup", "book", "box"]


def template_tokens():
    """All words the templates can emit; kept encodable by the shared vocab."""
    import re

    words = set(_OBJECTS)
    for text in list(_FILLERS) + list(_VERBOSE.values()) + list(_SIMPLE.values()):
        words.update(re.findall(r"[a-z0-9_]+", text))
    words.discard("obj")
    words.discard("filler")
    return sorted(words)


def synthetic_simplification_pairs(n, seed=0):
    rng = random.Random(seed)
    actions = sorted(_VERBOSE)
    pairs = []
    for _ in range(n):
        action = rng.choice(actions)
        obj = rng.choice(_OBJECTS)
        filler = rng.choice(_FILLERS).format(obj=rng.choice(_OBJECTS))
        verbose = _VERBOSE[action].format(filler=filler, obj=obj)
        simple = _SIMPLE[action].format(obj=obj)
        pairs.append((verbose, simple))
    return pairs
