"""Bundled schemes: the octagonal (Ammann-Beenker) plane pattern and a
Fibonacci-type chain.  Presets are plain config dictionaries run through the
same loader as user files.
"""

from __future__ import annotations

from .cps import Scheme, Window, scheme_from_config
from .errors import ValidationError
from .qfield import QF

# Physical generators at the 8th roots of unity (half of them), internal
# generators their algebraically conjugated companions; canonical window is
# the regular octagon.  The shift places pattern vertices like the classical
# eightfold tiling.
_OCTAGON = {
    "D": 2,
    "d": 2,
    "n": 2,
    "generators": [
        {"phys": ["1", "0"], "star": ["1", "0"]},
        {"phys": ["1/2√2", "1/2√2"], "star": ["-1/2√2", "1/2√2"]},
        {"phys": ["0", "1"], "star": ["0", "-1"]},
        {"phys": ["-1/2√2", "1/2√2"], "star": ["1/2√2", "1/2√2"]},
    ],
    "window": {"type": "canonical"},
    # minus half the sum of the internal generators
    "shift": ["-1/2", "1/2-1/2√2"],
}

# Golden-ratio chain: physical lengths 1 and (1+sqrt 5)/2, internal companions
# 1 and (1-sqrt 5)/2; canonical window is the interval between them.
_FIBONACCI = {
    "D": 5,
    "d": 1,
    "n": 1,
    "generators": [
        {"phys": ["1"], "star": ["1"]},
        {"phys": ["1/2+1/2√5"], "star": ["1/2-1/2√5"]},
    ],
    "window": {"type": "canonical"},
    "shift": ["0"],
}

_PRESETS = {"octagon": _OCTAGON, "fibonacci": _FIBONACCI}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def preset_config(name: str) -> dict:
    if name not in _PRESETS:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")
    import copy

    return copy.deepcopy(_PRESETS[name])


def load_preset(name: str) -> tuple[Scheme, Window, tuple[QF, ...]]:
    return scheme_from_config(preset_config(name))
