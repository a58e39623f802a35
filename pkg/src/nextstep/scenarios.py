"""Synthetic enactment traces for exercising the predictor.

A trace is a sequence of development blocks, one per component.  Every
block starts with an identify step and then works through a fixed
number of requirements, either depth-first (one requirement fully
mapped, specified, implemented before the next) or breadth-first (all
mapping, then all specifying, then all implementing).  Each
observation carries the component it belongs to and the component's
working style as contexts, so a context-aware predictor can tell the
two block shapes apart at the points where bare step history cannot.
"""

from __future__ import annotations

from .window import Observation

STEP_IDENTIFY = 1
STEP_MAP = 2
STEP_SPECIFY = 3
STEP_IMPLEMENT = 4

CC_COMPONENT = 0
CC_STYLE = 1

STYLE_DEPTH_FIRST = 0
STYLE_BREADTH_FIRST = 1

# First context id available for components; 0 and 1 name the styles.
_COMPONENT_BASE = 2

TRACE_KINDS = ("a", "b", "mix")

# Constants of the 64-bit linear congruential generator used to pick
# block styles in mixed traces (Knuth's MMIX multiplier/increment).
_LCG_MULTIPLIER = 6364136223846793005
_LCG_INCREMENT = 1442695040888963407
_LCG_MODULUS = 1 << 64


def block_steps(style: int, requirements: int) -> list[int]:
    """Step sequence of one block under the given working style."""
    if style == STYLE_DEPTH_FIRST:
        return [STEP_IDENTIFY] + [STEP_MAP, STEP_SPECIFY, STEP_IMPLEMENT] * requirements
    if style == STYLE_BREADTH_FIRST:
        return (
            [STEP_IDENTIFY]
            + [STEP_MAP] * requirements
            + [STEP_SPECIFY] * requirements
            + [STEP_IMPLEMENT] * requirements
        )
    raise ValueError(f"unknown style {style!r}")


def generate_trace(
    kind: str,
    components: int,
    requirements: int,
    seed: int = 0,
) -> list[Observation]:
    """Observations for ``components`` blocks with ``requirements`` each.

    Kind "a" uses the depth-first style for every block, "b" the
    breadth-first style, and "mix" picks per block from a seeded
    generator so the same seed always yields the same trace.  The seed
    is ignored for the deterministic kinds.
    """
    if kind not in TRACE_KINDS:
        raise ValueError(f"kind must be one of {', '.join(TRACE_KINDS)}; got {kind!r}")
    if components < 1:
        raise ValueError(f"components must be positive, got {components}")
    if requirements < 1:
        raise ValueError(f"requirements must be positive, got {requirements}")
    state = seed % _LCG_MODULUS
    trace: list[Observation] = []
    for block_index in range(components):
        if kind == "a":
            style = STYLE_DEPTH_FIRST
        elif kind == "b":
            style = STYLE_BREADTH_FIRST
        else:
            state = (state * _LCG_MULTIPLIER + _LCG_INCREMENT) % _LCG_MODULUS
            style = STYLE_BREADTH_FIRST if state >> 63 else STYLE_DEPTH_FIRST
        contexts = {
            CC_COMPONENT: _COMPONENT_BASE + block_index,
            CC_STYLE: style,
        }
        for step in block_steps(style, requirements):
            trace.append(Observation(step, contexts))
    return trace
