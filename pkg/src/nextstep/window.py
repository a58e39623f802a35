"""Observations and the sliding window over the most recent ones.

An observation is one enacted step plus whatever context was known at
that moment, as a partial mapping from classification id to context id.
The window keeps the newest ``capacity`` observations and addresses
them relative to now: index 0 is the newest, -1 the one before, and so
on back to ``-(len - 1)``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import UnknownIdError, WindowRangeError

StepId = int
ClassificationId = int
ContextId = int


@dataclass(frozen=True)
class Observation:
    """One enacted step and the context ids known for it.

    ``contexts`` maps classification id to context id and may cover any
    subset of the declared classifications, including none.
    """

    step: StepId
    contexts: Mapping[ClassificationId, ContextId] = field(default_factory=dict)

    def __post_init__(self) -> None:
        # Freeze the mapping so shared observations cannot drift.
        object.__setattr__(self, "contexts", dict(self.contexts))


class ObservationWindow:
    """Fixed-capacity history of the most recent observations.

    Pushing a new observation evicts the oldest once ``capacity`` is
    reached.  Reads outside the populated range raise WindowRangeError;
    pushes referencing undeclared ids raise UnknownIdError and leave
    the window untouched.
    """

    def __init__(
        self,
        capacity: int,
        steps: Iterable[StepId],
        classifications: Iterable[ClassificationId] = (),
    ):
        if capacity < 2:
            raise ValueError(f"window capacity must be at least 2, got {capacity}")
        self.capacity = capacity
        self.steps = frozenset(steps)
        self.classifications = frozenset(classifications)
        if not self.steps:
            raise ValueError("step universe must not be empty")
        for step in self.steps:
            _require_id("step", step)
        for cc in self.classifications:
            _require_id("classification", cc)
        self._entries: deque[Observation] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._entries)

    def push(self, observation: Observation) -> None:
        """Append the newest observation, validating it first."""
        if observation.step not in self.steps:
            raise UnknownIdError(f"step {observation.step!r} is not declared")
        for cc, ctx in observation.contexts.items():
            if cc not in self.classifications:
                raise UnknownIdError(f"classification {cc!r} is not declared")
            if not isinstance(ctx, int) or isinstance(ctx, bool) or ctx < 0:
                raise UnknownIdError(f"context id {ctx!r} must be a non-negative int")
        self._entries.appendleft(observation)

    def observation_at(self, index: int) -> Observation:
        """Observation ``-index`` steps ago; 0 is the newest."""
        if not -len(self._entries) < index <= 0:
            raise WindowRangeError(
                f"index {index} outside populated range "
                f"[{-(len(self._entries) - 1) if self._entries else 0}, 0]"
            )
        return self._entries[-index]

    def step_at(self, index: int) -> StepId:
        return self.observation_at(index).step

    def context_at(self, index: int, classification: ClassificationId) -> ContextId | None:
        """Context id recorded at ``index`` for ``classification``, or None."""
        if classification not in self.classifications:
            raise UnknownIdError(f"classification {classification!r} is not declared")
        return self.observation_at(index).contexts.get(classification)

    def contexts_at(self, index: int) -> dict[ClassificationId, ContextId]:
        return dict(self.observation_at(index).contexts)


def _require_id(kind: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ValueError(f"{kind} id {value!r} must be a non-negative int")
