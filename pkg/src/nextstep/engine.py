"""The online predictor: score matching rules, learn from each step.

The engine keeps a sliding window of recent observations and a rule
database.  predict() ranks the rules whose condition matches the
window's newest steps; learn() pushes the next observation and then
reinforces, decays, counts contexts into, and extends the rules that
matched one step earlier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .lookupdb import (
    Entry,
    LookupDB,
    record_contexts,
    update_probability,
)
from .window import ClassificationId, Observation, ObservationWindow, StepId

ENGINE_MODES = ("context", "baseline")
CONTEXT_UPDATE_SCOPES = ("correct-only", "all-matching")
EXTENSION_SCOPES = ("all-matching", "correct-only")
EXTENSION_DIRECTIONS = ("append-observation", "extend-into-past")


@dataclass(frozen=True)
class PredictorConfig:
    """All tunables; validated on construction, immutable afterwards."""

    alpha: float = 0.8
    theta: float = 0.5
    window_capacity: int = 10
    engine_mode: str = "context"
    context_update_scope: str = "correct-only"
    extension_scope: str = "all-matching"
    extension_direction: str = "append-observation"

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not 0.0 <= self.theta < 1.0:
            raise ValueError(f"theta must be in [0, 1), got {self.theta!r}")
        if not isinstance(self.window_capacity, int) or self.window_capacity < 2:
            raise ValueError(
                f"window capacity must be an int >= 2, got {self.window_capacity!r}"
            )
        _require_choice("engine_mode", self.engine_mode, ENGINE_MODES)
        _require_choice(
            "context_update_scope", self.context_update_scope, CONTEXT_UPDATE_SCOPES
        )
        _require_choice("extension_scope", self.extension_scope, EXTENSION_SCOPES)
        _require_choice(
            "extension_direction", self.extension_direction, EXTENSION_DIRECTIONS
        )


def _require_choice(name: str, value: str, allowed: tuple[str, ...]) -> None:
    if value not in allowed:
        raise ValueError(f"{name} must be one of {', '.join(allowed)}; got {value!r}")


class ContextEvidence(NamedTuple):
    """One context weight an entry contributes at prediction time."""

    index: int
    classification: ClassificationId
    context: int
    weight: float


def context_fit(
    entry: Entry,
    window: ObservationWindow,
    classifications: Iterable[ClassificationId],
) -> list[ContextEvidence]:
    """Weights of the window's current contexts under the entry's counters.

    The entry must match the window at offset 0.  Positions where the
    context is unknown, or where the entry has never counted anything,
    contribute no evidence at all; a known context that the entry has
    counted past but never in this value contributes weight 0.
    """
    evidence: list[ContextEvidence] = []
    for i in range(1 - len(entry.condition), 1):
        for cc in classifications:
            ctx = window.context_at(i, cc)
            if ctx is None:
                continue
            slot = entry.slots.get((cc, i))
            if slot is None or slot.total == 0:
                continue
            evidence.append(ContextEvidence(i, cc, ctx, slot.weight(ctx)))
    return evidence


def relevance_mean(evidence: list[ContextEvidence], theta: float) -> float:
    """Mean of the evidence weights above theta.

    No evidence at all means nothing speaks against the entry: 1.
    Evidence where no weight clears theta vetoes the entry: 0.
    """
    if not evidence:
        return 1.0
    above = [e.weight for e in evidence if e.weight > theta]
    if not above:
        return 0.0
    return sum(above) / len(above)


class ScoredCandidate(NamedTuple):
    """One matching entry with its scores at prediction time."""

    entry_id: int
    prediction: StepId
    condition_length: int
    p: float
    fit: float
    actual_p: float


@dataclass(frozen=True)
class PredictionResult:
    """The winning suggestion plus every candidate it beat."""

    step: StepId
    actual_p: float
    entry_id: int
    condition: tuple[StepId, ...]
    candidates: tuple[ScoredCandidate, ...]


@dataclass(frozen=True)
class LearnReport:
    """What one learn() call did.

    ``correct`` is None when there was no open prediction to score.
    """

    correct: bool | None
    entries_added: int = 0
    entries_updated: int = 0


@dataclass
class Engine:
    """Online next-step predictor over declared step and context universes."""

    config: PredictorConfig
    steps: Iterable[StepId]
    classifications: Iterable[ClassificationId] = ()
    db: LookupDB = field(default_factory=LookupDB)

    def __post_init__(self) -> None:
        self.window = ObservationWindow(
            self.config.window_capacity, self.steps, self.classifications
        )
        self.steps = self.window.steps
        self.classifications = self.window.classifications
        # Sorted once: evidence and counter iteration order stays stable.
        self._classification_order = tuple(sorted(self.classifications))
        self._last_prediction: StepId | None = None

    @property
    def last_prediction(self) -> StepId | None:
        return self._last_prediction

    def predict(self) -> PredictionResult | None:
        """Suggest the next step, or None when no rule matches.

        The suggestion is remembered and scored by the next learn().
        """
        candidates = []
        for entry in self.db.matching_entries(self.window, offset=0):
            if self.config.engine_mode == "context":
                fit = relevance_mean(
                    context_fit(entry, self.window, self._classification_order),
                    self.config.theta,
                )
            else:
                fit = 1.0
            candidates.append(
                ScoredCandidate(
                    entry.entry_id,
                    entry.prediction,
                    len(entry.condition),
                    entry.p,
                    fit,
                    fit * entry.p,
                )
            )
        if not candidates:
            self._last_prediction = None
            return None
        best = min(
            candidates,
            key=lambda c: (-c.actual_p, c.condition_length, -c.p, c.entry_id),
        )
        self._last_prediction = best.prediction
        return PredictionResult(
            best.prediction,
            best.actual_p,
            best.entry_id,
            self.db.entry(best.entry_id).condition,
            tuple(candidates),
        )

    def learn(self, observation: Observation) -> LearnReport:
        """Ingest the step that actually happened and update every rule.

        Order matters and is fixed: push the observation, score the
        open prediction, store the fresh length-1 rule, then update and
        extend only the rules that existed before this call.
        """
        self.window.push(observation)
        correct: bool | None = None
        if self._last_prediction is not None:
            correct = self._last_prediction == observation.step
        prior_count = len(self.db)
        entries_added = self._add_pair_rule()
        matched = [
            entry
            for entry in self.db.matching_entries(self.window, offset=1)
            if entry.entry_id < prior_count
        ]
        for entry in matched:
            hit = entry.prediction == self.window.step_at(0)
            entry.p = update_probability(entry.p, self.config.alpha, hit)
            if hit or self.config.context_update_scope == "all-matching":
                record_contexts(entry, self.window, 1, self._classification_order)
        if correct:
            entries_added += self._extend(matched, prior_count)
        self._last_prediction = None
        return LearnReport(correct, entries_added, len(matched))

    def _add_pair_rule(self) -> int:
        """Store previous-step -> current-step unless already known."""
        if len(self.window) < 2:
            return 0
        condition = (self.window.step_at(-1),)
        prediction = self.window.step_at(0)
        if self.db.find(condition, prediction) is not None:
            return 0
        entry = self.db.add(condition, prediction, 1.0 - self.config.alpha)
        record_contexts(entry, self.window, 1, self._classification_order)
        return 1

    def _extend(self, matched: list[Entry], prior_count: int) -> int:
        """Grow confirmed rules by one step; children inherit one p.

        The inherited p comes from the longest currently-matching rule
        with p > 0, the same rule prediction would lean on now.
        """
        if self.config.extension_scope == "correct-only":
            matched = [
                e for e in matched if e.prediction == self.window.step_at(0)
            ]
        donors = [
            entry
            for entry in self.db.matching_entries(self.window, offset=0)
            if entry.entry_id < prior_count and entry.p > 0.0
        ]
        if donors:
            donor = min(
                donors, key=lambda e: (-len(e.condition), -e.p, e.entry_id)
            )
            inherit_p = donor.p
        else:
            inherit_p = 1.0 - self.config.alpha
        added = 0
        for parent in matched:
            length = len(parent.condition)
            if length >= self.window.capacity:
                continue
            if self.config.extension_direction == "append-observation":
                condition = parent.condition + (self.window.step_at(0),)
            else:
                # Prepend the step just older than the span the parent
                # matched, which sits at window index -(length + 1).
                if length + 2 > len(self.window):
                    continue
                condition = (self.window.step_at(-length - 1),) + parent.condition
            if self.db.find(condition, parent.prediction) is not None:
                continue
            # Children start with empty counters on purpose: copying the
            # parent's counters lets statistics gathered by a wrong
            # ancestor outvote everything the child itself ever observes,
            # because old counts never decay.  An empty slot set scores
            # as "nothing speaks against it" until the child earns its
            # own evidence.
            self.db.add(condition, parent.prediction, inherit_p)
            added += 1
        return added

    def reset(self) -> None:
        """Return to the freshly-constructed state; only config survives."""
        self.window = ObservationWindow(
            self.config.window_capacity, self.steps, self.classifications
        )
        self.db = LookupDB()
        self._last_prediction = None
