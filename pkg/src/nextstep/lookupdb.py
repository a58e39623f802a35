"""Rule storage: conditions over recent steps, context counters, snapshots.

Each entry pairs a condition (a run of consecutive steps, oldest first)
with a predicted next step, a reinforcement probability, and per-index
context counters.  The database enforces that no two entries share the
same (condition, prediction) pair and answers "which entries match the
window right now" via an index over condition tuples.

Snapshots are line-oriented UTF-8 text so diffs stay readable and two
equal databases serialize byte-identically.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator, TextIO

from .errors import SnapshotFormatError
from .window import ClassificationId, ContextId, ObservationWindow, StepId

SNAPSHOT_MAGIC = "LOOKUPDB"
SNAPSHOT_VERSION = "v1"

# Slot key: (classification id, condition index <= 0, 0 being the
# newest condition element).
SlotKey = tuple[ClassificationId, int]


@dataclass
class ContextSlot:
    """Occurrence counters for one classification at one condition index."""

    total: int = 0
    per_context: dict[ContextId, int] = field(default_factory=dict)

    def record(self, context: ContextId) -> None:
        self.total += 1
        self.per_context[context] = self.per_context.get(context, 0) + 1

    def weight(self, context: ContextId) -> float:
        """Fraction of recorded occurrences that had this context."""
        if self.total == 0:
            return 0.0
        return self.per_context.get(context, 0) / self.total

    def consistent(self) -> bool:
        return self.total == sum(self.per_context.values())


@dataclass
class Entry:
    """One stored rule: condition run, prediction, probability, counters."""

    entry_id: int
    condition: tuple[StepId, ...]
    prediction: StepId
    p: float
    slots: dict[SlotKey, ContextSlot] = field(default_factory=dict)

    def condition_at(self, index: int) -> StepId:
        """Condition element ``-index`` positions before the newest one."""
        return self.condition[len(self.condition) - 1 + index]


def update_probability(p: float, alpha: float, correct: bool) -> float:
    """Exponentially reinforce toward 1 on a hit, decay toward 0 on a miss."""
    if correct:
        return alpha * p + (1.0 - alpha)
    return alpha * p


def condition_matches(entry: Entry, window: ObservationWindow, offset: int = 0) -> bool:
    """True iff the condition equals the window's step run ``offset`` ago.

    Total over all inputs: an unpopulated window index means no match,
    never an error.
    """
    length = len(entry.condition)
    if offset < 0 or length + offset > len(window):
        return False
    return all(
        entry.condition_at(q) == window.step_at(q - offset)
        for q in range(1 - length, 1)
    )


def record_contexts(
    entry: Entry,
    window: ObservationWindow,
    offset: int,
    classifications: Iterable[ClassificationId],
) -> None:
    """Count the window's contexts into the entry's per-index slots.

    The entry must currently match the window at ``offset``; condition
    index i reads the window at i - offset.  Absent contexts are
    skipped entirely, so a slot's total only grows when its
    classification was actually observed there.
    """
    for i in range(1 - len(entry.condition), 1):
        for cc in classifications:
            ctx = window.context_at(i - offset, cc)
            if ctx is None:
                continue
            slot = entry.slots.get((cc, i))
            if slot is None:
                slot = entry.slots[(cc, i)] = ContextSlot()
            slot.record(ctx)


class LookupDB:
    """All stored rules, indexed for suffix matching.

    Entry ids are dense list positions and never reused.  The condition
    index maps a condition tuple to the ids stored under it, one per
    distinct prediction.
    """

    def __init__(self) -> None:
        self._entries: list[Entry] = []
        self._by_condition: dict[tuple[StepId, ...], dict[StepId, int]] = {}
        self._max_length = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Entry]:
        return iter(self._entries)

    @property
    def max_condition_length(self) -> int:
        return self._max_length

    def entry(self, entry_id: int) -> Entry:
        return self._entries[entry_id]

    def find(self, condition: tuple[StepId, ...], prediction: StepId) -> Entry | None:
        """The entry with exactly this condition and prediction, if any."""
        by_prediction = self._by_condition.get(tuple(condition))
        if by_prediction is None:
            return None
        entry_id = by_prediction.get(prediction)
        return None if entry_id is None else self._entries[entry_id]

    def add(self, condition: tuple[StepId, ...], prediction: StepId, p: float) -> Entry:
        """Store a new rule; (condition, prediction) must be unused."""
        condition = tuple(condition)
        if not condition:
            raise ValueError("condition must not be empty")
        for step in condition:
            _require_step(step)
        _require_step(prediction)
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p!r} outside [0, 1]")
        if self.find(condition, prediction) is not None:
            raise ValueError(
                f"entry with condition {condition} predicting {prediction} already exists"
            )
        entry = Entry(len(self._entries), condition, prediction, p)
        self._entries.append(entry)
        self._by_condition.setdefault(condition, {})[prediction] = entry.entry_id
        self._max_length = max(self._max_length, len(condition))
        return entry

    def matching_entries(self, window: ObservationWindow, offset: int = 0) -> list[Entry]:
        """All entries matching the window at ``offset``, id ascending.

        Equivalent to filtering with condition_matches, but walks only
        the step runs that actually end ``offset`` observations ago.
        """
        ids: list[int] = []
        run: list[StepId] = []
        longest = min(self._max_length, len(window) - offset)
        for length in range(1, longest + 1):
            run.insert(0, window.step_at(1 - length - offset))
            by_prediction = self._by_condition.get(tuple(run))
            if by_prediction:
                ids.extend(by_prediction.values())
        ids.sort()
        return [self._entries[i] for i in ids]


def _require_step(step: StepId) -> None:
    if not isinstance(step, int) or isinstance(step, bool) or step < 0:
        raise ValueError(f"step id {step!r} must be a non-negative int")


def snapshot_lines(db: LookupDB, alpha: float, theta: float) -> Iterator[str]:
    """Canonical snapshot lines, without trailing newlines."""
    yield f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} alpha={alpha!r} theta={theta!r}"
    for entry in db:
        cond = ",".join(str(step) for step in entry.condition)
        yield f"E {entry.entry_id} cond={cond} pred={entry.prediction} p={entry.p!r}"
        for (cc, index), slot in sorted(entry.slots.items()):
            if slot.total == 0:
                continue
            pairs = " ".join(
                f"{ctx}:{count}" for ctx, count in sorted(slot.per_context.items())
            )
            yield f"S {cc} {index} total={slot.total} {pairs}"


def dump_snapshot(db: LookupDB, alpha: float, theta: float) -> str:
    return "\n".join(snapshot_lines(db, alpha, theta)) + "\n"


def write_snapshot(db: LookupDB, alpha: float, theta: float, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dump_snapshot(db, alpha, theta))


def parse_snapshot(source: str | TextIO) -> tuple[LookupDB, float, float]:
    """Parse a snapshot, validating every structural invariant.

    Returns the database plus the alpha and theta it was written with.
    Raises SnapshotFormatError with the offending 1-based line number.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    db = LookupDB()
    alpha: float | None = None
    theta = 0.0
    current: Entry | None = None
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if alpha is None:
            alpha, theta = _parse_header(line_no, tokens)
            continue
        if tokens[0] == "E":
            current = _parse_entry(line_no, tokens, db)
        elif tokens[0] == "S":
            if current is None:
                raise SnapshotFormatError(line_no, "slot line before any entry line")
            _parse_slot(line_no, tokens, current)
        else:
            raise SnapshotFormatError(line_no, f"unknown line tag {tokens[0]!r}")
    if alpha is None:
        raise SnapshotFormatError(1, "missing snapshot header")
    return db, alpha, theta


def read_snapshot(path: str) -> tuple[LookupDB, float, float]:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_snapshot(handle)


def _parse_header(line_no: int, tokens: list[str]) -> tuple[float, float]:
    if len(tokens) != 4 or tokens[0] != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(
            line_no, f"expected header '{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} alpha=... theta=...'"
        )
    if tokens[1] != SNAPSHOT_VERSION:
        raise SnapshotFormatError(line_no, f"unsupported snapshot version {tokens[1]!r}")
    alpha = _parse_float_field(line_no, tokens[2], "alpha")
    theta = _parse_float_field(line_no, tokens[3], "theta")
    if not 0.0 < alpha < 1.0:
        raise SnapshotFormatError(line_no, f"alpha {alpha!r} outside (0, 1)")
    if not 0.0 <= theta < 1.0:
        raise SnapshotFormatError(line_no, f"theta {theta!r} outside [0, 1)")
    return alpha, theta


def _parse_entry(line_no: int, tokens: list[str], db: LookupDB) -> Entry:
    if len(tokens) != 5:
        raise SnapshotFormatError(line_no, "entry line needs: E <id> cond=... pred=... p=...")
    entry_id = _parse_int(line_no, tokens[1], "entry id")
    if entry_id != len(db):
        raise SnapshotFormatError(
            line_no, f"entry id {entry_id} out of order, expected {len(db)}"
        )
    cond_text = _strip_prefix(line_no, tokens[2], "cond=")
    try:
        condition = tuple(int(part) for part in cond_text.split(","))
    except ValueError:
        raise SnapshotFormatError(line_no, f"bad condition {cond_text!r}") from None
    prediction = _parse_int(line_no, _strip_prefix(line_no, tokens[3], "pred="), "prediction")
    p = _parse_float_field(line_no, tokens[4], "p")
    if not 0.0 <= p <= 1.0:
        raise SnapshotFormatError(line_no, f"probability {p!r} outside [0, 1]")
    if db.find(condition, prediction) is not None:
        raise SnapshotFormatError(
            line_no, f"duplicate entry for condition {cond_text!r} predicting {prediction}"
        )
    try:
        return db.add(condition, prediction, p)
    except ValueError as exc:
        raise SnapshotFormatError(line_no, str(exc)) from None


def _parse_slot(line_no: int, tokens: list[str], entry: Entry) -> None:
    if len(tokens) < 4:
        raise SnapshotFormatError(line_no, "slot line needs: S <cc> <index> total=<n> ctx:count...")
    cc = _parse_int(line_no, tokens[1], "classification id")
    index = _parse_signed_int(line_no, tokens[2], "condition index")
    if not 1 - len(entry.condition) <= index <= 0:
        raise SnapshotFormatError(
            line_no,
            f"condition index {index} outside [{1 - len(entry.condition)}, 0]",
        )
    if (cc, index) in entry.slots:
        raise SnapshotFormatError(line_no, f"duplicate slot for classification {cc} index {index}")
    total = _parse_int(line_no, _strip_prefix(line_no, tokens[3], "total="), "total")
    if total < 1:
        raise SnapshotFormatError(line_no, f"slot total {total} must be positive")
    per_context: dict[int, int] = {}
    for token in tokens[4:]:
        ctx_text, _, count_text = token.partition(":")
        ctx = _parse_int(line_no, ctx_text, "context id")
        count = _parse_int(line_no, count_text, "context count")
        if count < 1:
            raise SnapshotFormatError(line_no, f"context count {count} must be positive")
        if ctx in per_context:
            raise SnapshotFormatError(line_no, f"duplicate context {ctx} in slot")
        per_context[ctx] = count
    if sum(per_context.values()) != total:
        raise SnapshotFormatError(
            line_no, f"context counts sum to {sum(per_context.values())}, total says {total}"
        )
    entry.slots[(cc, index)] = ContextSlot(total, per_context)


def _strip_prefix(line_no: int, token: str, prefix: str) -> str:
    if not token.startswith(prefix) or len(token) == len(prefix):
        raise SnapshotFormatError(line_no, f"expected {prefix}<value>, got {token!r}")
    return token[len(prefix):]


def _parse_int(line_no: int, text: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise SnapshotFormatError(line_no, f"bad {what} {text!r}") from None
    if value < 0:
        raise SnapshotFormatError(line_no, f"{what} {value} must not be negative")
    return value


def _parse_signed_int(line_no: int, text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SnapshotFormatError(line_no, f"bad {what} {text!r}") from None


def _parse_float_field(line_no: int, token: str, name: str) -> float:
    text = _strip_prefix(line_no, token, f"{name}=")
    try:
        return float(text)
    except ValueError:
        raise SnapshotFormatError(line_no, f"bad {name} {text!r}") from None
