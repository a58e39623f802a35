"""Trace files, batch replay with running metrics, CSV and SVG reports.

A trace file stores one observation per line: the step id, then
optionally one space and comma-separated classification=context pairs.
Blank lines and lines starting with # are ignored.

    2 0=7,1=1
    3

Replay feeds a trace through an engine, scoring each suggestion
against the step that actually followed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .engine import Engine, PredictorConfig
from .errors import TraceFormatError
from .window import Observation, StepId

DEFAULT_ROLL_WINDOW = 25


def parse_record(text: str) -> Observation:
    """One trace line to an observation; raises ValueError on bad syntax."""
    step_text, _, rest = text.strip().partition(" ")
    try:
        step = int(step_text)
    except ValueError:
        raise ValueError(f"bad step {step_text!r}") from None
    if step < 0:
        raise ValueError(f"step {step} must not be negative")
    contexts: dict[int, int] = {}
    rest = rest.strip()
    if rest:
        for pair in rest.split(","):
            cc_text, sep, ctx_text = pair.partition("=")
            if not sep:
                raise ValueError(f"bad context pair {pair!r}, expected cc=ctx")
            try:
                cc = int(cc_text)
                ctx = int(ctx_text)
            except ValueError:
                raise ValueError(f"bad context pair {pair!r}") from None
            if cc < 0 or ctx < 0:
                raise ValueError(f"context pair {pair!r} must not be negative")
            if cc in contexts:
                raise ValueError(f"classification {cc} given twice")
            contexts[cc] = ctx
    return Observation(step, contexts)


def format_record(observation: Observation) -> str:
    if not observation.contexts:
        return str(observation.step)
    pairs = ",".join(
        f"{cc}={ctx}" for cc, ctx in sorted(observation.contexts.items())
    )
    return f"{observation.step} {pairs}"


def parse_trace(lines: Iterable[str]) -> list[Observation]:
    """Parse trace lines; errors carry the 1-based line number."""
    observations = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            observations.append(parse_record(line))
        except ValueError as exc:
            raise TraceFormatError(line_no, str(exc)) from None
    return observations


def read_trace(path: str) -> list[Observation]:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_trace(handle)


def dump_trace(observations: Iterable[Observation]) -> str:
    return "".join(format_record(obs) + "\n" for obs in observations)


def write_trace(observations: Iterable[Observation], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dump_trace(observations))


def derive_universes(
    observations: Sequence[Observation],
) -> tuple[frozenset[int], frozenset[int]]:
    """Step and classification universes actually used by a trace."""
    if not observations:
        raise ValueError("trace is empty")
    steps = frozenset(obs.step for obs in observations)
    classifications = frozenset(
        cc for obs in observations for cc in obs.contexts
    )
    return steps, classifications


@dataclass(frozen=True)
class MetricsRow:
    """Outcome of one scored replay step (t counts from 1)."""

    t: int
    step: StepId
    predicted: StepId | None
    correct: bool
    cum_correct: int
    cum_accuracy: float
    roll_accuracy: float


def run_trace(
    observations: Sequence[Observation],
    config: PredictorConfig,
    roll_window: int = DEFAULT_ROLL_WINDOW,
) -> tuple[Engine, list[MetricsRow]]:
    """Replay a trace: the first record only primes the window, every
    later record is predicted before it is learned.

    Returns the trained engine together with one metrics row per
    scored record.
    """
    if not observations:
        raise ValueError("trace is empty")
    if roll_window < 1:
        raise ValueError(f"roll window must be positive, got {roll_window}")
    steps, classifications = derive_universes(observations)
    engine = Engine(config, steps, classifications)
    engine.learn(observations[0])
    rows: list[MetricsRow] = []
    cum_correct = 0
    recent: deque[int] = deque(maxlen=roll_window)
    for t, observation in enumerate(observations[1:], start=1):
        result = engine.predict()
        report = engine.learn(observation)
        correct = bool(report.correct)
        cum_correct += correct
        recent.append(int(correct))
        rows.append(
            MetricsRow(
                t,
                observation.step,
                result.step if result else None,
                correct,
                cum_correct,
                cum_correct / t,
                sum(recent) / len(recent),
            )
        )
    return engine, rows


def compare_engines(
    observations: Sequence[Observation],
    config: PredictorConfig,
    roll_window: int = DEFAULT_ROLL_WINDOW,
) -> tuple[list[MetricsRow], list[MetricsRow]]:
    """Replay the same trace context-aware and context-blind."""
    _, context_rows = run_trace(
        observations, replace(config, engine_mode="context"), roll_window
    )
    _, baseline_rows = run_trace(
        observations, replace(config, engine_mode="baseline"), roll_window
    )
    return context_rows, baseline_rows


CSV_HEADER = "t,step,predicted,correct,cum_correct,cum_acc,roll_acc"


def metrics_to_csv(rows: Iterable[MetricsRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        predicted = "" if row.predicted is None else str(row.predicted)
        lines.append(
            f"{row.t},{row.step},{predicted},{int(row.correct)},"
            f"{row.cum_correct},{row.cum_accuracy:.6f},{row.roll_accuracy:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_metrics_csv(rows: Iterable[MetricsRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(metrics_to_csv(rows))


def render_comparison_svg(
    context_rows: Sequence[MetricsRow],
    baseline_rows: Sequence[MetricsRow],
    width: int = 800,
    height: int = 620,
) -> str:
    """Two stacked panels comparing both replays of one trace.

    Top panel: cumulative correct predictions.  Bottom panel: rolling
    accuracy.  The context-aware series is red, the baseline blue.
    """
    margin_left, margin_right = 70.0, 25.0
    panel_h = (height - 180) / 2
    plot_w = width - margin_left - margin_right
    x_max = max(len(context_rows), len(baseline_rows), 1)
    cum_max = max(
        [row.cum_correct for row in list(context_rows) + list(baseline_rows)] + [1]
    )
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<g font-family="sans-serif" font-size="12">',
        f'<text x="{margin_left:.2f}" y="20" fill="red">context engine</text>',
        f'<text x="{margin_left + 130:.2f}" y="20" fill="blue">baseline engine</text>',
    ]
    panels = [
        (40.0, "cumulative correct predictions", float(cum_max),
         lambda row: float(row.cum_correct)),
        (40.0 + panel_h + 90, "rolling accuracy", 1.0,
         lambda row: row.roll_accuracy),
    ]
    for top, title, y_max, value in panels:
        bottom = top + panel_h
        parts.append(f'<text x="{margin_left:.2f}" y="{top - 8:.2f}">{title}</text>')
        parts.append(
            f'<line x1="{margin_left:.2f}" y1="{top:.2f}" x2="{margin_left:.2f}" '
            f'y2="{bottom:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<line x1="{margin_left:.2f}" y1="{bottom:.2f}" '
            f'x2="{margin_left + plot_w:.2f}" y2="{bottom:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{margin_left - 8:.2f}" y="{bottom:.2f}" text-anchor="end">0</text>'
        )
        parts.append(
            f'<text x="{margin_left - 8:.2f}" y="{top + 10:.2f}" '
            f'text-anchor="end">{y_max:g}</text>'
        )
        parts.append(
            f'<text x="{margin_left:.2f}" y="{bottom + 18:.2f}">1</text>'
        )
        parts.append(
            f'<text x="{margin_left + plot_w:.2f}" y="{bottom + 18:.2f}" '
            f'text-anchor="end">{x_max}</text>'
        )
        parts.append(
            f'<text x="{margin_left + plot_w / 2:.2f}" y="{bottom + 36:.2f}" '
            f'text-anchor="middle">scored step</text>'
        )
        for rows, color in ((context_rows, "red"), (baseline_rows, "blue")):
            points = []
            for row in rows:
                x = margin_left + (row.t - 1) / max(x_max - 1, 1) * plot_w
                y = bottom - value(row) / y_max * panel_h
                points.append(f"{x:.2f},{y:.2f}")
            parts.append(
                f'<polyline fill="none" stroke="{color}" points="{" ".join(points)}"/>'
            )
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_comparison_svg(
    context_rows: Sequence[MetricsRow],
    baseline_rows: Sequence[MetricsRow],
    path: str,
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_comparison_svg(context_rows, baseline_rows))
