"""Intervention triggering over the live fixation stream.

The trigger rule: a reference's intervention fires when the cumulative count
of fixations inside its AOI reaches 40% (rounded up) of the mean fixation
count readers historically needed for that reference. Firing emits a
HIGHLIGHT command for the reference's bars plus the commands demanded by the
configured removal strategy for previously active highlights.

A small generic rule engine lives alongside: predicates over per-AOI
attention features paired with command-emitting actions, in which the
built-in trigger rule is expressible.
"""
from __future__ import annotations

import json
import math
import operator
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

from .gaze import AOI, Fixation
from .msnv import MSNVDocument, Reference, reference_aois

HIGHLIGHT = "HIGHLIGHT"
DESATURATE = "DESATURATE"
REMOVE = "REMOVE"

BLACK_OUTLINE = "#000000"
GREY_OUTLINE = "#808080"


class Strategy(str, Enum):
    """What happens to earlier highlights when a new one fires."""

    KEEP_ALL = "keep"
    REMOVE_PREVIOUS = "remove"
    DESATURATE_PREVIOUS = "desaturate"


class Status(str, Enum):
    UNTRIGGERED = "UNTRIGGERED"
    ACTIVE = "ACTIVE"
    DESATURATED = "DESATURATED"
    REMOVED = "REMOVED"


@dataclass(frozen=True)
class EngineConfig:
    fraction: float = 0.40
    strategy: Strategy = Strategy.DESATURATE_PREVIOUS
    outline_width_px: int = 3


@dataclass(frozen=True)
class InterventionCommand:
    kind: str
    reference_id: str
    bar_ids: tuple[str, ...]
    outline: Optional[str] = None
    width_px: Optional[int] = None


@dataclass(frozen=True)
class TriggerEvent:
    """One firing: which reference, at which fixation ordinal, when."""

    reference_id: str
    ordinal: int
    t_ms: float


def trigger_threshold(reference: Reference, fraction: float = 0.40) -> int:
    """Fixation count at which the reference's intervention fires."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    return max(1, math.ceil(fraction * reference.mean_fixations))


class InterventionBook:
    """Per-reference intervention status plus the removal-strategy
    transitions. Shared by the built-in trigger rule and the generic rule
    engine so both produce identical command streams."""

    def __init__(self, doc: MSNVDocument, config: EngineConfig):
        self.config = config
        self.bars = {r.id: r.data_point_ids for r in doc.references}
        self.statuses: dict[str, Status] = {r.id: Status.UNTRIGGERED for r in doc.references}
        self.trigger_order: list[str] = []

    def fire(self, reference_id: str) -> list[InterventionCommand]:
        """Highlight a newly triggered reference, applying the removal
        strategy to whatever was active before."""
        commands: list[InterventionCommand] = []
        strategy = self.config.strategy
        if strategy is not Strategy.KEEP_ALL:
            for rid, status in self.statuses.items():
                if status is not Status.ACTIVE or rid == reference_id:
                    continue
                if strategy is Strategy.REMOVE_PREVIOUS:
                    self.statuses[rid] = Status.REMOVED
                    commands.append(InterventionCommand(
                        kind=REMOVE, reference_id=rid, bar_ids=self.bars[rid]))
                else:
                    self.statuses[rid] = Status.DESATURATED
                    commands.append(InterventionCommand(
                        kind=DESATURATE, reference_id=rid, bar_ids=self.bars[rid],
                        outline=GREY_OUTLINE, width_px=self.config.outline_width_px))
        self.statuses[reference_id] = Status.ACTIVE
        self.trigger_order.append(reference_id)
        commands.append(InterventionCommand(
            kind=HIGHLIGHT, reference_id=reference_id,
            bar_ids=self.bars[reference_id],
            outline=BLACK_OUTLINE, width_px=self.config.outline_width_px))
        return commands


class InterventionEngine:
    """The production trigger path: counts fixations per reference AOI and
    fires each reference once when its threshold is reached."""

    def __init__(self, doc: MSNVDocument, config: EngineConfig = EngineConfig()):
        self.config = config
        self.reset_for_document(doc, config)

    def reset_for_document(self, doc: MSNVDocument, config: Optional[EngineConfig] = None) -> None:
        """Fresh state for a new document viewing: zero counters, all
        references untriggered, thresholds rebuilt."""
        if config is not None:
            self.config = config
        self.doc = doc
        self.aois: list[AOI] = reference_aois(doc)
        self.thresholds: dict[str, int] = {
            r.id: trigger_threshold(r, self.config.fraction) for r in doc.references
        }
        self.counters: dict[str, int] = {r.id: 0 for r in doc.references}
        self.fired: dict[str, bool] = {r.id: False for r in doc.references}
        self.book = InterventionBook(doc, self.config)
        self.trigger_log: list[TriggerEvent] = []

    def on_fixation(self, fixation: Fixation) -> list[InterventionCommand]:
        """Attribute the fixation to the (unique) reference AOI containing its
        centroid, bump that counter, and fire when the threshold is reached.
        Fixations outside every reference AOI are a no-op."""
        for aoi in self.aois:
            if aoi.contains(fixation.centroid_x, fixation.centroid_y):
                return self._count(aoi.owner, fixation.end_ms)
        return []

    def apply_removal_strategy(self, newly_triggered: str) -> list[InterventionCommand]:
        return self.book.fire(newly_triggered)

    @property
    def status_map(self) -> dict[str, Status]:
        return dict(self.book.statuses)

    def _count(self, reference_id: str, t_ms: float) -> list[InterventionCommand]:
        self.counters[reference_id] += 1
        if self.fired[reference_id]:
            return []
        if self.counters[reference_id] >= self.thresholds[reference_id]:
            self.fired[reference_id] = True
            self.trigger_log.append(TriggerEvent(
                reference_id=reference_id,
                ordinal=self.counters[reference_id],
                t_ms=t_ms,
            ))
            return self.apply_removal_strategy(reference_id)
        return []


# --- generic rule layer ---------------------------------------------------

RULES_FORMAT_TAG = "rules/1"

FEATURES = (
    "fixation_count",
    "total_duration_ms",
    "longest_fixation_ms",
    "fixation_rate_hz",
    "proportion_of_fixations",
)

_COMPARATORS: dict[str, Callable[[float, float], bool]] = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
    "==": operator.eq,
    "!=": operator.ne,
}

ACTIONS = ("highlight", "desaturate", "remove")


class RuleConfigError(ValueError):
    pass


@dataclass
class FeatureRule:
    """Fire ``action`` for the AOI's owner when ``feature comparator value``
    holds. ``fire_once`` rules are spent after their first firing."""

    aoi_id: str
    feature: str
    comparator: str
    value: float
    fire_once: bool = True
    action: str = "highlight"
    fired: bool = field(default=False, compare=False)


class _AOIStats:
    __slots__ = ("count", "total_ms", "longest_ms")

    def __init__(self) -> None:
        self.count = 0
        self.total_ms = 0.0
        self.longest_ms = 0.0


class RuleEngine:
    """Evaluates feature rules over the fixation stream, in registration
    order, emitting intervention commands through the shared status book."""

    def __init__(self, doc: MSNVDocument, config: EngineConfig = EngineConfig(),
                 aois: Optional[Sequence[AOI]] = None):
        self.config = config
        self.aois = list(aois) if aois is not None else reference_aois(doc)
        self._by_id = {a.id: a for a in self.aois}
        self.rules: list[FeatureRule] = []
        self.book = InterventionBook(doc, config)
        self._stats: dict[str, _AOIStats] = {a.id: _AOIStats() for a in self.aois}
        self._fixation_total = 0
        self._epoch_ms: Optional[float] = None

    def add_rule(self, rule: FeatureRule) -> None:
        if rule.aoi_id not in self._by_id:
            raise RuleConfigError(f"rule references unknown AOI {rule.aoi_id!r}")
        if rule.feature not in FEATURES:
            raise RuleConfigError(f"unknown feature {rule.feature!r}")
        if rule.comparator not in _COMPARATORS:
            raise RuleConfigError(f"unknown comparator {rule.comparator!r}")
        if rule.action not in ACTIONS:
            raise RuleConfigError(f"unknown action {rule.action!r}")
        self.rules.append(rule)

    def add_trigger_rules(self, doc: MSNVDocument, fraction: float = 0.40) -> None:
        """Express the built-in per-reference trigger rule generically."""
        for r in doc.references:
            self.add_rule(FeatureRule(
                aoi_id=r.id, feature="fixation_count", comparator=">=",
                value=float(trigger_threshold(r, fraction)),
                fire_once=True, action="highlight",
            ))

    def on_fixation(self, fixation: Fixation) -> list[InterventionCommand]:
        if self._epoch_ms is None:
            self._epoch_ms = fixation.start_ms
        self._fixation_total += 1
        for aoi in self.aois:
            if aoi.contains(fixation.centroid_x, fixation.centroid_y):
                st = self._stats[aoi.id]
                st.count += 1
                st.total_ms += fixation.end_ms - fixation.start_ms
                st.longest_ms = max(st.longest_ms, fixation.end_ms - fixation.start_ms)
                break
        elapsed_ms = max(fixation.end_ms - self._epoch_ms, 1e-9)
        commands: list[InterventionCommand] = []
        for rule in self.rules:
            if rule.fire_once and rule.fired:
                continue
            if self._holds(rule, elapsed_ms):
                rule.fired = True
                commands.extend(self._run_action(rule))
        return commands

    def _holds(self, rule: FeatureRule, elapsed_ms: float) -> bool:
        st = self._stats[rule.aoi_id]
        values = {
            "fixation_count": float(st.count),
            "total_duration_ms": st.total_ms,
            "longest_fixation_ms": st.longest_ms,
            "fixation_rate_hz": st.count / (elapsed_ms / 1000.0),
            "proportion_of_fixations": (st.count / self._fixation_total)
            if self._fixation_total else 0.0,
        }
        return _COMPARATORS[rule.comparator](values[rule.feature], rule.value)

    def _run_action(self, rule: FeatureRule) -> list[InterventionCommand]:
        owner = self._by_id[rule.aoi_id].owner
        if rule.action == "highlight":
            return self.book.fire(owner)
        bars = self.book.bars.get(owner, ())
        if rule.action == "desaturate":
            self.book.statuses[owner] = Status.DESATURATED
            return [InterventionCommand(kind=DESATURATE, reference_id=owner, bar_ids=bars,
                                        outline=GREY_OUTLINE,
                                        width_px=self.config.outline_width_px)]
        self.book.statuses[owner] = Status.REMOVED
        return [InterventionCommand(kind=REMOVE, reference_id=owner, bar_ids=bars)]


def load_rule_config(text: str, engine: RuleEngine) -> None:
    """Load a `rules/1` file into a rule engine; config errors are raised at
    load time, before any evaluation."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise RuleConfigError(f"malformed rule config: {e}") from None
    if not isinstance(raw, dict) or raw.get("format") != RULES_FORMAT_TAG:
        raise RuleConfigError(f"rule config must carry format {RULES_FORMAT_TAG!r}")
    for i, r in enumerate(raw.get("rules") or []):
        if not isinstance(r, dict):
            raise RuleConfigError(f"rule #{i} must be an object")
        try:
            rule = FeatureRule(
                aoi_id=str(r["aoi"]),
                feature=str(r["feature"]),
                comparator=str(r["comparator"]),
                value=float(r["value"]),
                fire_once=bool(r.get("fireOnce", True)),
                action=str(r.get("action", "highlight")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise RuleConfigError(f"rule #{i}: {e}") from None
        engine.add_rule(rule)
