"""Turn-pair delexicalization: slot-value search and replace, collision
filtering, categorical-slot classification, and value-dictionary harvesting.

All operations here are pure functions over the normalized corpus model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import (
    RESERVED_VALUES,
    BeliefState,
    Corpus,
    SlotLabel,
    SlotValue,
    TurnPair,
)
from .errors import InvariantError

VALUE_COLLISION = "value_collision"
OVERLAP_AMBIGUITY = "overlap_ambiguity"


def placeholder(label: SlotLabel) -> str:
    """The replacement token for a slot label, bit-exact: "[domain-name]"."""
    return f"[{label.canonical}]"


@dataclass(frozen=True)
class CategoricalPolicy:
    """Labels whose values stay lexicalized, plus value strings never replaced."""

    labels: frozenset[SlotLabel] = frozenset()
    reserved_values: frozenset[str] = RESERVED_VALUES

    def __post_init__(self) -> None:
        missing = RESERVED_VALUES - self.reserved_values
        if missing:
            raise InvariantError(
                f"reserved value set must include {', '.join(sorted(missing))}")

    def is_categorical(self, label: SlotLabel) -> bool:
        return label in self.labels

    def is_reserved(self, text: str) -> bool:
        return text in self.reserved_values


@dataclass(frozen=True)
class Substitution:
    """One value replaced by its label token; occurrences counts both utterances.

    Categorical labels are recorded with zero occurrences (their value stays
    in the text); non-categorical labels appear only when actually replaced.
    """

    label: SlotLabel
    value: SlotValue
    occurrences: int


@dataclass(frozen=True)
class DelexPair:
    """Delexicalized utterances of one turn pair plus the substitutions made."""

    system: str
    user: str
    substitutions: tuple[Substitution, ...]


@dataclass(frozen=True)
class Rejection:
    """A turn pair declared unsafe to templatize."""

    reason: str  # VALUE_COLLISION | OVERLAP_AMBIGUITY
    labels: tuple[SlotLabel, ...]


@dataclass(frozen=True)
class CollisionReport:
    """Groups of non-categorical labels sharing identical replaceable values."""

    groups: tuple[frozenset[SlotLabel], ...]


def find_token_spans(text: str, value: str) -> list[tuple[int, int]]:
    """All occurrences of `value` in `text` between non-alphanumeric boundaries."""
    spans = []
    if not value:
        return spans
    start = 0
    while True:
        hit = text.find(value, start)
        if hit < 0:
            break
        end = hit + len(value)
        left_ok = hit == 0 or not text[hit - 1].isalnum()
        right_ok = end == len(text) or not text[end].isalnum()
        if left_ok and right_ok:
            spans.append((hit, end))
        start = hit + 1
    return spans


def contains_token(text: str, value: str) -> bool:
    return bool(find_token_spans(text, value))


def _order_sensitive_overlap(text: str, ordered_values) -> tuple[SlotLabel, ...] | None:
    """Find two labels whose matches partially overlap (nesting is fine)."""
    matches = []
    for label, value in ordered_values:
        matches.extend((label, span) for span in find_token_spans(text, value.text))
    for i, (label_a, (a_start, a_end)) in enumerate(matches):
        for label_b, (b_start, b_end) in matches[i + 1:]:
            if label_a == label_b:
                continue
            if a_start < b_end and b_start < a_end:
                nested = ((a_start <= b_start and b_end <= a_end)
                          or (b_start <= a_start and a_end <= b_end))
                if not nested:
                    return tuple(sorted({label_a, label_b}, key=lambda l: l.canonical))
    return None


def _replace_value(segments, value_text: str, token: str):
    """Replace boundary matches of one value within the raw segments.

    Segments are (text, is_placeholder) chunks; placeholder chunks are opaque
    and never rescanned. Matches of the same value are taken greedily left to
    right. Returns (new_segments, replacements_made).
    """
    count = 0
    out = []
    for text, is_placeholder in segments:
        if is_placeholder:
            out.append((text, True))
            continue
        taken = []
        cursor = 0
        for start, end in find_token_spans(text, value_text):
            if start >= cursor:
                taken.append((start, end))
                cursor = end
        if not taken:
            out.append((text, False))
            continue
        cursor = 0
        for start, end in taken:
            if start > cursor:
                out.append((text[cursor:start], False))
            out.append((token, True))
            count += 1
            cursor = end
        if cursor < len(text):
            out.append((text[cursor:], False))
    return out, count


def delexicalize_pair(pair: TurnPair, policy: CategoricalPolicy) -> DelexPair | Rejection:
    """Replace non-categorical slot values with their label tokens.

    Every label of the pair's current belief state is searched in both
    utterances. Matching is whole-token-boundary, longest value first (ties
    by canonical label), and inserted placeholders are opaque to later
    matches. Returns a Rejection instead of a DelexPair when two labels
    share the same value text, or when two labels' matches partially overlap
    so that replacement order would change the output. Reserved values are
    never replaced, even for non-categorical labels.
    """
    searchable: list[tuple[SlotLabel, SlotValue]] = []
    categorical: list[tuple[SlotLabel, SlotValue]] = []
    for label, value in pair.belief.entries:
        if policy.is_categorical(label):
            categorical.append((label, value))
        elif not policy.is_reserved(value.text):
            searchable.append((label, value))

    by_text: dict[str, list[SlotLabel]] = {}
    for label, value in searchable:
        by_text.setdefault(value.text, []).append(label)
    colliding = sorted(
        (label for group in by_text.values() if len(group) > 1 for label in group),
        key=lambda l: l.canonical)
    if colliding:
        return Rejection(VALUE_COLLISION, tuple(colliding))

    order = sorted(searchable, key=lambda lv: (-len(lv[1].text), lv[0].canonical))

    for text in (pair.system_utterance, pair.user_utterance):
        clash = _order_sensitive_overlap(text, order)
        if clash:
            return Rejection(OVERLAP_AMBIGUITY, clash)

    counts = {label: 0 for label, _ in searchable}
    delexed = []
    for text in (pair.system_utterance, pair.user_utterance):
        segments = [(text, False)]
        for label, value in order:
            segments, made = _replace_value(segments, value.text, placeholder(label))
            counts[label] += made
        delexed.append("".join(chunk for chunk, _ in segments))

    substitutions = [Substitution(label, value, counts[label])
                     for label, value in searchable if counts[label]]
    substitutions.extend(Substitution(label, value, 0) for label, value in categorical)
    substitutions.sort(key=lambda s: s.label.canonical)
    return DelexPair(delexed[0], delexed[1], tuple(substitutions))


def detect_collision(belief: BeliefState, policy: CategoricalPolicy) -> CollisionReport | None:
    """Group non-categorical labels whose replaceable values are string-equal."""
    by_text: dict[str, list[SlotLabel]] = {}
    for label, value in belief.entries:
        if policy.is_categorical(label) or policy.is_reserved(value.text):
            continue
        by_text.setdefault(value.text, []).append(label)
    groups = sorted((frozenset(labels) for labels in by_text.values() if len(labels) > 1),
                    key=lambda g: sorted(l.canonical for l in g))
    if not groups:
        return None
    return CollisionReport(tuple(groups))


def classify_slots(corpus: Corpus, overrides=(), tau: float = 0.5,
                   reserved_values: frozenset[str] = RESERVED_VALUES) -> CategoricalPolicy:
    """Mark labels categorical when their newly-set values rarely occur in text.

    An occurrence is a pair where the label's value was introduced or changed
    relative to the previous pair; counting carried-over repeats of the
    cumulative state would drown the signal for every label. An occurrence is
    findable when the value is non-reserved and appears at token boundaries
    in either utterance of that pair. A label is categorical when forced by
    an override, or when its findable fraction falls below `tau`.
    """
    forced = frozenset(_as_label(item) for item in overrides)
    found: dict[SlotLabel, int] = {}
    total: dict[SlotLabel, int] = {}
    for dialogue in corpus.dialogues:
        previous: dict[SlotLabel, str] = {}
        for pair in dialogue.pairs:
            for label, value in pair.belief.entries:
                if previous.get(label) == value.text:
                    continue
                total[label] = total.get(label, 0) + 1
                if value.text not in reserved_values and (
                        contains_token(pair.system_utterance, value.text)
                        or contains_token(pair.user_utterance, value.text)):
                    found[label] = found.get(label, 0) + 1
            previous = {label: value.text for label, value in pair.belief.entries}
    inferred = {label for label, count in total.items()
                if found.get(label, 0) / count < tau}
    return CategoricalPolicy(labels=forced | inferred,
                             reserved_values=frozenset(reserved_values))


def _as_label(item) -> SlotLabel:
    return item if isinstance(item, SlotLabel) else SlotLabel.parse(item)


@dataclass(frozen=True)
class SlotValueDict:
    """Harvested label-to-values dictionary (replaceable values only).

    Values keep first-observation order, scanning dialogues by id and belief
    entries by label.
    """

    entries: dict[SlotLabel, tuple[SlotValue, ...]]

    def values_for(self, label: SlotLabel) -> tuple[SlotValue, ...]:
        return self.entries.get(label, ())

    def labels(self) -> list[SlotLabel]:
        return sorted(self.entries, key=lambda l: l.canonical)

    def as_dict(self) -> dict[str, list[str]]:
        return {label.canonical: [v.text for v in values]
                for label, values in sorted(self.entries.items(),
                                            key=lambda kv: kv[0].canonical)}

    def __contains__(self, label: SlotLabel) -> bool:
        return label in self.entries

    def __len__(self) -> int:
        return len(self.entries)


def harvest_values(corpus: Corpus, policy: CategoricalPolicy) -> SlotValueDict:
    """Collect every replaceable (label, value) observed in any belief state.

    Categorical labels and reserved values are excluded, so every stored
    value is usable as a template filler.
    """
    entries: dict[SlotLabel, dict[SlotValue, None]] = {}
    for dialogue in sorted(corpus.dialogues, key=lambda d: d.id):
        for pair in dialogue.pairs:
            for label, value in pair.belief.entries:
                if policy.is_categorical(label) or policy.is_reserved(value.text):
                    continue
                entries.setdefault(label, {}).setdefault(value, None)
    return SlotValueDict({label: tuple(values) for label, values in entries.items()})
