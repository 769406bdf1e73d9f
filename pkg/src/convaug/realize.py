"""Surface realization: assignment enumeration over the harvested dictionary,
template filling with regenerated cumulative annotations, and volume control.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import random
import re
from dataclasses import dataclass, field

from .bank import TemplateBank
from .compose import DialogueTemplate
from .corpus import BeliefState, Corpus, Dialogue, SlotLabel, SlotValue, TurnPair
from .delex import CategoricalPolicy, SlotValueDict, placeholder
from .errors import ResidualPlaceholderError, UncoverableLabelError

EXHAUSTIVE = "exhaustive"
SAMPLED = "sampled"

_PLACEHOLDER_RE = re.compile(r"\[([^\[\]\s]+)\]")

# above this size the product index space is sampled by rejection instead of
# materializing a shuffled permutation
_SHUFFLE_LIMIT = 65536


@dataclass(frozen=True)
class Assignment:
    """One value per replaceable label, used consistently across a dialogue."""

    entries: tuple[tuple[SlotLabel, SlotValue], ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.entries, key=lambda e: e[0].canonical))
        object.__setattr__(self, "entries", ordered)

    def value_of(self, label: SlotLabel) -> SlotValue | None:
        for candidate, value in self.entries:
            if candidate == label:
                return value
        return None

    @property
    def labels(self) -> frozenset[SlotLabel]:
        return frozenset(label for label, _ in self.entries)

    def as_dict(self) -> dict[str, str]:
        return {label.canonical: value.text for label, value in self.entries}


@dataclass(frozen=True)
class RealizationBudget:
    """How many dialogues to produce and how to pick assignments.

    `ratio` scales the seed corpus size into the target output count; `cap`
    bounds assignments per dialogue template in sampled mode.
    """

    mode: str = EXHAUSTIVE
    cap: int = 1000
    ratio: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in (EXHAUSTIVE, SAMPLED):
            raise ValueError(f"unknown realization mode {self.mode!r}")
        if self.cap < 1:
            raise ValueError("cap must be >= 1")
        if self.ratio <= 0:
            raise ValueError("ratio must be > 0")


@dataclass(frozen=True)
class SyntheticProvenance:
    template_path: tuple[str, ...]
    source_dialogue_ids: tuple[str, ...]
    assignment: Assignment


@dataclass(frozen=True)
class SyntheticDialogue(Dialogue):
    """A realized dialogue; structurally identical to a seed dialogue."""

    provenance: SyntheticProvenance


def fillable_labels(dt: DialogueTemplate, policy: CategoricalPolicy) -> list[SlotLabel]:
    """The template's non-categorical labels, canonically ordered."""
    return sorted((label for label in dt.slot_labels if not policy.is_categorical(label)),
                  key=lambda l: l.canonical)


def _dims(labels: list[SlotLabel], value_dict: SlotValueDict) -> list[tuple[SlotValue, ...]]:
    dims = []
    for label in labels:
        values = value_dict.values_for(label)
        if not values:
            raise UncoverableLabelError(label.canonical)
        dims.append(values)
    return dims


def _unrank(index: int, dims: list[tuple[SlotValue, ...]]) -> tuple[SlotValue, ...]:
    # odometer with the last axis fastest, matching itertools.product order
    picks: list[SlotValue | None] = [None] * len(dims)
    for axis in range(len(dims) - 1, -1, -1):
        index, offset = divmod(index, len(dims[axis]))
        picks[axis] = dims[axis][offset]
    return tuple(picks)  # type: ignore[arg-type]


def _collides(picks: tuple[SlotValue, ...]) -> bool:
    texts = [value.text for value in picks]
    return len(set(texts)) != len(texts)


def _index_stream(total: int, rng: random.Random):
    """Distinct indices of range(total) in seeded uniform-random order."""
    if total <= _SHUFFLE_LIMIT:
        order = list(range(total))
        rng.shuffle(order)
        yield from order
        return
    seen: set[int] = set()
    while len(seen) < total:
        index = rng.randrange(total)
        if index not in seen:
            seen.add(index)
            yield index


def enumerate_assignments(dt: DialogueTemplate, value_dict: SlotValueDict,
                          budget: RealizationBudget,
                          policy: CategoricalPolicy) -> list[Assignment]:
    """All (or a seeded sample of) collision-free assignments for one template.

    Exhaustive mode walks the full Cartesian product, labels in canonical
    order with values in dictionary order. Sampled mode draws distinct points
    of the product index space uniformly (seeded) until `cap` assignments
    survive the collision filter or the space runs out. Assignments giving
    two labels the same value text are always filtered.
    """
    labels = fillable_labels(dt, policy)
    dims = _dims(labels, value_dict)
    if budget.mode == EXHAUSTIVE:
        return [Assignment(tuple(zip(labels, picks)))
                for picks in itertools.product(*dims) if not _collides(picks)]
    total = math.prod(len(d) for d in dims)
    out: list[Assignment] = []
    for index in _index_stream(total, random.Random(budget.seed)):
        picks = _unrank(index, dims)
        if _collides(picks):
            continue
        out.append(Assignment(tuple(zip(labels, picks))))
        if len(out) >= budget.cap:
            break
    return out


def _fill(text: str, replacements: dict[str, str], known_labels: frozenset[str]) -> str:
    filled = _PLACEHOLDER_RE.sub(
        lambda m: replacements.get(m.group(1), m.group(0)), text)
    leftover = sorted({m.group(1) for m in _PLACEHOLDER_RE.finditer(filled)
                       if m.group(1) in known_labels})
    if leftover:
        raise ResidualPlaceholderError(
            f"unfilled placeholder(s) {', '.join(leftover)} after realization")
    return filled


def realize(dt: DialogueTemplate, assignment: Assignment, bank: TemplateBank,
            policy: CategoricalPolicy) -> SyntheticDialogue:
    """Fill one dialogue template with one assignment.

    Placeholder tokens become the assigned values; belief annotations are
    regenerated cumulatively, using the assignment for non-categorical labels
    and the source template's own value for categorical ones. When templates
    along the chain disagree on a categorical value, the earliest template's
    value wins and is propagated forward. The dialogue id is a content hash
    of (template ids, assignment), so realization is deterministic.
    """
    templates = [bank.by_id[tid] for tid in dt.template_ids]
    fillable = fillable_labels(dt, policy)
    missing = [label for label in fillable if assignment.value_of(label) is None]
    if missing:
        for label in missing:
            token = placeholder(label)
            if any(token in t.delex_system or token in t.delex_user for t in templates):
                raise ResidualPlaceholderError(
                    f"assignment does not cover {label.canonical} but its placeholder is present")
        raise ValueError("assignment must cover labels: "
                         + ", ".join(label.canonical for label in missing))

    values: dict[SlotLabel, SlotValue] = {label: assignment.value_of(label)
                                          for label in fillable}
    for template in templates:
        for label, value in template.cur_belief.entries:
            if policy.is_categorical(label) and label not in values:
                values[label] = value  # first mention wins

    replacements = {label.canonical: value.text
                    for label, value in assignment.entries}
    known = frozenset(label.canonical for label in dt.slot_labels)

    pairs: list[TurnPair] = []
    accumulated: dict[SlotLabel, SlotValue] = {}
    for position, template in enumerate(templates):
        system_text = _fill(template.delex_system, replacements, known)
        user_text = _fill(template.delex_user, replacements, known)
        for label in sorted(template.cur_belief.labels, key=lambda l: l.canonical):
            accumulated[label] = values[label]
        pairs.append(TurnPair(index=position, system_utterance=system_text,
                              user_utterance=user_text,
                              belief=BeliefState(tuple(accumulated.items()))))

    digest = hashlib.sha1(json.dumps(
        [list(dt.template_ids), assignment.as_dict()],
        sort_keys=True).encode("utf-8")).hexdigest()
    return SyntheticDialogue(
        id=f"syn-{digest[:12]}",
        domains=frozenset(label.domain for label in accumulated),
        pairs=tuple(pairs),
        provenance=SyntheticProvenance(
            template_path=dt.template_ids,
            source_dialogue_ids=tuple(sorted(dt.provenance)),
            assignment=assignment))


def content_key(dialogue: Dialogue):
    """Full normalized text plus annotations, for duplicate detection."""
    return tuple((pair.system_utterance, pair.user_utterance,
                  tuple((label.canonical, value.text) for label, value in pair.belief.entries))
                 for pair in dialogue.pairs)


class _AssignmentStream:
    """Per-template lazy seeded walk over the collision-free assignment space."""

    def __init__(self, dt: DialogueTemplate, value_dict: SlotValueDict,
                 budget: RealizationBudget, policy: CategoricalPolicy, stream_index: int):
        self.dt = dt
        self.labels = fillable_labels(dt, policy)
        self.dims = _dims(self.labels, value_dict)
        total = math.prod(len(d) for d in self.dims)
        self.limit = total if budget.mode == EXHAUSTIVE else min(budget.cap, total)
        rng = random.Random(budget.seed * 1_000_003 + stream_index + 1)
        self._indices = _index_stream(total, rng)
        self.yielded = 0
        self.alive = True

    def next_assignment(self) -> Assignment | None:
        if not self.alive:
            return None
        if self.yielded >= self.limit:
            self.alive = False
            return None
        for index in self._indices:
            picks = _unrank(index, self.dims)
            if _collides(picks):
                continue
            self.yielded += 1
            return Assignment(tuple(zip(self.labels, picks)))
        self.alive = False
        return None


@dataclass
class GenerationResult:
    dialogues: list[SyntheticDialogue] = field(default_factory=list)
    requested: int = 0
    exhausted: bool = False


def generate(seed_corpus: Corpus, bank: TemplateBank,
             dialogue_templates: list[DialogueTemplate], value_dict: SlotValueDict,
             budget: RealizationBudget, policy: CategoricalPolicy) -> GenerationResult:
    """Produce round(ratio * seed size) distinct synthetic dialogues.

    Realizations come from a seeded round-robin over dialogue templates, one
    assignment per template per round, so small ratios still cover diverse
    structures. Exact duplicates of seed dialogues or of earlier output
    (compared on full text plus annotations) are dropped and do not count.
    When the space runs out first, everything found is returned with
    `exhausted` set; callers decide whether that is a warning or an error.
    """
    requested = round(budget.ratio * len(seed_corpus.dialogues))
    seen = {content_key(d) for d in seed_corpus.dialogues}
    streams = [_AssignmentStream(dt, value_dict, budget, policy, i)
               for i, dt in enumerate(dialogue_templates)]
    result = GenerationResult(requested=requested)
    while len(result.dialogues) < requested and any(s.alive for s in streams):
        for stream in streams:
            if len(result.dialogues) >= requested:
                break
            assignment = stream.next_assignment()
            if assignment is None:
                continue
            synthetic = realize(stream.dt, assignment, bank, policy)
            key = content_key(synthetic)
            if key in seen:
                continue
            seen.add(key)
            result.dialogues.append(synthetic)
    result.exhausted = len(result.dialogues) < requested
    return result
