"""Turn-pair template bank: dialogue functions, boundary markers, successor index.

A template's dialogue function is the triple of slot-label sets from the
previous, current, and next belief states of its source pair; dialogue
boundaries use a null marker distinct from the empty set.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import BeliefState, Corpus, Dialogue, SlotLabel
from .delex import CategoricalPolicy, Rejection, Substitution, delexicalize_pair
from .errors import EmptyBankError, InvariantError

# serialized stand-in for the null boundary marker; "{}" stays the empty set
NULL_MARKER = "__null__"


@dataclass(frozen=True)
class FunctionKey:
    """Slot-label sets of the previous, current, and next belief states.

    None marks a dialogue boundary (no previous or no next pair) and is
    distinct from an empty label set. The current set is never None.
    """

    prev_slots: frozenset[SlotLabel] | None
    cur_slots: frozenset[SlotLabel]
    next_slots: frozenset[SlotLabel] | None


@dataclass(frozen=True)
class TurnPairTemplate:
    """A delexicalized turn pair with its dialogue function and provenance.

    Full neighbor belief states are retained (values included) so functions
    can be re-derived and original values recovered.
    """

    id: str
    source: tuple[str, int]  # (dialogue id, pair index)
    delex_system: str
    delex_user: str
    substitutions: tuple[Substitution, ...]
    function: FunctionKey
    prev_belief: BeliefState | None
    cur_belief: BeliefState
    next_belief: BeliefState | None

    def __post_init__(self) -> None:
        expected = FunctionKey(
            self.prev_belief.labels if self.prev_belief is not None else None,
            self.cur_belief.labels,
            self.next_belief.labels if self.next_belief is not None else None)
        if self.function != expected:
            raise InvariantError(f"template {self.id}: function key does not match its belief states")


@dataclass(frozen=True)
class RejectionRecord:
    """A pair that produced no template, with the reason."""

    dialogue_id: str
    pair_index: int
    rejection: Rejection


def template_id(dialogue_id: str, pair_index: int) -> str:
    # zero-padded so string order equals (dialogue id, pair index) order
    return f"{dialogue_id}:{pair_index:03d}"


def make_templates(dialogue: Dialogue,
                   policy: CategoricalPolicy) -> tuple[list[TurnPairTemplate], list[RejectionRecord]]:
    """Delexicalize each pair of a dialogue and attach its dialogue function.

    Pair 0 gets a null previous state, the last pair a null next state.
    Rejected pairs yield no template; their neighbors keep the original
    dialogue's belief states rather than re-stitching around the gap.
    """
    templates: list[TurnPairTemplate] = []
    rejected: list[RejectionRecord] = []
    last = len(dialogue.pairs) - 1
    for pair in dialogue.pairs:
        outcome = delexicalize_pair(pair, policy)
        if isinstance(outcome, Rejection):
            rejected.append(RejectionRecord(dialogue.id, pair.index, outcome))
            continue
        prev_belief = dialogue.pairs[pair.index - 1].belief if pair.index > 0 else None
        next_belief = dialogue.pairs[pair.index + 1].belief if pair.index < last else None
        templates.append(TurnPairTemplate(
            id=template_id(dialogue.id, pair.index),
            source=(dialogue.id, pair.index),
            delex_system=outcome.system,
            delex_user=outcome.user,
            substitutions=outcome.substitutions,
            function=FunctionKey(
                prev_belief.labels if prev_belief is not None else None,
                pair.belief.labels,
                next_belief.labels if next_belief is not None else None),
            prev_belief=prev_belief,
            cur_belief=pair.belief,
            next_belief=next_belief))
    return templates, rejected


@dataclass(frozen=True)
class TemplateBank:
    """All templates of a corpus with indexes for successor lookup.

    Immutable once built; safe for concurrent queries. Every template sits in
    exactly one by_prev bucket (keyed by its previous slot set, None for
    roots), and bucket contents are sorted by template id.
    """

    templates: tuple[TurnPairTemplate, ...]
    rejections: tuple[RejectionRecord, ...]
    by_id: dict[str, TurnPairTemplate]
    by_prev: dict[frozenset[SlotLabel] | None, tuple[str, ...]]
    roots: tuple[str, ...]
    terminals: tuple[str, ...]

    def get(self, tid: str) -> TurnPairTemplate:
        return self.by_id[tid]

    def __len__(self) -> int:
        return len(self.templates)


def build_bank(corpus: Corpus, policy: CategoricalPolicy) -> TemplateBank:
    """Aggregate templates over all dialogues, ordered by (dialogue id, pair index)."""
    templates: list[TurnPairTemplate] = []
    rejections: list[RejectionRecord] = []
    for dialogue in sorted(corpus.dialogues, key=lambda d: d.id):
        made, rejected = make_templates(dialogue, policy)
        templates.extend(made)
        rejections.extend(rejected)
    if not templates:
        raise EmptyBankError(
            f"no usable turn-pair templates ({len(rejections)} pairs rejected); "
            "the seed set cannot be templatized")

    by_id = {t.id: t for t in templates}
    buckets: dict[frozenset[SlotLabel] | None, list[str]] = {}
    for t in templates:
        buckets.setdefault(t.function.prev_slots, []).append(t.id)
    by_prev = {key: tuple(sorted(ids)) for key, ids in buckets.items()}
    roots = tuple(t.id for t in templates if t.function.prev_slots is None)
    terminals = tuple(t.id for t in templates if t.function.next_slots is None)
    return TemplateBank(templates=tuple(templates), rejections=tuple(rejections),
                        by_id=by_id, by_prev=by_prev, roots=roots, terminals=terminals)


def successors(bank: TemplateBank, template: TurnPairTemplate) -> list[str]:
    """Templates that may legally follow `template`, ordered by id.

    Uses label-set equality on both link conditions: a successor's current
    slots equal the template's next slots, and its previous slots equal the
    template's current slots. Terminal templates have no successors and must
    not be queried.
    """
    if template.function.next_slots is None:
        raise ValueError(f"template {template.id} is terminal and has no successors")
    bucket = bank.by_prev.get(template.function.cur_slots, ())
    return [tid for tid in bucket
            if bank.by_id[tid].function.cur_slots == template.function.next_slots]


def _slots_to_json(slots: frozenset[SlotLabel] | None):
    if slots is None:
        return NULL_MARKER
    return sorted(label.canonical for label in slots)


def bank_to_json(bank: TemplateBank) -> list[dict]:
    """Debug dump of the bank; boundary markers serialize as "__null__"."""
    return [{
        "id": t.id,
        "source": [t.source[0], t.source[1]],
        "delex_system": t.delex_system,
        "delex_user": t.delex_user,
        "function": {
            "prev": _slots_to_json(t.function.prev_slots),
            "cur": _slots_to_json(t.function.cur_slots),
            "next": _slots_to_json(t.function.next_slots),
        },
    } for t in bank.templates]
