"""Adapter for native MultiWOZ 2.x ``data.json`` files.

Conversion rules:
  - log turns alternate user/system starting with the user; the system turn's
    metadata holds the belief state reached after the preceding user turn, so
    that state is attached to the user turn of the pair.
  - ``semi`` and ``book`` sections both contribute slots; book sub-slots gain
    a ``book_`` prefix (``hotel-book_day``) and the ``booked`` list is skipped.
  - values "", "not mentioned", and "none" mean unset and are dropped; list
    values keep their first entry.
  - slot names are lowercased with internal spaces turned into underscores.
  - a trailing user turn with no following system turn keeps the belief of the
    previous pair.
  - dialogue domains are the union of goal domains and domains observed in
    belief states; dialogues are emitted sorted by id.
"""

from __future__ import annotations

from .corpus import BeliefState, Dialogue, SlotLabel, SlotValue, TurnPair, normalize_text
from .errors import SchemaError

UNSET_VALUES = frozenset({"", "not mentioned", "none"})

# goal keys that are bookkeeping, not task domains
_NON_DOMAIN_GOAL_KEYS = frozenset({"message", "topic"})


def convert_multiwoz(data: dict) -> list[Dialogue]:
    """Convert a parsed data.json object into normalized dialogues."""
    if not isinstance(data, dict):
        raise SchemaError(f"MultiWOZ corpus must be a JSON object, got {type(data).__name__}")
    dialogues = []
    for dialogue_id in sorted(data):
        record = data[dialogue_id]
        if not isinstance(record, dict) or not isinstance(record.get("log"), list):
            raise SchemaError(f"dialogue {dialogue_id!r}: expected an object with a 'log' list")
        log = record["log"]
        if not log:
            raise SchemaError(f"dialogue {dialogue_id!r}: empty log")

        pairs: list[TurnPair] = []
        for position in range(0, len(log), 2):
            user_text = normalize_text(_turn_text(log, position, dialogue_id))
            system_text = normalize_text(_turn_text(log, position - 1, dialogue_id)) if position else ""
            if position + 1 < len(log):
                belief = belief_from_metadata(log[position + 1].get("metadata", {}))
            else:
                # trailing user turn: no annotation follows, keep the last state
                belief = pairs[-1].belief if pairs else BeliefState()
            pairs.append(TurnPair(index=position // 2, system_utterance=system_text,
                                  user_utterance=user_text, belief=belief))

        goal = record.get("goal", {})
        goal_domains = {normalize_text(key) for key, value in goal.items()
                        if value and key not in _NON_DOMAIN_GOAL_KEYS} if isinstance(goal, dict) else set()
        observed = {label.domain for pair in pairs for label in pair.belief.labels}
        dialogues.append(Dialogue(id=dialogue_id,
                                  domains=frozenset(goal_domains | observed),
                                  pairs=tuple(pairs)))
    return dialogues


def _turn_text(log: list, position: int, dialogue_id: str) -> str:
    turn = log[position]
    if not isinstance(turn, dict) or not isinstance(turn.get("text"), str):
        raise SchemaError(f"dialogue {dialogue_id!r}: log entry {position} has no text")
    return turn["text"]


def belief_from_metadata(metadata: dict) -> BeliefState:
    """Flatten a MultiWOZ metadata block into a single belief state."""
    entries = []
    if not isinstance(metadata, dict):
        return BeliefState()
    for domain, sections in metadata.items():
        if not isinstance(sections, dict):
            continue
        for slot, value in sections.get("semi", {}).items():
            _add_entry(entries, domain, slot, value)
        for slot, value in sections.get("book", {}).items():
            if slot == "booked":
                continue
            _add_entry(entries, domain, f"book {slot}", value)
    return BeliefState(tuple(entries))


def _add_entry(entries: list, domain: str, slot: str, value) -> None:
    if isinstance(value, list):
        value = value[0] if value else ""
    if not isinstance(value, str):
        return
    text = normalize_text(value)
    if text in UNSET_VALUES:
        return
    entries.append((SlotLabel.parse(f"{domain}-{slot}"), SlotValue(text)))
