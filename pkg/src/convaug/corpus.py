"""Dialogue corpus data model: ingestion, validation, turn pairing, n-shot sampling.

Utterance text and slot values are lowercased and whitespace-collapsed at load
time; all downstream string matching assumes this normal form. Loaded corpora
and everything they contain are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .errors import (
    AlternationError,
    InsufficientDataError,
    InvariantError,
    ParseError,
    SchemaError,
)

# Function words that double as annotation values; these are never treated as
# replaceable text.
RESERVED_VALUES = frozenset({"dontcare", "none", "yes", "no"})

_WHITESPACE = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace runs to single spaces."""
    return _WHITESPACE.sub(" ", text).strip().lower()


@dataclass(frozen=True, order=True)
class SlotLabel:
    """Slot identifier with canonical form "domain-name"."""

    domain: str
    name: str

    def __post_init__(self) -> None:
        for part in (self.domain, self.name):
            if not part or _WHITESPACE.search(part):
                raise InvariantError(
                    f"bad slot label part {part!r}: must be non-empty without whitespace")
        if "-" in self.domain:
            raise InvariantError(f"slot domain {self.domain!r} may not contain '-'")

    @property
    def canonical(self) -> str:
        return f"{self.domain}-{self.name}"

    @classmethod
    def parse(cls, raw: str) -> "SlotLabel":
        """Parse "domain-name"; lowercases and maps internal spaces to underscores."""
        text = normalize_text(raw).replace(" ", "_")
        domain, sep, name = text.partition("-")
        if not sep or not domain or not name:
            raise InvariantError(f"cannot parse slot label {raw!r} (expected 'domain-name')")
        return cls(domain, name)

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True)
class SlotValue:
    """A slot filler; reserved function words ("yes", "dontcare", ...) are special."""

    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise InvariantError("slot value text must be non-empty")

    @property
    def is_special(self) -> bool:
        return self.text.lower() in RESERVED_VALUES

    @property
    def kind(self) -> str:
        return "special" if self.is_special else "textual"

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class BeliefState:
    """Cumulative slot assignments holding after a user turn.

    Entries are kept sorted by canonical label, so the label set and
    serialization are independent of construction order.
    """

    entries: tuple[tuple[SlotLabel, SlotValue], ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.entries, key=lambda e: e[0].canonical))
        seen: set[SlotLabel] = set()
        dupes: set[str] = set()
        for label, _ in ordered:
            if label in seen:
                dupes.add(label.canonical)
            seen.add(label)
        if dupes:
            raise InvariantError(
                f"duplicate slot labels in belief state: {', '.join(sorted(dupes))}")
        object.__setattr__(self, "entries", ordered)

    @classmethod
    def from_dict(cls, mapping: dict) -> "BeliefState":
        if not isinstance(mapping, dict):
            raise SchemaError(f"belief must be an object, got {type(mapping).__name__}")
        entries = []
        for raw_label, raw_value in mapping.items():
            if not isinstance(raw_value, str):
                raise SchemaError(f"belief value for {raw_label!r} must be a string")
            entries.append((SlotLabel.parse(raw_label), SlotValue(normalize_text(raw_value))))
        return cls(tuple(entries))

    @property
    def labels(self) -> frozenset[SlotLabel]:
        return frozenset(label for label, _ in self.entries)

    def value_of(self, label: SlotLabel) -> SlotValue | None:
        for candidate, value in self.entries:
            if candidate == label:
                return value
        return None

    def as_dict(self) -> dict[str, str]:
        return {label.canonical: value.text for label, value in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, label: SlotLabel) -> bool:
        return any(candidate == label for candidate, _ in self.entries)


@dataclass(frozen=True)
class TurnPair:
    """One system+user exchange; the belief holds AFTER the user utterance."""

    index: int
    system_utterance: str
    user_utterance: str
    belief: BeliefState

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvariantError(f"negative pair index {self.index}")
        if self.index == 0 and self.system_utterance:
            raise InvariantError("pair 0 must have an empty system utterance (dialogues open with the user)",
                                 pair_index=0)


@dataclass(frozen=True)
class Dialogue:
    """An ordered sequence of turn pairs with the domains it touches."""

    id: str
    domains: frozenset[str]
    pairs: tuple[TurnPair, ...]

    def __post_init__(self) -> None:
        if not self.id:
            raise InvariantError("dialogue id must be non-empty")
        object.__setattr__(self, "domains", frozenset(self.domains))
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.pairs:
            raise InvariantError("dialogue needs at least one turn pair", dialogue_id=self.id)
        for position, pair in enumerate(self.pairs):
            if pair.index != position:
                raise InvariantError(
                    f"pair indices must be contiguous from 0, found {pair.index} at position {position}",
                    dialogue_id=self.id)

    @property
    def observed_domains(self) -> frozenset[str]:
        return frozenset(label.domain for pair in self.pairs for label in pair.belief.labels)

    def touches(self, domain: str) -> bool:
        """A dialogue is in domain D when any belief state mentions a D slot."""
        return any(label.domain == domain for pair in self.pairs for label in pair.belief.labels)


@dataclass(frozen=True)
class Corpus:
    """A set of dialogues plus a provenance note."""

    dialogues: tuple[Dialogue, ...]
    source: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "dialogues", tuple(self.dialogues))
        seen: set[str] = set()
        for dialogue in self.dialogues:
            if dialogue.id in seen:
                raise InvariantError("duplicate dialogue id", dialogue_id=dialogue.id)
            seen.add(dialogue.id)

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    def find(self, dialogue_id: str) -> Dialogue:
        for dialogue in self.dialogues:
            if dialogue.id == dialogue_id:
                return dialogue
        raise KeyError(dialogue_id)


@dataclass(frozen=True)
class RawTurn:
    """A single not-yet-paired turn as read from an input file."""

    speaker: str  # "user" | "system"
    text: str
    belief: BeliefState | None = None


def pair_turns(raw_turns: Sequence[RawTurn]) -> list[TurnPair]:
    """Group alternating user/system turns into (system, user) pairs.

    Pair k couples user turn k with the system turn that precedes it; pair 0
    gets an empty system utterance. A trailing system turn yields no pair, so
    a raw list of n turns produces ceil(n / 2) pairs.
    """
    for position, turn in enumerate(raw_turns):
        expected = "user" if position % 2 == 0 else "system"
        if turn.speaker != expected:
            raise AlternationError(
                f"turn {position} should be a {expected} turn, got {turn.speaker!r}")
    pairs = []
    for position in range(0, len(raw_turns), 2):
        user = raw_turns[position]
        if user.belief is None:
            raise SchemaError(f"user turn {position} is missing its belief state")
        system_text = raw_turns[position - 1].text if position else ""
        pairs.append(TurnPair(index=position // 2, system_utterance=system_text,
                              user_utterance=user.text, belief=user.belief))
    return pairs


def load_corpus(path, schema: str = "auto") -> Corpus:
    """Load a corpus file into the normalized data model.

    `schema` is "native" for this package's JSON layout, "multiwoz" for a
    MultiWOZ 2.x data.json, or "auto" to sniff (MultiWOZ files are objects,
    native files are arrays).
    """
    file_path = Path(path)
    try:
        raw_text = file_path.read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read {file_path}: {err}") from err
    try:
        data = json.loads(raw_text)
    except json.JSONDecodeError as err:
        raise ParseError(f"{file_path} is not valid JSON: {err}") from err

    if schema == "auto":
        schema = "multiwoz" if isinstance(data, dict) else "native"
    if schema == "native":
        dialogues = _parse_native(data)
    elif schema == "multiwoz":
        from .multiwoz import convert_multiwoz
        dialogues = convert_multiwoz(data)
    else:
        raise ValueError(f"unknown corpus schema {schema!r}")
    return Corpus(tuple(dialogues), source=str(file_path))


def _parse_native(data) -> list[Dialogue]:
    if not isinstance(data, list):
        raise SchemaError(f"native corpus must be a JSON array, got {type(data).__name__}")
    dialogues = []
    for item_index, item in enumerate(data):
        if not isinstance(item, dict):
            raise SchemaError(f"corpus entry {item_index} must be an object")
        dialogue_id = item.get("id")
        if not isinstance(dialogue_id, str) or not dialogue_id:
            raise SchemaError(f"corpus entry {item_index} has no usable 'id'")
        raw_domains = item.get("domains", [])
        if not isinstance(raw_domains, list) or not all(isinstance(d, str) for d in raw_domains):
            raise SchemaError(f"dialogue {dialogue_id!r}: 'domains' must be a list of strings")
        turns = item.get("turns")
        if not isinstance(turns, list):
            raise SchemaError(f"dialogue {dialogue_id!r}: 'turns' must be a list")

        raw_turns = []
        for turn_index, turn in enumerate(turns):
            if not isinstance(turn, dict):
                raise SchemaError(f"dialogue {dialogue_id!r}: turn {turn_index} must be an object")
            speaker = turn.get("speaker")
            if speaker not in ("user", "system"):
                raise SchemaError(
                    f"dialogue {dialogue_id!r}: turn {turn_index} has bad speaker {speaker!r}")
            text = turn.get("text")
            if not isinstance(text, str):
                raise SchemaError(f"dialogue {dialogue_id!r}: turn {turn_index} has no text")
            belief = None
            if speaker == "user":
                if "belief" not in turn:
                    raise SchemaError(
                        f"dialogue {dialogue_id!r}: user turn {turn_index} is missing its belief state")
                try:
                    belief = BeliefState.from_dict(turn["belief"])
                except InvariantError as err:
                    raise InvariantError(str(err), dialogue_id=dialogue_id,
                                         pair_index=turn_index // 2) from err
            elif "belief" in turn:
                raise SchemaError(
                    f"dialogue {dialogue_id!r}: system turn {turn_index} must not carry a belief state")
            raw_turns.append(RawTurn(speaker, normalize_text(text), belief))

        try:
            pairs = pair_turns(raw_turns)
            dialogue = Dialogue(id=dialogue_id,
                                domains=frozenset(normalize_text(d) for d in raw_domains),
                                pairs=tuple(pairs))
        except AlternationError as err:
            raise AlternationError(f"dialogue {dialogue_id!r}: {err}") from err
        except SchemaError as err:
            raise SchemaError(f"dialogue {dialogue_id!r}: {err}") from err
        except InvariantError as err:
            if err.dialogue_id is None:
                raise InvariantError(str(err), dialogue_id=dialogue_id,
                                     pair_index=err.pair_index) from err
            raise
        dialogues.append(dialogue)
    return dialogues


def dialogue_to_json(dialogue: Dialogue) -> dict:
    turns: list[dict] = []
    for pair in dialogue.pairs:
        if pair.index > 0:
            turns.append({"speaker": "system", "text": pair.system_utterance})
        turns.append({"speaker": "user", "text": pair.user_utterance,
                      "belief": pair.belief.as_dict()})
    return {"id": dialogue.id, "domains": sorted(dialogue.domains), "turns": turns}


def corpus_to_json(corpus: Corpus) -> list[dict]:
    return [dialogue_to_json(dialogue) for dialogue in corpus.dialogues]


def write_corpus(corpus: Corpus, path) -> None:
    """Write the canonical JSON form; loading and re-writing is byte-stable."""
    payload = json.dumps(corpus_to_json(corpus), indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(payload, encoding="utf-8")


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    kind: str      # "non_cumulative" | "empty_user_utterance" | "unknown_domain"
    message: str
    dialogue_id: str
    pair_index: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_dialogue(dialogue: Dialogue, strict: bool = False) -> ValidationReport:
    """Report cumulativity gaps, empty user utterances, and undeclared domains.

    Label sets should only grow across pairs; with strict=False a shrink is a
    warning (real corpora have annotation gaps), with strict=True an error.
    """
    report = ValidationReport()
    for previous, current in zip(dialogue.pairs, dialogue.pairs[1:]):
        dropped = previous.belief.labels - current.belief.labels
        if dropped:
            names = ", ".join(sorted(label.canonical for label in dropped))
            report.violations.append(Violation(
                severity="error" if strict else "warning",
                kind="non_cumulative",
                message=(f"labels {names} present at pair {previous.index} "
                         f"missing at pair {current.index}"),
                dialogue_id=dialogue.id,
                pair_index=current.index))
    for pair in dialogue.pairs:
        if not pair.user_utterance:
            report.violations.append(Violation(
                severity="error", kind="empty_user_utterance",
                message=f"empty user utterance at pair {pair.index}",
                dialogue_id=dialogue.id, pair_index=pair.index))
    for domain in sorted(dialogue.observed_domains - dialogue.domains):
        report.violations.append(Violation(
            severity="error", kind="unknown_domain",
            message=f"belief states mention domain {domain!r} not declared for the dialogue",
            dialogue_id=dialogue.id))
    return report


def sample_shots(corpus: Corpus, n: int, domain: str, seed: int,
                 exclusive: bool = False) -> Corpus:
    """Draw n dialogues touching `domain` uniformly without replacement.

    Candidates are ordered by id before the seeded draw, so the result
    depends only on (corpus contents, n, domain, seed). With exclusive=True
    only dialogues whose belief states never leave the target domain are
    eligible.
    """
    if n < 1:
        raise ValueError(f"shot count must be >= 1, got {n}")
    eligible = [d for d in corpus.dialogues if d.touches(domain)]
    if exclusive:
        eligible = [d for d in eligible if d.observed_domains == frozenset({domain})]
    if len(eligible) < n:
        raise InsufficientDataError(
            f"need {n} dialogues in domain {domain!r}, corpus has {len(eligible)} eligible")
    eligible.sort(key=lambda d: d.id)
    rng = random.Random(seed)
    picked = rng.sample(eligible, n)
    return Corpus(tuple(picked),
                  source=f"{corpus.source}#shots(n={n},domain={domain},seed={seed})")
