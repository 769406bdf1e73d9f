"""Exception types shared across the augmentation pipeline."""

from __future__ import annotations


class ConvaugError(Exception):
    """Base class for all convaug errors."""


class ParseError(ConvaugError):
    """Input file is unreadable or not valid JSON."""


class SchemaError(ConvaugError):
    """Input parses but does not match a supported corpus schema."""


class AlternationError(SchemaError):
    """Two consecutive turns by the same speaker (or wrong opening speaker)."""


class InvariantError(ConvaugError):
    """A data-model invariant was violated; carries the offending location."""

    def __init__(self, message: str, dialogue_id: str | None = None,
                 pair_index: int | None = None):
        self.dialogue_id = dialogue_id
        self.pair_index = pair_index
        prefix = ""
        if dialogue_id is not None:
            prefix = f"dialogue {dialogue_id!r}"
            if pair_index is not None:
                prefix += f", pair {pair_index}"
            prefix += ": "
        super().__init__(prefix + message)


class InsufficientDataError(ConvaugError):
    """Fewer eligible dialogues than the requested shot count."""


class EmptyBankError(ConvaugError):
    """No turn-pair template survived delexicalization."""


class NoCompleteDialogueError(ConvaugError):
    """No root-to-terminal path exists in the grown template tree."""


class UncoverableLabelError(ConvaugError):
    """A slot label has no dictionary values to fill templates with."""

    def __init__(self, label, message: str | None = None):
        self.label = label
        super().__init__(message or f"no dictionary values for slot {label}")


class ResidualPlaceholderError(ConvaugError):
    """A placeholder token survived realization (bank invariant breach)."""
