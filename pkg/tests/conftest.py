from __future__ import annotations

from pathlib import Path
from types import SimpleNamespace

import pytest

from convaug import (
    build_bank,
    classify_slots,
    extract_dialogue_templates,
    grow_tree,
    harvest_values,
    load_corpus,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def t2_path() -> Path:
    return FIXTURES / "t2.json"


@pytest.fixture()
def t2_corpus(t2_path):
    return load_corpus(t2_path)


@pytest.fixture()
def t2(t2_corpus):
    """The whole pipeline state on the toy fixture."""
    policy = classify_slots(t2_corpus)
    value_dict = harvest_values(t2_corpus, policy)
    bank = build_bank(t2_corpus, policy)
    tree = grow_tree(bank)
    dts = extract_dialogue_templates(tree, bank)
    return SimpleNamespace(corpus=t2_corpus, policy=policy, value_dict=value_dict,
                           bank=bank, tree=tree, dts=dts)
