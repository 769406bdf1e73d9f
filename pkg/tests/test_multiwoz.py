from __future__ import annotations

import json

import pytest

from convaug import SchemaError, load_corpus
from convaug.multiwoz import belief_from_metadata, convert_multiwoz


def _metadata(train_semi=None, train_book=None, hotel_semi=None):
    metadata = {
        "train": {"semi": train_semi or {}, "book": train_book or {}},
        "hotel": {"semi": hotel_semi or {}, "book": {}},
    }
    return metadata


def _fixture_data():
    return {
        "MUL0001.json": {
            "goal": {"train": {"info": {"destination": "cambridge"}}, "message": ["..."]},
            "log": [
                {"text": "I need a train to Cambridge.", "metadata": {}},
                {"text": "What day will you travel?",
                 "metadata": _metadata(train_semi={"destination": "Cambridge",
                                                   "departure": "not mentioned",
                                                   "day": ""})},
                {"text": "Monday, for 3 people.", "metadata": {}},
                {"text": "Booked! Reference ABC123.",
                 "metadata": _metadata(train_semi={"destination": "Cambridge",
                                                   "day": "Monday"},
                                       train_book={"people": "3",
                                                   "booked": [{"trainID": "TR1"}]})},
            ],
        },
        "SNG0002.json": {
            "goal": {"hotel": {"info": {"area": "north"}}},
            "log": [
                {"text": "Looking for a hotel in the north, with free parking.", "metadata": {}},
                {"text": "Sure, any price range?",
                 "metadata": _metadata(hotel_semi={"area": "north", "parking": "yes"})},
                {"text": "Cheap please, book it for Book Day Tuesday.", "metadata": {}},
                # trailing user turn keeps the previous belief
            ],
        },
    }


def test_convert_pairs_and_beliefs():
    dialogues = convert_multiwoz(_fixture_data())
    assert [d.id for d in dialogues] == ["MUL0001.json", "SNG0002.json"]
    train = dialogues[0]
    assert len(train.pairs) == 2
    assert train.pairs[0].system_utterance == ""
    assert train.pairs[0].user_utterance == "i need a train to cambridge."
    assert train.pairs[0].belief.as_dict() == {"train-destination": "cambridge"}
    assert train.pairs[1].system_utterance == "what day will you travel?"
    assert train.pairs[1].belief.as_dict() == {
        "train-book_people": "3",
        "train-day": "monday",
        "train-destination": "cambridge",
    }
    assert "train" in train.domains


def test_unset_values_dropped():
    belief = belief_from_metadata(_metadata(train_semi={
        "destination": "Cambridge", "departure": "not mentioned", "day": "", "people": "none"}))
    assert belief.as_dict() == {"train-destination": "cambridge"}


def test_trailing_user_turn_keeps_previous_belief():
    dialogues = convert_multiwoz(_fixture_data())
    hotel = dialogues[1]
    assert len(hotel.pairs) == 2
    assert hotel.pairs[1].belief == hotel.pairs[0].belief
    assert hotel.pairs[0].belief.as_dict() == {"hotel-area": "north", "hotel-parking": "yes"}


def test_book_slots_and_list_values():
    belief = belief_from_metadata({
        "restaurant": {"semi": {"food": ["italian", "modern european"]},
                       "book": {"day": "Tuesday", "time": "17:15", "booked": []}}})
    assert belief.as_dict() == {
        "restaurant-book_day": "tuesday",
        "restaurant-book_time": "17:15",
        "restaurant-food": "italian",
    }


def test_load_corpus_auto_detects_multiwoz(tmp_path):
    path = tmp_path / "data.json"
    path.write_text(json.dumps(_fixture_data()))
    corpus = load_corpus(path)
    assert len(corpus) == 2
    assert corpus.dialogues[0].id == "MUL0001.json"


def test_bad_log_is_schema_error():
    with pytest.raises(SchemaError):
        convert_multiwoz({"X.json": {"log": []}})
    with pytest.raises(SchemaError):
        convert_multiwoz({"X.json": {"log": [{"metadata": {}}]}})
