from __future__ import annotations

import json

from convaug import load_corpus, validate_dialogue
from convaug.cli import main


def _augment_args(t2_path, tmp_path, **overrides):
    out = tmp_path / overrides.pop("out", "syn.json")
    args = {
        "--input": str(t2_path),
        "--output": str(out),
        "--domain": "train",
        "--shots": "2",
        "--ratio": "10",
        "--seed": "7",
    }
    for key, value in overrides.items():
        args["--" + key.replace("_", "-")] = str(value)
    argv = ["augment"]
    for key, value in args.items():
        argv.extend([key, value])
    return argv, out


def test_ingest_is_idempotent(t2_path, tmp_path):
    first = tmp_path / "norm1.json"
    second = tmp_path / "norm2.json"
    assert main(["ingest", "--input", str(t2_path), "--output", str(first)]) == 0
    assert main(["ingest", "--input", str(first), "--output", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.read_bytes() == t2_path.read_bytes()  # fixture is already normalized


def test_ingest_reports_domain_counts(t2_path, tmp_path, capsys):
    main(["ingest", "--input", str(t2_path), "--output", str(tmp_path / "n.json")])
    out = capsys.readouterr().out
    assert "train: 2 dialogues, 6 pairs" in out


def test_ingest_multiwoz_layout(tmp_path):
    data = {
        "SNG01.json": {
            "goal": {"train": {"info": {}}},
            "log": [
                {"text": "A train to Ely please.", "metadata": {}},
                {"text": "When?", "metadata": {
                    "train": {"semi": {"destination": "ely"}, "book": {}}}},
            ],
        }
    }
    raw = tmp_path / "data.json"
    raw.write_text(json.dumps(data))
    out = tmp_path / "norm.json"
    assert main(["ingest", "--input", str(raw), "--output", str(out)]) == 0
    corpus = load_corpus(out)
    assert corpus.dialogues[0].pairs[0].belief.as_dict() == {"train-destination": "ely"}


def test_ingest_truncated_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('[{"id": "x"')
    assert main(["ingest", "--input", str(bad), "--output", str(tmp_path / "o.json")]) == 2


def test_augment_end_to_end(t2_path, tmp_path, capsys):
    argv, out = _augment_args(t2_path, tmp_path,
                              provenance=tmp_path / "prov.json")
    assert main(argv) == 0
    printed = capsys.readouterr().out
    assert "templates: 6 built, 0 rejected (6 pairs)" in printed
    assert "tree: 14 nodes" in printed
    assert "dialogue templates: 8" in printed
    assert "dialogues: 20 emitted / 20 requested" in printed

    corpus = load_corpus(out)
    assert len(corpus) == 20
    for dialogue in corpus:
        assert validate_dialogue(dialogue, strict=True).ok

    sidecar = json.loads((tmp_path / "prov.json").read_text())
    assert sidecar["config"]["ratio"] == 10.0
    assert sidecar["config"]["seed"] == 7
    assert len(sidecar["dialogues"]) == 20
    some = next(iter(sidecar["dialogues"].values()))
    assert len(some["template_path"]) == 3
    assert set(some["assignment"]) == {"train-day", "train-destination"}


def test_augment_insufficient_shots_exits_3(t2_path, tmp_path):
    argv, _ = _augment_args(t2_path, tmp_path, shots=5)
    assert main(argv) == 3


def test_augment_space_exhausted_warns_but_succeeds(t2_path, tmp_path, capsys):
    argv, out = _augment_args(t2_path, tmp_path, ratio=50)
    assert main(argv) == 0
    captured = capsys.readouterr()
    assert "exhausted" in captured.err
    assert len(load_corpus(out)) == 30


def test_augment_include_seed(t2_path, tmp_path):
    argv, out = _augment_args(t2_path, tmp_path, out="with-seed.json")
    argv.append("--include-seed")
    assert main(argv) == 0
    corpus = load_corpus(out)
    assert len(corpus) == 22
    ids = [d.id for d in corpus]
    assert "t2-d1" in ids and "t2-d2" in ids
    assert len(set(ids)) == 22


def test_augment_deterministic_byte_identical(t2_path, tmp_path):
    argv1, out1 = _augment_args(t2_path, tmp_path, out="a.json")
    argv2, out2 = _augment_args(t2_path, tmp_path, out="b.json")
    assert main(argv1) == 0 and main(argv2) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_augment_seed_changes_output(t2_path, tmp_path):
    argv1, out1 = _augment_args(t2_path, tmp_path, out="a.json", seed=7)
    argv2, out2 = _augment_args(t2_path, tmp_path, out="b.json", seed=8)
    assert main(argv1) == 0 and main(argv2) == 0
    assert out1.read_bytes() != out2.read_bytes()


def test_augment_threads_do_not_change_output(t2_path, tmp_path):
    argv1, out1 = _augment_args(t2_path, tmp_path, out="a.json", threads=1)
    argv2, out2 = _augment_args(t2_path, tmp_path, out="b.json", threads=4)
    assert main(argv1) == 0 and main(argv2) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_augment_dump_bank_and_tree(t2_path, tmp_path):
    argv, _ = _augment_args(t2_path, tmp_path)
    bank_path = tmp_path / "bank.json"
    tree_path = tmp_path / "tree.jsonl"
    argv.extend(["--dump-bank", str(bank_path), "--dump-tree", str(tree_path)])
    assert main(argv) == 0
    bank = json.loads(bank_path.read_text())
    assert len(bank) == 6
    assert bank[0]["function"]["prev"] == "__null__"
    lines = [json.loads(line) for line in tree_path.read_text().splitlines()]
    assert len(lines) == 15  # synthetic root plus 14 template nodes
    assert lines[0] == {"node_id": 0, "parent_id": None, "template_id": None, "depth": 0}


def test_config_file_and_flag_precedence(t2_path, tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "input": str(t2_path),
        "domain": "train",
        "shots": 2,
        "ratio": 5,
        "seed": 7,
    }))
    out = tmp_path / "syn.json"
    argv = ["augment", "--config", str(config), "--output", str(out), "--ratio", "10"]
    assert main(argv) == 0
    printed = capsys.readouterr().out
    assert "20 emitted / 20 requested" in printed  # CLI --ratio 10 beat config's 5


def test_config_file_unknown_key_exits_2(t2_path, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"inptu": "x"}))
    assert main(["augment", "--config", str(config)]) == 2


def test_missing_required_options_exit_2(t2_path):
    assert main(["augment", "--input", str(t2_path)]) == 2


def test_stats_t2(t2_path, capsys):
    assert main(["stats", "--input", str(t2_path)]) == 0
    out = capsys.readouterr().out
    assert "train: 2 dialogues, 6.0 turns/dialogue, 2.0 values/slot" in out
    assert "train-day: 2 values" in out
    assert "train-destination: 2 values" in out


def test_stats_empty_corpus(tmp_path, capsys):
    empty = tmp_path / "empty.json"
    empty.write_text("[]\n")
    assert main(["stats", "--input", str(empty)]) == 0
    assert "0 dialogues" in capsys.readouterr().out


def test_stats_unreadable_exits_2(tmp_path):
    assert main(["stats", "--input", str(tmp_path / "missing.json")]) == 2


def test_validate_clean_corpus(t2_path):
    assert main(["validate", "--input", str(t2_path), "--strict"]) == 0


def test_validate_dropped_label(tmp_path):
    corpus = [{
        "id": "gap", "domains": ["train"],
        "turns": [
            {"speaker": "user", "text": "to cambridge",
             "belief": {"train-destination": "cambridge", "train-day": "monday"}},
            {"speaker": "system", "text": "ok"},
            {"speaker": "user", "text": "thanks",
             "belief": {"train-destination": "cambridge"}},
        ],
    }]
    path = tmp_path / "gap.json"
    path.write_text(json.dumps(corpus))
    assert main(["validate", "--input", str(path)]) == 0  # warning only
    report_path = tmp_path / "report.json"
    assert main(["validate", "--input", str(path), "--strict",
                 "--report", str(report_path)]) == 1
    report = json.loads(report_path.read_text())
    assert report["errors"] == 1
    assert report["dialogues"]["gap"][0]["kind"] == "non_cumulative"


def test_validate_missing_file_exits_2():
    assert main(["validate", "--input", "/nonexistent/f.json"]) == 2


def test_synthetic_output_revalidates_through_cli(t2_path, tmp_path):
    argv, out = _augment_args(t2_path, tmp_path)
    assert main(argv) == 0
    assert main(["validate", "--input", str(out), "--strict"]) == 0


def test_augment_superset_semantics(t2_path, tmp_path):
    argv, out = _augment_args(t2_path, tmp_path)
    argv.extend(["--link-semantics", "superset"])
    assert main(argv) == 0
    corpus = load_corpus(out)
    assert len(corpus) == 20
    for dialogue in corpus:
        assert validate_dialogue(dialogue, strict=True).ok


def test_augment_stage_counts_consistent_with_rejections(t2_path, tmp_path, capsys):
    import re

    # T2 plus a dialogue whose middle pair collides (same value, two labels)
    corpus = json.loads(t2_path.read_text())
    corpus.append({
        "id": "collide-mid", "domains": ["train"],
        "turns": [
            {"speaker": "user", "text": "a train to cambridge",
             "belief": {"train-destination": "cambridge"}},
            {"speaker": "system", "text": "from where ?"},
            {"speaker": "user", "text": "from cambridge to cambridge",
             "belief": {"train-destination": "cambridge", "train-departure": "cambridge"}},
            {"speaker": "system", "text": "really ?"},
            {"speaker": "user", "text": "sorry , make that to london",
             "belief": {"train-destination": "london", "train-departure": "cambridge"}},
        ],
    })
    seed_path = tmp_path / "seed.json"
    seed_path.write_text(json.dumps(corpus))
    out = tmp_path / "syn.json"
    code = main(["augment", "--input", str(seed_path), "--output", str(out),
                 "--domain", "train", "--shots", "3", "--ratio", "4",
                 "--seed", "1"])
    printed = capsys.readouterr().out
    assert code == 0
    built, rejected, total = map(int, re.search(
        r"templates: (\d+) built, (\d+) rejected \((\d+) pairs\)", printed).groups())
    assert (built, rejected, total) == (8, 1, 9)
    emitted, requested = map(int, re.search(
        r"dialogues: (\d+) emitted / (\d+) requested", printed).groups())
    assert emitted <= requested
    assert requested == 12
    assert emitted == len(load_corpus(out))


def test_augment_single_domain_flag(tmp_path):
    corpus = [
        {"id": "multi", "domains": ["train", "hotel"],
         "turns": [{"speaker": "user", "text": "a train to cambridge and a hotel in the north",
                    "belief": {"train-destination": "cambridge", "hotel-area": "north"}}]},
        {"id": "single", "domains": ["train"],
         "turns": [{"speaker": "user", "text": "a train to london",
                    "belief": {"train-destination": "london"}}]},
    ]
    path = tmp_path / "mix.json"
    path.write_text(json.dumps(corpus))
    out = tmp_path / "syn.json"
    base = ["augment", "--input", str(path), "--output", str(out),
            "--domain", "train", "--shots", "2", "--ratio", "2", "--seed", "0"]
    assert main(base) == 0  # both dialogues eligible by default
    assert main(base + ["--single-domain"]) == 3  # only one stays eligible


def test_augment_strict_gates_bad_seeds(tmp_path, capsys):
    corpus = [{
        "id": "gap", "domains": ["train"],
        "turns": [
            {"speaker": "user", "text": "to cambridge",
             "belief": {"train-destination": "cambridge", "train-day": "monday"}},
            {"speaker": "system", "text": "ok"},
            {"speaker": "user", "text": "thanks a lot",
             "belief": {"train-destination": "cambridge"}},
        ],
    }]
    path = tmp_path / "gap.json"
    path.write_text(json.dumps(corpus))
    out = tmp_path / "syn.json"
    base = ["augment", "--input", str(path), "--output", str(out),
            "--domain", "train", "--shots", "1", "--ratio", "1", "--seed", "0"]
    assert main(base) == 0  # default: warn and continue
    assert "non_cumulative" in capsys.readouterr().err
    assert main(base + ["--strict"]) == 1
