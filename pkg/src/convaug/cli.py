"""Command-line pipeline: ingest and convert corpora, run augmentation end to
end, report statistics, and validate outputs.

Exit codes: 0 ok, 1 validation failures, 2 I/O or schema problems,
3 pipeline infeasible (too few shots, empty bank, no complete dialogue).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .bank import bank_to_json, build_bank
from .compose import (
    EQUALITY,
    SUPERSET,
    GrowthLimits,
    extract_dialogue_templates,
    grow_tree,
    tree_to_records,
)
from .corpus import (
    Corpus,
    load_corpus,
    sample_shots,
    validate_dialogue,
    write_corpus,
)
from .delex import classify_slots, harvest_values
from .errors import (
    ConvaugError,
    EmptyBankError,
    InsufficientDataError,
    InvariantError,
    NoCompleteDialogueError,
    ParseError,
    SchemaError,
)
from .realize import EXHAUSTIVE, SAMPLED, RealizationBudget, generate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PIPELINE = 3


@dataclass
class RunConfig:
    """Effective settings of one augmentation run; echoed into the sidecar."""

    input: str | None = None
    output: str | None = None
    domain: str | None = None
    shots: int | None = None
    seed: int = 0
    ratio: float = 10.0
    link_semantics: str = EQUALITY
    max_depth: int = 8
    max_nodes: int = 200_000
    reuse: int = 1
    categorical: str = ""
    tau: float = 0.5
    mode: str = EXHAUSTIVE
    cap: int = 1000
    include_seed: bool = False
    strict: bool = False
    threads: int = 1
    provenance: str | None = None
    single_domain: bool = False


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ParseError(f"cannot read config {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise ParseError(f"config {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ParseError(f"config {path} must be a flat JSON object")
    normalized = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in _CONFIG_KEYS:
            raise ParseError(f"config {path}: unknown key {key!r}")
        normalized[name] = value
    return normalized


def _merged_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            setattr(config, key, value)
    for name in _CONFIG_KEYS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if config.threads < 1:
        raise ParseError("--threads must be >= 1")
    return config


def _require(config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(config, name) is None]
    if missing:
        raise ParseError("missing required option(s): "
                         + ", ".join("--" + n.replace("_", "-") for n in missing))


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _write_json(path: str, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _merged_config(args)
    _require(config, "input", "output")
    corpus = load_corpus(config.input, schema="auto")
    write_corpus(corpus, config.output)
    counts: dict[str, list[int]] = {}
    for dialogue in corpus:
        for domain in dialogue.observed_domains:
            bucket = counts.setdefault(domain, [0, 0])
            bucket[0] += 1
            bucket[1] += len(dialogue.pairs)
    for domain in sorted(counts):
        print(f"{domain}: {counts[domain][0]} dialogues, {counts[domain][1]} pairs")
    print(f"wrote {len(corpus)} dialogues to {config.output}")
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    config = _merged_config(args)
    _require(config, "input", "output", "domain", "shots")

    corpus = load_corpus(config.input, schema="auto")
    sample = sample_shots(corpus, config.shots, config.domain, config.seed,
                          exclusive=config.single_domain)
    print(f"shots: {len(sample)} dialogues sampled "
          f"(domain={config.domain}, seed={config.seed})")

    seed_violations = 0
    for dialogue in sample:
        report = validate_dialogue(dialogue, strict=config.strict)
        for violation in report.violations:
            _warn(f"seed {dialogue.id}: {violation.kind}: {violation.message}")
        seed_violations += len(report.errors)
    if config.strict and seed_violations:
        print(f"error: {seed_violations} seed validation error(s) under --strict",
              file=sys.stderr)
        return EXIT_VALIDATION

    overrides = [item.strip() for item in config.categorical.split(",") if item.strip()]
    policy = classify_slots(sample, overrides=overrides, tau=config.tau)
    value_dict = harvest_values(sample, policy)

    bank = build_bank(sample, policy)
    total_pairs = len(bank.templates) + len(bank.rejections)
    print(f"templates: {len(bank.templates)} built, {len(bank.rejections)} rejected "
          f"({total_pairs} pairs)")
    if args.dump_bank:
        _write_json(args.dump_bank, bank_to_json(bank))

    limits = GrowthLimits(max_depth=config.max_depth, max_nodes=config.max_nodes,
                          reuse=config.reuse)
    tree = grow_tree(bank, limits, semantics=config.link_semantics)
    print(f"tree: {tree.node_count} nodes (truncated={'yes' if tree.truncated else 'no'})")
    if args.dump_tree:
        with open(args.dump_tree, "w", encoding="utf-8") as handle:
            for record in tree_to_records(tree):
                handle.write(json.dumps(record) + "\n")

    dialogue_templates = extract_dialogue_templates(tree, bank)
    print(f"dialogue templates: {len(dialogue_templates)}")

    budget = RealizationBudget(mode=config.mode, cap=config.cap,
                               ratio=config.ratio, seed=config.seed)
    result = generate(sample, bank, dialogue_templates, value_dict, budget, policy)
    print(f"dialogues: {len(result.dialogues)} emitted / {result.requested} requested")
    if result.exhausted:
        _warn(f"generation space exhausted: only {len(result.dialogues)} distinct "
              f"dialogues exist for {result.requested} requested")

    output_dialogues = list(result.dialogues)
    if config.include_seed:
        output_dialogues = list(sample.dialogues) + output_dialogues
    write_corpus(Corpus(tuple(output_dialogues), source=config.output), config.output)

    if config.provenance:
        sidecar = {
            "config": dict(sorted(asdict(config).items())),
            "dialogues": {
                d.id: {
                    "template_path": list(d.provenance.template_path),
                    "source_dialogue_ids": list(d.provenance.source_dialogue_ids),
                    "assignment": d.provenance.assignment.as_dict(),
                }
                for d in result.dialogues
            },
        }
        _write_json(config.provenance, sidecar)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    config = _merged_config(args)
    _require(config, "input")
    corpus = load_corpus(config.input, schema="auto")
    if not len(corpus):
        print("empty corpus: 0 dialogues")
        return EXIT_OK

    per_domain: dict[str, list] = {}
    values_by_label: dict = {}
    dialogues_by_label: dict = {}
    pairs_by_label: dict = {}
    for dialogue in corpus:
        seen_labels = set()
        for pair in dialogue.pairs:
            for label, value in pair.belief.entries:
                values_by_label.setdefault(label, set()).add(value.text)
                pairs_by_label[label] = pairs_by_label.get(label, 0) + 1
                seen_labels.add(label)
        for label in seen_labels:
            dialogues_by_label[label] = dialogues_by_label.get(label, 0) + 1
        for domain in dialogue.observed_domains:
            per_domain.setdefault(domain, []).append(dialogue)

    for domain in sorted(per_domain):
        dialogues = per_domain[domain]
        labels = sorted((l for l in values_by_label if l.domain == domain),
                        key=lambda l: l.canonical)
        turns = sum(2 * len(d.pairs) for d in dialogues) / len(dialogues)
        values_per_slot = (sum(len(values_by_label[l]) for l in labels) / len(labels)
                          if labels else 0.0)
        print(f"{domain}: {len(dialogues)} dialogues, {turns:.1f} turns/dialogue, "
              f"{values_per_slot:.1f} values/slot")
        for label in labels:
            print(f"  {label.canonical}: {len(values_by_label[label])} values, "
                  f"fills {dialogues_by_label[label]} dialogues / {pairs_by_label[label]} pairs")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    config = _merged_config(args)
    _require(config, "input")
    corpus = load_corpus(config.input, schema="auto")
    errors = warnings = 0
    report_payload: dict[str, list] = {}
    for dialogue in corpus:
        report = validate_dialogue(dialogue, strict=config.strict)
        for violation in report.violations:
            where = f" pair {violation.pair_index}" if violation.pair_index is not None else ""
            print(f"{dialogue.id}{where}: {violation.severity}: "
                  f"{violation.kind}: {violation.message}")
            report_payload.setdefault(dialogue.id, []).append({
                "severity": violation.severity,
                "kind": violation.kind,
                "message": violation.message,
                "pair_index": violation.pair_index,
            })
        errors += len(report.errors)
        warnings += len(report.warnings)
    print(f"summary: {errors} error(s), {warnings} warning(s) "
          f"across {len(corpus)} dialogue(s)")
    if args.report:
        _write_json(args.report, {"errors": errors, "warnings": warnings,
                                  "dialogues": report_payload})
    return EXIT_VALIDATION if errors else EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="input corpus file")
    parser.add_argument("--config", help="JSON config file (flags override it)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convaug",
        description="Few-shot augmentation of task-oriented dialogue corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="normalize a corpus file (native or MultiWOZ data.json)")
    _add_common(ingest)
    ingest.add_argument("--output", help="normalized corpus destination")
    ingest.set_defaults(func=cmd_ingest)

    augment = sub.add_parser("augment", help="run the augmentation pipeline end to end")
    _add_common(augment)
    augment.add_argument("--output", help="synthetic corpus destination")
    augment.add_argument("--domain", help="target domain token")
    augment.add_argument("--shots", type=int, help="seed dialogues to sample")
    augment.add_argument("--seed", type=int, help="random seed (sampling and realization)")
    augment.add_argument("--ratio", type=float, help="synthetic-to-seed count multiplier")
    augment.add_argument("--link-semantics", dest="link_semantics",
                         choices=[EQUALITY, SUPERSET], help="template link condition")
    augment.add_argument("--max-depth", dest="max_depth", type=int,
                         help="max pairs per composed dialogue")
    augment.add_argument("--max-nodes", dest="max_nodes", type=int,
                         help="tree node budget")
    augment.add_argument("--reuse", type=int, help="max uses of one template per path")
    augment.add_argument("--categorical", help="comma list of labels forced categorical")
    augment.add_argument("--tau", type=float, help="findability threshold for categorical slots")
    augment.add_argument("--mode", choices=[EXHAUSTIVE, SAMPLED],
                         help="assignment enumeration mode")
    augment.add_argument("--cap", type=int, help="max assignments per dialogue template (sampled)")
    augment.add_argument("--include-seed", dest="include_seed", action="store_true",
                         default=None, help="prepend the seed dialogues to the output")
    augment.add_argument("--strict", action="store_true", default=None,
                         help="strict validation of inputs")
    augment.add_argument("--threads", type=int,
                         help="worker cap (output is independent of it)")
    augment.add_argument("--provenance", help="write a provenance sidecar to this path")
    augment.add_argument("--single-domain", dest="single_domain", action="store_true",
                         default=None,
                         help="sample only dialogues that never leave the target domain")
    augment.add_argument("--dump-bank", help="debug: dump the template bank as JSON")
    augment.add_argument("--dump-tree", help="debug: dump the grown tree as JSON lines")
    augment.set_defaults(func=cmd_augment)

    stats = sub.add_parser("stats", help="per-domain corpus statistics")
    _add_common(stats)
    stats.set_defaults(func=cmd_stats)

    validate = sub.add_parser("validate", help="check corpus annotations")
    _add_common(validate)
    validate.add_argument("--strict", action="store_true", default=None,
                          help="treat cumulativity gaps as errors")
    validate.add_argument("--report", help="write a machine-readable JSON report")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError, InvariantError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except InsufficientDataError as err:
        print(f"error [sampling]: {err}", file=sys.stderr)
        return EXIT_PIPELINE
    except EmptyBankError as err:
        print(f"error [templates]: {err}", file=sys.stderr)
        return EXIT_PIPELINE
    except NoCompleteDialogueError as err:
        print(f"error [composition]: {err}", file=sys.stderr)
        return EXIT_PIPELINE
    except ConvaugError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
