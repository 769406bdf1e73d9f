"""Dialogue-skeleton composition: constraint-checked breadth-first tree growth
and extraction of root-to-terminal template chains.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .bank import TemplateBank, TurnPairTemplate, successors
from .corpus import SlotLabel
from .errors import NoCompleteDialogueError

EQUALITY = "equality"
SUPERSET = "superset"


@dataclass(frozen=True)
class GrowthLimits:
    """Budgets that make tree growth terminate explicitly.

    max_depth caps pairs per composed dialogue, max_nodes the total tree
    size, and reuse the times one template id may appear on a single path.
    """

    max_depth: int = 8
    max_nodes: int = 200_000
    reuse: int = 1

    def __post_init__(self) -> None:
        for name in ("max_depth", "max_nodes", "reuse"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def check_link(predecessor: TurnPairTemplate, candidate: TurnPairTemplate,
               semantics: str = EQUALITY) -> bool:
    """True when `candidate` may be appended after `predecessor`.

    Condition 1 relates the candidate's current slots to the predecessor's
    next slots; condition 2 relates the predecessor's current slots to the
    candidate's previous slots. Under "equality" both must be equal sets;
    under "superset" the candidate's current slots may be a subset of the
    predecessor's next slots and its previous slots a superset of the
    predecessor's current slots. A candidate with a null previous state
    never links (roots only start dialogues).
    """
    if predecessor.function.next_slots is None:
        raise ValueError(f"template {predecessor.id} is terminal; link query is invalid")
    candidate_prev = candidate.function.prev_slots
    if candidate_prev is None:
        return False
    if semantics == EQUALITY:
        return (candidate.function.cur_slots == predecessor.function.next_slots
                and candidate_prev == predecessor.function.cur_slots)
    if semantics == SUPERSET:
        return (candidate.function.cur_slots <= predecessor.function.next_slots
                and predecessor.function.cur_slots <= candidate_prev)
    raise ValueError(f"unknown link semantics {semantics!r}")


@dataclass(frozen=True)
class TreeNode:
    node_id: int
    template_id: str | None  # None only for the synthetic root
    parent_id: int | None    # None only for the synthetic root
    depth: int               # pairs from root; the root itself is 0


@dataclass
class TemplateTree:
    """The grown template tree; nodes[0] is the synthetic root."""

    nodes: list[TreeNode] = field(default_factory=list)
    children: list[list[int]] = field(default_factory=list)
    truncated: bool = False

    @property
    def node_count(self) -> int:
        """Template nodes only; the synthetic root does not count."""
        return len(self.nodes) - 1

    def path(self, node_id: int) -> list[str]:
        """Template ids from the first level down to `node_id`."""
        ids: list[str] = []
        node = self.nodes[node_id]
        while node.template_id is not None:
            ids.append(node.template_id)
            node = self.nodes[node.parent_id]
        ids.reverse()
        return ids


def _candidate_ids(bank: TemplateBank, template: TurnPairTemplate, semantics: str) -> list[str]:
    if semantics == EQUALITY:
        return successors(bank, template)
    return [t.id for t in bank.templates
            if t.function.prev_slots is not None and check_link(template, t, semantics)]


def grow_tree(bank: TemplateBank, limits: GrowthLimits = GrowthLimits(),
              semantics: str = EQUALITY) -> TemplateTree:
    """Grow the template tree breadth-first under link and budget constraints.

    The first level is exactly the bank's roots (templates with a null
    previous state; the next-state condition is waived for them). Every
    active node is then expanded with all templates passing check_link,
    subject to max_depth, the node budget, and the per-path reuse cap.
    Children are created in parent order then template-id order, so the
    tree is deterministic. When a budget cuts growth short the tree is
    returned with `truncated` set.
    """
    tree = TemplateTree(nodes=[TreeNode(0, None, None, 0)], children=[[]])
    count = 0
    queue: deque[int] = deque()

    def add_node(parent_id: int, tid: str) -> int:
        nonlocal count
        node = TreeNode(len(tree.nodes), tid, parent_id, tree.nodes[parent_id].depth + 1)
        tree.nodes.append(node)
        tree.children.append([])
        tree.children[parent_id].append(node.node_id)
        count += 1
        return node.node_id

    budget_hit = False
    for tid in bank.roots:
        if count >= limits.max_nodes:
            tree.truncated = True
            budget_hit = True
            break
        queue.append(add_node(0, tid))

    while queue and not budget_hit:
        node_id = queue.popleft()
        node = tree.nodes[node_id]
        template = bank.by_id[node.template_id]
        if template.function.next_slots is None:
            continue  # a complete ending; never expanded

        uses: dict[str, int] = {}
        for tid in tree.path(node_id):
            uses[tid] = uses.get(tid, 0) + 1
        legal = [tid for tid in _candidate_ids(bank, template, semantics)
                 if uses.get(tid, 0) < limits.reuse]

        if node.depth >= limits.max_depth:
            if legal:
                tree.truncated = True
            continue
        for tid in legal:
            if count >= limits.max_nodes:
                tree.truncated = True
                budget_hit = True
                break
            queue.append(add_node(node_id, tid))
    return tree


@dataclass(frozen=True)
class DialogueTemplate:
    """A root-to-terminal chain of turn-pair templates awaiting values."""

    template_ids: tuple[str, ...]
    slot_labels: frozenset[SlotLabel]
    provenance: frozenset[str]  # source dialogue ids


def extract_dialogue_templates(tree: TemplateTree, bank: TemplateBank) -> list[DialogueTemplate]:
    """One dialogue template per root-to-leaf path ending in a terminal.

    Leaves whose template still expects a continuation (dead ends, depth or
    budget cuts) are discarded. Output is ordered lexicographically over the
    template-id sequences; duplicates are impossible by tree construction.
    """
    out: list[DialogueTemplate] = []
    for node in tree.nodes[1:]:
        if tree.children[node.node_id]:
            continue
        template = bank.by_id[node.template_id]
        if template.function.next_slots is not None:
            continue
        ids = tuple(tree.path(node.node_id))
        labels = frozenset(label for tid in ids for label in bank.by_id[tid].function.cur_slots)
        sources = frozenset(bank.by_id[tid].source[0] for tid in ids)
        out.append(DialogueTemplate(template_ids=ids, slot_labels=labels, provenance=sources))
    if not out:
        raise NoCompleteDialogueError(
            "no root-to-terminal path exists; the seed templates cannot close a dialogue")
    out.sort(key=lambda dt: dt.template_ids)
    return out


def tree_to_records(tree: TemplateTree) -> list[dict]:
    """Line-delimited-friendly dump of the grown tree."""
    return [{"node_id": n.node_id, "parent_id": n.parent_id,
             "template_id": n.template_id, "depth": n.depth}
            for n in tree.nodes]
