"""Multi-annotator label resolution and agreement measurement."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

from .corpus import Label


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationSet:
    """A complete annotation matrix: every annotator labels every item."""

    item_ids: tuple[str, ...]
    annotators: tuple[str, ...]
    labels: dict[str, dict[str, Label]]  # annotator -> item id -> label

    def __post_init__(self):
        if len(self.annotators) < 2:
            raise AnnotationError("need at least two annotators")
        if len(set(self.item_ids)) != len(self.item_ids):
            raise AnnotationError("duplicate item ids")
        for ann in self.annotators:
            missing = [i for i in self.item_ids if i not in self.labels.get(ann, {})]
            if missing:
                raise AnnotationError(
                    f"annotator {ann!r} is missing labels for {missing[:5]}"
                )

    def votes(self, item_id: str) -> dict[str, Label]:
        return {ann: self.labels[ann][item_id] for ann in self.annotators}


@dataclass(frozen=True)
class MajorityResult:
    #: item id -> Label for items with a strict majority; unresolved items
    #: are absent here and listed separately for human adjudication.
    resolved: dict[str, Label]
    unresolved: tuple[str, ...]


def majority_vote(annotation_set: AnnotationSet) -> MajorityResult:
    """Strict-majority resolution: a label must get more than half the votes.

    Items without a strict majority are never tie-broken; they come back in
    `unresolved` so a human can adjudicate.
    """
    resolved = {}
    unresolved = []
    n = len(annotation_set.annotators)
    for item_id in annotation_set.item_ids:
        counts: dict[Label, int] = {}
        for ann in annotation_set.annotators:
            lab = annotation_set.labels[ann][item_id]
            counts[lab] = counts.get(lab, 0) + 1
        winner, top = max(counts.items(), key=lambda kv: kv[1])
        if top * 2 > n:
            resolved[item_id] = winner
        else:
            unresolved.append(item_id)
    return MajorityResult(resolved=resolved, unresolved=tuple(unresolved))


def cohen_kappa(a: list[Label], b: list[Label]) -> float:
    """Chance-corrected agreement between two annotators.

    kappa = (p_o - p_e) / (1 - p_e) with p_e from the annotators' marginal
    label distributions. If p_e = 1 (both constant and identical) kappa is 1.
    """
    if len(a) != len(b):
        raise AnnotationError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise AnnotationError("cohen_kappa needs at least one item")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    p_e = 0.0
    for lab in Label:
        p_e += (sum(1 for x in a if x == lab) / n) * (sum(1 for y in b if y == lab) / n)
    if p_e >= 1.0 - 1e-12:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class AgreementReport:
    pairwise: dict[tuple[str, str], float]
    mean_kappa: float
    #: (item id, votes) for every item where any two annotators disagree.
    disagreements: tuple[tuple[str, dict[str, Label]], ...]

    def format_table(self) -> str:
        lines = [f"{a} vs {b}: {k:.5f}" for (a, b), k in self.pairwise.items()]
        lines.append(f"mean kappa: {self.mean_kappa:.5f}")
        lines.append(f"items with disagreement: {len(self.disagreements)}")
        return "\n".join(lines)


def agreement_report(annotation_set: AnnotationSet) -> AgreementReport:
    pairwise = {}
    for a, b in combinations(annotation_set.annotators, 2):
        la = [annotation_set.labels[a][i] for i in annotation_set.item_ids]
        lb = [annotation_set.labels[b][i] for i in annotation_set.item_ids]
        pairwise[(a, b)] = cohen_kappa(la, lb)
    disagreements = []
    for item_id in annotation_set.item_ids:
        votes = annotation_set.votes(item_id)
        if len(set(votes.values())) > 1:
            disagreements.append((item_id, votes))
    return AgreementReport(
        pairwise=pairwise,
        mean_kappa=sum(pairwise.values()) / len(pairwise),
        disagreements=tuple(disagreements),
    )


def load_annotations(path: str | Path) -> AnnotationSet:
    """Read an annotation CSV: columns id, annotator_1..annotator_k."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"annotation file not found: {path}")
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or reader.fieldnames[0] != "id":
            raise AnnotationError(f"{path}: first column must be 'id'")
        annotators = tuple(reader.fieldnames[1:])
        if len(annotators) < 2:
            raise AnnotationError(f"{path}: need at least two annotator columns")
        item_ids = []
        labels: dict[str, dict[str, Label]] = {ann: {} for ann in annotators}
        for lineno, row in enumerate(reader, 2):
            item_id = row["id"]
            item_ids.append(item_id)
            for ann in annotators:
                value = (row.get(ann) or "").strip()
                if not value:
                    raise AnnotationError(
                        f"{path}:{lineno}: missing label for annotator {ann!r}"
                    )
                try:
                    labels[ann][item_id] = Label.from_name(value)
                except ValueError as e:
                    raise AnnotationError(f"{path}:{lineno}: {e}") from None
    return AnnotationSet(item_ids=tuple(item_ids), annotators=annotators, labels=labels)


def save_resolutions(result: MajorityResult, path: str | Path) -> None:
    """Write resolved labels as an id,label CSV."""
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "label"])
        for item_id, lab in result.resolved.items():
            writer.writerow([item_id, lab.canonical_name])


def save_unresolved(
    result: MajorityResult, annotation_set: AnnotationSet, path: str | Path
) -> None:
    """Export unresolved items with all votes, ready for adjudication."""
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["id"] + list(annotation_set.annotators))
        for item_id in result.unresolved:
            votes = annotation_set.votes(item_id)
            writer.writerow(
                [item_id] + [votes[ann].canonical_name for ann in annotation_set.annotators]
            )


def merge_adjudications(result: MajorityResult, path: str | Path) -> MajorityResult:
    """Fold an id,label adjudication CSV back into a majority-vote result."""
    path = Path(path)
    resolved = dict(result.resolved)
    still_open = set(result.unresolved)
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or {"id", "label"} - set(reader.fieldnames):
            raise AnnotationError(f"{path}: expected columns id,label")
        for lineno, row in enumerate(reader, 2):
            item_id = row["id"]
            if item_id not in still_open:
                raise AnnotationError(
                    f"{path}:{lineno}: {item_id!r} is not an unresolved item"
                )
            resolved[item_id] = Label.from_name(row["label"])
            still_open.discard(item_id)
    return MajorityResult(
        resolved=resolved,
        unresolved=tuple(i for i in result.unresolved if i in still_open),
    )
