"""Dependency slicing: turn target cells into self-contained components.

For every name a target reads, the slice pulls the latest statement
binding that name plus every statement that mutated the bound object in
between, recursing through the pulled statements' own reads.  Function
definitions contribute their bodies' free names, resolved at the call
site.  Compound statements are pulled whole and mark the slice
conservative, as do wildcard imports and calls static analysis cannot
resolve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lifecycle import DataflowAnalysis, DataVariableRecord
from .notebook import NotebookDoc, detect_visible_output
from .statements import COMPOUND, IMPORT, Statement, build_statement_list
from .taxonomy import MutationTaxonomy


@dataclass(frozen=True)
class SliceResult:
    target_stmt_ids: frozenset[str]
    slice_stmt_ids: tuple[str, ...]  # execution order
    conservative: bool


@dataclass(frozen=True)
class TargetGroup:
    target_cell: str
    merged_cells: tuple[str, ...]


@dataclass(frozen=True)
class Component:
    component_id: str
    code: str
    source_doc: str
    target_cell: str
    slice: SliceResult
    provenance_url: str | None = None
    data_vars: tuple[str, ...] = ()
    merged_cells: tuple[str, ...] = ()


def merge_output_cells(doc: NotebookDoc, order: list[str], taxonomy: MutationTaxonomy | None = None) -> list[TargetGroup]:
    """Group code cells: each visible-output cell (or cell sitting right
    before a markdown cell) becomes a target that absorbs the plain
    cells run since the previous target."""
    md_followed: set[str] = set()
    for prev, nxt in zip(doc.cells, doc.cells[1:]):
        if prev.kind == "code" and nxt.kind == "markdown":
            md_followed.add(prev.cell_id)

    groups: list[TargetGroup] = []
    pending: list[str] = []
    for cell_id in order:
        cell = doc.cell(cell_id)
        if detect_visible_output(cell, taxonomy) or cell_id in md_followed:
            groups.append(TargetGroup(cell_id, tuple(pending)))
            pending = []
        else:
            pending.append(cell_id)
    return groups


def minimal_slice(
    target: set[str],
    lifecycles: dict[str, DataVariableRecord],
    stmts: list[Statement],
    taxonomy: MutationTaxonomy,
    _analysis: DataflowAnalysis | None = None,
) -> SliceResult:
    """Smallest statement set reproducing the target's data state."""
    analysis = _analysis or DataflowAnalysis(stmts, taxonomy)
    idx_of = {s.stmt_id: i for i, s in enumerate(stmts)}
    for sid in target:
        if sid not in idx_of:
            raise KeyError(f"unknown statement id {sid!r}")
    target_idx = sorted(idx_of[sid] for sid in target)

    included: set[int] = set(target_idx)
    seen: set[tuple[int, int]] = set()
    work: list[tuple[int, int]] = [(i, i) for i in target_idx]

    def pull(idx: int, pos: int) -> None:
        included.add(idx)
        if (idx, pos) not in seen:
            seen.add((idx, pos))
            work.append((idx, pos))

    def resolve(name: str, read_pos: int) -> None:
        binding = analysis.latest_binding(name, read_pos)
        if binding is None:
            return
        pull(binding.stmt_idx, read_pos)
        for m in analysis.mutations_between(binding.object_id, binding.stmt_idx, read_pos):
            pull(m, m)

    while work:
        idx, pos = work.pop()
        facts = analysis.facts[idx]
        for name in facts.reads:
            resolve(name, idx)
        for name in facts.deferred_reads:
            resolve(name, max(pos, idx))

    # wildcard imports poison name resolution: always carried along
    conservative = False
    if target_idx:
        for w in analysis.wildcard_imports:
            if w < max(target_idx):
                included.add(w)
                conservative = True

    # imports backing any name referenced anywhere in the slice
    for idx in sorted(included):
        for name in analysis.facts[idx].all_load_names:
            binding = analysis.latest_binding(name, idx)
            if binding is not None and binding.is_import:
                included.add(binding.stmt_idx)

    for idx in included:
        if stmts[idx].kind == COMPOUND or analysis.unresolved[idx]:
            conservative = True

    ordered = tuple(stmts[i].stmt_id for i in sorted(included))
    return SliceResult(
        target_stmt_ids=frozenset(target),
        slice_stmt_ids=ordered,
        conservative=conservative,
    )


def build_component(
    group: TargetGroup,
    slice_result: SliceResult,
    doc: NotebookDoc,
    stmts: list[Statement],
    data_vars: tuple[str, ...] = (),
) -> Component:
    by_id = {s.stmt_id: s for s in stmts}
    code = "\n".join(by_id[sid].source for sid in slice_result.slice_stmt_ids)
    return Component(
        component_id=f"{doc.doc_id}--{group.target_cell}",
        code=code,
        source_doc=doc.doc_id,
        target_cell=group.target_cell,
        slice=slice_result,
        provenance_url=doc.source_url,
        data_vars=data_vars,
        merged_cells=group.merged_cells,
    )


def extract_components(
    doc: NotebookDoc,
    taxonomy: MutationTaxonomy,
    order: list[str] | None = None,
) -> list[Component]:
    """Full per-notebook pipeline: order, analyze, group, slice, build."""
    from .notebook import resolve_execution_order

    if order is None:
        order = resolve_execution_order(doc)
    stmts = build_statement_list(doc, order)
    if not stmts:
        return []
    analysis = DataflowAnalysis(stmts, taxonomy)
    groups = merge_output_cells(doc, order, taxonomy)
    components: list[Component] = []
    for group in groups:
        target_ids = {s.stmt_id for s in stmts if s.cell_id == group.target_cell}
        if not target_ids:
            continue  # empty target cell: nothing visible to reproduce
        result = minimal_slice(target_ids, analysis.records, stmts, taxonomy, _analysis=analysis)
        data_vars = _target_data_vars(analysis, stmts, target_ids)
        components.append(build_component(group, result, doc, stmts, data_vars))
    return components


def _target_data_vars(analysis: DataflowAnalysis, stmts: list[Statement], target_ids: set[str]) -> tuple[str, ...]:
    idx_of = {s.stmt_id: i for i, s in enumerate(stmts)}
    names: set[str] = set()
    for sid in target_ids:
        facts = analysis.facts[idx_of[sid]]
        for name in list(facts.reads) + list(facts.binds) + list(facts.mutates):
            if name in analysis.records:
                names.add(name)
    return tuple(sorted(names))
