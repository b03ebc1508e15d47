"""Notebook document model: parse, order, segment, serialize.

Documents are immutable after parse and safe to share across threads.
Only JSON notebooks with format major version 4 are accepted.
"""

from __future__ import annotations

import ast
import hashlib
import json
from dataclasses import dataclass, field

from .errors import IncompleteLog, MalformedDocument, UnknownCellInLog, UnsupportedFormatVersion

FORMAT_MAJOR = 4

CODE = "code"
MARKDOWN = "markdown"
OTHER = "other"  # raw/unknown cell types, passed through untouched


@dataclass(frozen=True)
class OutputItem:
    """Analyzed view of one recorded cell output."""

    kind: str  # stream | error | display_table | display_image | other
    mime_hint: str
    payload_digest: str


@dataclass
class Cell:
    cell_id: str
    kind: str  # code | markdown | other
    source: str
    execution_count: int | None = None
    outputs: list[OutputItem] = field(default_factory=list)
    # verbatim payloads kept so serialization reproduces the document
    raw_outputs: list[dict] = field(default_factory=list)
    raw_metadata: dict = field(default_factory=dict)
    raw_cell_type: str | None = None


@dataclass
class NotebookDoc:
    format_version: str
    cells: list[Cell]
    corpus_id: str
    data_version_tag: str | None = None
    doc_id: str = ""
    source_url: str | None = None
    nbformat_minor: int = 5
    metadata: dict = field(default_factory=dict)

    def code_cells(self) -> list[Cell]:
        return [c for c in self.cells if c.kind == CODE]

    def cell(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.cell_id == cell_id:
                return c
        raise KeyError(cell_id)


@dataclass(frozen=True)
class MarkdownChunk:
    chunk_id: str
    doc_id: str
    text: str
    preceding_cell_id: str | None = None
    data_version_tag: str | None = None


def _join_source(src) -> str:
    if isinstance(src, list):
        return "".join(src)
    return src or ""


def _digest_payload(output: dict) -> str:
    canon = json.dumps(output, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(canon).hexdigest()


def _classify_output(output: dict) -> tuple[str, str]:
    otype = output.get("output_type", "")
    if otype == "stream":
        return "stream", "text/plain"
    if otype == "error":
        return "error", "application/vnd.jupyter.error"
    data = output.get("data", {}) if isinstance(output.get("data"), dict) else {}
    for mime in data:
        if mime.startswith("image/"):
            return "display_image", mime
    if "text/html" in data:
        body = _join_source(data["text/html"])
        if "<table" in body:
            return "display_table", "text/html"
        return "other", "text/html"
    if data:
        mime = sorted(data)[0]
        return "other", mime
    return "other", ""


def parse_notebook(data: bytes, corpus_id: str, doc_id: str = "") -> NotebookDoc:
    """Parse raw notebook bytes into a NotebookDoc.

    Cell order and source text are preserved exactly; outputs are digested
    and also retained verbatim so the document round-trips.
    """
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocument(f"not a JSON notebook: {exc}") from exc
    if not isinstance(payload, dict) or "cells" not in payload:
        raise MalformedDocument("missing 'cells' array")
    major = payload.get("nbformat")
    if major != FORMAT_MAJOR:
        raise UnsupportedFormatVersion(f"nbformat {major!r} unsupported; need {FORMAT_MAJOR}")
    cells_json = payload["cells"]
    if not isinstance(cells_json, list):
        raise MalformedDocument("'cells' is not a list")

    cells: list[Cell] = []
    seen_ids: set[str] = set()
    for pos, cj in enumerate(cells_json):
        if not isinstance(cj, dict):
            raise MalformedDocument(f"cell {pos} is not an object")
        ctype = cj.get("cell_type", "")
        kind = {CODE: CODE, MARKDOWN: MARKDOWN}.get(ctype, OTHER)
        cell_id = str(cj.get("id") or f"c{pos + 1}")
        if cell_id in seen_ids:
            cell_id = f"{cell_id}-{pos + 1}"
        seen_ids.add(cell_id)
        raw_outputs = cj.get("outputs", []) if kind == CODE else []
        outputs = [OutputItem(*_classify_output(o), payload_digest=_digest_payload(o)) for o in raw_outputs]
        cells.append(
            Cell(
                cell_id=cell_id,
                kind=kind,
                source=_join_source(cj.get("source", "")),
                execution_count=cj.get("execution_count") if kind == CODE else None,
                outputs=outputs,
                raw_outputs=raw_outputs,
                raw_metadata=cj.get("metadata", {}),
                raw_cell_type=ctype,
            )
        )

    meta = payload.get("metadata", {})
    return NotebookDoc(
        format_version=f"{major}.{payload.get('nbformat_minor', 0)}",
        cells=cells,
        corpus_id=corpus_id,
        data_version_tag=meta.get("data_version_tag"),
        doc_id=doc_id or meta.get("doc_id", ""),
        source_url=meta.get("source_url"),
        nbformat_minor=payload.get("nbformat_minor", 0),
        metadata=meta,
    )


def serialize_notebook(doc: NotebookDoc) -> bytes:
    """Serialize a NotebookDoc back to notebook JSON (UTF-8, LF endings)."""
    cells_json = []
    for cell in doc.cells:
        cj: dict = {
            "id": cell.cell_id,
            "cell_type": cell.raw_cell_type or cell.kind,
            "metadata": cell.raw_metadata,
            "source": _split_source(cell.source),
        }
        if cell.kind == CODE:
            cj["execution_count"] = cell.execution_count
            cj["outputs"] = cell.raw_outputs
        cells_json.append(cj)
    payload = {
        "cells": cells_json,
        "metadata": doc.metadata,
        "nbformat": FORMAT_MAJOR,
        "nbformat_minor": doc.nbformat_minor,
    }
    text = json.dumps(payload, indent=1, ensure_ascii=False, sort_keys=False)
    return (text + "\n").encode("utf-8")


def _split_source(source: str) -> list[str]:
    if not source:
        return []
    lines = source.splitlines(keepends=True)
    return lines


def docs_equal(a: NotebookDoc, b: NotebookDoc) -> bool:
    """Structural equality, ignoring JSON layout differences."""
    return serialize_notebook(a) == serialize_notebook(b)


def resolve_execution_order(doc: NotebookDoc, log: list[str] | None = None) -> list[str]:
    """Resolve the order code cells were executed in.

    Without a log the document order of code cells is used.  A log must
    name every executed code cell (one with an execution_count) and may
    only name code cells that exist.
    """
    code_ids = [c.cell_id for c in doc.code_cells()]
    if log is None:
        return code_ids
    known = set(code_ids)
    for cid in log:
        if cid not in known:
            raise UnknownCellInLog(f"log references unknown code cell {cid!r}")
    logged = set(log)
    for cell in doc.code_cells():
        if cell.execution_count is not None and cell.cell_id not in logged:
            raise IncompleteLog(f"executed cell {cell.cell_id!r} missing from log")
    return list(log)


def detect_visible_output(cell: Cell, taxonomy=None) -> bool:
    """True when a code cell renders something a reader would see.

    Three static signals, any of which suffices: recorded non-error
    outputs, a trailing bare expression, or a plotting call from the
    mutation taxonomy.
    """
    if cell.kind != CODE:
        raise ValueError("visible-output detection applies to code cells only")
    if any(o.kind != "error" for o in cell.outputs):
        return True
    try:
        tree = ast.parse(cell.source)
    except SyntaxError:
        return False
    if tree.body and isinstance(tree.body[-1], ast.Expr):
        return True
    if taxonomy is None:
        from .taxonomy import default_taxonomy

        taxonomy = default_taxonomy()
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and _call_name(node) in taxonomy.plotting_calls:
            return True
    return False


def _call_name(node: ast.Call) -> str:
    func = node.func
    if isinstance(func, ast.Attribute):
        return func.attr
    if isinstance(func, ast.Name):
        return func.id
    return ""


def segment_markdown(doc: NotebookDoc, max_chunk_chars: int) -> list[MarkdownChunk]:
    """Split markdown cells into retrieval chunks.

    Headings open a new chunk; within a heading section lines are packed
    greedily up to max_chunk_chars.  A single line longer than the cap
    becomes its own chunk, so concatenating chunks reproduces the text.
    """
    if max_chunk_chars < 200:
        raise ValueError("max_chunk_chars must be >= 200")
    chunks: list[MarkdownChunk] = []
    preceding_code: str | None = None
    n = 0
    for cell in doc.cells:
        if cell.kind == CODE:
            preceding_code = cell.cell_id
            continue
        if cell.kind != MARKDOWN or not cell.source:
            continue
        for text in _segment_text(cell.source, max_chunk_chars):
            n += 1
            chunks.append(
                MarkdownChunk(
                    chunk_id=f"{doc.doc_id or doc.corpus_id}-md{n:04d}",
                    doc_id=doc.doc_id,
                    text=text,
                    preceding_cell_id=preceding_code,
                    data_version_tag=doc.data_version_tag,
                )
            )
    return chunks


def _segment_text(text: str, cap: int) -> list[str]:
    lines = text.splitlines(keepends=True)
    segments: list[list[str]] = [[]]
    for line in lines:
        if line.lstrip().startswith("#") and segments[-1]:
            segments.append([])
        segments[-1].append(line)
    out: list[str] = []
    for seg in segments:
        if not seg:
            continue
        buf = ""
        for line in seg:
            if buf and len(buf) + len(line) > cap:
                out.append(buf)
                buf = ""
            if len(line) > cap:
                out.append(line)
                continue
            buf += line
        if buf:
            out.append(buf)
    return out
