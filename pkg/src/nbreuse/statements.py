"""Flatten notebook code cells into analyzed top-level statements.

Each top-level AST statement becomes one Statement with its exact source
span.  A companion fact extractor records, per statement, which names it
reads, binds and mutates and which calls it makes, in evaluation order.
Compound statements (loops, branches, with/try) are treated as atomic
units whose facts are the union over their bodies.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from .errors import SubjectSyntaxError
from .notebook import NotebookDoc

IMPORT = "import"
ASSIGNMENT = "assignment"
AUG_ASSIGNMENT = "aug_assignment"
EXPRESSION = "expression"
COMPOUND = "compound"
FUNCTION_DEF = "function_def"
CLASS_DEF = "class_def"
OTHER = "other"

# Builtins that never mutate their arguments.
PURE_BUILTINS = frozenset(
    {
        "print", "len", "range", "enumerate", "zip", "sorted", "reversed", "sum",
        "min", "max", "abs", "round", "divmod", "pow", "type", "str", "int",
        "float", "bool", "complex", "list", "dict", "set", "tuple", "frozenset",
        "repr", "format", "isinstance", "issubclass", "hasattr", "callable",
        "id", "hash", "display", "help", "any", "all", "map", "filter", "next",
        "iter", "ord", "chr", "bin", "hex", "oct", "slice", "bytes", "input",
    }
)

# Constructs that defeat static resolution.
DYNAMIC_CALLS = frozenset({"eval", "exec", "getattr", "setattr", "delattr", "globals", "locals", "compile", "__import__", "vars"})


@dataclass(frozen=True)
class Statement:
    stmt_id: str
    cell_id: str
    index_in_cell: int
    source: str
    kind: str


@dataclass(frozen=True)
class CallSite:
    """One call expression, reduced to what the lifecycle pass needs."""

    terminal: str  # last name in the call chain: pd.read_csv -> "read_csv"
    base_name: str | None  # deepest Name under the func chain, None if a call intervenes
    is_method: bool  # func is an attribute access
    arg_names: tuple[str, ...]  # names appearing anywhere in arguments
    inplace_true: bool = False
    inplace_dynamic: bool = False


@dataclass
class StatementFacts:
    kind: str = OTHER
    reads: list[str] = field(default_factory=list)  # free reads, eval order
    binds: list[str] = field(default_factory=list)
    mutates: list[str] = field(default_factory=list)  # definite syntactic mutations
    calls: list[CallSite] = field(default_factory=list)
    alias_of: str | None = None  # set for plain `a = b`
    deferred_reads: list[str] = field(default_factory=list)  # frees of def/lambda bodies
    deferred_writes: list[str] = field(default_factory=list)  # global-declared stores in defs
    import_names: list[str] = field(default_factory=list)  # names bound by import
    wildcard_import: bool = False
    dynamic: bool = False  # eval/exec style constructs present
    plot_calls: list[str] = field(default_factory=list)  # taxonomy lookup happens later
    all_load_names: set[str] = field(default_factory=set)  # every Load incl. nested scopes


def statement_kind(node: ast.stmt) -> str:
    if isinstance(node, (ast.Import, ast.ImportFrom)):
        return IMPORT
    if isinstance(node, (ast.Assign, ast.AnnAssign)):
        return ASSIGNMENT
    if isinstance(node, ast.AugAssign):
        return AUG_ASSIGNMENT
    if isinstance(node, ast.Expr):
        return EXPRESSION
    if isinstance(node, (ast.If, ast.For, ast.AsyncFor, ast.While, ast.With, ast.AsyncWith, ast.Try, ast.Match)):
        return COMPOUND
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
        return FUNCTION_DEF
    if isinstance(node, ast.ClassDef):
        return CLASS_DEF
    return OTHER


def sanitize_magics(source: str) -> str:
    """Comment out IPython magic/shell lines so plain-Python parsing works.

    Only applied when the original source fails to parse, so string
    literals that merely look like magics are never touched.
    """
    out = []
    for line in source.splitlines():
        if line.lstrip().startswith(("%", "!", "?")):
            out.append("# " + line)
        else:
            out.append(line)
    return "\n".join(out)


def parse_cell(source: str, cell_id: str) -> ast.Module:
    try:
        return ast.parse(source)
    except SyntaxError:
        pass
    cleaned = sanitize_magics(source)
    try:
        return ast.parse(cleaned)
    except SyntaxError as exc:
        raise SubjectSyntaxError(f"cell {cell_id}: {exc.msg}", cell_id, exc.lineno) from exc


def _statement_span(lines: list[str], node: ast.stmt) -> str:
    start_line, start_col = node.lineno, node.col_offset
    decorators = getattr(node, "decorator_list", [])
    for dec in decorators:
        if (dec.lineno, dec.col_offset - 1) < (start_line, start_col):
            start_line, start_col = dec.lineno, max(dec.col_offset - 1, 0)
    end_line, end_col = node.end_lineno, node.end_col_offset
    if start_line == end_line:
        return lines[start_line - 1][start_col:end_col]
    parts = [lines[start_line - 1][start_col:]]
    parts.extend(lines[start_line:end_line - 1])
    parts.append(lines[end_line - 1][:end_col])
    return "\n".join(parts)


def build_statement_list(doc: NotebookDoc, order: list[str]) -> list[Statement]:
    """Flatten code cells (in execution order) into global statements."""
    stmts: list[Statement] = []
    n = 0
    for cell_id in order:
        cell = doc.cell(cell_id)
        source = cell.source
        try:
            tree = ast.parse(source)
        except SyntaxError:
            source = sanitize_magics(cell.source)
            try:
                tree = ast.parse(source)
            except SyntaxError as exc:
                raise SubjectSyntaxError(f"cell {cell_id}: {exc.msg}", cell_id, exc.lineno) from exc
        lines = source.splitlines()
        for k, node in enumerate(tree.body):
            n += 1
            stmts.append(
                Statement(
                    stmt_id=f"S{n}",
                    cell_id=cell_id,
                    index_in_cell=k,
                    source=_statement_span(lines, node),
                    kind=statement_kind(node),
                )
            )
    return stmts


def extract_facts(source: str) -> StatementFacts:
    """Analyze one top-level statement's source (it must parse standalone)."""
    tree = ast.parse(source)
    facts = StatementFacts()
    if not tree.body:
        return facts
    facts.kind = statement_kind(tree.body[0])
    visitor = _FactVisitor(facts)
    for node in tree.body:  # semicolon-joined sources analyzed as one unit
        visitor.visit_stmt(node)
    for node in ast.walk(tree):
        if isinstance(node, ast.Name) and isinstance(node.ctx, ast.Load):
            facts.all_load_names.add(node.id)
    return facts


def _base_name(node: ast.expr) -> str | None:
    """Deepest Name under an attribute/subscript chain; None past a call."""
    while isinstance(node, (ast.Attribute, ast.Subscript)):
        node = node.value
    if isinstance(node, ast.Name):
        return node.id
    return None


def _names_in(node: ast.AST) -> list[str]:
    return [n.id for n in ast.walk(node) if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load)]


class _FactVisitor:
    """Eval-order walk of one top-level statement.

    Tracks names bound earlier within the same statement so that, e.g.,
    a loop variable read inside its own loop body does not count as a
    free read.  Function and lambda bodies are not entered here; their
    free names are collected separately as deferred reads.
    """

    def __init__(self, facts: StatementFacts):
        self.f = facts
        self.local: set[str] = set()
        self.scope_depth = 0  # >0 inside comprehension scopes

    # -- statement dispatch ------------------------------------------------

    def visit_stmt(self, node: ast.stmt) -> None:
        if isinstance(node, (ast.Import, ast.ImportFrom)):
            self._handle_import(node)
        elif isinstance(node, ast.Assign):
            self._handle_assign(node)
        elif isinstance(node, ast.AnnAssign):
            if node.annotation is not None:
                self.visit_expr(node.annotation)
            if node.value is not None:
                self.visit_expr(node.value)
            self._bind_target(node.target)
        elif isinstance(node, ast.AugAssign):
            self.visit_expr(node.value)
            if isinstance(node.target, ast.Name):
                self._read(node.target.id)
                self._bind(node.target.id)
            else:
                self._mutate_target(node.target)
        elif isinstance(node, ast.Expr):
            self.visit_expr(node.value)
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            for dec in node.decorator_list:
                self.visit_expr(dec)
            for default in list(node.args.defaults) + [d for d in node.args.kw_defaults if d]:
                self.visit_expr(default)
            self._collect_deferred(node)
            self._bind(node.name)
        elif isinstance(node, ast.ClassDef):
            for dec in node.decorator_list:
                self.visit_expr(dec)
            for base in node.bases:
                self.visit_expr(base)
            self._collect_deferred(node)
            self._bind(node.name)
        elif isinstance(node, ast.For) or isinstance(node, ast.AsyncFor):
            self.visit_expr(node.iter)
            self._bind_target(node.target)
            for sub in node.body + node.orelse:
                self.visit_stmt(sub)
        elif isinstance(node, ast.While):
            self.visit_expr(node.test)
            for sub in node.body + node.orelse:
                self.visit_stmt(sub)
        elif isinstance(node, ast.If):
            self.visit_expr(node.test)
            for sub in node.body + node.orelse:
                self.visit_stmt(sub)
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                self.visit_expr(item.context_expr)
                if item.optional_vars is not None:
                    self._bind_target(item.optional_vars)
            for sub in node.body:
                self.visit_stmt(sub)
        elif isinstance(node, ast.Try):
            for sub in node.body:
                self.visit_stmt(sub)
            for handler in node.handlers:
                if handler.type is not None:
                    self.visit_expr(handler.type)
                if handler.name:
                    self.local.add(handler.name)  # scoped to the handler
                for sub in handler.body:
                    self.visit_stmt(sub)
            for sub in node.orelse + node.finalbody:
                self.visit_stmt(sub)
        elif isinstance(node, ast.Delete):
            for target in node.targets:
                if isinstance(target, (ast.Subscript, ast.Attribute)):
                    self._mutate_target(target)
                # `del name` removes a binding; treated as a no-op here
        elif isinstance(node, ast.Match):
            self.visit_expr(node.subject)
            for case in node.cases:
                for n in ast.walk(case.pattern):
                    if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store):
                        self._bind(n.id)
                if case.guard is not None:
                    self.visit_expr(case.guard)
                for sub in case.body:
                    self.visit_stmt(sub)
        elif isinstance(node, (ast.Return, ast.Raise, ast.Assert)):
            for child in ast.iter_child_nodes(node):
                if isinstance(child, ast.expr):
                    self.visit_expr(child)
        elif isinstance(node, (ast.Global, ast.Nonlocal, ast.Pass, ast.Break, ast.Continue)):
            pass
        else:
            for child in ast.iter_child_nodes(node):
                if isinstance(child, ast.expr):
                    self.visit_expr(child)
                elif isinstance(child, ast.stmt):
                    self.visit_stmt(child)

    # -- expressions -------------------------------------------------------

    def visit_expr(self, node: ast.expr) -> None:
        if isinstance(node, ast.Name):
            if isinstance(node.ctx, ast.Load):
                self._read(node.id)
            return
        if isinstance(node, ast.Call):
            self._handle_call(node)
            return
        if isinstance(node, ast.Lambda):
            self.f.deferred_reads.extend(n for n in _free_names(node) if n not in self.f.deferred_reads)
            return
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.GeneratorExp, ast.DictComp)):
            self.scope_depth += 1
            saved = set(self.local)
            for gen in node.generators:
                self.visit_expr(gen.iter)
                self._comp_bind(gen.target)
                for cond in gen.ifs:
                    self.visit_expr(cond)
            if isinstance(node, ast.DictComp):
                self.visit_expr(node.key)
                self.visit_expr(node.value)
            else:
                self.visit_expr(node.elt)
            self.local = saved
            self.scope_depth -= 1
            return
        if isinstance(node, ast.NamedExpr):
            self.visit_expr(node.value)
            self._bind_target(node.target)
            return
        for child in ast.iter_child_nodes(node):
            if isinstance(child, ast.expr):
                self.visit_expr(child)

    def _handle_call(self, node: ast.Call) -> None:
        func = node.func
        terminal = ""
        is_method = False
        if isinstance(func, ast.Attribute):
            terminal = func.attr
            is_method = True
            self.visit_expr(func.value)
        elif isinstance(func, ast.Name):
            terminal = func.id
            self._read(func.id)
            if terminal in DYNAMIC_CALLS:
                self.f.dynamic = True
        else:
            self.visit_expr(func)

        arg_names: list[str] = []
        inplace_true = False
        inplace_dynamic = False
        for arg in node.args:
            arg_names.extend(_names_in(arg))
            self.visit_expr(arg)
        for kw in node.keywords:
            if kw.arg == "inplace":
                if isinstance(kw.value, ast.Constant):
                    inplace_true = bool(kw.value.value)
                else:
                    inplace_dynamic = True
            arg_names.extend(_names_in(kw.value))
            self.visit_expr(kw.value)

        self.f.calls.append(
            CallSite(
                terminal=terminal,
                base_name=_base_name(func.value) if isinstance(func, ast.Attribute) else None,
                is_method=is_method,
                arg_names=tuple(dict.fromkeys(arg_names)),
                inplace_true=inplace_true,
                inplace_dynamic=inplace_dynamic,
            )
        )

    # -- helpers -------------------------------------------------------------

    def _read(self, name: str) -> None:
        if name not in self.local and name not in self.f.reads:
            self.f.reads.append(name)

    def _bind(self, name: str) -> None:
        self.local.add(name)
        if self.scope_depth == 0 and name not in self.f.binds:
            self.f.binds.append(name)

    def _comp_bind(self, target: ast.expr) -> None:
        for n in ast.walk(target):
            if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store):
                self.local.add(n.id)

    def _bind_target(self, target: ast.expr) -> None:
        if isinstance(target, ast.Name):
            self._bind(target.id)
        elif isinstance(target, (ast.Tuple, ast.List)):
            for elt in target.elts:
                self._bind_target(elt)
        elif isinstance(target, ast.Starred):
            self._bind_target(target.value)
        elif isinstance(target, (ast.Subscript, ast.Attribute)):
            self._mutate_target(target)

    def _mutate_target(self, target: ast.expr) -> None:
        if isinstance(target, (ast.Subscript, ast.Attribute)):
            if isinstance(target, ast.Subscript):
                self.visit_expr(target.slice)
            base = _base_name(target)
            if base is not None:
                self._read(base)
                if base not in self.f.mutates:
                    self.f.mutates.append(base)
            else:
                self.visit_expr(target.value)

    def _handle_assign(self, node: ast.Assign) -> None:
        self.visit_expr(node.value)
        if (
            isinstance(node.value, ast.Name)
            and len(node.targets) == 1
            and isinstance(node.targets[0], ast.Name)
        ):
            self.f.alias_of = node.value.id
        for target in node.targets:
            self._bind_target(target)

    def _handle_import(self, node: ast.stmt) -> None:
        if isinstance(node, ast.Import):
            for alias in node.names:
                name = alias.asname or alias.name.split(".")[0]
                self._bind(name)
                self.f.import_names.append(name)
        elif isinstance(node, ast.ImportFrom):
            for alias in node.names:
                if alias.name == "*":
                    self.f.wildcard_import = True
                    continue
                name = alias.asname or alias.name
                self._bind(name)
                self.f.import_names.append(name)

    def _collect_deferred(self, node: ast.stmt) -> None:
        for name in _free_names(node):
            if name not in self.f.deferred_reads:
                self.f.deferred_reads.append(name)
        for name in _global_writes(node):
            if name not in self.f.deferred_writes:
                self.f.deferred_writes.append(name)


def _free_names(node: ast.AST) -> list[str]:
    """Free (unbound) names read anywhere inside a def/lambda/class body."""
    bound: set[str] = set()
    free: list[str] = []

    def collect_bound(n: ast.AST) -> None:
        if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef)):
            bound.add(n.name)
            args = n.args
            for a in args.posonlyargs + args.args + args.kwonlyargs:
                bound.add(a.arg)
            if args.vararg:
                bound.add(args.vararg.arg)
            if args.kwarg:
                bound.add(args.kwarg.arg)
        elif isinstance(n, ast.Lambda):
            args = n.args
            for a in args.posonlyargs + args.args + args.kwonlyargs:
                bound.add(a.arg)
            if args.vararg:
                bound.add(args.vararg.arg)
            if args.kwarg:
                bound.add(args.kwarg.arg)
        elif isinstance(n, ast.ClassDef):
            bound.add(n.name)
        elif isinstance(n, ast.Name) and isinstance(n.ctx, (ast.Store, ast.Del)):
            bound.add(n.id)
        elif isinstance(n, (ast.Global, ast.Nonlocal)):
            pass
        elif isinstance(n, ast.ExceptHandler) and n.name:
            bound.add(n.name)
        elif isinstance(n, ast.alias):
            bound.add(n.asname or n.name.split(".")[0])
        for child in ast.iter_child_nodes(n):
            collect_bound(child)

    collect_bound(node)

    for n in ast.walk(node):
        if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Load):
            if n.id not in bound and n.id not in PURE_BUILTINS and n.id not in free:
                free.append(n.id)
    return free


def _global_writes(node: ast.AST) -> list[str]:
    declared: set[str] = set()
    for n in ast.walk(node):
        if isinstance(n, ast.Global):
            declared.update(n.names)
    writes = []
    for n in ast.walk(node):
        if isinstance(n, ast.Name) and isinstance(n.ctx, ast.Store) and n.id in declared:
            if n.id not in writes:
                writes.append(n.id)
    return writes
