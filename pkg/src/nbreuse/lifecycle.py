"""Track data-variable lifecycles across a statement sequence.

A data variable is any name whose value comes from a loader call or,
transitively, from another data variable.  Each re-assignment starts a
new version (Generate); taxonomy-recognized in-place operations and
subscript/attribute writes record a Modify; reads by statements that do
not themselves generate or modify data record a Use.

Alongside the public per-variable records, the analysis keeps the full
binding and mutation timeline for every name (data or not), which the
slicer needs to produce self-contained, executable code.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .statements import PURE_BUILTINS, Statement, StatementFacts, extract_facts
from .taxonomy import INPLACE, INPLACE_ARG, MutationTaxonomy

GENERATE = "Generate"
MODIFY = "Modify"
USE = "Use"


@dataclass(frozen=True)
class LifecycleEvent:
    kind: str
    stmt_id: str
    version: int


@dataclass
class DataVariableRecord:
    name: str
    events: list[LifecycleEvent] = field(default_factory=list)


@dataclass
class _Binding:
    stmt_idx: int
    object_id: int
    is_data: bool
    is_import: bool = False


@dataclass
class _Live:
    object_id: int
    version: int
    is_data: bool
    binding_idx: int


class DataflowAnalysis:
    """Single forward pass over statements; immutable afterwards."""

    def __init__(self, stmts: list[Statement], taxonomy: MutationTaxonomy):
        self.stmts = stmts
        self.taxonomy = taxonomy
        self.facts: list[StatementFacts] = [extract_facts(s.source) for s in stmts]
        self.records: dict[str, DataVariableRecord] = {}
        self.binding_history: dict[str, list[_Binding]] = {}
        self.mutations: dict[int, list[int]] = {}  # object_id -> stmt indices
        self.unresolved: list[bool] = [False] * len(stmts)
        self.wildcard_imports: list[int] = []
        self.plot_stmts: list[int] = []
        self._purity_cache: dict[int, bool] = {}
        self._run()

    # -- forward pass --------------------------------------------------------

    def _run(self) -> None:
        env: dict[str, _Live] = {}
        names_of: dict[int, set[str]] = {}  # object_id -> alias names
        versions: dict[str, int] = {}
        next_obj = iter(range(1, 10**9)).__next__

        for i, (stmt, facts) in enumerate(zip(self.stmts, self.facts)):
            if facts.dynamic:
                self.unresolved[i] = True
            if facts.wildcard_import:
                self.wildcard_imports.append(i)

            loader_hit = False
            mutated: list[str] = list(facts.mutates)
            for call in facts.calls:
                if call.terminal in self.taxonomy.loader_calls:
                    loader_hit = True
                if call.terminal in self.taxonomy.plotting_calls:
                    if i not in self.plot_stmts:
                        self.plot_stmts.append(i)
                if call.is_method:
                    base = call.base_name
                    if base is not None and base in env:
                        sem = self.taxonomy.method_semantics(call.terminal)
                        base_is_module = self.binding_history[base][-1].is_import
                        if sem == INPLACE or (sem == INPLACE_ARG and call.inplace_true):
                            mutated.append(base)
                        elif sem == INPLACE_ARG and call.inplace_dynamic:
                            mutated.append(base)
                            self.unresolved[i] = True
                        elif sem is None and call.terminal not in self.taxonomy.plotting_calls and not base_is_module:
                            # unknown method on a variable: may mutate it
                            mutated.append(base)
                            self.unresolved[i] = True
                        # functions reached through imported modules are
                        # treated as returning new objects
                else:
                    self._apply_name_call(call, env, mutated, i)

            data_read = any(n in env and env[n].is_data for n in facts.reads)

            # definite mutations
            emitted_gm = False
            for name in dict.fromkeys(mutated):
                live = env.get(name)
                if live is None:
                    continue
                self.mutations.setdefault(live.object_id, []).append(i)
                if live.is_data or loader_hit or data_read:
                    if not live.is_data:
                        self._promote(live, names_of, env, versions, stmt, i)
                    for alias in sorted(names_of.get(live.object_id, {name})):
                        alive = env.get(alias)
                        if alive is not None and alive.object_id == live.object_id:
                            self._record(alias).events.append(LifecycleEvent(MODIFY, stmt.stmt_id, alive.version))
                    emitted_gm = True

            # bindings
            alias_src = facts.alias_of
            for name in facts.binds:
                if alias_src is not None and alias_src in env and name != alias_src:
                    src = env[alias_src]
                    obj = src.object_id
                    is_data = src.is_data
                else:
                    obj = next_obj()
                    is_data = loader_hit or data_read
                old = env.get(name)
                if old is not None and old.object_id != obj:
                    names_of.get(old.object_id, set()).discard(name)
                env[name] = _Live(obj, versions.get(name, 0), is_data, i)
                names_of.setdefault(obj, set()).add(name)
                self.binding_history.setdefault(name, []).append(
                    _Binding(i, obj, is_data, is_import=name in facts.import_names)
                )
                if is_data:
                    versions[name] = versions.get(name, 0) + 1
                    env[name].version = versions[name]
                    self._record(name).events.append(LifecycleEvent(GENERATE, stmt.stmt_id, versions[name]))
                    emitted_gm = True

            # pure-consumption reads
            if not emitted_gm:
                for name in facts.reads:
                    live = env.get(name)
                    if live is not None and live.is_data:
                        self._record(name).events.append(LifecycleEvent(USE, stmt.stmt_id, live.version))

    def _apply_name_call(self, call, env, mutated: list[str], i: int) -> None:
        name = call.terminal
        if not name or name in PURE_BUILTINS:
            return
        live = env.get(name)
        if live is not None:
            binding = self.binding_history[name][-1]
            facts = self.facts[binding.stmt_idx]
            if binding.is_import:
                return  # callable imported from a library: treated as non-mutating
            for gname in facts.deferred_writes:
                if gname in env:
                    mutated.append(gname)
                    self.unresolved[i] = True
            if self._def_is_pure(binding.stmt_idx):
                return
            # callable may mutate its arguments
            for arg in call.arg_names:
                if arg in env and env[arg].is_data:
                    mutated.append(arg)
                    self.unresolved[i] = True
        elif name in self.taxonomy.loader_calls or name in self.taxonomy.plotting_calls:
            return
        else:
            # unknown bare callable (star import, runtime injection)
            for arg in call.arg_names:
                if arg in env and env[arg].is_data:
                    mutated.append(arg)
                    self.unresolved[i] = True

    def _def_is_pure(self, def_idx: int) -> bool:
        """One-level purity check for a user-defined function.

        Pure means: no subscript/attribute writes to parameters, no
        in-place or unknown method calls on them, parameters never handed
        to another non-library callable, no global writes, no dynamic
        constructs.  Anything unclear counts as impure.
        """
        if def_idx in self._purity_cache:
            return self._purity_cache[def_idx]
        result = self._compute_purity(def_idx)
        self._purity_cache[def_idx] = result
        return result

    def _compute_purity(self, def_idx: int) -> bool:
        import ast

        stmt = self.stmts[def_idx]
        if stmt.kind != "function_def":
            return False
        try:
            node = ast.parse(stmt.source).body[0]
        except SyntaxError:
            return False
        args = node.args
        params = {a.arg for a in args.posonlyargs + args.args + args.kwonlyargs}
        if args.vararg:
            params.add(args.vararg.arg)
        if args.kwarg:
            params.add(args.kwarg.arg)
        for n in ast.walk(node):
            if isinstance(n, ast.Global):
                return False
            if isinstance(n, (ast.Subscript, ast.Attribute)) and isinstance(n.ctx, (ast.Store, ast.Del)):
                base = n
                while isinstance(base, (ast.Attribute, ast.Subscript)):
                    base = base.value
                if isinstance(base, ast.Name) and base.id in params:
                    return False
            if isinstance(n, ast.Call):
                func = n.func
                if isinstance(func, ast.Attribute):
                    base = func.value
                    while isinstance(base, (ast.Attribute, ast.Subscript)):
                        base = base.value
                    if isinstance(base, ast.Name) and base.id in params:
                        sem = self.taxonomy.method_semantics(func.attr)
                        if sem != "returns_new" and func.attr not in self.taxonomy.plotting_calls:
                            return False
                elif isinstance(func, ast.Name):
                    if func.id in PURE_BUILTINS:
                        continue
                    callee_ok = (
                        func.id in self.taxonomy.plotting_calls
                        or func.id in self.taxonomy.loader_calls
                    )
                    passes_param = any(
                        isinstance(a, ast.Name) and a.id in params
                        for arg in n.args + [kw.value for kw in n.keywords]
                        for a in ast.walk(arg)
                    )
                    if passes_param and not callee_ok:
                        return False
                else:
                    return False
        return True

    def _promote(self, live: _Live, names_of, env, versions, stmt, i) -> None:
        """Raw data flowed into an existing non-data object (e.g. append)."""
        for alias in sorted(names_of.get(live.object_id, set())):
            alive = env.get(alias)
            if alive is None or alive.object_id != live.object_id:
                continue
            alive.is_data = True
            versions[alias] = versions.get(alias, 0) + 1
            alive.version = versions[alias]
            self._record(alias).events.append(LifecycleEvent(GENERATE, stmt.stmt_id, alive.version))

    def _record(self, name: str) -> DataVariableRecord:
        if name not in self.records:
            self.records[name] = DataVariableRecord(name)
        return self.records[name]

    # -- lookups used by the slicer -------------------------------------------

    def latest_binding(self, name: str, before: int) -> _Binding | None:
        best = None
        for b in self.binding_history.get(name, []):
            if b.stmt_idx < before:
                best = b
            else:
                break
        return best

    def mutations_between(self, object_id: int, after: int, before: int) -> list[int]:
        return [m for m in self.mutations.get(object_id, []) if after < m < before]


def track_lifecycles(stmts: list[Statement], taxonomy: MutationTaxonomy) -> dict[str, DataVariableRecord]:
    """Public lifecycle view: one record per data variable."""
    return DataflowAnalysis(stmts, taxonomy).records
