"""Mutation taxonomy for the analyzed (pandas-style) code.

The taxonomy is declarative data, loaded from a JSON config file and
never hard-coded into the analyzer.  Call patterns match the terminal
name of the called function, so `pd.read_csv`, `pandas.read_csv` and a
bare `read_csv` all match the pattern "read_csv".

mutating_methods values:
  inplace      - always mutates the receiver (list.sort, df.insert)
  returns_new  - pure, result is a new object (df.head, df.copy)
  inplace_arg  - returns new unless called with inplace=True (df.dropna)
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

INPLACE = "inplace"
RETURNS_NEW = "returns_new"
INPLACE_ARG = "inplace_arg"

_SEMANTICS = {INPLACE, RETURNS_NEW, INPLACE_ARG}


@dataclass(frozen=True)
class MutationTaxonomy:
    version: str
    loader_calls: frozenset[str]
    mutating_methods: dict[str, str]
    plotting_map: dict[str, str]  # call pattern -> chart type label
    implicit_all_columns_calls: frozenset[str]

    @property
    def plotting_calls(self) -> frozenset[str]:
        return frozenset(self.plotting_map)

    def method_semantics(self, name: str) -> str | None:
        return self.mutating_methods.get(name)

    def chart_type_for(self, call_name: str) -> str | None:
        return self.plotting_map.get(call_name)


def load_taxonomy(path: str | Path) -> MutationTaxonomy:
    with open(path, encoding="utf-8") as fh:
        return _from_payload(json.load(fh), str(path))


def default_taxonomy() -> MutationTaxonomy:
    payload = json.loads(resources.files("nbreuse.data").joinpath("taxonomy.json").read_text("utf-8"))
    return _from_payload(payload, "<packaged>")


def _from_payload(payload: dict, origin: str) -> MutationTaxonomy:
    for key in ("loader_calls", "mutating_methods", "plotting_calls", "implicit_all_columns_calls"):
        if not payload.get(key):
            raise ValueError(f"taxonomy {origin}: {key} missing or empty")
    methods = dict(payload["mutating_methods"])
    bad = {v for v in methods.values()} - _SEMANTICS
    if bad:
        raise ValueError(f"taxonomy {origin}: unknown mutation semantics {sorted(bad)}")
    return MutationTaxonomy(
        version=str(payload.get("version", "0")),
        loader_calls=frozenset(payload["loader_calls"]),
        mutating_methods=methods,
        plotting_map=dict(payload["plotting_calls"]),
        implicit_all_columns_calls=frozenset(payload["implicit_all_columns_calls"]),
    )
