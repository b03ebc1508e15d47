#!/usr/bin/env python3
"""Regenerate the slice-fixture notebooks and their expected slices.

The expected statement sets below are hand-derived.  Before anything is
written, every expected slice is checked against an execution oracle:
the full statement sequence and the expected slice are each executed in
a fresh namespace (with the fixture dataset on disk) and the state of
the target's data variables must match.  For non-conservative fixtures
the oracle additionally confirms minimality: dropping any non-target
statement either breaks execution or changes the observed state.

Usage: python tests/fixtures/gen_fixtures.py
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

HERE = Path(__file__).parent
NB_DIR = HERE / "notebooks"
DATASET = """Date,AveragePrice,TotalVolume,type,year,region
2015-01-04,1.22,40873.28,conventional,2015,Albany
2015-01-04,1.79,1373.95,organic,2015,Albany
2015-02-01,1.00,64236.62,conventional,2015,Boston
2015-02-01,1.83,1036.74,organic,2015,Boston
2016-01-03,0.98,80034.32,conventional,2016,Albany
2016-01-03,1.66,1811.95,organic,2016,Albany
2016-02-07,1.05,91037.86,conventional,2016,Chicago
2016-02-07,1.71,1505.12,organic,2016,Chicago
2017-01-01,1.47,54876.98,conventional,2017,Boston
2017-01-01,2.01,1200.13,organic,2017,Boston
2017-02-05,1.33,78992.15,conventional,2017,Chicago
2017-02-05,1.94,989.62,organic,2017,Chicago
2017-03-05,,12345.00,conventional,2017,Albany
"""

# Each fixture: cells (list of (kind, source)), targets: list of
# {target_cell, target_stmts, slice, conservative, capture} where
# capture names the variables the oracle compares.
FIXTURES: dict[str, dict] = {
    "fig4": {
        "cells": [
            ("code", 'df = open("data.csv").read().splitlines()\ndf1 = [r for r in df if "organic" in r]'),
            ("code", 'df1.sort()\ndf1 = [r.split(",") for r in df]\ndf1[0] = ["header", "fixed"]'),
            ("code", "df1[:3]"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S6"],
                "slice": ["S1", "S4", "S5", "S6"],
                "conservative": False,
                "capture": ["df1"],
            }
        ],
    },
    "straight_pandas": {
        "cells": [
            ("code", "import pandas as pd\nimport matplotlib.pyplot as plt"),
            ("code", 'df = pd.read_csv("data.csv")'),
            ("code", 'prices = df["AveragePrice"]\ntotal = prices.sum()'),
            ("code", "plt.hist(prices)"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S6"],
                "slice": ["S1", "S2", "S3", "S4", "S6"],
                "conservative": False,
                "capture": ["prices"],
            }
        ],
    },
    "version_shadow": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'sub = df[df["year"] == 2016]\nsub = df[["region", "AveragePrice"]]'),
            ("code", "sub.head()"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S4", "S5"],
                "conservative": False,
                "capture": ["sub"],
            }
        ],
    },
    "derived_columns": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'df["Revenue"] = df["AveragePrice"] * df["TotalVolume"]'),
            ("code", 'df["Margin"] = df["Revenue"] * 0.1'),
            ("code", 'df[["Revenue", "Margin"]].describe()'),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": False,
                "capture": ["df"],
            }
        ],
    },
    "helper_pure": {
        "cells": [
            ("code", "import pandas as pd"),
            ("code", 'def top_regions(frame, n=2):\n    return frame.groupby("region")["TotalVolume"].sum().nlargest(n)'),
            ("code", 'df = pd.read_csv("data.csv")'),
            ("code", "unused = 41\ntop = top_regions(df)"),
            ("code", "top"),
        ],
        "targets": [
            {
                "target_cell": "c5",
                "target_stmts": ["S6"],
                "slice": ["S1", "S2", "S3", "S5", "S6"],
                "conservative": False,
                "capture": ["top"],
            }
        ],
    },
    "helper_mutating": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'def add_flag(frame):\n    frame["flag"] = 1'),
            ("code", "add_flag(df)"),
            ("code", "df.head()"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": True,
                "capture": ["df"],
            }
        ],
    },
    "loop_compound": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'frames = []\nfor y in [2015, 2016]:\n    frames.append(df[df["year"] == y])'),
            ("code", "len(frames)"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": True,
                "capture": ["frames"],
            }
        ],
    },
    "branch_compound": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'if len(df) > 5:\n    df2 = df.head(5)\nelse:\n    df2 = df'),
            ("code", "df2"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S4"],
                "slice": ["S1", "S2", "S3", "S4"],
                "conservative": True,
                "capture": ["df2"],
            }
        ],
    },
    "alias_mutation": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'alias = df\nalias["n"] = 1'),
            ("code", "df.head()"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": False,
                "capture": ["df"],
            }
        ],
    },
    "imports_subset": {
        "cells": [
            ("code", "import pandas as pd\nimport numpy as np\nimport json"),
            ("code", 'df = pd.read_csv("data.csv")'),
            ("code", "arr = np.arange(3)"),
            ("code", 'df["z"] = np.log(df["TotalVolume"])'),
            ("code", "df.head()"),
        ],
        "targets": [
            {
                "target_cell": "c5",
                "target_stmts": ["S7"],
                "slice": ["S1", "S2", "S4", "S6", "S7"],
                "conservative": False,
                "capture": ["df"],
            }
        ],
    },
    "wildcard_import": {
        "cells": [
            ("code", "from math import *"),
            ("code", 'df = open("data.csv").read().splitlines()'),
            ("code", "n = sqrt(len(df))"),
            ("code", "print(n)"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S4"],
                "slice": ["S1", "S2", "S3", "S4"],
                "conservative": True,
                "capture": ["n"],
            }
        ],
    },
    "copy_then_modify": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'df2 = df.copy(); df2["c"] = 0'),
            ("code", "df2.head()"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": False,
                "capture": ["df2"],
            }
        ],
    },
    "plain_var_dependency": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", "n = 3\nm = 9"),
            ("code", "top = df.head(n)"),
            ("code", "top"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S6"],
                "slice": ["S1", "S2", "S3", "S5", "S6"],
                "conservative": False,
                "capture": ["top"],
            }
        ],
    },
    "plain_var_shadow": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", "n = 2\nn = 4"),
            ("code", "top = df.head(n)"),
            ("code", "top"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S6"],
                "slice": ["S1", "S2", "S4", "S5", "S6"],
                "conservative": False,
                "capture": ["top"],
            }
        ],
    },
    "multiline_chain": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'label = "x"'),
            ("code", 'result = (df.groupby("region")["AveragePrice"]\n    .mean()\n    .reset_index())'),
            ("code", "result"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S4", "S5"],
                "conservative": False,
                "capture": ["result"],
            }
        ],
    },
    "markdown_target": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'counts = df["type"].value_counts()'),
            ("markdown", "The split between organic and conventional volume."),
        ],
        "targets": [
            {
                "target_cell": "c2",
                "target_stmts": ["S3"],
                "slice": ["S1", "S2", "S3"],
                "conservative": False,
                "capture": ["counts"],
            }
        ],
    },
    "inplace_arg": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", "df.dropna(inplace=True)"),
            ("code", "clean = df.fillna(0)"),
            ("code", "clean.head()"),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S5"],
                "slice": ["S1", "S2", "S3", "S4", "S5"],
                "conservative": False,
                "capture": ["clean"],
            }
        ],
    },
    "del_subscript": {
        "cells": [
            ("code", 'import pandas as pd\ndf = pd.read_csv("data.csv")'),
            ("code", 'del df["year"]'),
            ("code", "df.head()"),
        ],
        "targets": [
            {
                "target_cell": "c3",
                "target_stmts": ["S4"],
                "slice": ["S1", "S2", "S3", "S4"],
                "conservative": False,
                "capture": ["df"],
            }
        ],
    },
    "reuse_plot": {
        "cells": [
            ("code", "import pandas as pd\nimport matplotlib.pyplot as plt"),
            ("code", 'df = pd.read_csv("data.csv")'),
            ("code", 'yearly = df.groupby("year")["AveragePrice"].mean().reset_index()'),
            ("code", 'plt.plot(yearly["year"], yearly["AveragePrice"])\nplt.title("average price by year")'),
        ],
        "targets": [
            {
                "target_cell": "c4",
                "target_stmts": ["S5", "S6"],
                "slice": ["S1", "S2", "S3", "S4", "S5", "S6"],
                "conservative": False,
                "capture": ["yearly"],
            }
        ],
    },
}


def make_notebook(cells: list[tuple[str, str]], meta: dict | None = None) -> dict:
    out = []
    for i, (kind, source) in enumerate(cells):
        cell: dict = {
            "id": f"c{i + 1}",
            "cell_type": kind,
            "metadata": {},
            "source": source.splitlines(keepends=True),
        }
        if kind == "code":
            cell["execution_count"] = None
            cell["outputs"] = []
        out.append(cell)
    return {"cells": out, "metadata": meta or {}, "nbformat": 4, "nbformat_minor": 5}


# -- execution oracle ----------------------------------------------------------


def _state_digest(value) -> str:
    try:
        import pandas as pd

        if isinstance(value, (pd.DataFrame, pd.Series)):
            return value.to_csv()
    except ImportError:
        pass
    if isinstance(value, list) and value and hasattr(value[0], "to_csv"):
        return "|".join(v.to_csv() for v in value)
    return repr(value)


def run_statements(sources: list[str], capture: list[str], workdir: str) -> dict[str, str]:
    cwd = os.getcwd()
    os.chdir(workdir)
    ns: dict = {"__name__": "__main__"}
    try:
        for src in sources:
            exec(compile(src, "<fixture>", "exec"), ns)
    finally:
        os.chdir(cwd)
    return {name: _state_digest(ns[name]) for name in capture if name in ns}


def verify_fixture(name: str, spec: dict) -> None:
    import sys

    sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))
    from nbreuse.notebook import parse_notebook, resolve_execution_order
    from nbreuse.statements import build_statement_list

    raw = json.dumps(make_notebook(spec["cells"])).encode()
    doc = parse_notebook(raw, "fixtures", doc_id=name)
    stmts = build_statement_list(doc, resolve_execution_order(doc))
    by_id = {s.stmt_id: s for s in stmts}

    for target in spec["targets"]:
        capture = target["capture"]
        full_sources = [s.source for s in stmts]
        slice_sources = [by_id[sid].source for sid in target["slice"]]
        with tempfile.TemporaryDirectory() as tmp:
            (Path(tmp) / "data.csv").write_text(DATASET)
            full_state = run_statements(full_sources, capture, tmp)
        with tempfile.TemporaryDirectory() as tmp:
            (Path(tmp) / "data.csv").write_text(DATASET)
            slice_state = run_statements(slice_sources, capture, tmp)
        if full_state != slice_state:
            raise AssertionError(f"{name}: slice state != full state\n{full_state}\nvs\n{slice_state}")

        if not target["conservative"]:
            removable = [sid for sid in target["slice"] if sid not in target["target_stmts"]]
            for drop in removable:
                reduced = [by_id[sid].source for sid in target["slice"] if sid != drop]
                try:
                    with tempfile.TemporaryDirectory() as tmp:
                        (Path(tmp) / "data.csv").write_text(DATASET)
                        state = run_statements(reduced, capture, tmp)
                except Exception:
                    continue  # dropping the statement breaks execution: required
                if state == full_state and set(full_state) == set(capture):
                    raise AssertionError(f"{name}: dropping {drop} leaves state unchanged (not minimal)")


def main() -> None:
    os.environ.setdefault("MPLBACKEND", "Agg")
    NB_DIR.mkdir(parents=True, exist_ok=True)
    expected = {}
    for name, spec in FIXTURES.items():
        print(f"verifying {name} ...")
        verify_fixture(name, spec)
        nb = make_notebook(spec["cells"])
        (NB_DIR / f"{name}.ipynb").write_text(json.dumps(nb, indent=1) + "\n")
        expected[name] = spec["targets"]
    (HERE / "expected_slices.json").write_text(json.dumps(expected, indent=2) + "\n")
    (HERE / "datasets").mkdir(exist_ok=True)
    (HERE / "datasets" / "avocado_small.csv").write_text(DATASET)
    print(f"wrote {len(FIXTURES)} fixtures")


if __name__ == "__main__":
    main()
