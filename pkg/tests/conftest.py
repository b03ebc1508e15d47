"""Shared fixtures: offline guard, notebook builders, fixture paths."""

from __future__ import annotations

import json
import socket
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# Counts every attempt to open a network connection anywhere in the suite.
CONNECT_ATTEMPTS: list[tuple] = []


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """The whole suite must run without touching the network."""

    def blocked(*args, **kwargs):
        CONNECT_ATTEMPTS.append(args)
        raise AssertionError("network access attempted during offline test suite")

    monkeypatch.setattr(socket.socket, "connect", blocked)
    monkeypatch.setattr(socket, "create_connection", blocked)
    yield


def make_notebook_payload(cells: list[tuple[str, str]], meta: dict | None = None) -> dict:
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


def make_notebook_bytes(cells: list[tuple[str, str]], meta: dict | None = None) -> bytes:
    return json.dumps(make_notebook_payload(cells, meta)).encode("utf-8")


@pytest.fixture
def nb_bytes():
    return make_notebook_bytes


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURES
