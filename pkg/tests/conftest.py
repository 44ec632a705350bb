from __future__ import annotations

from decimal import Decimal
from pathlib import Path

import pytest

from regula import Session, compile_sources, load_dataset
from regula.database import FactKey, KeyName

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def build_bundle(*ruleset_names: str):
    return compile_sources([(str(FIXTURES / n), read_fixture(n)) for n in ruleset_names])


def build_session(ruleset_name: str, dataset_name: str) -> Session:
    bundle = build_bundle(ruleset_name)
    db = load_dataset(read_fixture(dataset_name), bundle.schema)
    return Session(bundle.ruleset, db)


def ext_key(record_type: str, name: str) -> FactKey:
    return FactKey(record_type, KeyName.external(name))


def money(text: str) -> Decimal:
    return Decimal(text)


@pytest.fixture(scope="session")
def beps_bundle():
    return build_bundle("beps.regula")


@pytest.fixture()
def beps_322_session(beps_bundle):
    db = load_dataset(read_fixture("beps_322.json"), beps_bundle.schema)
    return Session(beps_bundle.ruleset, db)


@pytest.fixture()
def beps_511_session(beps_bundle):
    db = load_dataset(read_fixture("beps_511.json"), beps_bundle.schema)
    return Session(beps_bundle.ruleset, db)


@pytest.fixture()
def income_session():
    return build_session("income.regula", "income_partial.json")
