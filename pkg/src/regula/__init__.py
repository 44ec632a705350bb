"""regula: a rules-as-code engine.

Rule sets are written in a small textual DSL (.regula files) declaring
record types, enums and per-field derivation rules; datasets are flat JSON
documents of keyed records. The engine answers fact queries on demand,
memoizes derived values, tracks dependencies, accumulates every reachable
error, and supports what-if overrides, missing-input reports and dataset
saturation, via a library API, a CLI and an HTTP service.
"""

from .database import Database, FactKey, FactValue, KeyName, StoredRecord, fact_id
from .diagnostics import Diagnostic, DiagnosticError, SourceSpan
from .dsl import Bundle, TypedRuleset, compile_sources, compile_text
from .engine import (
    DependencySet,
    EvalOutcome,
    Session,
    get_fact,
    get_missing_dependencies,
    saturate,
)
from .jsonio import dump_database, load_dataset
from .schema import FactSort, Schema, ValueType, fact_sort, fact_type, validate_schema

__all__ = [
    "Bundle",
    "Database",
    "DependencySet",
    "Diagnostic",
    "DiagnosticError",
    "EvalOutcome",
    "FactKey",
    "FactSort",
    "FactValue",
    "KeyName",
    "Schema",
    "Session",
    "SourceSpan",
    "StoredRecord",
    "TypedRuleset",
    "ValueType",
    "compile_sources",
    "compile_text",
    "dump_database",
    "fact_id",
    "fact_sort",
    "fact_type",
    "get_fact",
    "get_missing_dependencies",
    "load_dataset",
    "saturate",
    "validate_schema",
]
