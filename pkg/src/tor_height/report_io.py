from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List

import yaml
from jsonschema import Draft202012Validator

from tor_height.exceptions import InvalidArgumentError

SCHEMA_NAME = "run_report.v1.json"


@lru_cache(maxsize=1)
def load_report_schema() -> Dict[str, Any]:
    text = resources.files("tor_height").joinpath("schemas", SCHEMA_NAME).read_text()
    return json.loads(text)


def report_issues(payload: Dict[str, Any]) -> List[str]:
    """Schema violations of a run report, one message per problem."""
    validator = Draft202012Validator(load_report_schema())
    issues: List[str] = []
    for error in sorted(validator.iter_errors(payload), key=lambda e: list(e.path)):
        location = ".".join(str(part) for part in error.path) or "<root>"
        issues.append(f"{location}: {error.message}")
    return issues


def validate_report(payload: Dict[str, Any]) -> Dict[str, Any]:
    issues = report_issues(payload)
    if issues:
        raise InvalidArgumentError(f"run report does not match {SCHEMA_NAME}: {'; '.join(issues)}")
    return payload


def write_report(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix in (".yml", ".yaml"):
        path.write_text(yaml.safe_dump(payload, sort_keys=False))
    else:
        path.write_text(json.dumps(payload, indent=2))
    return path


def load_report(path: Path) -> Dict[str, Any]:
    text = path.read_text()
    data = yaml.safe_load(text) if path.suffix in (".yml", ".yaml") else json.loads(text)
    if not data:
        return {}
    return validate_report(data)
