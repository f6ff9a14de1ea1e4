from __future__ import annotations

import json
import pathlib
import random
from fractions import Fraction

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"

ACCEPTANCE_LINES: list[str] = []


def random_rational(rng: random.Random, bound: int = 1 << 16, nonzero: bool = True) -> Fraction:
    while True:
        num = rng.randrange(-bound + 1, bound)
        den = rng.randrange(1, bound)
        if num or not nonzero:
            return Fraction(num, den)


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture(scope="session")
def schema_validator():
    jsonschema = pytest.importorskip("jsonschema")
    from referencing import Registry, Resource

    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    registry = Registry().with_resources(resources)

    def validate(name: str, instance) -> None:
        schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
        jsonschema.Draft202012Validator(schema, registry=registry).validate(instance)

    return validate


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
