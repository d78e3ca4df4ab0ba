import json
import random

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from src import config
from src.dgcat import disjoint_union, matrix_category, point_category


@pytest.fixture
def point():
    return point_category()


@pytest.fixture
def m2():
    return matrix_category(2)


@pytest.fixture
def two_points():
    return disjoint_union(point_category(), point_category())


@pytest.fixture
def rng():
    return random.Random(20240917)


@pytest.fixture
def data_dir():
    return config.DATA_DIR


@pytest.fixture(scope="session")
def schema_validator():
    """Returns ``validate(instance, schema_file)`` resolving cross-file references."""
    schemas = {p.name: json.loads(p.read_text()) for p in config.SCHEMA_DIR.glob("*.json")}
    registry = Registry().with_resources(
        [(s["$id"], Resource.from_contents(s)) for s in schemas.values()])

    def validate(instance, name="report.schema.json"):
        Draft202012Validator(schemas[name], registry=registry).validate(instance)

    return validate
