"""Shared fixtures: the retail sample database, schema and wrappers."""

from __future__ import annotations

import sqlite3
from pathlib import Path

import pytest

from graphetl import SUPPRESS, Attribute, WrapperRegistry, builtin_registry

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"

CATEGORY_NAMES = {
    1: "Clothing",
    2: "Home appliances",
    101: "T-Shirts",
    102: "Pants",
    201: "Toasters",
}

PRODUCT_ROWS = [
    (1, "Tee", 101, 1, "2024-02-01"),
    (2, "Pants", 101, 2, "2024-02-01"),
    (3, "Toaster", 201, 1, "2024-02-01"),
]
SUPPLIER_ROWS = [(1, "Acme"), (2, "Bolt")]
EMPLOYEE_ROWS = [(1, "Ada"), (2, "Grace")]
ORDER_ROWS = [
    (1, "2024-01-03", 1),
    (2, "2024-01-04", 2),
    (3, "2024-01-05", 1),
]
ORDER_DETAIL_ROWS = [
    (1, 1, 2),
    (1, 2, 1),
    (2, 3, 1),
    (3, 1, 5),
]


def build_retail_db(path: Path) -> None:
    connection = sqlite3.connect(path)
    cursor = connection.cursor()
    cursor.execute(
        "CREATE TABLE Product (ID INTEGER, Name TEXT, CategoryCode INTEGER, "
        "SupplierID INTEGER, ConversionDate TEXT)"
    )
    cursor.executemany("INSERT INTO Product VALUES (?, ?, ?, ?, ?)", PRODUCT_ROWS)
    cursor.execute('CREATE TABLE Supplier (ID INTEGER, Name TEXT)')
    cursor.executemany("INSERT INTO Supplier VALUES (?, ?)", SUPPLIER_ROWS)
    cursor.execute("CREATE TABLE Employee (ID INTEGER, Name TEXT)")
    cursor.executemany("INSERT INTO Employee VALUES (?, ?)", EMPLOYEE_ROWS)
    cursor.execute('CREATE TABLE "Order" (ID INTEGER, Date TEXT, EmployeeID INTEGER)')
    cursor.executemany('INSERT INTO "Order" VALUES (?, ?, ?)', ORDER_ROWS)
    cursor.execute(
        "CREATE TABLE OrderDetail (OrderID INTEGER, ProductID INTEGER, Amount INTEGER)"
    )
    cursor.executemany("INSERT INTO OrderDetail VALUES (?, ?, ?)", ORDER_DETAIL_ROWS)
    connection.commit()
    connection.close()


def retail_registry() -> WrapperRegistry:
    registry = builtin_registry()

    @registry.attribute_postprocessor("CodeToCategory")
    def _code_to_category(attribute: Attribute) -> Attribute:
        return Attribute(attribute.key, CATEGORY_NAMES[attribute.value])

    @registry.subgraph_preprocessor("ParseParentCategory")
    def _parse_parent_category(resource):
        resource["ParentCategory"] = int(str(resource["CategoryCode"])[0])
        return resource

    return registry


@pytest.fixture(scope="session")
def retail_db(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("retail") / "retail.sqlite"
    build_retail_db(path)
    return path


@pytest.fixture()
def registry() -> WrapperRegistry:
    return retail_registry()


@pytest.fixture(scope="session")
def retail_schema_text() -> str:
    return (DATA_DIR / "retail.d2n").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def listing_schema_text() -> str:
    return (DATA_DIR / "listing_retail_verbatim.d2n").read_text(encoding="utf-8")


def guard_registry() -> WrapperRegistry:
    """Registry with a suppression guard, used by conditional-path tests."""
    registry = retail_registry()

    @registry.subgraph_preprocessor("OnlyWithCategory")
    def _only_with_category(resource):
        if resource.get("CategoryCode") is None:
            return SUPPRESS
        return resource

    return registry
