from .schema import (
    ColumnMeta,
    ForeignKey,
    SchemaError,
    TableDef,
    format_schema,
    generate_docs,
    load_example_schema,
    load_ucd_vocabulary,
    parse_schema,
    validate_schema,
)
from .store import (
    Catalog,
    CatalogObject,
    EditionView,
    LoadError,
    LoadReport,
    TableData,
    columnar_to_rows,
    pyramid_hash_keep,
)

__all__ = [
    "Catalog",
    "CatalogObject",
    "ColumnMeta",
    "EditionView",
    "ForeignKey",
    "LoadError",
    "LoadReport",
    "SchemaError",
    "TableData",
    "TableDef",
    "columnar_to_rows",
    "format_schema",
    "generate_docs",
    "load_example_schema",
    "load_ucd_vocabulary",
    "parse_schema",
    "pyramid_hash_keep",
    "validate_schema",
]
