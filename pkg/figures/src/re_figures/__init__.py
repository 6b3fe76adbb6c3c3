"""Figure rendering for record-election simulation outputs."""

from .validate import SchemaError, Table, load_table

__all__ = ["SchemaError", "Table", "load_table"]
__version__ = "0.1.0"
