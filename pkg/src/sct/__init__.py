"""Supercharacter theories from character tables, with exact arithmetic."""

from sct.chartab import CharacterTable, ClassFunction, load_table, parse_ctbl
from sct.cyclotomic import Cyclotomic, E

__all__ = ["CharacterTable", "ClassFunction", "Cyclotomic", "E", "load_table", "parse_ctbl"]
