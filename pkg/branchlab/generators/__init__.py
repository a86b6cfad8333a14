"""Seeded instance generators for the four benchmark families."""

from .base import Family, FamilySpec
from .registry import generate, get_builder, list_families, make_spec

__all__ = ["Family", "FamilySpec", "generate", "get_builder", "list_families", "make_spec"]
