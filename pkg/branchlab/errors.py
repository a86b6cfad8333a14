"""Exception hierarchy.

Every failure the library raises on purpose derives from ``BranchlabError`` so the CLI can turn
it into a one-line ``ERROR:`` exit without swallowing programming errors.
"""

from __future__ import annotations


class BranchlabError(Exception):
    pass


# milp-core / instance-gen


class MalformedInstance(BranchlabError):
    pass


class BoxTooLarge(BranchlabError):
    def __init__(self, box: int, limit: int) -> None:
        super().__init__(f"integer box has {box} assignments, limit is {limit}")
        self.box = box
        self.limit = limit


class BadParams(BranchlabError):
    pass


class InstanceIOError(BranchlabError):
    pass


class SchemaError(BranchlabError):
    def __init__(self, msg: str, *, field: str | None = None, line: int | None = None) -> None:
        super().__init__(msg)
        self.msg = msg
        self.field = field
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field is not None:
            where.append(f"field '{self.field}'")
        return f"{self.msg} ({', '.join(where)})" if where else self.msg


# bnb-engine


class SolveAborted(BranchlabError):
    pass


class UnboundedRelaxation(SolveAborted):
    pass


class EmptyTrace(BranchlabError):
    pass


# branching / gnn / training


class EmptyCandidates(BranchlabError):
    pass


class UnknownStrategy(BranchlabError):
    pass


class EmptyMask(BranchlabError):
    pass


class ShapeMismatch(BranchlabError):
    pass


class ActionNotMasked(BranchlabError):
    pass


class CyclicTree(BranchlabError):
    pass


class EmptyDataset(BranchlabError):
    pass


class NumericalDivergence(BranchlabError):
    pass


class NoQualifyingStates(BranchlabError):
    pass


# cli


class MissingArtifact(BranchlabError):
    def __init__(self, path: str, what: str = "artifact") -> None:
        super().__init__(f"missing {what}: {path}")
        self.path = str(path)
        self.what = what


class ConfigError(BranchlabError):
    def __init__(self, field: str, msg: str) -> None:
        super().__init__(f"config field '{field}': {msg}")
        self.field = field
