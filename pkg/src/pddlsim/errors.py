"""Exception hierarchy shared by the parser, engine and adapters."""

from __future__ import annotations


class PddlError(Exception):
    """Base class for every domain-level failure raised by pddlsim."""


class PddlSyntaxError(PddlError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f"line {line}, column {column}" if line else "end of input"
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"{message} at {where}{detail}")


class UnsupportedFeature(PddlError):
    def __init__(self, construct: str):
        self.construct = construct
        super().__init__(f"unsupported PDDL feature: {construct}")


class UnknownType(PddlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown type: {name}")


class UnknownPredicate(PddlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared predicate: {name}")


class ArityMismatch(PddlError):
    def __init__(self, predicate: str, expected: int, got: int):
        self.predicate = predicate
        self.expected = expected
        self.got = got
        super().__init__(f"predicate {predicate} expects {expected} argument(s), got {got}")


class MalformedDefinition(PddlError):
    """Structurally valid s-expressions that violate a domain/problem invariant."""


class UndeclaredObject(PddlError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared object: {name}")


class DomainMismatch(PddlError):
    def __init__(self, expected: str, got: str):
        self.expected = expected
        self.got = got
        super().__init__(f"problem is for domain {got!r}, but domain {expected!r} was given")


class IncompatiblePair(DomainMismatch):
    pass


class NonGroundGoal(PddlError):
    def __init__(self, literal: str):
        self.literal = literal
        super().__init__(f"goal literal is not ground: {literal}")


class UnknownSession(PddlError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"unknown session: {session_id}")


class UnknownAction(PddlError):
    def __init__(self, signature: str):
        self.signature = signature
        super().__init__(f"unknown action: {signature}")
