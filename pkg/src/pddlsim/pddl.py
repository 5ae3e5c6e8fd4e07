"""PDDL abstract syntax and parser for the STRIPS + typing fragment.

Supported requirements are ``:strips``, ``:typing``, ``:equality`` and
``:negative-preconditions``. Anything outside that fragment is rejected
with :class:`~pddlsim.errors.UnsupportedFeature` naming the construct.

Ground atoms and action signatures are plain tuples ``(name, *args)`` so
they hash, sort and compare without ceremony.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from . import sexpr
from .errors import (
    ArityMismatch,
    DomainMismatch,
    MalformedDefinition,
    NonGroundGoal,
    PddlSyntaxError,
    UndeclaredObject,
    UnknownPredicate,
    UnknownType,
    UnsupportedFeature,
)
from .sexpr import SList, Token

Atom = tuple  # (predicate, *constants)
Signature = tuple  # (action name, *constants)

SUPPORTED_REQUIREMENTS = frozenset({":strips", ":typing", ":equality", ":negative-preconditions"})
ROOT_TYPE = "object"
EQUALITY = "="

_UNSUPPORTED_SECTIONS = {
    ":functions": "functions",
    ":derived": "derived-predicates",
    ":durative-action": "durative-action",
    ":constraints": "constraints",
    ":metric": "metric",
    ":process": "process",
    ":event": "event",
}
_UNSUPPORTED_CONNECTIVES = {
    "or", "imply", "exists", "forall", "when", "preference",
    "increase", "decrease", "assign", "scale-up", "scale-down",
    "at", "over", "always", "sometime",
}
_NUMERIC_COMPARATORS = {"<", ">", "<=", ">="}


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeName:
    name: str
    parent: str | None = ROOT_TYPE


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[tuple[str, str], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True, order=True)
class Literal:
    predicate: str
    args: tuple[str, ...] = ()
    positive: bool = True

    @property
    def atom(self) -> Atom:
        return (self.predicate, *self.args)

    def __str__(self) -> str:
        text = format_atom(self.atom)
        return text if self.positive else f"(not {text})"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    precondition: tuple[Literal, ...]
    add_effects: tuple[Literal, ...]
    delete_effects: tuple[Literal, ...]


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: frozenset[str]
    types: tuple[TypeName, ...]
    predicates: tuple[PredicateDecl, ...]
    actions: tuple[ActionSchema, ...]
    constants: tuple[tuple[str, str], ...] = ()

    @cached_property
    def predicate_map(self) -> dict[str, PredicateDecl]:
        return {p.name: p for p in self.predicates}

    @cached_property
    def type_parents(self) -> dict[str, str | None]:
        parents: dict[str, str | None] = {ROOT_TYPE: None}
        for t in self.types:
            parents[t.name] = t.parent
        return parents

    def ancestors(self, type_name: str) -> list[str]:
        """``type_name`` followed by its ancestors up to ``object``."""
        chain = []
        t: str | None = type_name
        while t is not None:
            chain.append(t)
            t = self.type_parents.get(t)
        return chain

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]
    init: frozenset[Atom]
    goal: tuple[Literal, ...]
    requirements: frozenset[str] = field(default_factory=frozenset)


def all_objects(domain: Domain, problem: Problem) -> dict[str, str]:
    """Domain constants merged with problem objects, name -> type."""
    merged = dict(domain.constants)
    merged.update(problem.objects)
    return merged


# ---------------------------------------------------------------------------
# Formatting helpers
# ---------------------------------------------------------------------------


def format_atom(atom: Atom) -> str:
    return "(" + " ".join(atom) + ")"


format_signature = format_atom


def parse_signature(text: str) -> Signature:
    """Parse one ``(name arg ...)`` string, the wire form of an action."""
    try:
        expr = sexpr.parse_one(text)
    except PddlSyntaxError:
        raise
    if not isinstance(expr, list) or not expr or any(isinstance(e, list) for e in expr):
        raise PddlSyntaxError(f"not an action signature: {text!r}", expected="(name arg ...)")
    return tuple(str(e) for e in expr)


# ---------------------------------------------------------------------------
# Shared parsing helpers
# ---------------------------------------------------------------------------


def _where(expr) -> tuple[int, int]:
    return getattr(expr, "line", 0), getattr(expr, "column", 0)


def _expect_list(expr, what: str) -> SList:
    if not isinstance(expr, list):
        line, col = _where(expr)
        raise PddlSyntaxError(f"expected {what}, found {expr!r}", line, col, what)
    return expr


def _expect_symbol(expr, what: str) -> str:
    if isinstance(expr, list) or expr in ("(", ")"):
        line, col = _where(expr)
        raise PddlSyntaxError(f"expected {what}", line, col, what)
    return str(expr)


def _parse_typed_list(items: Iterable, *, variables: bool) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    items = list(items)
    i = 0
    while i < len(items):
        item = items[i]
        if item == "-":
            if i + 1 >= len(items):
                line, col = _where(item)
                raise PddlSyntaxError("dangling '-' in typed list", line, col, "type name")
            type_expr = items[i + 1]
            if isinstance(type_expr, list):
                head = type_expr[0] if type_expr else "()"
                raise UnsupportedFeature(str(head))
            out.extend((name, str(type_expr)) for name in pending)
            pending = []
            i += 2
            continue
        name = _expect_symbol(item, "variable" if variables else "name")
        if variables and not name.startswith("?"):
            line, col = _where(item)
            raise PddlSyntaxError(f"expected variable, found {name!r}", line, col, "?variable")
        if not variables and name.startswith("?"):
            line, col = _where(item)
            raise PddlSyntaxError(f"unexpected variable {name!r}", line, col, "name")
        pending.append(name)
        i += 1
    out.extend((name, ROOT_TYPE) for name in pending)
    return out


def _check_requirements(reqs: Iterable[str]) -> frozenset[str]:
    reqs = frozenset(str(r) for r in reqs)
    for r in sorted(reqs):
        if r not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedFeature(r)
    return reqs


def _split_define(expr, kind: str) -> tuple[str, list]:
    expr = _expect_list(expr, "(define ...)")
    if not expr or expr[0] != "define":
        line, col = _where(expr)
        raise PddlSyntaxError("document must start with define", line, col, "define")
    if len(expr) < 2:
        line, col = _where(expr)
        raise PddlSyntaxError(f"missing ({kind} <name>)", line, col, f"({kind} <name>)")
    header = _expect_list(expr[1], f"({kind} <name>)")
    if len(header) != 2 or header[0] != kind:
        line, col = _where(header)
        raise PddlSyntaxError(f"malformed {kind} header", line, col, f"({kind} <name>)")
    return _expect_symbol(header[1], f"{kind} name"), list(expr[2:])


class _LiteralContext:
    """Name resolution for literals inside one action schema or problem."""

    def __init__(self, domain_preds: dict[str, PredicateDecl], variables: set[str], constants: set[str],
                 allow_equality: bool):
        self.preds = domain_preds
        self.variables = variables
        self.constants = constants
        self.allow_equality = allow_equality

    def literal(self, expr, positive: bool = True) -> Literal:
        expr = _expect_list(expr, "literal")
        if not expr:
            line, col = _where(expr)
            raise PddlSyntaxError("empty literal", line, col, "(predicate args...)")
        head = expr[0]
        if isinstance(head, list):
            line, col = _where(head)
            raise PddlSyntaxError("literal head must be a symbol", line, col, "predicate name")
        name = str(head)
        if name == "not":
            if len(expr) != 2:
                line, col = _where(expr)
                raise PddlSyntaxError("not takes exactly one argument", line, col, "(not (literal))")
            return self.literal(expr[1], not positive)
        if (name in _UNSUPPORTED_CONNECTIVES and name not in self.preds) or name == "and":
            raise UnsupportedFeature(name)
        if name in _NUMERIC_COMPARATORS:
            raise UnsupportedFeature("numeric fluents")
        args = tuple(_expect_symbol(a, "term") for a in expr[1:])
        if name == EQUALITY:
            if not self.allow_equality:
                raise UnsupportedFeature("= outside preconditions")
            if len(args) != 2:
                raise ArityMismatch(EQUALITY, 2, len(args))
        else:
            decl = self.preds.get(name)
            if decl is None:
                raise UnknownPredicate(name)
            if decl.arity != len(args):
                raise ArityMismatch(name, decl.arity, len(args))
        for a in args:
            if a.startswith("?"):
                if a not in self.variables:
                    raise MalformedDefinition(f"unbound variable {a} in {sexpr.dump(expr)}")
            elif a not in self.constants:
                raise UndeclaredObject(a)
        return Literal(name, args, positive)

    def conjunction(self, expr) -> list[Literal]:
        expr = _expect_list(expr, "formula")
        if not expr:
            return []
        if expr[0] == "and":
            out: list[Literal] = []
            for sub in expr[1:]:
                out.extend(self.conjunction(sub))
            return out
        return [self.literal(expr)]


# ---------------------------------------------------------------------------
# Domain
# ---------------------------------------------------------------------------


def _parse_types(body: list) -> tuple[TypeName, ...]:
    declared: dict[str, str] = {}
    for name, parent in _parse_typed_list(body, variables=False):
        if name == ROOT_TYPE:
            continue
        if name in declared and declared[name] != parent:
            if parent == ROOT_TYPE:
                continue  # listed again without a parent
            if declared[name] != ROOT_TYPE:
                raise MalformedDefinition(f"type {name} declared with two parents")
        declared[name] = parent
    for name, parent in declared.items():
        if parent != ROOT_TYPE and parent not in declared:
            raise UnknownType(parent)
    # cycle check
    for name in declared:
        seen = {name}
        t = declared[name]
        while t != ROOT_TYPE:
            if t in seen:
                raise MalformedDefinition(f"cyclic type hierarchy through {t}")
            seen.add(t)
            t = declared[t]
    return tuple(TypeName(n, p) for n, p in declared.items())


def parse_domain(text: str) -> Domain:
    """Parse a PDDL domain document."""
    name, sections = _split_define(sexpr.parse_one(text), "domain")
    requirements: frozenset[str] = frozenset({":strips"})
    types: tuple[TypeName, ...] = ()
    type_names = {ROOT_TYPE}
    constants: list[tuple[str, str]] = []
    predicates: list[PredicateDecl] = []
    action_exprs: list[SList] = []

    for sec in sections:
        sec = _expect_list(sec, "domain section")
        if not sec:
            line, col = _where(sec)
            raise PddlSyntaxError("empty section", line, col, "section keyword")
        key = str(sec[0])
        body = list(sec[1:])
        if key in _UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(_UNSUPPORTED_SECTIONS[key])
        if key == ":requirements":
            requirements = _check_requirements(body)
        elif key == ":types":
            types = _parse_types(body)
            type_names = {ROOT_TYPE} | {t.name for t in types}
        elif key == ":constants":
            constants = _parse_typed_list(body, variables=False)
        elif key == ":predicates":
            for p in body:
                p = _expect_list(p, "predicate declaration")
                if not p:
                    line, col = _where(p)
                    raise PddlSyntaxError("empty predicate declaration", line, col, "predicate name")
                pname = _expect_symbol(p[0], "predicate name")
                params = _parse_typed_list(p[1:], variables=True)
                names = [v for v, _ in params]
                if len(set(names)) != len(names):
                    raise MalformedDefinition(f"duplicate parameter in predicate {pname}")
                predicates.append(PredicateDecl(pname, tuple(params)))
        elif key == ":action":
            action_exprs.append(sec)
        else:
            raise UnsupportedFeature(key.lstrip(":") or key)

    for _, t in constants:
        if t not in type_names:
            raise UnknownType(t)
    for p in predicates:
        for _, t in p.params:
            if t not in type_names:
                raise UnknownType(t)
    pred_names = [p.name for p in predicates]
    if len(set(pred_names)) != len(pred_names):
        raise MalformedDefinition("duplicate predicate declaration")
    const_names = [c for c, _ in constants]
    if len(set(const_names)) != len(const_names):
        raise MalformedDefinition("duplicate constant declaration")

    pred_map = {p.name: p for p in predicates}
    actions = [_parse_action(a, pred_map, set(const_names), type_names) for a in action_exprs]
    action_names = [a.name for a in actions]
    if len(set(action_names)) != len(action_names):
        raise MalformedDefinition("duplicate action name")

    return Domain(
        name=name,
        requirements=requirements,
        types=types,
        predicates=tuple(predicates),
        actions=tuple(actions),
        constants=tuple(constants),
    )


def _parse_action(expr: SList, preds: dict[str, PredicateDecl], constants: set[str],
                  type_names: set[str]) -> ActionSchema:
    if len(expr) < 2:
        line, col = _where(expr)
        raise PddlSyntaxError("action without a name", line, col, "action name")
    name = _expect_symbol(expr[1], "action name")
    fields: dict[str, object] = {}
    rest = list(expr[2:])
    if len(rest) % 2:
        line, col = _where(expr)
        raise PddlSyntaxError(f"action {name} has an odd number of keyword/value items", line, col,
                              ":keyword value")
    for key, value in zip(rest[::2], rest[1::2]):
        key = _expect_symbol(key, "action keyword")
        if key not in (":parameters", ":precondition", ":effect"):
            if key == ":duration":
                raise UnsupportedFeature("durative-action")
            raise UnsupportedFeature(key)
        fields[key] = value

    params = _parse_typed_list(_expect_list(fields.get(":parameters", SList()), "parameter list"),
                               variables=True)
    names = [v for v, _ in params]
    if len(set(names)) != len(names):
        raise MalformedDefinition(f"duplicate parameter in action {name}")
    for _, t in params:
        if t not in type_names:
            raise UnknownType(t)

    pre_ctx = _LiteralContext(preds, set(names), constants, allow_equality=True)
    eff_ctx = _LiteralContext(preds, set(names), constants, allow_equality=False)
    precondition = pre_ctx.conjunction(fields.get(":precondition", SList()))
    effects = eff_ctx.conjunction(fields.get(":effect", SList()))

    adds: list[Literal] = []
    dels: list[Literal] = []
    for lit in effects:
        target = adds if lit.positive else dels
        positive = Literal(lit.predicate, lit.args, True)
        if positive not in target:
            target.append(positive)
    clash = set(adds) & set(dels)
    if clash:
        raise MalformedDefinition(
            f"action {name} both adds and deletes {', '.join(sorted(str(c) for c in clash))}")
    return ActionSchema(name, tuple(params), tuple(precondition), tuple(adds), tuple(dels))


# ---------------------------------------------------------------------------
# Problem
# ---------------------------------------------------------------------------


def parse_problem(text: str, domain: Domain) -> Problem:
    """Parse a PDDL problem document against an already parsed domain."""
    name, sections = _split_define(sexpr.parse_one(text), "problem")
    domain_name: str | None = None
    requirements: frozenset[str] = frozenset()
    objects: list[tuple[str, str]] = []
    init_expr: list | None = None
    goal_expr = None

    for sec in sections:
        sec = _expect_list(sec, "problem section")
        if not sec:
            line, col = _where(sec)
            raise PddlSyntaxError("empty section", line, col, "section keyword")
        key = str(sec[0])
        body = list(sec[1:])
        if key in _UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(_UNSUPPORTED_SECTIONS[key])
        if key == ":domain":
            if len(body) != 1:
                line, col = _where(sec)
                raise PddlSyntaxError("malformed :domain", line, col, "(:domain <name>)")
            domain_name = _expect_symbol(body[0], "domain name")
        elif key == ":requirements":
            requirements = _check_requirements(body)
        elif key == ":objects":
            objects = _parse_typed_list(body, variables=False)
        elif key == ":init":
            init_expr = body
        elif key == ":goal":
            if len(body) != 1:
                line, col = _where(sec)
                raise PddlSyntaxError("malformed :goal", line, col, "(:goal <formula>)")
            goal_expr = body[0]
        else:
            raise UnsupportedFeature(key.lstrip(":") or key)

    if domain_name is None:
        raise PddlSyntaxError("problem has no (:domain ...) section", expected="(:domain <name>)")
    if domain_name != domain.name:
        raise DomainMismatch(domain.name, domain_name)

    type_names = {ROOT_TYPE} | {t.name for t in domain.types}
    known = dict(domain.constants)
    seen: set[str] = set()
    for obj, t in objects:
        if t not in type_names:
            raise UnknownType(t)
        if obj in seen:
            raise MalformedDefinition(f"object {obj} declared twice")
        if obj in known and known[obj] != t:
            raise MalformedDefinition(f"object {obj} redeclares constant with type {t}")
        seen.add(obj)
        known[obj] = t

    ctx = _LiteralContext(domain.predicate_map, set(), set(known), allow_equality=False)
    init: set[Atom] = set()
    for item in init_expr or []:
        item = _expect_list(item, "initial atom")
        if item and item[0] == "not":
            raise MalformedDefinition(f"negative literal in :init: {sexpr.dump(item)}")
        if item and item[0] == EQUALITY:
            raise UnsupportedFeature("numeric fluents")
        lit = ctx.literal(item)
        init.add(lit.atom)

    goal: list[Literal] = []
    if goal_expr is not None:
        _reject_variables(goal_expr, domain.predicate_map)
        goal = ctx.conjunction(goal_expr)

    return Problem(
        name=name,
        domain_name=domain_name,
        objects=tuple(objects),
        init=frozenset(init),
        goal=tuple(dict.fromkeys(goal)),
        requirements=requirements,
    )


def _reject_variables(expr, predicates) -> None:
    if isinstance(expr, list):
        # a declared predicate may share a name with a temporal keyword, e.g. (at ?x ?l)
        if expr and expr[0] in _UNSUPPORTED_CONNECTIVES and expr[0] not in predicates:
            raise UnsupportedFeature(str(expr[0]))
        for e in expr:
            _reject_variables(e, predicates)
    elif str(expr).startswith("?"):
        raise NonGroundGoal(str(expr))


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _typed(items: Iterable[tuple[str, str]]) -> str:
    return " ".join(f"{n} - {t}" for n, t in items)


def _conj(lits: Iterable[Literal]) -> str:
    lits = list(lits)
    if not lits:
        return "()"
    return "(and " + " ".join(str(l) for l in lits) + ")"


def domain_to_pddl(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})"]
    lines.append("  (:requirements " + " ".join(sorted(domain.requirements)) + ")")
    if domain.types:
        lines.append("  (:types " + " ".join(f"{t.name} - {t.parent}" for t in domain.types) + ")")
    if domain.constants:
        lines.append(f"  (:constants {_typed(domain.constants)})")
    preds = " ".join(
        "(" + " ".join([p.name] + [f"{v} - {t}" for v, t in p.params]) + ")" for p in domain.predicates
    )
    lines.append(f"  (:predicates {preds})")
    for a in domain.actions:
        effects = list(a.add_effects) + [Literal(l.predicate, l.args, False) for l in a.delete_effects]
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({_typed(a.params)})")
        lines.append(f"    :precondition {_conj(a.precondition)}")
        lines.append(f"    :effect {_conj(effects)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def problem_to_pddl(problem: Problem) -> str:
    lines = [f"(define (problem {problem.name})", f"  (:domain {problem.domain_name})"]
    if problem.requirements:
        lines.append("  (:requirements " + " ".join(sorted(problem.requirements)) + ")")
    lines.append(f"  (:objects {_typed(problem.objects)})")
    lines.append("  (:init " + " ".join(format_atom(a) for a in sorted(problem.init)) + ")")
    lines.append(f"  (:goal {_conj(problem.goal)})")
    lines.append(")")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Plans
# ---------------------------------------------------------------------------


def serialize_plan(plan: Iterable[Signature]) -> str:
    return "".join(format_signature(tuple(s.lower() for s in sig)) + "\n" for sig in plan)


def parse_plan(text: str) -> list[Signature]:
    """Inverse of :func:`serialize_plan`; skips blank and ``;`` comment lines."""
    plan: list[Signature] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        try:
            exprs = sexpr.parse_all(line)
        except PddlSyntaxError as exc:
            raise PddlSyntaxError(f"bad plan line {raw.strip()!r}", lineno, exc.column or 1,
                                  "(action arg ...)") from None
        if (len(exprs) != 1 or not isinstance(exprs[0], list) or not exprs[0]
                or any(isinstance(e, list) for e in exprs[0])):
            raise PddlSyntaxError(f"bad plan line {raw.strip()!r}", lineno, 1, "(action arg ...)")
        plan.append(tuple(str(e) for e in exprs[0]))
    return plan
