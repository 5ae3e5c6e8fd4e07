"""Syntactic grounding of action schemas over typed objects."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .pddl import EQUALITY, Atom, Domain, Literal, Problem, Signature, all_objects, format_signature


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    adds: frozenset[Atom]
    dels: frozenset[Atom]

    @property
    def signature(self) -> Signature:
        return (self.name, *self.args)

    def __str__(self) -> str:
        return format_signature(self.signature)


def objects_by_type(domain: Domain, problem: Problem) -> dict[str, list[str]]:
    """Map each type to the sorted constants that are instances of it."""
    table: dict[str, list[str]] = {}
    for obj, t in all_objects(domain, problem).items():
        for anc in domain.ancestors(t):
            table.setdefault(anc, []).append(obj)
    for objs in table.values():
        objs.sort()
    return table


def _substitute(lit: Literal, binding: dict[str, str]) -> Atom:
    return (lit.predicate, *(binding.get(a, a) for a in lit.args))


def ground(domain: Domain, problem: Problem) -> list[GroundAction]:
    """Every type-consistent instantiation, sorted by name then args.

    Equality preconditions are decided here and dropped from the result;
    no reachability pruning is done.
    """
    candidates = objects_by_type(domain, problem)
    result: list[GroundAction] = []
    for schema in domain.actions:
        var_names = [v for v, _ in schema.params]
        domains = [candidates.get(t, []) for _, t in schema.params]
        equalities = [l for l in schema.precondition if l.predicate == EQUALITY]
        others = [l for l in schema.precondition if l.predicate != EQUALITY]
        for combo in product(*domains):
            binding = dict(zip(var_names, combo))
            if any((binding.get(l.args[0], l.args[0]) == binding.get(l.args[1], l.args[1])) != l.positive
                   for l in equalities):
                continue
            adds = frozenset(_substitute(l, binding) for l in schema.add_effects)
            dels = frozenset(_substitute(l, binding) for l in schema.delete_effects) - adds
            result.append(GroundAction(
                name=schema.name,
                args=tuple(combo),
                pre_pos=frozenset(_substitute(l, binding) for l in others if l.positive),
                pre_neg=frozenset(_substitute(l, binding) for l in others if not l.positive),
                adds=adds,
                dels=dels,
            ))
    result.sort(key=lambda g: g.signature)
    return result
