"""A grounded task indexed for the transition kernel."""

from __future__ import annotations

from functools import cached_property

from .grounding import GroundAction, ground
from .kernels import ActionTable, count_unsatisfied
from .pddl import Atom, Domain, Problem, Signature


class GroundedTask:
    """Domain + problem + grounding, with atoms numbered for byte-vector states.

    Atoms that occur nowhere in the grounding, init or goal can never
    change, so they are not indexed.
    """

    def __init__(self, domain: Domain, problem: Problem, actions: list[GroundAction] | None = None):
        self.domain = domain
        self.problem = problem
        self.actions = ground(domain, problem) if actions is None else actions
        self.index_of: dict[Signature, int] = {a.signature: i for i, a in enumerate(self.actions)}

        atoms: set[Atom] = set(problem.init)
        atoms.update(l.atom for l in problem.goal)
        for a in self.actions:
            atoms |= a.pre_pos | a.pre_neg | a.adds | a.dels
        self.atoms: list[Atom] = sorted(atoms)
        self.atom_index: dict[Atom, int] = {a: i for i, a in enumerate(self.atoms)}

        ix = self.atom_index
        self.table = ActionTable(
            len(self.atoms),
            [[ix[x] for x in sorted(a.pre_pos)] for a in self.actions],
            [[ix[x] for x in sorted(a.pre_neg)] for a in self.actions],
            [[ix[x] for x in sorted(a.adds)] for a in self.actions],
            [[ix[x] for x in sorted(a.dels)] for a in self.actions],
        )
        self.goal_pos = [ix[l.atom] for l in problem.goal if l.positive]
        self.goal_neg = [ix[l.atom] for l in problem.goal if not l.positive]

    def encode(self, atoms) -> bytes:
        vec = bytearray(len(self.atoms))
        for a in atoms:
            vec[self.atom_index[a]] = 1
        return bytes(vec)

    def decode(self, state: bytes) -> frozenset[Atom]:
        return frozenset(self.atoms[i] for i, v in enumerate(state) if v)

    @cached_property
    def initial(self) -> bytes:
        return self.encode(self.problem.init)

    def goal_distance(self, state: bytes) -> int:
        return count_unsatisfied(self.goal_pos, self.goal_neg, state)

    def is_goal(self, state: bytes) -> bool:
        return count_unsatisfied(self.goal_pos, self.goal_neg, state) == 0
