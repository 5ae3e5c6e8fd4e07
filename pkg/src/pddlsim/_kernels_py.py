"""Pure-Python transition kernel; same interface as the compiled ``_kernels``.

States are ``bytes`` with one 0/1 byte per indexed atom.
"""

from __future__ import annotations


class ActionTable:
    def __init__(self, n_atoms: int, pre_pos, pre_neg, adds, dels):
        self.n_atoms = n_atoms
        self.n_actions = len(pre_pos)
        self._pre_pos = [tuple(p) for p in pre_pos]
        self._pre_neg = [tuple(p) for p in pre_neg]
        self._adds = [tuple(p) for p in adds]
        self._dels = [tuple(p) for p in dels]
        if not len(self._pre_neg) == len(self._adds) == len(self._dels) == self.n_actions:
            raise ValueError("precondition and effect lists differ in length")
        for rows in (self._pre_pos, self._pre_neg, self._adds, self._dels):
            for row in rows:
                for i in row:
                    if not 0 <= i < n_atoms:
                        raise IndexError(f"atom index {i} outside 0..{n_atoms - 1}")

    def _check(self, state: bytes) -> bytes:
        if len(state) != self.n_atoms:
            raise ValueError(f"state has {len(state)} atoms, table expects {self.n_atoms}")
        return state

    def is_applicable(self, state: bytes, a: int) -> bool:
        if not 0 <= a < self.n_actions:
            raise IndexError(a)
        return self._ok(self._check(state), a)

    def _ok(self, state: bytes, a: int) -> bool:
        for i in self._pre_pos[a]:
            if not state[i]:
                return False
        for i in self._pre_neg[a]:
            if state[i]:
                return False
        return True

    def applicable(self, state: bytes) -> list[int]:
        ok = self._ok
        state = self._check(state)
        return [a for a in range(self.n_actions) if ok(state, a)]

    def apply(self, state: bytes, a: int) -> bytes:
        if not 0 <= a < self.n_actions:
            raise IndexError(a)
        nxt = bytearray(self._check(state))
        for i in self._dels[a]:
            nxt[i] = 0
        for i in self._adds[a]:
            nxt[i] = 1
        return bytes(nxt)

    def expand(self, state: bytes) -> list[tuple[int, bytes]]:
        apply = self.apply
        return [(a, apply(state, a)) for a in self.applicable(state)]


def count_unsatisfied(goal_pos, goal_neg, state: bytes) -> int:
    missing = 0
    for i in (*goal_pos, *goal_neg):
        if not 0 <= i < len(state):
            raise IndexError(i)
    for i in goal_pos:
        if not state[i]:
            missing += 1
    for i in goal_neg:
        if state[i]:
            missing += 1
    return missing
