"""Reference semantics written straight from the action schemas.

Nothing here touches grounding, the kernels or the engine, so agreement
with those modules is evidence rather than tautology.
"""

import itertools
from collections import deque


def _bind(schema, args):
    return dict(zip((v for v, _ in schema.params), args))


def _inst(lit, binding):
    return (lit.predicate, *(binding.get(a, a) for a in lit.args))


def schema_of(domain, name):
    return next(a for a in domain.actions if a.name == name)


def objects(domain, problem):
    objs = dict(domain.constants)
    objs.update(problem.objects)
    return objs


def _is_a(domain, t, want):
    parents = {tn.name: tn.parent for tn in domain.types}
    while t is not None:
        if t == want:
            return True
        t = parents.get(t)
    return want == "object"


def candidates(domain, problem):
    """Every type-consistent signature, equality constraints not yet applied."""
    objs = objects(domain, problem)
    for schema in domain.actions:
        pools = [[o for o, t in sorted(objs.items()) if _is_a(domain, t, pt)] for _, pt in schema.params]
        for args in itertools.product(*pools):
            yield (schema.name, *args)


def applicable(domain, state, sig):
    schema = schema_of(domain, sig[0])
    b = _bind(schema, sig[1:])
    for lit in schema.precondition:
        if lit.predicate == "=":
            x, y = (b.get(a, a) for a in lit.args)
            if (x == y) != lit.positive:
                return False
        elif (_inst(lit, b) in state) != lit.positive:
            return False
    return True


def successor(domain, state, sig):
    schema = schema_of(domain, sig[0])
    b = _bind(schema, sig[1:])
    dels = {_inst(l, b) for l in schema.delete_effects}
    adds = {_inst(l, b) for l in schema.add_effects}
    return frozenset((set(state) - dels) | adds)


def applicable_set(domain, problem, state):
    return {sig for sig in candidates(domain, problem) if applicable(domain, state, sig)}


def goal_holds(problem, state):
    return all((l.atom in state) == l.positive for l in problem.goal)


def replay(domain, problem, plan):
    """(applied prefix length, final state, goal flag), stopping at the first inapplicable step."""
    state = frozenset(problem.init)
    for k, sig in enumerate(plan):
        if not applicable(domain, state, sig):
            return k, state, goal_holds(problem, state)
        state = successor(domain, state, sig)
    return len(plan), state, goal_holds(problem, state)


def bfs_length(domain, problem):
    """Shortest plan length by plain BFS over sets, or None if unreachable."""
    sigs = list(candidates(domain, problem))
    start = frozenset(problem.init)
    if goal_holds(problem, start):
        return 0
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        state, d = frontier.popleft()
        for sig in sigs:
            if applicable(domain, state, sig):
                nxt = successor(domain, state, sig)
                if nxt in seen:
                    continue
                if goal_holds(problem, nxt):
                    return d + 1
                seen.add(nxt)
                frontier.append((nxt, d + 1))
    return None
