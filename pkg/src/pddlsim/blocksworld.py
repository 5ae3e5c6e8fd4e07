"""Bundled Blocksworld domain and a random instance generator."""

from __future__ import annotations

import random
import string
from importlib import resources


def domain_text() -> str:
    return resources.files("pddlsim.data").joinpath("blocksworld/domain.pddl").read_text()


def sussman_text() -> str:
    return resources.files("pddlsim.data").joinpath("blocksworld/sussman.pddl").read_text()


def block_names(n: int) -> list[str]:
    if n <= 26:
        return list(string.ascii_lowercase[:n])
    return [f"b{i}" for i in range(1, n + 1)]


def random_towers(blocks: list[str], rng: random.Random) -> list[list[str]]:
    """Random arrangement of ``blocks`` into towers, listed bottom to top."""
    order = blocks[:]
    rng.shuffle(order)
    towers: list[list[str]] = []
    for b in order:
        if towers and rng.random() < 0.6:
            rng.choice(towers).append(b)
        else:
            towers.append([b])
    return towers


def tower_atoms(towers: list[list[str]]) -> list[str]:
    atoms = []
    for tower in towers:
        atoms.append(f"(ontable {tower[0]})")
        for below, above in zip(tower, tower[1:]):
            atoms.append(f"(on {above} {below})")
        atoms.append(f"(clear {tower[-1]})")
    return atoms


def problem_text(name: str, init: list[list[str]], goal: list[list[str]]) -> str:
    blocks = sorted(b for t in init for b in t)
    goal_atoms = [a for a in tower_atoms(goal) if a.startswith("(on ")]
    if not goal_atoms:
        goal_atoms = [a for a in tower_atoms(goal) if a.startswith("(ontable ")]
    return (
        f"(define (problem {name})\n"
        f"  (:domain blocksworld)\n"
        f"  (:objects {' '.join(blocks)})\n"
        f"  (:init (handempty) {' '.join(tower_atoms(init))})\n"
        f"  (:goal (and {' '.join(goal_atoms)})))\n"
    )


def random_problem(n_blocks: int, rng: random.Random, name: str | None = None) -> str:
    blocks = block_names(n_blocks)
    return problem_text(name or f"bw-{n_blocks}", random_towers(blocks, rng), random_towers(blocks, rng))
