"""Decision levels with one save stack per variable.

Writes go through :meth:`SearchState.__setitem__`, which copies the old
domain onto that variable's stack the first time it changes at the current
level. Backtracking pops each stack independently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Domain

__all__ = ["PopAtRoot", "SearchStats", "SearchState"]


class PopAtRoot(RuntimeError):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    rounds: int = 0
    solutions: int = 0


class SearchState:
    """Domain store plus per-variable stacks of ``(level, saved_domain)``."""

    def __init__(self, domains: Iterable[Domain]):
        self.domains: list[Domain] = list(domains)
        self.stacks: list[list[tuple[int, Domain]]] = [[] for _ in self.domains]
        self.level = 0
        self.stats = SearchStats()

    # sequence protocol used by the propagation engine
    def __len__(self):
        return len(self.domains)

    def __getitem__(self, var):
        return self.domains[var]

    def __iter__(self):
        return iter(self.domains)

    def __setitem__(self, var: int, dom: Domain) -> None:
        self.save_on_modify(var, self.level)
        self.domains[var] = dom

    def save_on_modify(self, var: int, level: int) -> None:
        stack = self.stacks[var]
        if stack and stack[-1][0] >= level:
            return
        stack.append((level, self.domains[var]))

    def restore_variable(self, var: int, target: int) -> None:
        stack = self.stacks[var]
        saved = None
        while stack and stack[-1][0] > target:
            saved = stack.pop()[1]
        if saved is not None:
            self.domains[var] = saved

    def restore_to_level(self, target: int, order: Sequence[int] | None = None) -> None:
        """Undo every write made above ``target``.

        Each variable is handled on its own, so ``order`` (any permutation of
        variable ids) gives the same result.
        """
        if target > self.level:
            raise ValueError(f"cannot restore forward to level {target} from {self.level}")
        for var in range(len(self.domains)) if order is None else order:
            self.restore_variable(var, target)

    def push_level(self) -> int:
        self.level += 1
        return self.level

    def pop_level(self) -> int:
        if self.level == 0:
            raise PopAtRoot("pop_level called at level 0")
        self.level -= 1
        self.restore_to_level(self.level)
        return self.level
