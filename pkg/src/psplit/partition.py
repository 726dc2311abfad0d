"""Variable partitions used to split separable constraints into group sums."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    groups: tuple[tuple[int, ...], ...]

    def __init__(self, groups: Iterable[Iterable[int]]):
        gs = tuple(tuple(int(i) for i in g) for g in groups)
        seen: set[int] = set()
        for g in gs:
            if not g:
                raise PartitionError("empty group")
            for i in g:
                if i in seen:
                    raise PartitionError(f"variable {i} appears in two groups")
                seen.add(i)
        object.__setattr__(self, "groups", gs)

    @property
    def covered(self) -> frozenset[int]:
        return frozenset(i for g in self.groups for i in g)

    def __len__(self) -> int:
        return len(self.groups)

    def restrict(self, support: Iterable[int]) -> "Partition":
        """Intersect every group with ``support`` and drop the empty ones."""
        support = set(support)
        missing = support - self.covered
        if missing:
            raise PartitionError(f"partition does not cover variables {sorted(missing)}")
        return Partition(
            tuple(i for i in g if i in support) for g in self.groups if any(i in support for i in g)
        )

    def to_json(self) -> list[list[int]]:
        return [list(g) for g in self.groups]


def even_index_partition(var_ids: Sequence[int], P: int) -> Partition:
    """Split the sorted ids into ``P`` contiguous groups of near-equal size.

    The first ``n % P`` groups get one extra element.
    """
    ids = sorted(int(i) for i in var_ids)
    n = len(ids)
    if not 1 <= P <= n:
        raise PartitionError(f"cannot split {n} variables into {P} groups")
    base, extra = divmod(n, P)
    groups, start = [], 0
    for s in range(P):
        size = base + (1 if s < extra else 0)
        groups.append(ids[start:start + size])
        start += size
    return Partition(groups)


def refine(p: Partition, group_index: int) -> Partition:
    """Halve one group in index order, keeping every other group as is."""
    g = sorted(p.groups[group_index])
    if len(g) < 2:
        raise PartitionError("cannot refine a singleton group")
    half = (len(g) + 1) // 2
    groups = list(p.groups)
    groups[group_index:group_index + 1] = [tuple(g[:half]), tuple(g[half:])]
    return Partition(groups)


def refine_all(p: Partition) -> Partition:
    """Halve every group with at least two members."""
    out = p
    s = 0
    while s < len(out):
        if len(out.groups[s]) >= 2:
            out = refine(out, s)
            s += 2
        else:
            s += 1
    return out


def nested_chain(var_ids: Sequence[int]) -> list[Partition]:
    """Partitions with 1, 2, 4, ... groups down to all singletons, each nested in the last."""
    chain = [Partition([sorted(var_ids)])]
    while any(len(g) > 1 for g in chain[-1].groups):
        chain.append(refine_all(chain[-1]))
    return chain


def is_nested(fine: Partition, coarse: Partition) -> bool:
    """True if every group of ``fine`` lies inside a single group of ``coarse``."""
    if fine.covered != coarse.covered:
        return False
    owner = {i: s for s, g in enumerate(coarse.groups) for i in g}
    return all(len({owner[i] for i in g}) == 1 for g in fine.groups)


def load_partitions(path_or_data, n_disjunctions: int) -> list[Partition]:
    """Read partition JSON.

    Accepts one array of arrays of variable indices (used for every
    disjunction) or a list with one such array per disjunction.
    """
    data = path_or_data
    if isinstance(data, (str, Path)):
        data = json.loads(Path(data).read_text())
    if not data:
        raise PartitionError("empty partition data")
    if isinstance(data[0][0], list):
        if len(data) != n_disjunctions:
            raise PartitionError(f"{len(data)} partitions for {n_disjunctions} disjunctions")
        return [Partition(p) for p in data]
    return [Partition(data)] * n_disjunctions
