"""Misra-Gries frequent items summary.

At most ``ell`` items hold counters; whenever all ``ell`` counters are
positive, every counter is lowered by their minimum.  Estimates only ever
undercount, by at most ``n / ell``.
"""
from __future__ import annotations

from collections.abc import Iterable


class FrequentItems:
    def __init__(self, ell: int):
        if ell < 1:
            raise ValueError(f"ell must be >= 1, got {ell}")
        self.ell = int(ell)
        self.counters: dict[int, float] = {}
        self.n = 0

    def update(self, item: int) -> None:
        self.n += 1
        counters = self.counters
        if item in counters:
            counters[item] += 1.0
        else:
            if len(counters) == self.ell:
                zeros = [k for k, c in counters.items() if c == 0.0]
                del counters[min(zeros)]
            counters[item] = 1.0
        if len(counters) == self.ell:
            low = min(counters.values())
            if low > 0.0:
                for k in counters:
                    counters[k] -= low

    def extend(self, items: Iterable[int]) -> None:
        for item in items:
            self.update(item)

    def estimate(self, item: int) -> float:
        return self.counters.get(item, 0.0)

    def positive_items(self) -> dict[int, float]:
        return {k: c for k, c in self.counters.items() if c > 0.0}
