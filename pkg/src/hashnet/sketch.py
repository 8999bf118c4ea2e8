"""Mergeable distinct-count sketch (HyperLogLog) for large-corpus edge weights."""

from __future__ import annotations

import hashlib
import math


def _hash64(item: str) -> int:
    return int.from_bytes(hashlib.blake2b(item.encode("utf-8"), digest_size=8).digest(), "big")


class HyperLogLog:
    """HyperLogLog with ``2**p`` registers and the small-range correction.

    Sketches built with the same ``p`` merge losslessly, which is what lets a
    rolling window be assembled from per-step sketches.
    """

    __slots__ = ("p", "m", "registers")

    def __init__(self, p: int = 10):
        if not 4 <= p <= 16:
            raise ValueError("p must be in [4, 16]")
        self.p = p
        self.m = 1 << p
        self.registers = bytearray(self.m)

    def add(self, item: str) -> None:
        x = _hash64(item)
        idx = x >> (64 - self.p)
        rest = (x << self.p) & 0xFFFFFFFFFFFFFFFF
        rank = 1
        while rank <= 64 - self.p and not rest & (1 << 63):
            rest = (rest << 1) & 0xFFFFFFFFFFFFFFFF
            rank += 1
        if rank > self.registers[idx]:
            self.registers[idx] = rank

    def merge(self, other: "HyperLogLog") -> "HyperLogLog":
        if other.p != self.p:
            raise ValueError("cannot merge sketches of different precision")
        out = HyperLogLog(self.p)
        out.registers = bytearray(max(a, b) for a, b in zip(self.registers, other.registers))
        return out

    def update(self, other: "HyperLogLog") -> None:
        if other.p != self.p:
            raise ValueError("cannot merge sketches of different precision")
        regs = self.registers
        for i, b in enumerate(other.registers):
            if b > regs[i]:
                regs[i] = b

    def copy(self) -> "HyperLogLog":
        out = HyperLogLog(self.p)
        out.registers = bytearray(self.registers)
        return out

    def estimate(self) -> float:
        m = self.m
        if m == 16:
            alpha = 0.673
        elif m == 32:
            alpha = 0.697
        elif m == 64:
            alpha = 0.709
        else:
            alpha = 0.7213 / (1 + 1.079 / m)
        z = sum(2.0 ** -r for r in self.registers)
        est = alpha * m * m / z
        zeros = self.registers.count(0)
        if est <= 2.5 * m and zeros:
            est = m * math.log(m / zeros)
        return est

    def __len__(self) -> int:
        return int(round(self.estimate()))
