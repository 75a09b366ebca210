#!/usr/bin/env python3
"""Reference byte-pair token counter used to freeze test fixtures.

Independent of the C++ implementation: merges are applied one occurrence
at a time (lowest rank, leftmost position) instead of whole-pass rewrites.

usage: bpe_reference.py MERGES_FILE TEXT_FILE
"""

import re
import sys

CHUNK = re.compile(rb"[A-Za-z0-9_\x80-\xff]+|[^A-Za-z0-9_\x80-\xff \t\n\r\x0b\x0c]")


def load(path):
    ranks = {}
    with open(path, encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        assert header == "#tangle-bpe-merges v1", header
        for i, line in enumerate(fh):
            a, b = line.split()
            ranks[(bytes.fromhex(a), bytes.fromhex(b))] = i
    return ranks


def count_chunk(chunk, ranks):
    syms = [chunk[i:i + 1] for i in range(len(chunk))]
    while len(syms) > 1:
        best, where = None, -1
        for i in range(len(syms) - 1):
            r = ranks.get((syms[i], syms[i + 1]))
            if r is not None and (best is None or r < best):
                best, where = r, i
        if best is None:
            break
        syms[where:where + 2] = [syms[where] + syms[where + 1]]
    return len(syms)


def count(data, ranks):
    return sum(count_chunk(c, ranks) for c in CHUNK.findall(data))


if __name__ == "__main__":
    ranks = load(sys.argv[1])
    with open(sys.argv[2], "rb") as fh:
        print(count(fh.read(), ranks))
