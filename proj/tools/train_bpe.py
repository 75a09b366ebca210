#!/usr/bin/env python3
"""Learn a byte-pair merge table from a JSON Lines corpus.

Output format (one merge per line, highest priority first):

    #tangle-bpe-merges v1
    <left-hex> <right-hex>

Chunks are maximal runs of [A-Za-z0-9_] or bytes >= 0x80; any other
non-whitespace byte is a chunk of its own; whitespace only separates.
"""

import argparse
import collections
import json


def chunks(data: bytes):
    out, cur = [], bytearray()
    for b in data:
        if b in b" \t\n\r\v\f":
            if cur:
                out.append(bytes(cur)); cur.clear()
        elif chr(b).isalnum() and b < 0x80 or b == 0x5F or b >= 0x80:
            cur.append(b)
        else:
            if cur:
                out.append(bytes(cur)); cur.clear()
            out.append(bytes([b]))
    if cur:
        out.append(bytes(cur))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--merges", type=int, default=2000)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    freq = collections.Counter()
    with open(args.corpus, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            text = (rec["message"] + "\n" + rec["diff"]).encode("utf-8")
            freq.update(c for c in chunks(text) if len(c) > 1)
    words = {w: [bytes([b]) for b in w] for w in freq}
    merges = []
    for _ in range(args.merges):
        pairs = collections.Counter()
        for w, syms in words.items():
            for a, b in zip(syms, syms[1:]):
                pairs[(a, b)] += freq[w]
        if not pairs:
            break
        best = max(pairs.items(), key=lambda kv: (kv[1], kv[0]))[0]
        merges.append(best)
        for w, syms in words.items():
            i, out = 0, []
            while i < len(syms):
                if i + 1 < len(syms) and (syms[i], syms[i + 1]) == best:
                    out.append(syms[i] + syms[i + 1]); i += 2
                else:
                    out.append(syms[i]); i += 1
            words[w] = out
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write("#tangle-bpe-merges v1\n")
        for a, b in merges:
            fh.write(f"{a.hex()} {b.hex()}\n")


if __name__ == "__main__":
    main()
