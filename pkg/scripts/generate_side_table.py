#!/usr/bin/env python3
"""Regenerate cpknn/_side_table.py from brute-force triple classification.

For every configuration of an ordered triple of edges, third raw moments
need (a) the number of distinct nodes in the triple and (b) how many of the
orderings of each instance are compatible with putting the first one or two
edges fully before t and the rest fully after.  These are shape constants;
this script derives them by classifying all ordered edge triples of many
random digraphs, checks that the constants are identical across every
instance of a configuration, and rewrites the frozen table.

Run from the repository root:  python3 scripts/generate_side_table.py [--check]
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter, defaultdict
from itertools import product
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cpknn.enumeration import classify_triple  # noqa: E402

HEADER = '''"""Side-assignment metadata for the 24 triple-edge configurations.

GENERATED by scripts/generate_side_table.py -- do not edit by hand.

For configuration l, SIDE_TABLE[l] = (s, o, m21, m12):

    s    distinct nodes in the triple
    o    ordered triples per instance (multiset of edges)
    m21  orderings with nodes(e1) | nodes(e2) disjoint from nodes(e3)
         (the E[R1^2 R2] pattern: first two edges before t, third after)
    m12  orderings with nodes(e1) disjoint from nodes(e2) | nodes(e3)
         (the E[R1 R2^2] pattern)

A compatible ordering always splits the s nodes into (s - 2) on the
two-edge side and 2 on the one-edge side.
"""

SIDE_TABLE = {
'''


def random_digraph(rng, n, k):
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        pool = np.delete(np.arange(n), i)
        neighbors[i] = rng.choice(pool, size=k, replace=False)
    return neighbors


def edge_list(neighbors):
    n, k = neighbors.shape
    return [(i, int(neighbors[i, r])) for i in range(n) for r in range(k)]


def nodes_of(*edges):
    out = set()
    for a, b in edges:
        out.add(a)
        out.add(b)
    return out


def derive(seed=20240601, graphs=40):
    rng = np.random.default_rng(seed)
    per_config = defaultdict(set)  # l -> set of (s, o, m21, m12)
    seen = Counter()
    for _ in range(graphs):
        n = int(rng.integers(5, 9))
        k = int(rng.integers(1, min(3, n - 1) + 1))
        edges = edge_list(random_digraph(rng, n, k))
        instances = defaultdict(list)  # multiset -> ordered triples
        for trip in product(edges, repeat=3):
            instances[tuple(sorted(trip))].append(trip)
        for multiset, ordered in instances.items():
            labels = {classify_triple(*trip) for trip in ordered}
            assert len(labels) == 1, f"orderings of {multiset} disagree: {labels}"
            label = labels.pop()
            s = len(nodes_of(*multiset))
            m21 = m12 = 0
            for e1, e2, e3 in ordered:
                left = nodes_of(e1, e2)
                if not (left & nodes_of(e3)):
                    m21 += 1
                    assert len(left) == s - 2
                right = nodes_of(e2, e3)
                if not (nodes_of(e1) & right):
                    m12 += 1
                    assert len(right) == s - 2
            per_config[label].add((s, len(ordered), m21, m12))
            seen[label] += 1
    assert sorted(per_config) == list(range(1, 25)), f"missing configs: {sorted(per_config)}"
    table = {}
    for label in range(1, 25):
        variants = per_config[label]
        assert len(variants) == 1, f"config {label} metadata not constant: {variants}"
        table[label] = next(iter(variants))
    return table, seen


def render(table):
    lines = [HEADER]
    for label in range(1, 25):
        s, o, m21, m12 = table[label]
        lines.append(f"    {label}: ({s}, {o}, {m21}, {m12}),\n")
    lines.append("}\n")
    return "".join(lines)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--check", action="store_true",
                        help="verify the frozen table instead of rewriting it")
    parser.add_argument("--graphs", type=int, default=40)
    args = parser.parse_args()

    table, seen = derive(graphs=args.graphs)
    print("instances per configuration:", dict(sorted(seen.items())))
    target = Path(__file__).resolve().parent.parent / "src" / "cpknn" / "_side_table.py"
    text = render(table)
    if args.check:
        if target.read_text() != text:
            print("MISMATCH: frozen table differs from regenerated metadata")
            return 1
        print("frozen table verified")
        return 0
    target.write_text(text)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
