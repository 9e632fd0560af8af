"""Brute-force classification of ordered pairs and triples of directed edges.

This module is the reference semantics for the configuration taxonomy and
is deliberately independent of the O(nk)/O(nk^2) counting formulas in
edge_stats and analytic_pvalue: tests compare the two per class, and the
side-assignment metadata table is generated from this classifier.

Pair configurations (ordered pair (e1, e2) of edges, drawn with
replacement):

    1  identical                 e2 == e1
    2  opposite                  e2 == reversed e1
    3  head(e1) == tail(e2)      chain e1 then e2
    4  tail(e1) == head(e2)      chain e2 then e1
    5  shared tail               out/out
    6  shared head               in/in
    7  node disjoint

Triple configurations (ordered triple of edges, with replacement), by the
node-sharing shape of the multiset:

     1  e,e,e
     2  e,e,reverse(e)
     3  chain {a,a,b} with the leading chain edge doubled
     8  chain {a,b,b} with the trailing chain edge doubled
     4  shared-head pair, one edge doubled
     7  shared-tail pair, one edge doubled
    11  disjoint pair, one edge doubled
     5  mutual pair + out-edge from one of its nodes
     6  mutual pair + in-edge into one of its nodes
     9  directed 3-cycle
    10  transitive triangle
    12  mutual pair + node-disjoint edge
    13  directed 3-path (a -> b -> c -> d)
    14  chain + second in-edge at its head (a -> b -> c <- d)
    15  shared-head pair + out-edge from one tail
    16  shared-tail pair + chain continuing from one head
    17  three edges into a common node
    18  three edges out of a common node
    19  shared-tail pair + in-edge into the common tail
    20  shared-head pair + out-edge from the common head
    21  chain + node-disjoint edge
    22  shared-tail pair + node-disjoint edge
    23  shared-head pair + node-disjoint edge
    24  three pairwise node-disjoint edges
"""

from __future__ import annotations

from collections import Counter
from itertools import product


def classify_pair(e1, e2) -> int:
    if e1 == e2:
        return 1
    i, j = e1
    u, v = e2
    if (u, v) == (j, i):
        return 2
    if j == u:
        return 3
    if i == v:
        return 4
    if i == u:
        return 5
    if j == v:
        return 6
    return 7


def _classify_two_distinct(double, single) -> int:
    pc = classify_pair(double, single)
    return {2: 2, 3: 3, 4: 8, 5: 7, 6: 4, 7: 11}[pc]


def _classify_three_distinct(edges) -> int:
    nodes = Counter()
    for a, b in edges:
        nodes[a] += 1
        nodes[b] += 1
    s = len(nodes)
    mutual = any(
        (edges[a][1], edges[a][0]) == edges[b]
        for a in range(3)
        for b in range(3)
        if a < b
    )
    if s == 3:
        if mutual:
            pair_nodes = None
            for a in range(3):
                for b in range(a + 1, 3):
                    if (edges[a][1], edges[a][0]) == edges[b]:
                        pair_nodes = set(edges[a])
            third = next(e for e in edges if set(e) != pair_nodes)
            return 5 if third[0] in pair_nodes else 6
        heads = {e[1] for e in edges}
        return 9 if len(heads) == 3 else 10
    if s == 4:
        top = nodes.most_common(1)[0]
        if top[1] == 3:
            hub = top[0]
            n_in = sum(1 for e in edges if e[1] == hub)
            return {3: 17, 0: 18, 1: 19, 2: 20}[n_in]
        if mutual:
            return 12
        # linear shape: the middle edge shares a node with both others
        for m in range(3):
            others = [e for idx, e in enumerate(edges) if idx != m]
            x, y = edges[m]
            at_x = [e for e in others if x in e]
            at_y = [e for e in others if y in e]
            if len(at_x) == 1 and len(at_y) == 1 and at_x[0] != at_y[0]:
                a_in = at_x[0][1] == x
                b_in = at_y[0][1] == y
                return {(True, False): 13, (True, True): 14,
                        (False, True): 15, (False, False): 16}[(a_in, b_in)]
        raise AssertionError(f"unclassifiable 4-node triple {edges}")
    if s == 5:
        for a in range(3):
            for b in range(3):
                if a == b:
                    continue
                pc = classify_pair(edges[a], edges[b])
                if pc in (3, 4):
                    return 21
                if pc == 5:
                    return 22
                if pc == 6:
                    return 23
        raise AssertionError(f"unclassifiable 5-node triple {edges}")
    return 24


def classify_triple(e1, e2, e3) -> int:
    edges = (e1, e2, e3)
    distinct = set(edges)
    if len(distinct) == 1:
        return 1
    if len(distinct) == 2:
        counts = Counter(edges)
        double = next(e for e, c in counts.items() if c == 2)
        single = next(e for e, c in counts.items() if c == 1)
        return _classify_two_distinct(double, single)
    return _classify_three_distinct(edges)


def _edge_tuples(graph):
    return [tuple(map(int, e)) for e in graph.edges()]


def pair_counts_by_enumeration(graph):
    """Counts of all (nk)^2 ordered edge pairs per configuration (7-tuple)."""
    edges = _edge_tuples(graph)
    out = [0] * 7
    for e1, e2 in product(edges, repeat=2):
        out[classify_pair(e1, e2) - 1] += 1
    return tuple(out)


def triple_counts_by_enumeration(graph):
    """Counts of all (nk)^3 ordered edge triples per configuration (24-tuple)."""
    edges = _edge_tuples(graph)
    out = [0] * 24
    for e1, e2, e3 in product(edges, repeat=3):
        out[classify_triple(e1, e2, e3) - 1] += 1
    return tuple(out)
