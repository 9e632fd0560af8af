"""Side-assignment metadata for the 24 triple-edge configurations.

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
    1: (2, 1, 0, 0),
    2: (2, 3, 0, 0),
    3: (3, 3, 0, 0),
    4: (3, 3, 0, 0),
    5: (3, 6, 0, 0),
    6: (3, 6, 0, 0),
    7: (3, 3, 0, 0),
    8: (3, 3, 0, 0),
    9: (3, 6, 0, 0),
    10: (3, 6, 0, 0),
    11: (4, 3, 1, 1),
    12: (4, 6, 2, 2),
    13: (4, 6, 0, 0),
    14: (4, 6, 0, 0),
    15: (4, 6, 0, 0),
    16: (4, 6, 0, 0),
    17: (4, 6, 0, 0),
    18: (4, 6, 0, 0),
    19: (4, 6, 0, 0),
    20: (4, 6, 0, 0),
    21: (5, 6, 2, 2),
    22: (5, 6, 2, 2),
    23: (5, 6, 2, 2),
    24: (6, 6, 6, 6),
}
