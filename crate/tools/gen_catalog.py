#!/usr/bin/env python3
"""Writes the bundled multiplication-table catalog into crates/core/catalog/.

Each group is built from an explicit normal form; the Rust test suite
re-validates every table (group axioms, nilpotency, pairwise distinct
invariants), so this script is not trusted on its own.
"""
import itertools
import os
import sys

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "catalog")


def abelian(*mods):
    elems = list(itertools.product(*[range(m) for m in mods]))
    def mul(a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, mods))
    return elems, mul


def metacyclic(m, n, r, t):
    """<a, b | a^m = 1, b^n = a^t, b a b^-1 = a^r>, elements a^i b^j."""
    assert pow(r, n, m) == 1 and (t * r - t) % m == 0
    elems = [(i, j) for i in range(m) for j in range(n)]
    def mul(x, y):
        i, j = x
        k, l = y
        e = (i + k * pow(r, j, m)) % m
        s = j + l
        if s >= n:
            s -= n
            e = (e + t) % m
        return (e, s)
    return elems, mul


def product(g, h):
    ge, gm = g
    he, hm = h
    elems = [(a, b) for a in ge for b in he]
    def mul(x, y):
        return (gm(x[0], y[0]), hm(x[1], y[1]))
    return elems, mul


def g16_3():
    # (Z4 x Z2) : Z2 with c a c^-1 = a b, c b c^-1 = b
    elems = list(itertools.product(range(4), range(2), range(2)))
    def mul(x, y):
        i, j, k = x
        i2, j2, k2 = y
        return ((i + i2) % 4, (j + j2 + k * i2) % 2, (k + k2) % 2)
    return elems, mul


def pauli():
    # i^k X^x Z^z with Z X = -X Z
    elems = list(itertools.product(range(4), range(2), range(2)))
    def mul(p, q):
        k, x, z = p
        k2, x2, z2 = q
        return ((k + k2 + 2 * z * x2) % 4, (x + x2) % 2, (z + z2) % 2)
    return elems, mul


def write(label, group, path):
    elems, mul = group
    ident = None
    for e in elems:
        if all(mul(e, x) == x and mul(x, e) == x for x in elems):
            ident = e
            break
    assert ident is not None
    order = [ident] + [e for e in elems if e != ident]
    index = {e: i for i, e in enumerate(order)}
    rows = [[index[mul(a, b)] for b in order] for a in order]
    with open(path, "w") as f:
        f.write(f"table {len(order)} {label}\n")
        for r in rows:
            f.write(" ".join(str(x) for x in r) + "\n")


GROUPS = [
    ("Z1", abelian(1)),
    ("Z2", abelian(2)),
    ("Z3", abelian(3)),
    ("Z4", abelian(4)),
    ("Z2xZ2", abelian(2, 2)),
    ("Z5", abelian(5)),
    ("Z6", abelian(6)),
    ("Z7", abelian(7)),
    ("Z8", abelian(8)),
    ("Z4xZ2", abelian(4, 2)),
    ("Z2^3", abelian(2, 2, 2)),
    ("D4", metacyclic(4, 2, 3, 0)),
    ("Q8", metacyclic(4, 2, 3, 2)),
    ("Z9", abelian(9)),
    ("Z3xZ3", abelian(3, 3)),
    ("Z10", abelian(10)),
    ("Z11", abelian(11)),
    ("Z12", abelian(12)),
    ("Z6xZ2", abelian(6, 2)),
    ("Z13", abelian(13)),
    ("Z14", abelian(14)),
    ("Z15", abelian(15)),
    ("Z16", abelian(16)),
    ("Z4xZ4", abelian(4, 4)),
    ("Z4xZ2:Z2", g16_3()),
    ("Z4:Z4", metacyclic(4, 4, 3, 0)),
    ("Z8xZ2", abelian(8, 2)),
    ("M16", metacyclic(8, 2, 5, 0)),
    ("Dih16", metacyclic(8, 2, 7, 0)),
    ("SD16", metacyclic(8, 2, 3, 0)),
    ("Q16", metacyclic(8, 2, 7, 4)),
    ("Z4xZ2xZ2", abelian(4, 2, 2)),
    ("D4xZ2", product(metacyclic(4, 2, 3, 0), abelian(2))),
    ("Q8xZ2", product(metacyclic(4, 2, 3, 2), abelian(2))),
    ("Pauli", pauli()),
    ("Z2^4", abelian(2, 2, 2, 2)),
]


def file_name(label):
    return label.replace("^", "e").replace(":", "s").replace("x", "x") + ".tbl"


def cycle_type(p):
    n = len(p)
    seen = [False] * n
    t = []
    for s in range(n):
        if seen[s]:
            continue
        l = 0
        j = s
        while not seen[j]:
            seen[j] = True
            j = p[j]
            l += 1
        if l > 1:
            t.append(l)
    return tuple(sorted(t))


def fixed_point_character(n, path):
    """Fixed-point counts per class of S_n, classes ordered by first occurrence
    in the lexicographic enumeration of S_n (the order used by the library)."""
    order = []
    for p in itertools.permutations(range(n)):
        t = cycle_type(p)
        if t not in order:
            order.append(t)
    with open(path, "w") as f:
        f.write(f"char S{n} {len(order)}\n")
        for t in order:
            f.write(f"{n - sum(t)} 0\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    for n in range(2, 8):
        fixed_point_character(n, os.path.join(OUT, f"fixpt_S{n}.chr"))
    with open(os.path.join(OUT, "A4.perm"), "w") as f:
        f.write("perm 4 A4\n(1 2 3)\n(1 2)(3 4)\n")
    names = []
    for label, g in GROUPS:
        name = file_name(label)
        write(label, g, os.path.join(OUT, name))
        names.append(name)
    print("\n".join(names), file=sys.stderr)


if __name__ == "__main__":
    main()
