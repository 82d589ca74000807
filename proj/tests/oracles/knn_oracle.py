"""Independent brute-force oracle for user-kNN predictions.

Produces the frozen tables in tests/test_recommenders.cpp and
tests/acceptance.cpp. Uses exact rationals wherever possible and only
floats for the final square roots.
"""
import math
import sys
from fractions import Fraction

def load(path):
    r = {}
    for line in open(path):
        line = line.strip()
        if not line:
            continue
        u, i, x, _ = line.split("::")
        r.setdefault(int(u), {})[int(i)] = Fraction(x)
    return r

def cosine(a, b):
    common = sorted(set(a) & set(b))
    if len(common) < 2:
        return 0.0
    dot = sum(a[i] * b[i] for i in common)
    na = sum(a[i] ** 2 for i in common)
    nb = sum(b[i] ** 2 for i in common)
    return float(dot) / math.sqrt(float(na * nb))

def mean(row):
    return sum(row.values()) / len(row)

def predict(r, u, i, k):
    cands = []
    for v, row in r.items():
        if v == u or i not in row:
            continue
        s = cosine(r[u], row)
        if s > 0:
            cands.append((-s, v))
    cands.sort()
    num = 0.0
    den = 0.0
    for s, v in cands[:k]:
        s = -s
        num += s * float(r[v][i] - mean(r[v]))
        den += abs(s)
    if den == 0:
        return float(mean(r[u]))
    return float(mean(r[u])) + num / den

if __name__ == "__main__":
    r = load(sys.argv[1])
    k = int(sys.argv[2])
    keep_users = set(int(x) for x in sys.argv[3].split(",")) if len(sys.argv) > 3 else None
    keep_items = set(int(x) for x in sys.argv[4].split(",")) if len(sys.argv) > 4 else None
    if keep_users:
        r = {u: {i: x for i, x in row.items() if keep_items is None or i in keep_items}
             for u, row in r.items() if u in keep_users}
    items = sorted({i for row in r.values() for i in row})
    for u in sorted(r):
        for i in items:
            print(f"{{{u}, {i}, {predict(r, u, i, k)!r}}},")
    print("# similarities")
    for a in sorted(r):
        for b in sorted(r):
            if a < b:
                print(f"{{{a}, {b}, {cosine(r[a], r[b])!r}}},")
