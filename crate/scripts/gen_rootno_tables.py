#!/usr/bin/env python3
"""Build the local root number tables for p = 2 and p = 3.

Requires cypari2 (e.g. `pip install passagemath-pari`). Each row maps an
invariant key of the minimal model at p to the local root number that PARI
reports. Keys:

  pg,v4,v6,vd,c4u,c6u,w   potentially good reduction
  pm,v4,v6,-,c4u,c6u,w    potentially multiplicative reduction

v4, v6, vd are p-adic valuations of c4, c6, disc of the minimal model. A
valuation of c4 at least vd//3 + CAP (or c4 = 0) is written `inf`, same for
c6 with vd//2 + CAP. c4u, c6u are the unit parts reduced mod M (64 at 2,
27 at 3), canonicalised as the lexicographic minimum of (c4u*u^4, c6u*u^6)
over units u mod M. Keys with an `inf` valuation carry residue 0.

Usage: gen_rootno_tables.py OUTDIR
"""
import hashlib
import random
import sys

import cypari2

CAP = 6
MOD = {2: 64, 3: 27}
INF = None

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)


def val(x, p):
    if x == 0:
        return INF
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def unit(x, p):
    if x == 0:
        return 0
    while x % p == 0:
        x //= p
    return x


def canon(p, a, b):
    m = MOD[p]
    best = None
    for u in range(1, m):
        if u % p == 0:
            continue
        c = (a * pow(u, 4, m) % m, b * pow(u, 6, m) % m)
        if best is None or c < best:
            best = c
    return best


def key(p, c4, c6, disc):
    m = MOD[p]
    v4, v6, vd = val(c4, p), val(c6, p), val(disc, p)
    a, b = unit(c4, p) % m, unit(c6, p) % m
    if v4 is not INF and 3 * v4 < vd:
        a, b = canon(p, a, b)
        return ("pm", v4, v6, INF, a, b)
    if v4 is INF or v4 >= vd // 3 + CAP:
        v4, a = INF, 0
    if v6 is INF or v6 >= vd // 2 + CAP:
        v6, b = INF, 0
    a, b = canon(p, a, b)
    return ("pg", v4, v6, vd, a, b)


def sample(p, ai, table):
    e = pari.ellinit(ai)
    if len(e) == 0:
        return
    red = pari.elllocalred(e, p)
    if int(red[0]) < 2:
        return
    k = val(int(red[2][0]), p)
    c4 = int(e[9]) // p ** (4 * k)
    c6 = int(e[10]) // p ** (6 * k)
    disc = int(e[11]) // p ** (12 * k)
    w = int(pari.ellrootno(e, p))
    kk = key(p, c4, c6, disc)
    if table.setdefault(kk, w) != w:
        raise SystemExit(f"inconsistent key {kk} at p={p}")


def build(p):
    rng = random.Random(20240 + p)
    table = {}
    for a in range(-300, 301):
        for b in range(-300, 301):
            if val(a, p) is not INF and val(a, p) >= 4 and (b == 0 or val(b, p) >= 6):
                continue
            sample(p, [0, 0, 0, a, b], table)
    for _ in range(400000):
        a = rng.randint(-10**6, 10**6) * p ** rng.randint(0, 5)
        b = rng.randint(-10**6, 10**6) * p ** rng.randint(0, 8)
        if rng.random() < 0.3:
            t = rng.randint(-1000, 1000)
            a = -3 * t * t + p ** rng.randint(2, 12) * rng.randint(-5, 5)
            b = 2 * t**3 + p ** rng.randint(2, 14) * rng.randint(-5, 5)
        sample(p, [0, 0, 0, a, b], table)
    for _ in range(200000):
        ai = [rng.randint(-50, 50) * p ** rng.randint(0, i + 1) for i in (1, 2, 3, 4, 6)]
        sample(p, ai, table)
    return table


def fmt(v):
    return "inf" if v is INF else str(v)


def main():
    out = sys.argv[1]
    for p in (2, 3):
        table = build(p)
        rows = sorted(table.items(), key=lambda kv: tuple(-1 if x is INF else x for x in kv[0][1:]) + (kv[0][0],))
        lines = ["class,v4,v6,vd,c4u,c6u,w"]
        for (cls, v4, v6, vd, a, b), w in rows:
            lines.append(f"{cls},{fmt(v4)},{fmt(v6)},{'-' if vd is INF else vd},{a},{b},{w}")
        data = ("\n".join(lines) + "\n").encode()
        with open(f"{out}/rootno_{p}.csv", "wb") as fh:
            fh.write(data)
        print(p, len(rows), hashlib.sha256(data).hexdigest())


if __name__ == "__main__":
    main()
