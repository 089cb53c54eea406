#!/usr/bin/env python3
"""Write conductor / root number fixtures for every curve y^2 = x^3 + Ax + B
with naive height max(4|A|^3, 27B^2) <= BOUND that is minimal and nonsingular.

Requires cypari2 (e.g. `pip install passagemath-pari`).

Outputs:
  reduction_h10000.csv  A,B,N,eps
  local_h10000.csv      A,B,p,kind,exponent   kind in good/split/nonsplit/additive

  reduction_random.csv  A,B,N,eps for 600 random seeds with H <= 10^12
                        (written when BOUND is `random`)

Usage: gen_reduction_fixture.py OUTDIR [BOUND | random]
"""
import sys

import cypari2

pari = cypari2.Pari()


def minimal(a, b):
    for p in range(2, 1000):
        if all(p % q for q in range(2, p)):
            if a % p**4 == 0 and b % p**6 == 0:
                return False
    return True


def random_batch(out):
    import random

    rng = random.Random(7)
    lines = ["A,B,N,eps"]
    while len(lines) <= 600:
        a = rng.randint(-6299, 6299) * rng.choice([1, 1, 2, 4, 8, 3, 9])
        b = rng.randint(-192450, 192450) * rng.choice([1, 1, 2, 8, 32, 3, 27])
        if max(4 * abs(a) ** 3, 27 * b * b) > 10**12:
            continue
        if 4 * a**3 + 27 * b**2 == 0 or not minimal(a, b):
            continue
        e = pari.ellinit([0, 0, 0, a, b])
        n = int(pari.ellglobalred(e)[0])
        lines.append(f"{a},{b},{n},{int(pari.ellrootno(e))}")
    with open(f"{out}/reduction_random.csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main():
    out = sys.argv[1]
    if len(sys.argv) > 2 and sys.argv[2] == "random":
        random_batch(out)
        return
    bound = int(sys.argv[2]) if len(sys.argv) > 2 else 10000
    amax = 0
    while 4 * (amax + 1) ** 3 <= bound:
        amax += 1
    bmax = 0
    while 27 * (bmax + 1) ** 2 <= bound:
        bmax += 1
    glob = ["A,B,N,eps"]
    loc = ["A,B,p,kind,exponent"]
    for a in range(-amax, amax + 1):
        for b in range(-bmax, bmax + 1):
            if (a, b) == (0, 0) or 4 * a**3 + 27 * b**2 == 0 or not minimal(a, b):
                continue
            e = pari.ellinit([0, 0, 0, a, b])
            n = int(pari.ellglobalred(e)[0])
            glob.append(f"{a},{b},{n},{int(pari.ellrootno(e))}")
            for p in [int(q) for q in pari.factor(n)[0]]:
                f = int(pari.elllocalred(e, p)[0])
                if f >= 2:
                    kind = "additive"
                else:
                    kind = "split" if int(pari.ellap(e, p)) == 1 else "nonsplit"
                loc.append(f"{a},{b},{p},{kind},{f}")
    with open(f"{out}/reduction_h{bound}.csv", "w") as fh:
        fh.write("\n".join(glob) + "\n")
    with open(f"{out}/local_h{bound}.csv", "w") as fh:
        fh.write("\n".join(loc) + "\n")
    print(len(glob) - 1, "curves")


if __name__ == "__main__":
    main()
