"""Plot a compare_P.csv written by `murmur run` or `murmur compare`.

usage: python scripts/plot_compare.py out/tiny/compare_1.csv [out.png]
"""

import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    src = sys.argv[1]
    dst = sys.argv[2] if len(sys.argv) > 2 else src.rsplit(".", 1)[0] + ".png"
    with open(src) as f:
        rows = list(csv.DictReader(f))
    u = [float(r["u_mid"]) for r in rows]
    plt.figure(figsize=(12, 4))
    plt.scatter(u, [float(r["lhs"]) for r in rows], s=2, color="purple", label="LHS")
    plt.plot(u, [float(r["rhs"]) for r in rows], color="green", label="RHS'")
    plt.axhline(0, color="grey", lw=0.5)
    plt.xlabel("n / N")
    plt.legend()
    plt.tight_layout()
    plt.savefig(dst, dpi=150)
    print(dst)


if __name__ == "__main__":
    main()
