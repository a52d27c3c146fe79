#!/usr/bin/env python3
"""Print the dyadic subfield table for Q8 with per-vertex field tags."""

import sys

from bttwist import enumerate as counting


def main():
    data = counting.table1()
    print(f"integral forms of Q8 over the full dyadic tower: "
          f"{data['total']}\n")
    print(f"{'field':>22}  e  f  count")
    for r in sorted(data["rows"], key=lambda r: (len(r["field"]), r["field"])):
        name = "Q2(" + ",".join(f"sqrt{d}" for d in r["field"]) + ")"
        print(f"{name:>22}  {r['e']}  {r['f']}  {r['count']:>5}")
    print("\nsingleton intersections between ramified classes:")
    for (a, b), n in sorted(data["cross_table"].items()):
        print(f"  |IF(sqrt {a:>2}) & IF(sqrt {b:>2})| = {n}")
    quads = data["summary"]["quadratic_counts"]
    quarts = data["summary"]["quartic_counts"]
    print(f"\nsummary: quadratics {quads}, quartics {quarts}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
