"""Distinct u(g) nodes and the union-bound sum for small T[h,2].

For each height the compiled circuit is sampled under the edge-orientation
distribution; the sum of carried-through estimates over the observed nodes
should be close to (and in exact arithmetic at least) 1.
"""

import sys

from dnnflab import build_thk, compile_cnf, distinct_nodes_ledger, encode_cnf

THETA, SAMPLES, SEED = 3, 300, 7


def main(heights):
    for h in heights:
        g = build_thk(h, 2)
        b = compile_cnf(encode_cnf(g), theta=THETA)
        s = distinct_nodes_ledger(b, g, THETA, SAMPLES, SEED).summary
        print(f"h={h}: {len(b)} nodes, distinct u(g) = {s['distinctNodes']}, "
              f"sum = {s['unionBoundSum']:.3f}, statuses = {s['statusCounts']}")


if __name__ == "__main__":
    main([int(x) for x in sys.argv[1:]] or [3, 4])
