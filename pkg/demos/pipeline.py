"""Walk one instance through the whole pipeline.

Builds T[3,2], compiles φ(T[3,2]) with imbalanced AND nodes, follows the
mainstream path of one sampled model, and extracts a target triple from the
order in which that path reads variables.
"""

import numpy as np

from dnnflab import build_thk, compile_cnf, encode_cnf, validate, SizeClass, mainstream_path
from dnnflab.instances import vertex_id
from dnnflab.permwidth import Permutation, analyze, anchor_h0
from dnnflab.probability import sample_model

H, K, THETA = 3, 2, 3


def main():
    g = build_thk(H, K)
    print(f"T[{H},{K}]: {len(g.vertices)} vertices, {g.num_edges()} edges")

    b = compile_cnf(encode_cnf(g), theta=THETA)
    sc = SizeClass(THETA)
    print(f"circuit: {len(b)} nodes, valid at theta={THETA}: {validate(b, sc).ok}")

    model = sample_model(g, np.random.default_rng(0))
    index = b.var_of_name()
    p = mainstream_path(b, {index[v]: x for v, x in model.items()}, sc)
    head = [b.name(x) for x in p.order]
    print(f"mainstream path reads {len(head)} variables and ends at node {p.end}")

    perm = Permutation.complete(g, head)
    res = analyze(perm, THETA, anchor_h0(K, THETA), H)
    print(f"branch {res.branch}, prefix length {res.prefix_len}, rank {res.rank}")
    t = res.triple
    print("U0 =", sorted(vertex_id(v) for v in t.U0))
    print("all conditions hold:", res.report.ok)


if __name__ == "__main__":
    main()
