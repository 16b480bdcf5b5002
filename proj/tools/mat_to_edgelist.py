#!/usr/bin/env python3
"""Convert a .mat network (sparse 'network' adjacency, optional 'group' label
matrix) into the edge-list and label files read by `infwalk preprocess`."""
import argparse

import scipy.io
import scipy.sparse as sp


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("mat")
    ap.add_argument("--edges", required=True)
    ap.add_argument("--labels")
    args = ap.parse_args()

    data = scipy.io.loadmat(args.mat)
    adj = sp.triu(sp.csr_matrix(data["network"]), k=1).tocoo()
    with open(args.edges, "w") as f:
        for u, v, w in zip(adj.row, adj.col, adj.data):
            if w != 0:
                f.write(f"{u} {v} {float(w)!r}\n")

    if args.labels:
        groups = sp.coo_matrix(data["group"])
        with open(args.labels, "w") as f:
            for node, label in sorted(zip(groups.row, groups.col)):
                f.write(f"{node} {label}\n")


if __name__ == "__main__":
    main()
