#!/usr/bin/env python3
"""Convert public benchmark releases into the plain-text dataset layout.

The library itself only reads ``edges.txt`` / ``features.csv`` /
``labels.txt``; this standalone script produces those files from the
common public release formats:

``planetoid``
    The ``ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index}`` pickles
    (Cora, CiteSeer, PubMed). Requires scipy to decode the pickled
    sparse matrices.
``npz``
    A single ``.npz`` with CSR arrays ``adj_*`` / ``attr_*`` and a
    ``labels`` vector (Amazon Photo, Coauthor CS releases).
``knn``
    A ``features.csv`` + ``labels.txt`` pair (e.g. COIL20 image vectors);
    builds the k-nearest-neighbor graph. ``--knn-weights distance``
    stores Euclidean distances as edge weights instead of 1.0.

Examples:
    python scripts/convert_planetoid.py planetoid --input raw/ --name cora --out data/cora
    python scripts/convert_planetoid.py npz --input amazon_photo.npz --out data/photo
    python scripts/convert_planetoid.py knn --input coil20/ --out data/coil20 --k 7
"""

from __future__ import annotations

import argparse
import os
import pickle
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lerp.data import Dataset, save_dataset  # noqa: E402
from lerp.graph import SparseGraph, knn_graph  # noqa: E402


def _read_pickle(path):
    with open(path, "rb") as fh:
        return pickle.load(fh, encoding="latin1")


def convert_planetoid(input_dir, name, out_dir):
    try:
        import scipy.sparse as sp
    except ImportError:
        sys.exit("the planetoid format stores pickled scipy matrices; "
                 "install scipy to convert it")

    def part(suffix):
        return os.path.join(input_dir, f"ind.{name}.{suffix}")

    x, tx, allx = (_read_pickle(part(s)) for s in ("x", "tx", "allx"))
    y, ty, ally = (_read_pickle(part(s)) for s in ("y", "ty", "ally"))
    graph = _read_pickle(part("graph"))
    test_index = np.loadtxt(part("test.index"), dtype=np.int64)

    # Test rows live at the listed indices; the released CiteSeer split
    # has gaps there (isolated test nodes), filled with zero rows.
    span = np.arange(test_index.min(), test_index.max() + 1)
    tx_full = sp.lil_matrix((span.size, allx.shape[1]))
    tx_full[test_index - span.min()] = tx
    ty_full = np.zeros((span.size, ty.shape[1]))
    ty_full[test_index - span.min()] = ty

    features = sp.vstack([allx, tx_full]).toarray()
    onehot = np.vstack([ally, ty_full])
    labels = onehot.argmax(axis=1)

    n = features.shape[0]
    pairs = set()
    for u, neighbors in graph.items():
        for v in neighbors:
            if u < n and v < n and u != v:
                pairs.add((min(u, v), max(u, v)))
    us = np.array([p[0] for p in sorted(pairs)], dtype=np.int64)
    vs = np.array([p[1] for p in sorted(pairs)], dtype=np.int64)
    dataset = Dataset(graph=SparseGraph.from_edges(n, us, vs),
                      features=features, labels=labels,
                      c=int(labels.max()) + 1, name=name)
    save_dataset(dataset, out_dir)
    return dataset


def convert_npz(path, out_dir):
    with np.load(path, allow_pickle=True) as raw:
        loader = dict(raw)
    n = int(loader["adj_shape"][0])
    indptr = loader["adj_indptr"].astype(np.int64)
    indices = loader["adj_indices"].astype(np.int64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    # Symmetrize by union and drop self loops; releases may store
    # either one or both directions of an edge.
    off = rows != indices
    lo = np.minimum(rows[off], indices[off])
    hi = np.maximum(rows[off], indices[off])
    pairs = np.unique(lo * n + hi)
    graph = SparseGraph.from_edges(n, pairs // n, pairs % n)

    d = int(loader["attr_shape"][1])
    features = np.zeros((n, d))
    attr_rows = np.repeat(np.arange(n), np.diff(loader["attr_indptr"]))
    features[attr_rows, loader["attr_indices"]] = loader["attr_data"]
    labels = loader["labels"].astype(np.int64)
    name = os.path.splitext(os.path.basename(path))[0]
    dataset = Dataset(graph=graph, features=features, labels=labels,
                      c=int(labels.max()) + 1, name=name)
    save_dataset(dataset, out_dir)
    return dataset


def convert_knn(input_dir, out_dir, k, weights):
    features = np.loadtxt(os.path.join(input_dir, "features.csv"),
                          delimiter=",", comments="#", ndmin=2)
    labels = np.loadtxt(os.path.join(input_dir, "labels.txt"),
                        comments="#", dtype=np.int64, ndmin=1)
    dataset = Dataset(graph=knn_graph(features, k, weights=weights),
                      features=features, labels=labels,
                      c=int(labels.max()) + 1,
                      name=os.path.basename(os.path.normpath(input_dir)))
    save_dataset(dataset, out_dir)
    return dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="format", required=True)

    p = sub.add_parser("planetoid")
    p.add_argument("--input", required=True, help="directory with ind.* files")
    p.add_argument("--name", required=True, help="cora, citeseer, or pubmed")
    p.add_argument("--out", required=True)

    p = sub.add_parser("npz")
    p.add_argument("--input", required=True, help=".npz release file")
    p.add_argument("--out", required=True)

    p = sub.add_parser("knn")
    p.add_argument("--input", required=True,
                   help="directory with features.csv and labels.txt")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--knn-weights", choices=("unit", "distance"),
                   default="unit")

    args = parser.parse_args()
    if args.format == "planetoid":
        ds = convert_planetoid(args.input, args.name, args.out)
    elif args.format == "npz":
        ds = convert_npz(args.input, args.out)
    else:
        ds = convert_knn(args.input, args.out, args.k, args.knn_weights)
    print(f"wrote {args.out}: n={ds.n} classes={ds.c} "
          f"features={ds.features.shape[1]} entries={ds.graph.num_entries}")


if __name__ == "__main__":
    main()
