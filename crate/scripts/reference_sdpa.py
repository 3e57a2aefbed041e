#!/usr/bin/env python3
"""Solve SDPA sparse files (.dat-s) with an independent conic solver.

Reads the dual-form problems written by `lastiter export-sdpa`:

    maximize  Tr(F0 Y)   s.t.  Tr(Fi Y) = ci,  Y = diag(Y1, Y2) >= 0,

where Y1 is a dense PSD block and Y2 (if present) a nonnegative diagonal
block. Prints one line per file: name, optimal value, solver status.

usage: reference_sdpa.py FILE... [--solver CLARABEL|SCS] [--json]
"""

import argparse
import json
import sys

import cvxpy as cp
import numpy as np


def read_sdpa(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line[0] in '"*':
                continue
            rows.append(line.replace(",", " ").replace("{", " ").replace("}", " ")
                        .replace("(", " ").replace(")", " "))
    m = int(rows[0].split()[0])
    nblock = int(rows[1].split()[0])
    sizes = [int(t) for t in rows[2].split()[:nblock]]
    c = np.array([float(t) for t in rows[3].split()])
    assert len(c) == m, "rhs length"
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for line in rows[4:]:
        k, b, i, j, v = line.split()
        k, b, i, j, v = int(k), int(b) - 1, int(i) - 1, int(j) - 1, float(v)
        mats[k][b][i, j] = v
        mats[k][b][j, i] = v
    return c, sizes, mats


def solve(path, solver):
    c, sizes, mats = read_sdpa(path)
    blocks = []
    for s in sizes:
        if s > 0:
            blocks.append(cp.Variable((s, s), PSD=True))
        else:
            blocks.append(cp.Variable(-s, nonneg=True))

    def tr(k):
        terms = []
        for b, s in enumerate(sizes):
            a = mats[k][b]
            if not a.any():
                continue
            if s > 0:
                terms.append(cp.trace(a @ blocks[b]))
            else:
                terms.append(np.diag(a) @ blocks[b])
        return sum(terms) if terms else 0

    cons = [tr(k + 1) == c[k] for k in range(len(c))]
    prob = cp.Problem(cp.Maximize(tr(0)), cons)
    opts = {}
    if solver == "CLARABEL":
        opts = dict(tol_gap_abs=1e-9, tol_gap_rel=1e-9, tol_feas=1e-9, max_iter=500)
    elif solver == "SCS":
        opts = dict(eps=1e-9, max_iters=200000)
    prob.solve(solver=solver, **opts)
    return prob.value, prob.status


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("files", nargs="+")
    ap.add_argument("--solver", default="CLARABEL")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    out = {}
    for f in args.files:
        value, status = solve(f, args.solver)
        out[f] = {"value": value, "status": status}
        if not args.json:
            print(f"{f}\t{value:.12e}\t{status}")
    if args.json:
        json.dump(out, sys.stdout, indent=2)
        print()


if __name__ == "__main__":
    main()
