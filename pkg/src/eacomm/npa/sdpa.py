"""SDPA sparse (``.dat-s``) export and import.

SDPA solves ``minimize sum_k c_k x_k`` subject to
``sum_k F_k x_k - F_0 >= 0``.  Our problems maximize ``c.z`` over
``G0 + sum_k z_k G_k >= 0``, so the file carries ``-c``, ``F_0 = -G0`` and
``F_k = G_k``.  The constant objective offset, which the format cannot
express, travels in a ``*``-comment header line.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .moments import SdpProblem


def _fmt(v: float) -> str:
    return "%.17g" % (v + 0.0)  # no negative zeros


def _upper_entries(mat: np.ndarray | sp.spmatrix):
    coo = sp.coo_matrix(mat)
    keep = (coo.row <= coo.col) & (coo.data != 0)
    order = np.lexsort((coo.col[keep], coo.row[keep]))
    return coo.row[keep][order], coo.col[keep][order], coo.data[keep][order]


def write_sdpa(problem: SdpProblem, path: str | Path) -> Path:
    path = Path(path)
    n, m = problem.size, problem.n_variables
    lines = [
        "* maximize c.z + offset s.t. G0 + sum z_k G_k >= 0, written in SDPA sign convention",
        f"* offset {_fmt(problem.offset)}",
        str(m),
        "1",
        str(n),
        " ".join(_fmt(-v) for v in problem.c) if m else "",
    ]
    for i, j, v in zip(*_upper_entries(-problem.G0)):
        lines.append(f"0 1 {i + 1} {j + 1} {_fmt(v)}")
    G = problem.G.tocsr()
    for k in range(m):
        lo, hi = G.indptr[k], G.indptr[k + 1]
        idx, vals = G.indices[lo:hi], G.data[lo:hi]
        rows, cols = idx // n, idx % n
        keep = rows <= cols
        for i, j, v in sorted(zip(rows[keep], cols[keep], vals[keep])):
            if v != 0:
                lines.append(f"{k + 1} 1 {i + 1} {j + 1} {_fmt(v)}")
    path.write_text("\n".join(lines) + "\n")
    return path


export_sdpa = write_sdpa


def read_sdpa(path: str | Path) -> SdpProblem:
    """Parse a single-block ``.dat-s`` file back into an :class:`SdpProblem`."""
    offset = 0.0
    body = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line.startswith("*") or line.startswith('"'):
            parts = line.lstrip('*"').split()
            if len(parts) == 2 and parts[0] == "offset":
                offset = float(parts[1])
            continue
        body.append(line)
    for ch in ",{}()":
        body = [b.replace(ch, " ") for b in body]
    m = int(body[0].split()[0])
    nblocks = int(body[1].split()[0])
    if nblocks != 1:
        raise ValueError("only single-block problems are supported")
    n = int(body[2].split()[0])
    c_tokens: list[str] = []
    pos = 3
    while len(c_tokens) < m:
        c_tokens += body[pos].split()
        pos += 1
    if m == 0 and pos < len(body) and not body[pos]:
        pos += 1
    c = -np.array([float(t) for t in c_tokens[:m]])
    G0 = np.zeros((n, n))
    rows, cols, vals = [], [], []
    for line in body[pos:]:
        if not line:
            continue
        k, blk, i, j, v = line.split()[:5]
        k, i, j, v = int(k), int(i) - 1, int(j) - 1, float(v)
        if int(blk) != 1:
            raise ValueError("only single-block problems are supported")
        if k == 0:
            G0[i, j] = G0[j, i] = -v
        else:
            rows.append(k - 1)
            cols.append(i * n + j)
            vals.append(v)
            if i != j:
                rows.append(k - 1)
                cols.append(j * n + i)
                vals.append(v)
    G = sp.csr_matrix((vals, (rows, cols)), shape=(m, n * n))
    G.sort_indices()
    return SdpProblem(G0, G, c, offset)
