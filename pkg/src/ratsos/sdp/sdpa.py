"""SDPA sparse format (.dat-s) and CSDP/SDPA-style solution files.

SDPA problems read  max F0.Y  s.t.  Fi.Y = ci,  Y psd.  Our primal
min C.X s.t. Ai.X = bi is written with F0 = -C, Fi = Ai, c = b, so that a
solver in that convention returns our X as its Y.
"""

from __future__ import annotations

import re

import numpy as np

from .instance import SDPInstance

_NUM = "{:.17g}"


def _fmt(v: float) -> str:
    return _NUM.format(v)


def _entries(block: np.ndarray):
    if block.ndim == 1:
        for i, v in enumerate(block):
            if v != 0:
                yield i, i, v
        return
    n = block.shape[0]
    for i in range(n):
        for j in range(i, n):
            if block[i, j] != 0:
                yield i, j, block[i, j]


def write_sdpa_sparse(p: SDPInstance) -> bytes:
    lines = [str(p.m), str(len(p.block_sizes)), " ".join(str(s) for s in p.block_sizes),
             " ".join(_fmt(v) for v in p.b)]
    for k, c in enumerate(p.C):
        for i, j, v in _entries(-c):
            lines.append(f"0 {k + 1} {i + 1} {j + 1} {_fmt(v)}")
    for r in range(p.m):
        for k, a in enumerate(p.A):
            for i, j, v in _entries(a[r]):
                lines.append(f"{r + 1} {k + 1} {i + 1} {j + 1} {_fmt(v)}")
    return ("\n".join(lines) + "\n").encode()


def _data_lines(text: str):
    for line in text.splitlines():
        s = line.strip()
        if s.startswith('"') or s.startswith("*"):
            continue
        yield s


def _numbers(line: str) -> list[str]:
    return [t for t in re.split(r"[\s,{}()]+", line) if t]


def parse_sdpa_sparse(data: bytes | str) -> SDPInstance:
    text = data.decode() if isinstance(data, bytes) else data
    lines = list(_data_lines(text))
    if len(lines) < 3:
        raise ValueError("truncated SDPA file")
    try:
        m = int(_numbers(lines[0])[0])
        nblocks = int(_numbers(lines[1])[0])
        sizes = [int(float(t)) for t in _numbers(lines[2])][:nblocks]
    except (IndexError, ValueError) as exc:
        raise ValueError(f"bad SDPA header: {exc}") from None
    if len(sizes) != nblocks:
        raise ValueError("block size line does not match block count")
    rest = lines[3:]
    b_vals: list[float] = []
    while len(b_vals) < m:
        if not rest:
            raise ValueError("missing right-hand side entries")
        b_vals += [float(t) for t in _numbers(rest.pop(0))]
    if m == 0 and rest and rest[0] == "":
        rest.pop(0)
    p = SDPInstance.empty(sizes, m)
    p.b[:] = b_vals[:m]
    for line in rest:
        if not line:
            continue
        tok = _numbers(line)
        if len(tok) != 5:
            raise ValueError(f"bad entry line {line!r}")
        mat, blk, i, j = (int(t) for t in tok[:4])
        v = float(tok[4])
        blk -= 1
        i -= 1
        j -= 1
        if not 0 <= blk < nblocks or not 0 <= mat <= m:
            raise ValueError(f"entry out of range: {line!r}")
        target = p.C[blk] if mat == 0 else p.A[blk][mat - 1]
        if mat == 0:
            v = -v
        if sizes[blk] < 0:
            if i != j:
                raise ValueError("off-diagonal entry in a diagonal block")
            target[i] = v
        else:
            target[i, j] = v
            target[j, i] = v
    return p


def parse_solution(data: bytes | str, p: SDPInstance):
    """(y, Z, X) from a solver output file in our sign convention.

    Layout: the y vector, then ``matno blockno i j value`` lines with
    matno 1 for the dual slack and 2 for the primal matrix.
    """
    text = data.decode() if isinstance(data, bytes) else data
    lines = [l for l in _data_lines(text) if l]
    if not lines:
        raise ValueError("empty solution file")
    y = np.array([float(t) for t in _numbers(lines[0])])
    if y.size != p.m:
        raise ValueError(f"solution has {y.size} dual values, expected {p.m}")
    Z = [np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in p.block_sizes]
    X = [np.zeros((s, s)) if s > 0 else np.zeros(-s) for s in p.block_sizes]
    for line in lines[1:]:
        tok = _numbers(line)
        if len(tok) != 5:
            raise ValueError(f"bad solution line {line!r}")
        mat, blk, i, j = (int(t) for t in tok[:4])
        v = float(tok[4])
        if mat not in (1, 2) or not 1 <= blk <= len(p.block_sizes):
            raise ValueError(f"bad solution line {line!r}")
        target = (Z if mat == 1 else X)[blk - 1]
        if target.ndim == 1:
            target[i - 1] = v
        else:
            target[i - 1, j - 1] = v
            target[j - 1, i - 1] = v
    # solver's y multiplies F_i in  sum y_i F_i - F0 = Z, i.e. ours negated
    return -y, Z, X


def format_solution(y, Z, X) -> bytes:
    """Solution text in the layout read by :func:`parse_solution` (our y given)."""
    lines = [" ".join(_fmt(-v) for v in y)]
    for mat, blocks in ((1, Z), (2, X)):
        for k, blk in enumerate(blocks):
            for i, j, v in _entries(np.asarray(blk)):
                lines.append(f"{mat} {k + 1} {i + 1} {j + 1} {_fmt(v)}")
    return ("\n".join(lines) + "\n").encode()
