"""Non-backtracking matrix construction and eigenvalue fingerprints.

The non-backtracking matrix B of a graph with m undirected edges is the
2m x 2m 0/1 matrix over directed edges with a 1 at (row k->l, col u->v)
iff v = k and u != l, i.e. the walker continues without backtracking.
Its eigenvalues other than +-1 are shared with the 2n x 2n block matrix

    B' = [ A  I-D ]
         [ I   0  ]

which is what we eigensolve in practice: it is much smaller and its
sparsity does not grow with the second moment of the degree distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .graph import Graph, shave

DEFAULT_TOL = 1e-8
DEFAULT_DENSE_THRESHOLD = 2000
DEFAULT_MAX_RESTARTS = 1000


class SolverError(RuntimeError):
    """Iterative eigensolver failed to converge to the requested residual."""

    def __init__(self, message: str, achieved_residual: float | None = None):
        self.achieved_residual = achieved_residual
        super().__init__(message)


@dataclass(frozen=True)
class Fingerprint:
    """The r largest-magnitude eigenvalues of a graph's B', sorted.

    Sort order: descending magnitude, ties by descending real part, then
    descending imaginary part.  Padded with 0+0j when the shaved graph
    supplies fewer than r eigenvalues (trees have none).
    """

    eigs: np.ndarray
    r: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        eigs = np.asarray(self.eigs, dtype=complex)
        if eigs.shape != (self.r,):
            raise ValueError(f"expected {self.r} eigenvalues, got shape {eigs.shape}")
        object.__setattr__(self, "eigs", eigs)
        eigs.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self.r == other.r and np.array_equal(self.eigs, other.eigs)


def directed_edge_index(g: Graph) -> dict[tuple[int, int], int]:
    """Deterministic bijection from directed edges (u, v) to 0..2m-1.

    Ordering is lexicographic in original node ids, so the index (and
    hence B) depends only on the graph, not on construction history.
    """
    idx = {}
    k = 0
    for u in g.node_ids:
        for v in g.neighbors(u):
            idx[(u, v)] = k
            k += 1
    return idx


def build_nb_matrix(g: Graph, count_ops: bool = False):
    """Build the 2m x 2m non-backtracking matrix B in COO form.

    Single pass over the adjacency structure: for each node v, every pair
    of an in-edge u->v and an out-edge v->w with w != u yields one entry.
    nnz(B) = n(<k^2> - <k>) exactly.  With ``count_ops`` also return the
    inner-loop iteration count (O(m + sum_v deg(v)^2)).
    """
    idx = directed_edge_index(g)
    rows: list[int] = []
    cols: list[int] = []
    ops = 0
    for v in g.node_ids:
        nbrs = g.neighbors(v)
        for u in nbrs:
            col = idx[(u, v)]
            for w in nbrs:
                ops += 1
                if w == u:
                    continue
                rows.append(idx[(v, w)])
                cols.append(col)
    dim = 2 * g.m
    mat = sparse.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(dim, dim))
    if count_ops:
        return mat, ops
    return mat


def build_ihara_matrix(g: Graph) -> sparse.coo_matrix:
    """Build the 2n x 2n block matrix B' = [[A, I-D], [I, 0]] in COO form."""
    n = g.n
    if n == 0:
        return sparse.coo_matrix((0, 0))
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for u in g.node_ids:
        i = g.index(u)
        for v in g.neighbors(u):
            rows.append(i)
            cols.append(g.index(v))
            vals.append(1.0)
    deg = g.degrees()
    for i in range(n):
        # top-right block I - D
        rows.append(i)
        cols.append(n + i)
        vals.append(1.0 - float(deg[i]))
        # bottom-left block I
        rows.append(n + i)
        cols.append(i)
        vals.append(1.0)
    return sparse.coo_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))


def sort_spectrum(vals: np.ndarray, tie_tol: float = 1e-7) -> np.ndarray:
    """Sort descending by magnitude, ties by descending Re, then descending Im.

    Magnitude ties are ubiquitous (conjugate pairs, roots of unity) but
    only equal up to floating-point noise, so magnitudes within
    ``tie_tol`` (relative) of each other are chained into one group
    before the Re/Im tie-break is applied.
    """
    vals = np.asarray(vals, dtype=complex)
    if len(vals) == 0:
        return vals
    mags = np.abs(vals)
    order = np.argsort(-mags, kind="stable")
    vals, mags = vals[order], mags[order]
    out = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i < len(vals) and mags[i - 1] - mags[i] <= tie_tol * max(1.0, mags[i - 1]):
            continue
        out.extend(_tie_break(vals[start:i], tie_tol))
        start = i
    return np.array(out, dtype=complex)


def _tie_break(group, tie_tol: float) -> list[complex]:
    # within a magnitude group: descending Re (again with tolerance, since
    # repeated eigenvalues only agree up to noise), then descending Im
    group = sorted(group, key=lambda z: -z.real)
    out: list[complex] = []
    start = 0
    for i in range(1, len(group) + 1):
        if (i < len(group)
                and group[i - 1].real - group[i].real
                <= tie_tol * max(1.0, abs(group[i - 1].real))):
            continue
        out.extend(sorted(group[start:i], key=lambda z: -z.imag))
        start = i
    return out


def full_spectrum_dense(mat, dense_threshold: int = DEFAULT_DENSE_THRESHOLD) -> np.ndarray:
    """All eigenvalues of a (small) matrix by dense LAPACK solve.

    Residuals of each (value, recomputed vector) pair are checked against
    1e-8 * ||M||.  Refuses matrices above ``dense_threshold`` rows; use
    top_eigenvalues for those.
    """
    if sparse.issparse(mat):
        dense = mat.toarray()
    else:
        dense = np.asarray(mat, dtype=float)
    nrows = dense.shape[0]
    if nrows != dense.shape[1]:
        raise ValueError("matrix must be square")
    if nrows > dense_threshold:
        raise ValueError(
            f"matrix dimension {nrows} exceeds dense threshold {dense_threshold}; "
            "use top_eigenvalues for large matrices")
    if nrows == 0:
        return np.zeros(0, dtype=complex)
    vals, vecs = scipy.linalg.eig(dense)
    norm = np.linalg.norm(dense)
    if norm > 0:
        resid = np.linalg.norm(dense @ vecs - vecs * vals, axis=0)
        worst = float(resid.max())
        if worst > 1e-8 * norm:
            raise SolverError(
                f"dense eigensolve residual {worst:.3e} exceeds 1e-8*||M||",
                achieved_residual=worst)
    return vals


def top_eigenvalues(g: Graph, r: int, shave_first: bool = True,
                    tol: float = DEFAULT_TOL,
                    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
                    max_restarts: int = DEFAULT_MAX_RESTARTS) -> Fingerprint:
    """Fingerprint: r largest-magnitude eigenvalues of B' of the 2-core.

    Shaves first by default (degree-one nodes only contribute zero
    eigenvalues).  Dense solve when 2*n_shaved <= dense_threshold,
    otherwise implicitly-restarted Arnoldi with Ritz residual tolerance
    ``tol``.  Short spectra are zero-padded to length r.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    gs = shave(g) if shave_first else g
    dim = 2 * gs.n
    solver = "none"
    if dim == 0:
        vals = np.zeros(0, dtype=complex)
    elif dim <= dense_threshold or r >= dim - 4:
        solver = "dense"
        vals = full_spectrum_dense(build_ihara_matrix(gs), dense_threshold=max(dim, dense_threshold))
    else:
        solver = "arnoldi"
        vals = _arnoldi_top(build_ihara_matrix(gs).tocsr(), r, tol, max_restarts)
    vals = sort_spectrum(vals)[:r]
    if len(vals) < r:
        vals = np.concatenate([vals, np.zeros(r - len(vals), dtype=complex)])
    meta = {"n": g.n, "m": g.m, "n_shaved": gs.n, "m_shaved": gs.m,
            "solver": solver, "tol": tol}
    return Fingerprint(eigs=vals, r=r, meta=meta)


def _arnoldi_top(mat: sparse.csr_matrix, r: int, tol: float, max_restarts: int) -> np.ndarray:
    dim = mat.shape[0]
    # small buffer past r so a conjugate pair straddling the cut does not
    # depend on which member ARPACK reports
    # generous lookahead past r: ARPACK can miss members of tight
    # magnitude clusters at the cut, and the extra subspace also speeds
    # up convergence on gap-free bulk spectra
    k = min(r + max(10, r // 2), dim - 2)
    ncv = min(dim, max(3 * k + 1, 40))
    try:
        vals, vecs = spla.eigs(mat, k=k, which="LM", tol=tol, ncv=ncv,
                               maxiter=max_restarts)
    except spla.ArpackNoConvergence as exc:
        # the buffer past r may be the only unconverged part; the values
        # ARPACK does report are converged and usable if there are >= r
        vals, vecs = exc.eigenvalues, exc.eigenvectors
        achieved = None
        if len(vals):
            resid = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
            achieved = float((resid / np.maximum(np.abs(vals), 1.0)).max())
        if len(vals) < r or achieved is None or achieved > 100 * tol:
            raise SolverError(
                f"Arnoldi iteration did not converge within {max_restarts} restarts "
                f"({len(vals)}/{r} eigenvalues, achieved residual {achieved})",
                achieved_residual=achieved) from exc
        return vals
    resid = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
    scale = np.maximum(np.abs(vals), 1.0)
    worst = float((resid / scale).max())
    if worst > 100 * tol:
        raise SolverError(
            f"Ritz residual {worst:.3e} exceeds tolerance {tol:.1e}",
            achieved_residual=worst)
    return vals


def nb_cycle_count(g: Graph, k: int) -> int:
    """tr(B^k): the number of non-backtracking cycles of length k.

    Exact sparse matrix powering; meant as a test oracle on small graphs.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.m == 0:
        return 0
    b = build_nb_matrix(g).tocsr()
    p = b.copy()
    for _ in range(k - 1):
        p = p @ b
    return int(round(p.diagonal().sum()))


def triangle_count_spectral(spectrum) -> float:
    """Triangle count from the FULL spectrum of B: (1/6) sum a(a^2 - 3b^2)."""
    s = np.asarray(spectrum, dtype=complex)
    a, b = s.real, s.imag
    return float(np.sum(a * (a * a - 3 * b * b)) / 6.0)


def fingerprint_to_csv(fp: Fingerprint) -> str:
    """Serialize a fingerprint; 17 significant digits give bit-exact round trips."""
    meta = fp.meta
    header = ("# r={r} n={n} m={m} n2core={n2} m2core={m2} tol={tol:.17g}".format(
        r=fp.r, n=meta.get("n", 0), m=meta.get("m", 0),
        n2=meta.get("n_shaved", 0), m2=meta.get("m_shaved", 0),
        tol=meta.get("tol", DEFAULT_TOL)))
    lines = [header]
    lines.extend(f"{z.real:.17g},{z.imag:.17g}" for z in fp.eigs)
    return "\n".join(lines) + "\n"


def fingerprint_from_csv(text: str) -> Fingerprint:
    meta: dict = {}
    eigs: list[complex] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
            for key, name in (("n", "n"), ("m", "m"), ("n2core", "n_shaved"),
                              ("m2core", "m_shaved")):
                if key in fields:
                    meta[name] = int(fields[key])
            if "tol" in fields:
                meta["tol"] = float(fields["tol"])
            if "r" in fields:
                meta["r"] = int(fields["r"])
            continue
        re_s, im_s = line.split(",")
        eigs.append(complex(float(re_s), float(im_s)))
    r = meta.pop("r", len(eigs))
    if r != len(eigs):
        raise ValueError(f"header declares r={r} but file holds {len(eigs)} eigenvalues")
    return Fingerprint(eigs=np.array(eigs, dtype=complex), r=r, meta=meta)
