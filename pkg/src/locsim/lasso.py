"""Post-LASSO locally simultaneous inference.

Pipeline: solve the LASSO at the observed outcome, represent its
model-sign selection event as a polyhedron, then flood-fill neighboring
model-sign regions until the sufficient-statistic box around X^T y is
tiled.  Simultaneous least-squares intervals are then corrected only over
the models discovered in the box.

Selection via the LASSO depends on y only through X^T y, so the screening
LPs and all quantile simulations are carried out in those coordinates
(dimension d instead of n); the public polyhedron remains in outcome space.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import chain, combinations

import numpy as np

from .lp import Polyhedron, constraint_nonredundant, lp_maximize
from .stats_core import DEFAULT_DRAWS, GaussianNoise, RngSpec, contrast_quantile_mc
from .theory_core import BudgetSplit
from .winner import IntervalSet

__all__ = [
    "Design",
    "ModelSignPair",
    "SuffStatBox",
    "ModelFrontier",
    "DegeneracyError",
    "SolverError",
    "lasso_solve",
    "selection_polyhedron",
    "safe_screening",
    "exact_screening",
    "enumerate_plausible_models",
    "posi_intervals",
    "marginal_screening_plausible",
    "column_max_quantile",
]

_RANK_TOL = 1e-8
_CD_TOL = 1e-10
_CD_MAX_SWEEPS = 100_000
_KKT_REL_TOL = 1e-6
_LP_EPS = 1e-9


class DegeneracyError(ValueError):
    """Rank-deficient submatrix where the selection event needs full rank."""


class SolverError(RuntimeError):
    """Coordinate descent failed to converge or violated its KKT check."""


@dataclass(frozen=True)
class ModelSignPair:
    """Canonical LASSO selection state: sorted support M and aligned signs."""

    M: tuple
    s: tuple

    def __post_init__(self):
        M = tuple(int(j) for j in self.M)
        s = tuple(int(v) for v in self.s)
        if len(M) != len(s):
            raise ValueError("signs must align with the support")
        if any(v not in (-1, 1) for v in s):
            raise ValueError("signs must be +-1")
        if any(M[i] >= M[i + 1] for i in range(len(M) - 1)):
            raise ValueError("support must be strictly increasing")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "s", s)

    def drop(self, j: int) -> "ModelSignPair":
        k = self.M.index(j)
        return ModelSignPair(self.M[:k] + self.M[k + 1:], self.s[:k] + self.s[k + 1:])

    def add(self, j: int, sign: int) -> "ModelSignPair":
        pos = 0
        while pos < len(self.M) and self.M[pos] < j:
            pos += 1
        return ModelSignPair(self.M[:pos] + (j,) + self.M[pos:],
                             self.s[:pos] + (sign,) + self.s[pos:])


@dataclass(frozen=True)
class SuffStatBox:
    """Sufficient-statistic neighborhood {y' : ||X^T y - X^T y'||_inf <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel()
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        object.__setattr__(self, "center", center)

    def polyhedron(self) -> Polyhedron:
        return Polyhedron.box(self.center, self.radius)


@dataclass(frozen=True)
class ModelFrontier:
    """State of the flood fill: visited pairs, pending queue, cap flag."""

    visited: frozenset
    queue: tuple
    capped: bool
    lp_count: int = 0
    safe_skips: int = 0

    def __post_init__(self):
        if set(self.queue) & set(self.visited):
            raise ValueError("visited and queued pairs must be disjoint")


class Design:
    """Fixed design matrix with cached Gram data.

    Submatrices used for inference must have full column rank; this is
    checked (singular-value tolerance 1e-8) whenever a model workspace is
    built, and violations raise DegeneracyError.
    """

    def __init__(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("design must be a 2-d array")
        if not np.all(np.isfinite(X)):
            raise ValueError("design entries must be finite")
        self.X = X
        self.XtX = X.T @ X
        self.column_norms = np.sqrt(np.diag(self.XtX))
        self._workspaces = {}
        self._gram_factor = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def gram_factor(self) -> np.ndarray:
        """Lower-triangular L with L L^T = X^T X (jitter retry on failure)."""
        if self._gram_factor is None:
            self._gram_factor = GaussianNoise(self.XtX).factor
        return self._gram_factor

    def workspace(self, M) -> dict:
        """Gram inverse and friends for a support M (cached per support)."""
        M = tuple(int(j) for j in M)
        if M in self._workspaces:
            return self._workspaces[M]
        if len(M) == 0:
            ws = {"M": M, "inv": np.zeros((0, 0)), "sv_min": np.inf}
        else:
            G = self.XtX[np.ix_(M, M)]
            eigs = np.linalg.eigvalsh(G)
            sv = np.sqrt(np.clip(eigs, 0.0, None))
            if sv[0] <= _RANK_TOL * sv[-1] or sv[0] == 0.0:
                raise DegeneracyError(f"rank-deficient submatrix for support {M}")
            ws = {"M": M, "inv": np.linalg.inv(G), "sv_min": sv[0]}
        self._workspaces[M] = ws
        return ws


def _soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def lasso_solve(design: Design, y, lam: float):
    """Solve 0.5 ||y - X b||^2 + lam ||b||_1 by cyclic coordinate descent.

    Works on the sufficient statistics (X^T X, X^T y); converges when the
    largest coordinate update falls below 1e-10.  The returned support and
    signs are KKT-verified; a failed check raises SolverError.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    y = np.asarray(y, dtype=float).ravel()
    if y.size != design.n:
        raise ValueError("y length does not match the design")
    G = design.XtX
    h = design.X.T @ y
    d = design.d
    beta = np.zeros(d)
    g_beta = np.zeros(d)  # G @ beta, maintained incrementally
    diag = np.diag(G)
    for _ in range(_CD_MAX_SWEEPS):
        delta_max = 0.0
        for j in range(d):
            if diag[j] <= 0.0:
                continue
            rho = h[j] - g_beta[j] + diag[j] * beta[j]
            new = _soft_threshold(rho, lam) / diag[j]
            if new != beta[j]:
                step = new - beta[j]
                g_beta += G[:, j] * step
                beta[j] = new
                delta_max = max(delta_max, abs(step))
        if delta_max < _CD_TOL:
            break
    else:
        raise SolverError(f"coordinate descent did not converge in {_CD_MAX_SWEEPS} sweeps")

    support = tuple(int(j) for j in np.flatnonzero(beta))
    signs = tuple(int(v) for v in np.sign(beta[list(support)]))
    pair = ModelSignPair(support, signs)
    design.workspace(support)  # full-rank check on X_M

    grad = h - g_beta
    tol = _KKT_REL_TOL * max(1.0, lam)
    for j in range(d):
        if j in support:
            sj = signs[support.index(j)]
            if abs(grad[j] - lam * sj) > tol:
                raise SolverError(f"KKT stationarity failed at active coordinate {j}")
        elif abs(grad[j]) > lam * (1.0 + _KKT_REL_TOL):
            raise SolverError(f"KKT bound failed at inactive coordinate {j}")
    return beta, pair


# ---------------------------------------------------------------------------
# Selection-event polyhedra
# ---------------------------------------------------------------------------

def _polyhedron_rows(design: Design, pair: ModelSignPair, lam: float,
                     suffstat: bool):
    """Rows (a, b, tag) of the selection polyhedron for a model-sign pair.

    With suffstat=True the rows act on u = X^T y (a has length d); otherwise
    they act on y itself.  Tags name the pair across each face:
    ("enter", j, sign) for inactive-variable rows, ("leave", j) for active.
    """
    M, s = list(pair.M), np.asarray(pair.s, dtype=float)
    d = design.d
    Mc = [j for j in range(d) if j not in pair.M]
    inv = design.workspace(pair.M)["inv"]
    X = design.X
    rows = []
    if M:
        XM = X[:, M]
        inv_XMt = inv @ XM.T                      # (|M|, n)
        g_cross = design.XtX[np.ix_(Mc, M)]       # X_Mc^T X_M
        c = g_cross @ (inv @ s)                   # X_Mc^T (X_M^T)^+ s
    for pos, j in enumerate(Mc):
        if suffstat:
            a = np.zeros(d)
            a[j] = 1.0 / lam
            if M:
                a[M] = -(g_cross[pos] @ inv) / lam
        else:
            resid_dir = X[:, j] - (XM @ (inv @ (XM.T @ X[:, j]))) if M else X[:, j]
            a = resid_dir / lam
        offset = 1.0 - (c[pos] if M else 0.0)
        rows.append((a, offset, ("enter", j, +1)))
        rows.append((-a, 2.0 - offset, ("enter", j, -1)))
    for pos, j in enumerate(M):
        if suffstat:
            a = np.zeros(d)
            a[M] = -s[pos] * inv[pos]
        else:
            a = -s[pos] * inv_XMt[pos]
        b = -lam * s[pos] * float(inv[pos] @ s)
        rows.append((a, b, ("leave", j)))
    return rows


def selection_polyhedron(design: Design, pair: ModelSignPair, lam: float) -> Polyhedron:
    """Outcome-space polyhedron {y : the LASSO at y selects exactly (M, s)}.

    Row order: inactive variables ascending with the (+) row then the (-)
    row, followed by one row per active variable in support order.  All
    rows are open (strict) inequalities.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    rows = _polyhedron_rows(design, pair, lam, suffstat=False)
    plus = [r for r in rows if r[2][0] == "enter" and r[2][2] == +1]
    minus = [r for r in rows if r[2][0] == "enter" and r[2][2] == -1]
    leave = [r for r in rows if r[2][0] == "leave"]
    ordered = plus + minus + leave
    A = np.array([r[0] for r in ordered]) if ordered else np.zeros((0, design.n))
    b = np.array([r[1] for r in ordered])
    return Polyhedron(A, b, np.ones(len(ordered), dtype=bool))


# ---------------------------------------------------------------------------
# Screening rules
# ---------------------------------------------------------------------------

def _local_solution(design: Design, y, pair: ModelSignPair, lam: float) -> np.ndarray:
    """Locally linear LASSO solution for the pair, extrapolated to y."""
    if not pair.M:
        return np.zeros(0)
    inv = design.workspace(pair.M)["inv"]
    XM = design.X[:, list(pair.M)]
    return inv @ (XM.T @ np.asarray(y, dtype=float) - lam * np.asarray(pair.s, dtype=float))


def safe_screening(design: Design, y, pair: ModelSignPair, lam: float, s_nu: float):
    """Closed-form sufficient screening over the sufficient-statistic box.

    Returns (safe_in, safe_out): active variables that cannot exit the model
    in any neighboring region within the box, and inactive variables that
    cannot enter.
    """
    if s_nu < 0:
        raise ValueError("s_nu must be nonnegative")
    M = list(pair.M)
    d = design.d
    Mc = [j for j in range(d) if j not in pair.M]
    beta_loc = _local_solution(design, y, pair, lam)
    if M:
        inv = design.workspace(pair.M)["inv"]
        XM = design.X[:, M]
        resid = np.asarray(y, dtype=float) - XM @ beta_loc
        cross = design.XtX[np.ix_(Mc, M)] @ inv    # X_Mc^T X_M (X_M^T X_M)^{-1}
        cross_l1 = np.abs(cross).sum(axis=1)
        inv_l1 = np.abs(inv).sum(axis=1)
        safe_in = {M[k] for k in range(len(M))
                   if abs(beta_loc[k]) > s_nu * inv_l1[k]}
    else:
        resid = np.asarray(y, dtype=float)
        cross_l1 = np.zeros(len(Mc))
        safe_in = set()
    corr = design.X[:, Mc].T @ resid if Mc else np.zeros(0)
    safe_out = {Mc[k] for k in range(len(Mc))
                if abs(corr[k]) < lam - s_nu * (1.0 + cross_l1[k])}
    return safe_in, safe_out


def exact_screening(design: Design, y, pair: ModelSignPair, lam: float,
                    s_nu: float, safe=None):
    """Neighboring model-sign pairs reachable inside the box.

    Each unscreened constraint of the selection polyhedron is tested for
    redundancy within the polyhedron (that constraint removed) intersected
    with the box, one LP per test; an active constraint names the pair on
    the other side of its face.
    """
    neighbors, _ = _exact_screening_counted(design, y, pair, lam, s_nu, safe)
    return neighbors


def _exact_screening_counted(design: Design, y, pair: ModelSignPair, lam: float,
                             s_nu: float, safe=None):
    safe_in, safe_out = safe if safe is not None else (set(), set())
    rows = _polyhedron_rows(design, pair, lam, suffstat=True)
    u_obs = design.X.T @ np.asarray(y, dtype=float)
    box = SuffStatBox(u_obs, s_nu).polyhedron()
    region = Polyhedron(np.array([r[0] for r in rows]),
                        np.array([r[1] for r in rows]))
    neighbors = set()
    n_lps = 0
    for i, (_, _, tag) in enumerate(rows):
        j = tag[1]
        if tag[0] == "enter" and j in safe_out:
            continue
        if tag[0] == "leave" and j in safe_in:
            continue
        n_lps += 1
        res = constraint_nonredundant(region, i, box, eps=_LP_EPS)
        if res.nonredundant:
            if tag[0] == "leave":
                neighbors.add(pair.drop(j))
            else:
                neighbors.add(pair.add(j, tag[2]))
    return neighbors, n_lps


# ---------------------------------------------------------------------------
# Plausible-model enumeration
# ---------------------------------------------------------------------------

def column_max_quantile(design: Design, sigma: float, alpha: float,
                        rng: RngSpec, n_draws: int = DEFAULT_DRAWS) -> float:
    """Quantile of max_j |X_j^T Z| for Z ~ N(0, sigma^2 I_n).

    Simulated in the d-dimensional sufficient-statistic coordinates: the
    vector X^T Z has covariance sigma^2 X^T X, so the rows of the Gram
    Cholesky factor are an exact contrast representation.
    """
    L = design.gram_factor()
    return contrast_quantile_mc(L, sigma, alpha, rng, n_draws).value


def _all_models(d: int):
    return set(chain.from_iterable(
        combinations(range(d), r) for r in range(d + 1)))


def _certify_box_intersection(design: Design, pair: ModelSignPair, lam: float,
                              box: Polyhedron) -> None:
    rows = _polyhedron_rows(design, pair, lam, suffstat=True)
    region = Polyhedron(np.array([r[0] for r in rows]),
                        np.array([r[1] for r in rows]))
    res = lp_maximize(np.zeros(design.d), region.intersect(box))
    if res.status == "infeasible":
        raise RuntimeError(f"visited pair {pair} does not intersect the box")


def enumerate_plausible_models(design: Design, y, lam: float, budget: BudgetSplit,
                               sigma: float, rng: RngSpec,
                               n_draws: int = DEFAULT_DRAWS,
                               p_max: int = 2000, use_safe: bool = True,
                               s_nu: float = None, certify: bool = False):
    """Breadth-first flood fill of model-sign regions over the box.

    Returns (models, frontier).  models is the set of supports visited; if
    the number of visited plus queued pairs exceeds p_max the search stops,
    frontier.capped is set, and the sentinel set of all 2^d supports is
    returned so the caller falls back to the full simultaneous correction
    at level alpha - nu.

    s_nu may be passed explicitly (precomputed box radius); otherwise it is
    2 * column_max_quantile at level nu.  With certify=True (debug mode)
    every popped pair's region is checked to intersect the box by a
    feasibility LP.
    """
    if s_nu is None:
        s_nu = 2.0 * column_max_quantile(design, sigma, budget.nu, rng.child(0), n_draws)
    _, start = lasso_solve(design, y, lam)
    todo = deque([start])
    seen = {start}
    visited = []
    lp_count = 0
    safe_skips = 0
    capped = False
    box = SuffStatBox(design.X.T @ np.asarray(y, dtype=float), s_nu).polyhedron() \
        if certify else None
    while todo:
        pair = todo.popleft()
        visited.append(pair)
        if certify:
            _certify_box_intersection(design, pair, lam, box)
        if use_safe:
            safe = safe_screening(design, y, pair, lam, s_nu)
            safe_skips += len(safe[0]) + len(safe[1])
        else:
            safe = (set(), set())
        neighbors, n_lps = _exact_screening_counted(design, y, pair, lam, s_nu, safe)
        lp_count += n_lps
        for nb in sorted(neighbors, key=lambda p: (p.M, p.s)):
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
        if len(seen) > p_max:
            capped = True
            break
    frontier = ModelFrontier(frozenset(visited), tuple(todo), capped,
                             lp_count, safe_skips)
    if capped:
        if design.d > 16:
            raise ValueError("p_max exceeded with d too large to fall back on all subsets")
        return _all_models(design.d), frontier
    return {p.M for p in visited}, frontier


# ---------------------------------------------------------------------------
# Intervals over the plausible models
# ---------------------------------------------------------------------------

def posi_intervals(design: Design, y, selected: ModelSignPair, models,
                   budget: BudgetSplit, sigma: float, rng: RngSpec,
                   n_draws: int = DEFAULT_DRAWS) -> IntervalSet:
    """Simultaneous least-squares intervals for the selected model, corrected
    over every plausible (feature, model) projection target.

    Contrast set: e_{j.M}^T X_M^+ / sigma_hat_{j.M} over all plausible M and
    j in M; the interval half-width is q * sigma * sigma_hat_{j.Mhat} where
    q is the simulated sup-|contrast| quantile at level alpha - nu.
    """
    if not selected.M:
        return IntervalSet(np.array([], dtype=int), np.array([]), np.array([]),
                           1.0 - budget.alpha)
    L = design.gram_factor()
    reps = []
    # The realized model is always plausible.
    for M in sorted(set(tuple(m) for m in models) | {selected.M}):
        if not M:
            continue
        inv = design.workspace(M)["inv"]
        LM = L[list(M), :]
        block = inv @ LM                      # rows: contrasts in u-coordinates
        scales = np.sqrt(np.diag(inv))
        reps.append(block / scales[:, None])
    contrasts = np.vstack(reps)
    q = contrast_quantile_mc(contrasts, 1.0, budget.inference_level,
                             rng.child(1), n_draws).value
    M_hat = list(selected.M)
    ws = design.workspace(selected.M)
    theta = ws["inv"] @ (design.X[:, M_hat].T @ np.asarray(y, dtype=float))
    sig_hat = np.sqrt(np.diag(ws["inv"]))
    halves = q * sigma * sig_hat
    return IntervalSet(np.array(M_hat), theta, halves, 1.0 - budget.alpha)


def projection_truth(design: Design, M, mu) -> np.ndarray:
    """Population projection coefficients X_M^+ mu for a fixed support."""
    M = list(M)
    inv = design.workspace(tuple(M))["inv"]
    return inv @ (design.X[:, M].T @ np.asarray(mu, dtype=float))


def marginal_screening_plausible(design: Design, y, k: int, s_nu: float) -> np.ndarray:
    """Candidate variables for top-k marginal screening under the box.

    Returns {i : |X_i^T y| >= c_(k) - 2 s_nu} where c_(k) is the k-th
    largest score; every k-subset of this set is a plausible model.
    """
    if not (1 <= k <= design.d):
        raise ValueError("k out of range")
    if s_nu < 0:
        raise ValueError("s_nu must be nonnegative")
    scores = np.abs(design.X.T @ np.asarray(y, dtype=float))
    kth = np.sort(scores)[::-1][k - 1]
    return np.flatnonzero(scores >= kth - 2.0 * s_nu)
