"""Dense two-phase primal simplex for LPs with upper-bounded variables.

Solves   min c.x   s.t.   A x (<=, =, >=) b,   0 <= x <= ub
where ub entries may be +inf.  The tableau is kept dense (numpy), which is
the right trade-off for the model sizes this package produces.

Upper bounds are handled with the complement substitution: whenever a
variable moves to its upper bound it is replaced by ub - x (its column is
negated), so nonbasic variables always sit at zero and the classic ratio
test applies.  The ratio test additionally lets a basic variable leave at
its own upper bound, in which case that variable is complemented first.

Pivot selection is Dantzig's rule (most negative reduced cost, smallest
index on ties); after a run of degenerate pivots it permanently switches
to Bland's rule for the rest of the phase, which guarantees termination.

The scheduling models mix O(1) entries with O(1e7) oversubscription
runtimes, which plain float64 tableau updates cannot survive.  Four guards
keep the solver honest: power-of-two equilibration of rows, columns, and
objective; periodic refactorization of the tableau from pristine data;
a backward-error check of the final point against the original system;
and, should any of these trip, one deterministic retry in a safe mode
(Bland's rule throughout, refactorization every few pivots).
"""

from __future__ import annotations

import numpy as np
from numba import njit

LE, EQ, GE = -1, 0, 1

OPTIMAL = 0
INFEASIBLE = 1
UNBOUNDED = 2

_REDUCED_COST_TOL = 1e-9
_PIVOT_TOL = 1e-7
_PHASE1_TOL = 1e-7
_PHASE1_CLEAR = 1e-4
_RHS_CHOP = 1e-11
_DEGENERATE_STREAK = 64
_REFACTOR_CLAMP = 1e-5

# Escalation rungs: pivot rule and refactorization cadence.
_MODE_FAST = 0      # Dantzig + Harris ratio test, refactorize every 100 pivots
_MODE_CAUTIOUS = 1  # Bland from the start, refactorize every 2 pivots
_MODE_EXACT = 2     # Dantzig + Harris, refactorize after every pivot
_REFRESH = {_MODE_FAST: 100, _MODE_CAUTIOUS: 2, _MODE_EXACT: 1}


class SimplexError(RuntimeError):
    """Numerical failure or pivot-budget exhaustion inside the simplex."""


def solve_lp(
    A: np.ndarray,
    rel: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    ub: np.ndarray,
    max_pivots: int = 200_000,
) -> tuple[int, np.ndarray | None, float]:
    """Solve the LP; returns (status, x, objective).  Inputs are not modified."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    rel = np.asarray(rel, dtype=int)
    c = np.asarray(c, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m, n = A.shape

    if n == 0:
        ok = _rows_hold(np.zeros(m), rel, b)
        return (OPTIMAL, np.zeros(0), 0.0) if ok else (INFEASIBLE, None, np.inf)
    if m == 0:
        down = c < 0
        if np.any(down & np.isinf(ub)):
            return UNBOUNDED, None, -np.inf
        x = np.where(down, ub, 0.0)
        return OPTIMAL, x, float(c @ x)

    # Deterministic escalation ladder: a fast pass, then a cautious pass,
    # then a drift-free pass that refactorizes after every single pivot so
    # every quantity is recomputed from pristine data.  Each rung escalates
    # on numerical trouble or an unconvincing status.
    for mode in (_MODE_FAST, _MODE_CAUTIOUS, _MODE_EXACT):
        final = mode == _MODE_EXACT
        try:
            result = _solve_scaled(A, rel, b, c, ub, max_pivots, mode)
        except SimplexError:
            if final:
                raise
            continue
        if result is None:
            if final:
                raise SimplexError("optimal point failed verification")
            continue
        status = result[0]
        if status == UNBOUNDED and not final:
            continue  # could be drift; only the exact pass may declare it
        return result
    raise SimplexError("unreachable")  # pragma: no cover


def _solve_scaled(A0, rel0, b0_in, c_orig, ub0, max_pivots, mode):
    """One full scaled solve; None means the final point failed verification."""
    A = A0.copy()
    b = b0_in.copy()
    rel = rel0.copy()
    ub = ub0.copy()
    m, n = A.shape

    # Equilibrate rows, columns, and the objective together:
    # (r A s)(x / s) = (r b), with costs (g c s) for some global g > 0.
    # All scales are powers of two, so scaling is lossless.
    scales_r, col_scale = _equilibrate(np.vstack([A, c_orig[None, :]]))
    row_scale = scales_r[:m]
    A *= row_scale[:, None]
    A *= col_scale[None, :]
    b *= row_scale
    ub /= col_scale
    c_scaled = c_orig * col_scale * scales_r[m]

    # Normalize to nonnegative rhs so the slack/artificial basis is feasible.
    neg = b < 0
    if neg.any():
        A[neg] *= -1.0
        b[neg] = -b[neg]
        rel[neg] = -rel[neg]

    n_slack = int(np.count_nonzero(rel != EQ))
    n_art = int(np.count_nonzero(rel != LE))
    ncols = n + n_slack + n_art
    art_start = n + n_slack

    T = np.zeros((m, ncols + 1))
    T[:, :n] = A
    T[:, -1] = b
    ub_full = np.full(ncols, np.inf)
    ub_full[:n] = ub

    basis = np.empty(m, dtype=int)
    s_col, a_col = n, art_start
    for i in range(m):
        if rel[i] == LE:
            T[i, s_col] = 1.0
            basis[i] = s_col
            s_col += 1
        elif rel[i] == GE:
            T[i, s_col] = -1.0
            s_col += 1
            T[i, a_col] = 1.0
            basis[i] = a_col
            a_col += 1
        else:
            T[i, a_col] = 1.0
            basis[i] = a_col
            a_col += 1

    flipped = np.zeros(ncols, dtype=bool)
    is_basic = np.zeros(ncols, dtype=bool)
    is_basic[basis] = True
    allowed = np.ones(ncols, dtype=bool)

    # Pristine copy of the scaled system for refactorization.  The
    # complement-adjusted view (columns negated for flipped variables, rhs
    # shifted by their bounds) is maintained incrementally by the kernel.
    F_eff = T[:, :ncols].copy()
    b_eff = T[:, -1].copy()

    budget = [max_pivots]
    refresh_every = _REFRESH[mode]
    bland = mode == _MODE_CAUTIOUS

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[art_start:] = 1.0
        status = _pivot_loop(
            T, F_eff, b_eff, cost1, basis, ub_full, flipped, is_basic, allowed,
            budget, refresh_every, bland=bland,
        )
        if status == UNBOUNDED:
            raise SimplexError("phase-1 objective cannot be unbounded")
        p1 = sum(T[i, -1] for i in range(m) if basis[i] >= art_start)
        if p1 > _PHASE1_TOL:
            if p1 <= _PHASE1_CLEAR and mode != _MODE_EXACT:
                # Borderline infeasibility: let a stricter rung confirm.
                raise SimplexError("infeasibility too marginal to trust")
            return INFEASIBLE, None, np.inf
        _expel_artificials(T, basis, is_basic, art_start)
        allowed[art_start:] = False

    cost2 = np.zeros(ncols)
    cost2[:n] = c_scaled
    status = _pivot_loop(
        T, F_eff, b_eff, cost2, basis, ub_full, flipped, is_basic, allowed,
        budget, refresh_every, bland=bland, dirty=n_art > 0,
    )
    if status == UNBOUNDED:
        return UNBOUNDED, None, -np.inf

    x_full = np.zeros(ncols)
    x_full[basis] = T[:, -1]
    if flipped.any():
        x_full[flipped] = ub_full[flipped] - x_full[flipped]
    x = x_full[:n] * col_scale

    # Backward-error check against the original, unscaled system.
    lhs = A0 @ x
    tau = 1e-9 * (np.abs(A0) @ np.abs(x) + np.abs(b0_in)) + _PHASE1_TOL
    resid = lhs - b0_in
    ok = np.all(
        ((rel0 != LE) | (resid <= tau))
        & ((rel0 != GE) | (resid >= -tau))
        & ((rel0 != EQ) | (np.abs(resid) <= tau))
    )
    bound_ok = np.all(x >= -1e-7) and np.all(x <= ub0 + np.maximum(1e-7, 1e-9 * ub0))
    if not (ok and bound_ok):
        return None
    return OPTIMAL, x, float(c_orig @ x)


def _equilibrate(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Geometric-mean equilibration; returns power-of-two row/column scales."""
    m, n = M.shape
    r = np.ones(m)
    s = np.ones(n)
    absM = np.abs(M)
    mask = absM > 0
    if not mask.any():
        return r, s
    logM = np.log2(absM, where=mask, out=np.zeros_like(absM))
    for _ in range(2):
        scaled = logM + np.log2(r)[:, None] + np.log2(s)[None, :]
        hi = np.where(mask, scaled, -np.inf).max(axis=1)
        lo = np.where(mask, scaled, np.inf).min(axis=1)
        rows = np.isfinite(hi)
        r[rows] *= 2.0 ** (-np.rint((hi[rows] + lo[rows]) / 2.0))
        scaled = logM + np.log2(r)[:, None] + np.log2(s)[None, :]
        hi = np.where(mask, scaled, -np.inf).max(axis=0)
        lo = np.where(mask, scaled, np.inf).min(axis=0)
        cols = np.isfinite(hi)
        s[cols] *= 2.0 ** (-np.rint((hi[cols] + lo[cols]) / 2.0))
    return r, s


def _rows_hold(lhs: np.ndarray, rel: np.ndarray, rhs: np.ndarray, tol: float = 1e-9) -> bool:
    resid = lhs - rhs
    ok_le = (rel != LE) | (resid <= tol)
    ok_ge = (rel != GE) | (resid >= -tol)
    ok_eq = (rel != EQ) | (np.abs(resid) <= tol)
    return bool(np.all(ok_le & ok_ge & ok_eq))


def _reduced_costs(T, cost, basis, flipped) -> np.ndarray:
    """Reduced costs recomputed from the tableau for the given (unflipped)
    cost vector, honouring complemented columns."""
    ncols = T.shape[1] - 1
    eff = np.where(flipped, -cost, cost)
    d = eff.copy()
    cb = eff[basis]
    if cb.any():
        d -= T[:, :ncols].T @ cb
    d[basis] = 0.0
    return d


def _refactorize(T, F_eff, b_eff, basis, ub_full) -> None:
    """Rebuild the tableau exactly from the complement-adjusted pristine
    system for the current basis, wiping accumulated pivot drift."""
    m, w = T.shape
    rhs = np.empty((m, w))
    rhs[:, : w - 1] = F_eff
    rhs[:, -1] = b_eff
    try:
        fresh = np.linalg.solve(F_eff[:, basis], rhs)
    except np.linalg.LinAlgError as exc:
        raise SimplexError("singular basis during refactorization") from exc
    beta = fresh[:, -1]
    over = beta - ub_full[basis]
    worst = max(float(-beta.min()), float(over.max()))
    if worst > _REFACTOR_CLAMP:
        raise SimplexError("basis lost primal feasibility")
    np.clip(beta, 0.0, None, out=beta)
    np.minimum(beta, ub_full[basis], out=beta)
    T[:, :] = fresh


# Kernel exit codes.
_K_STALL = 0
_K_UNBOUNDED = 2
_K_REFRESH = 3
_K_BUDGET = 4


@njit(cache=True)
def _pivot_kernel(
    T, F_eff, b_eff, d, basis, ub_full, flipped, is_basic, enterable,
    allowed, bland, streak, refresh_left, budget_left,
):  # pragma: no cover - exercised through solve_lp
    """Run pivots in place until a stall, a due refactorization, an
    unbounded ray, or budget exhaustion.  Returns (code, used, streak,
    bland).  Pure loops so numba compiles it to machine code; semantics
    match the module docstring."""
    m, w = T.shape
    ncols = w - 1
    used = 0
    while True:
        # Entering variable: Bland takes the first eligible index, Dantzig
        # the most negative reduced cost (first on ties).
        j = -1
        if bland:
            for q in range(ncols):
                if enterable[q] and d[q] < -_REDUCED_COST_TOL:
                    j = q
                    break
        else:
            best = -_REDUCED_COST_TOL
            for q in range(ncols):
                if enterable[q] and d[q] < best:
                    best = d[q]
                    j = q
        if j < 0:
            return _K_STALL, used, streak, bland
        if budget_left - used <= 0:
            return _K_BUDGET, used, streak, bland
        if refresh_left <= 0:
            return _K_REFRESH, used, streak, bland
        refresh_left -= 1
        used += 1

        # Ratio test, pass 1: the minimum ratio over blocking rows.
        t_rows = np.inf
        for i in range(m):
            a = T[i, j]
            if a > _PIVOT_TOL:
                num = T[i, ncols]
                if num < 0.0:
                    num = 0.0
                rt = num / a
                if rt < t_rows:
                    t_rows = rt
            elif a < -_PIVOT_TOL:
                ubb = ub_full[basis[i]]
                if np.isfinite(ubb):
                    num = ubb - T[i, ncols]
                    if num < 0.0:
                        num = 0.0
                    rt = num / (-a)
                    if rt < t_rows:
                        t_rows = rt

        step = ub_full[j]
        if step <= t_rows:
            if not np.isfinite(step):
                return _K_UNBOUNDED, used, streak, bland
            # Bound flip: complement the entering variable, no basis
            # change; the pristine system is re-expressed the same way.
            for i in range(m):
                T[i, ncols] -= T[i, j] * step
                T[i, j] = -T[i, j]
                F_eff[i, j] = -F_eff[i, j]
                b_eff[i] += F_eff[i, j] * step
            d[j] = -d[j]
            flipped[j] = not flipped[j]
            streak = 0
            continue

        # Ratio test, pass 2: leaving row.  Under Bland the smallest basic
        # index among exact ties (preferring sane pivot magnitudes when some
        # tie row has one); otherwise the largest pivot inside the Harris
        # window, which admits an overshoot of at most 1e-9.
        r = -1
        tie_cut = t_rows * (1.0 + 1e-12) + 1e-15
        if bland:
            best_basis = 1 << 62
            for strong_pass in range(2):
                for i in range(m):
                    a = T[i, j]
                    absa = abs(a)
                    if absa <= _PIVOT_TOL:
                        continue
                    if strong_pass == 0 and absa < 1e-6:
                        continue
                    if a > 0.0:
                        num = T[i, ncols]
                    else:
                        ubb = ub_full[basis[i]]
                        if not np.isfinite(ubb):
                            continue
                        num = ubb - T[i, ncols]
                    if num < 0.0:
                        num = 0.0
                    if num / absa <= tie_cut and basis[i] < best_basis:
                        best_basis = basis[i]
                        r = i
                if r >= 0:
                    break
        else:
            best_a = 0.0
            for i in range(m):
                a = T[i, j]
                absa = abs(a)
                if absa <= _PIVOT_TOL:
                    continue
                if a > 0.0:
                    num = T[i, ncols]
                else:
                    ubb = ub_full[basis[i]]
                    if not np.isfinite(ubb):
                        continue
                    num = ubb - T[i, ncols]
                if num < 0.0:
                    num = 0.0
                if num <= t_rows * absa + 1e-9 and absa > best_a:
                    best_a = absa
                    r = i

        if T[r, j] < 0.0:
            # Leaving at its upper bound: complement it first.
            v = basis[r]
            ubv = ub_full[v]
            for k in range(w):
                T[r, k] = -T[r, k]
            T[r, ncols] += ubv
            T[r, v] = 1.0
            flipped[v] = not flipped[v]
            for i in range(m):
                F_eff[i, v] = -F_eff[i, v]
                b_eff[i] += F_eff[i, v] * ubv

        piv = T[r, j]
        for k in range(w):
            T[r, k] /= piv
        for i in range(m):
            if i == r:
                continue
            ci = T[i, j]
            if ci != 0.0:
                for k in range(w):
                    T[i, k] -= ci * T[r, k]
                T[i, j] = 0.0
        dj = d[j]
        if dj != 0.0:
            for k in range(ncols):
                d[k] -= dj * T[r, k]

        old = basis[r]
        is_basic[old] = False
        is_basic[j] = True
        enterable[old] = allowed[old]
        enterable[j] = False
        basis[r] = j
        d[j] = 0.0

        for i in range(m):
            if abs(T[i, ncols]) < _RHS_CHOP:
                T[i, ncols] = 0.0

        if t_rows <= _PIVOT_TOL:
            streak += 1
            if streak >= _DEGENERATE_STREAK:
                bland = True
        else:
            streak = 0


def _pivot_loop(
    T, F_eff, b_eff, cost, basis, ub_full, flipped, is_basic, allowed,
    budget, refresh_every, bland=False, dirty=False,
) -> int:
    """Drive the compiled pivot kernel, interleaving refactorizations and
    trusting optimality only after a verification on fresh data."""
    d = _reduced_costs(T, cost, basis, flipped)
    streak = 0
    since_refresh = 1 if dirty else 0
    enterable = allowed & ~is_basic
    bland_state = bool(bland)
    while True:
        code, used, streak, bland_state = _pivot_kernel(
            T, F_eff, b_eff, d, basis, ub_full, flipped, is_basic, enterable,
            allowed, bland_state, streak, refresh_every - since_refresh,
            budget[0],
        )
        budget[0] -= used
        since_refresh += used
        if code == _K_STALL:
            # The incremental d drifts, so recompute before believing it;
            # a full refactorization backs the final verdict.  Entering
            # candidates surfacing only after the refactorization get a
            # coarser threshold, which stops futile stall/refresh cycles
            # over 1e-9-grade improvements.
            d_fresh = _reduced_costs(T, cost, basis, flipped)
            worst = float(np.where(enterable, d_fresh, np.inf).min(initial=np.inf))
            if worst < -_REDUCED_COST_TOL:
                d[:] = d_fresh
                continue
            if since_refresh > 0:
                _refactorize(T, F_eff, b_eff, basis, ub_full)
                since_refresh = 0
                d[:] = _reduced_costs(T, cost, basis, flipped)
                worst = float(np.where(enterable, d, np.inf).min(initial=np.inf))
                if worst < -10.0 * _REDUCED_COST_TOL:
                    continue
            return OPTIMAL
        if code == _K_REFRESH:
            _refactorize(T, F_eff, b_eff, basis, ub_full)
            since_refresh = 0
            d[:] = _reduced_costs(T, cost, basis, flipped)
            continue
        if code == _K_UNBOUNDED:
            return UNBOUNDED
        raise SimplexError("pivot budget exhausted")


def _expel_artificials(T, basis, is_basic, art_start) -> None:
    """Pivot artificials that finished phase 1 basic (at value 0) out of the
    basis.  Rows with no real pivot candidate are identically satisfied and
    keep their zero-valued artificial, which no later pivot can touch."""
    m = T.shape[0]
    for i in range(m):
        if basis[i] < art_start:
            continue
        row = T[i, :art_start]
        cand = np.nonzero((np.abs(row) > _PHASE1_TOL) & ~is_basic[:art_start])[0]
        if cand.size == 0:
            continue
        j = int(cand[np.argmax(np.abs(row[cand]))])
        T[i, :] /= T[i, j]
        column = T[:, j].copy()
        column[i] = 0.0
        T -= np.outer(column, T[i, :])
        is_basic[basis[i]] = False
        is_basic[j] = True
        basis[i] = j
