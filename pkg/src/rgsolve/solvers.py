"""Solvers for both frameworks and conversion between them.

Eigenvalue-based route: the L real variables Lambda_i obey quadratic
equations whose weak-coupling limit decouples level by level, giving one
analytic seed per occupation bitset.  Each seed is continued adaptively in
g to the target coupling with Newton steps on the analytic Jacobian; the
C(L,N) seeds enumerate the complete sector spectrum.

Rapidity route: the N complex rapidities obey the coupled Bethe equations,
solved here by damped complex Newton (the residuals are holomorphic, so a
complex-linear Jacobian step is exact).

Conversion: Lambda_i = P'(eps_i)/P(eps_i) for the monic polynomial P with
the rapidities as roots.  Matching this at every level gives L linear
conditions on the N unknown coefficients of P (solved least-squares in a
shifted/scaled variable for conditioning); roots come from the companion
matrix and are polished by Gauss-Newton on the Lambda-matching residuals,
which serves primal and dual sets alike.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import (CollisionError, ConvergenceError, PoleError,
                     SingularPointError, ValidationError)
from .model import (DUAL, HYPERBOLIC, OFF_SHELL, ON_SHELL, RATIONAL,
                    EigenstateRecord, LambdaSet, ModelParams, SpectralSet,
                    make_spectral_set, require_valid_model)


@dataclass(frozen=True)
class SolveOptions:
    """Newton and continuation controls."""

    newton_tol: float = 1e-12
    max_iter: int = 200
    initial_step_fraction: float = 0.125  # of the g distance to cover
    shrink: float = 0.5
    grow: float = 2.0
    max_step: float = 1.0  # cap on |du|, u = ln|g|
    target_g: Optional[float] = None

    def __post_init__(self):
        if self.newton_tol <= 0.0:
            raise ValidationError("newton_tol must be positive")
        if self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1")
        if self.max_step <= 0.0:
            raise ValidationError("max_step must be positive")


@dataclass(frozen=True)
class BethePolynomial:
    """Monic polynomial with the rapidities as roots."""

    degree: int
    roots: SpectralSet


DEFAULT_OPTIONS = SolveOptions()


# ----------------------------------------------------------------------
# Residuals and analytic Jacobians
# ----------------------------------------------------------------------

def residual_evb(model: ModelParams, lambdas: LambdaSet) -> np.ndarray:
    """Quadratic-equation residuals, one real entry per level.

    Rational:    Lambda_i^2 + (2/g) Lambda_i - sum_{j != i} (Lambda_i - Lambda_j)/(eps_i - eps_j)
    Hyperbolic:  eps_i Lambda_i^2 + (1/g) Lambda_i
                 - sum_{j != i} (eps_i Lambda_i - eps_j Lambda_j)/(eps_i - eps_j)
    """
    if len(lambdas) != model.L:
        raise ValidationError("LambdaSet length must equal L")
    return _residual_evb_raw(model, lambdas.lambdas)


def _pair_inverse(eps: np.ndarray) -> np.ndarray:
    """Matrix 1/(eps_i - eps_j) with zero diagonal."""
    de = eps[:, None] - eps[None, :]
    np.fill_diagonal(de, 1.0)
    inv = 1.0 / de
    np.fill_diagonal(inv, 0.0)
    return inv


def _residual_evb_raw(model: ModelParams, lam: np.ndarray) -> np.ndarray:
    eps = model.epsilons
    inv = _pair_inverse(eps)
    if model.kind == RATIONAL:
        pair = inv.sum(axis=1) * lam - inv @ lam
        return lam * lam + (2.0 / model.g) * lam - pair
    mu = eps * lam
    pair = inv.sum(axis=1) * mu - inv @ mu
    return eps * lam * lam + lam / model.g - pair


def evb_jacobian(model: ModelParams, lam: np.ndarray) -> np.ndarray:
    """Analytic Jacobian d(residual_evb)_i / d Lambda_j."""
    eps = model.epsilons
    inv = _pair_inverse(eps)
    if model.kind == RATIONAL:
        J = inv.copy()
        np.fill_diagonal(J, 2.0 * lam + 2.0 / model.g - inv.sum(axis=1))
        return J
    J = inv * eps[None, :]
    np.fill_diagonal(J, 2.0 * eps * lam + 1.0 / model.g - eps * inv.sum(axis=1))
    return J


def residual_bethe(model: ModelParams, rapidities: SpectralSet) -> np.ndarray:
    """Bethe-equation residuals, one complex entry per rapidity.

    Rational:    1/g + (1/2) sum_i 1/(eps_i - v_a) - sum_{b != a} 1/(v_b - v_a)
    Hyperbolic:  (1 + 1/g)/v_a + sum_i 1/(eps_i - v_a) - 2 sum_{b != a} 1/(v_b - v_a)
    """
    vs = rapidities.values
    N = len(vs)
    if N == 0:
        return np.zeros(0, dtype=complex)
    eps = model.epsilons
    scale = max(1.0, float(np.max(np.abs(eps))))
    if np.min(np.abs(vs[:, None] - eps[None, :])) <= 1e-12 * scale:
        raise PoleError("rapidity coincides with a level eps_i")
    level_sum = (1.0 / (eps[None, :] - vs[:, None])).sum(axis=1)
    dv = vs[:, None] - vs[None, :]
    np.fill_diagonal(dv, 1.0)
    inv_dv = 1.0 / dv
    np.fill_diagonal(inv_dv, 0.0)
    pair_sum = inv_dv.sum(axis=0)  # sum_{b != a} 1/(v_b - v_a)
    if model.kind == RATIONAL:
        return 1.0 / model.g + 0.5 * level_sum - pair_sum
    if np.min(np.abs(vs)) <= 1e-14 * scale:
        raise PoleError("rapidity at zero: hyperbolic equations have a pole there")
    return (1.0 + 1.0 / model.g) / vs + level_sum - 2.0 * pair_sum


def bethe_jacobian(model: ModelParams, vs: np.ndarray) -> np.ndarray:
    """Analytic complex Jacobian d(residual_bethe)_a / d v_b."""
    eps = model.epsilons
    N = len(vs)
    level_sq = (1.0 / (eps[None, :] - vs[:, None]) ** 2).sum(axis=1)
    dv = vs[:, None] - vs[None, :]
    np.fill_diagonal(dv, 1.0)
    inv_sq = 1.0 / dv ** 2
    np.fill_diagonal(inv_sq, 0.0)
    if model.kind == RATIONAL:
        J = inv_sq.copy()
        np.fill_diagonal(J, 0.5 * level_sq - inv_sq.sum(axis=1))
        return J.astype(complex)
    J = 2.0 * inv_sq
    np.fill_diagonal(J, -(1.0 + 1.0 / model.g) / vs ** 2 + level_sq - 2.0 * inv_sq.sum(axis=1))
    return J.astype(complex)


# ----------------------------------------------------------------------
# Eigenvalue-based solving with continuation in g
# ----------------------------------------------------------------------

def _seed_lambdas(model_kind: str, eps: np.ndarray, occupation, g: float) -> np.ndarray:
    lam = np.zeros(len(eps))
    idx = list(occupation)
    if model_kind == RATIONAL:
        lam[idx] = -2.0 / g
    else:
        lam[idx] = -1.0 / (g * eps[idx])
    return lam


def _evb_scale(model: ModelParams, lam: np.ndarray) -> float:
    """Magnitude of the residual's cancelling terms: its rounding floor."""
    if model.kind == RATIONAL:
        big = max(float(np.abs(lam * lam).max()), float(np.abs(2.0 * lam / model.g).max()))
    else:
        big = max(float(np.abs(model.epsilons * lam * lam).max()),
                  float(np.abs(lam / model.g).max()))
    return max(1.0, big)


def _newton_evb(model: ModelParams, lam0: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Damped Newton; tol is relative to the residual's cancellation scale.

    Near the weak-coupling anchor the Lambda values are O(1/g), so the
    quadratic and linear terms cancel to roundoff ~ |Lambda|^2 eps_mach
    and an absolute criterion could never be met.
    """
    lam = lam0.copy()
    res = _residual_evb_raw(model, lam)
    for _ in range(max_iter):
        best = np.abs(res).max()
        if best < tol * _evb_scale(model, lam):
            return lam
        J = evb_jacobian(model, lam)
        try:
            step = np.linalg.solve(J, -res)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in quadratic-equation Newton")
        damp = 1.0
        for _ in range(30):
            trial = lam + damp * step
            trial_res = _residual_evb_raw(model, trial)
            trial_norm = np.abs(trial_res).max()
            if trial_norm < best:
                lam, res = trial, trial_res
                break
            damp *= 0.5
        else:
            raise ConvergenceError("Newton line search stalled")
    if np.abs(res).max() < tol * _evb_scale(model, lam):
        return lam
    raise ConvergenceError(
        f"Newton did not reach tolerance (residual {np.abs(res).max():.3e})")


def _dresidual_dg(model: ModelParams, lam: np.ndarray) -> np.ndarray:
    if model.kind == RATIONAL:
        return -2.0 * lam / model.g ** 2
    return -lam / model.g ** 2


def _sector_sum(model: ModelParams, lam: np.ndarray) -> float:
    """The sector invariant: sum Lambda_i (rational), sum eps_i Lambda_i (hyperbolic)."""
    if model.kind == RATIONAL:
        return float(lam.sum())
    return float((model.epsilons * lam).sum())


def _sector_sum_target(model: ModelParams, N: int) -> float:
    """Summing the on-shell equations fixes the invariant per sector.

    Rational:   sum Lambda_i       = -2N/g
    Hyperbolic: sum eps_i Lambda_i = N(L - N) - N/g
    """
    if model.kind == RATIONAL:
        return -2.0 * N / model.g
    return N * (model.L - N) - N / model.g


class _BranchJump(Exception):
    """A corrector step converged onto a different sector's branch."""


def _invariant_ok(model: ModelParams, N: int, lam: np.ndarray) -> bool:
    """Whether the converged point still sits on the wanted sector's branch.

    Genuine jumps land on another sector and drift by O(1) (multiples of
    2/g, or integer combinations with 1/g).  The tolerance must stay far
    below that yet absorb the soft-mode Newton error picked up where the
    Jacobian goes near-singular (integer 1/g), which reaches ~1e-4; 1e-3
    separates the two regimes cleanly.
    """
    target = _sector_sum_target(model, N)
    drift = abs(_sector_sum(model, lam) - target)
    return drift <= 1e-3 * max(1.0, abs(target), float(np.abs(lam).max()))


def _avoid_crossing(u: float, u_next: float, u_stop: float, L: int) -> float:
    """Clamp a landing so no step leaps a branch crossing uncontrolled.

    Hyperbolic branches collide at integer values of |1/g| up to L: some
    within a sector (rapidities escaping or collapsing), some across
    sectors (the sector sum invariants of N and N+1 coincide at 1/g =
    L - 2N - 1, and branches of the shared variable set pass through
    each other there).  A predictor leg flying over such a point from
    far away lands in an arbitrary basin.  |1/g| shrinks monotonically
    along a guarded leg, so each integer p is traversed deliberately:
    the walk first lands at |1/g| = p + 0.11, then crosses the window
    down to p - 0.11 in strides capped at 0.02, short enough for Newton
    to track the branch through the collision.  Retries with a smaller
    trial step pass through unclamped, so the usual shrink-on-failure
    loop still refines within the window.  All in u = ln|g| = -ln|1/g|.
    """
    a_here = np.exp(-u)
    a_next = np.exp(-u_next)
    q = round(a_here)
    if 1 <= q <= L and q - 0.11 + 1e-9 < a_here <= q + 0.11 + 1e-9:
        a_cap = max(a_here - 0.02, q - 0.11)
        if a_next >= a_cap - 1e-12:
            return u_next
        return -np.log(a_cap)
    p = min(int(np.floor(a_here - 1e-9)), L)
    if p < 1 or a_next >= p + 0.11:
        return u_next
    return -np.log(p + 0.11)


def _overshoot_target(u_target: float, sign: float, L: int):
    """Waypoint past the crossing for a target lying right behind one.

    A target with |1/g| less than 0.11 below an integer sits too close to
    the crossing for the guarded hop to clear it in one go; the walk must
    first land 0.11 past the integer and then back up to the target from
    the far side (no further crossing in between).  Returns that waypoint
    in u = ln|g|, or None when the target needs no detour.
    """
    ginv = 1.0 / (sign * np.exp(u_target))
    p = round(ginv)
    if p == 0 or abs(p) > L:
        return None
    gap = abs(p) - abs(ginv)
    if not (0.0 < gap < 0.11):
        return None
    return -np.log(abs(p) - 0.11)


def _walk_nodes(kind: str, eps: np.ndarray, lam: np.ndarray, u: float,
                u_stop: float, sign: float, opts: SolveOptions, du: float,
                guard: bool, occupation) -> np.ndarray:
    """Predictor-corrector node walk in u = ln|g| from u to u_stop.

    du is the signed first step; guard keeps landing nodes off the
    integer-|1/g| crossing set (meaningful only while |1/g| shrinks).
    The corrector can stall (shrink the step) or slide onto a coalescing
    neighbour branch (the sector sum invariant flags that); both answers
    are to approach the trouble spot from closer in, where the guard plus
    a short predictor leg hop over the crossing reliably.
    """
    L = len(eps)
    N = len(tuple(occupation))
    streak = 0
    failures = 0
    while u != u_stop:
        if du == 0.0 or abs(du) >= abs(u_stop - u):
            u_next = u_stop
        else:
            u_next = u + du
        if guard:
            u_next = _avoid_crossing(u, u_next, u_stop, L)
        g, g_next = sign * np.exp(u), sign * np.exp(u_next)
        try:
            # Tangent predictor in mu = g Lambda against ln g: mu is constant
            # along the strongly-coupled 1/g branches, so the extrapolation
            # stays accurate over multiplicative steps.
            predictor = lam
            here = ModelParams(kind, g, eps)
            try:
                dlam_dg = np.linalg.solve(evb_jacobian(here, lam),
                                          -_dresidual_dg(here, lam))
                dmu_du = g * lam + g * g * dlam_dg
                predictor = (g * lam + dmu_du * (u_next - u)) / g_next
            except np.linalg.LinAlgError:
                pass
            lam_next = _newton_evb(ModelParams(kind, g_next, eps), predictor,
                                   opts.newton_tol, opts.max_iter)
            if not _invariant_ok(ModelParams(kind, g_next, eps), N, lam_next):
                raise _BranchJump
        except (ConvergenceError, _BranchJump):
            streak = 0
            failures += 1
            du *= opts.shrink
            if abs(du) < 1e-12 or failures > 200:
                bits = _occupation_bitstring(L, occupation)
                raise ConvergenceError(
                    f"continuation stalled for seed {bits} at g = {g:.6g}",
                    seed_occupation=bits, last_g=g)
            continue
        lam, u = lam_next, u_next
        streak += 1
        if streak >= 3:
            du = np.sign(du) * min(abs(du) * opts.grow, opts.max_step)
            streak = 0
    return lam


def _continue_occupation_once(model: ModelParams, occupation, opts: SolveOptions,
                              step_fraction: float) -> np.ndarray:
    """One continuation sweep from weak coupling to the target g.

    Steps are linear in ln|g| (the Lambda values scale like 1/g near the
    anchor, so linear-in-g steps from there overshoot by orders of
    magnitude).  Hyperbolic targets hiding within 0.11 behind an
    integer-|1/g| crossing are reached in two legs: over the crossing to
    a safe waypoint, then back from the far side.
    """
    eps = model.epsilons
    g_target = model.g
    scale = max(1.0, float(np.max(np.abs(eps))))
    sign = 1.0 if g_target > 0 else -1.0
    g0 = sign * min(abs(g_target), 1e-3 * scale)
    lam = _seed_lambdas(model.kind, eps, occupation, g0)
    lam = _newton_evb(ModelParams(model.kind, g0, eps), lam, opts.newton_tol, opts.max_iter)
    u, u_target = np.log(abs(g0)), np.log(abs(g_target))
    legs = [(u_target, model.kind == HYPERBOLIC)]
    if model.kind == HYPERBOLIC:
        u_over = _overshoot_target(u_target, sign, model.L)
        if u_over is not None and u_over > u:
            legs = [(u_over, True), (u_target, False)]
    for u_stop, guard in legs:
        du = float(np.clip((u_stop - u) * step_fraction,
                           -opts.max_step, opts.max_step))
        lam = _walk_nodes(model.kind, eps, lam, u, u_stop, sign, opts, du,
                          guard, occupation)
        u = u_stop
    # Two undamped polish steps at the target coupling drive the residual to
    # its rounding floor there (the continuation criterion is only relative).
    res = _residual_evb_raw(model, lam)
    for _ in range(2):
        try:
            step = np.linalg.solve(evb_jacobian(model, lam), -res)
        except np.linalg.LinAlgError:
            break
        trial = lam + step
        trial_res = _residual_evb_raw(model, trial)
        if np.abs(trial_res).max() < np.abs(res).max():
            lam, res = trial, trial_res
        else:
            break
    return lam


def _continue_occupation(model: ModelParams, occupation, opts: SolveOptions) -> np.ndarray:
    """Continue one seed to the target g, retrying with finer initial steps
    if a sweep fails outright."""
    N = len(tuple(occupation))
    fraction = opts.initial_step_fraction
    last_error = None
    for _ in range(3):
        try:
            lam = _continue_occupation_once(model, occupation, opts, fraction)
        except ConvergenceError as exc:
            last_error = exc
            fraction *= 0.25
            continue
        if _invariant_ok(model, N, lam):
            return lam
        last_error = ConvergenceError(
            f"continuation jumped branches for seed "
            f"{_occupation_bitstring(model.L, occupation)}",
            seed_occupation=_occupation_bitstring(model.L, occupation),
            last_g=model.g)
        fraction *= 0.25
    raise last_error


def _occupation_bitstring(L: int, occupation) -> str:
    bits = ["0"] * L
    for i in occupation:
        bits[i] = "1"
    return "".join(bits)


class DuplicateSolutionError(ConvergenceError):
    pass


def solve_evb_seed(model: ModelParams, occupation,
                   opts: SolveOptions = DEFAULT_OPTIONS) -> EigenstateRecord:
    """One eigenstate, continued from a single weak-coupling occupation.

    occupation is an iterable of distinct 0-based level indices; the
    returned record is converged to opts.newton_tol.
    """
    require_valid_model(model)
    if opts.target_g is not None and opts.target_g != model.g:
        model = ModelParams(model.kind, opts.target_g, model.epsilons)
    occ = tuple(sorted(int(i) for i in occupation))
    if len(set(occ)) != len(occ):
        raise ValidationError(f"occupation {occ} has repeated indices")
    if occ and not (0 <= occ[0] and occ[-1] < model.L):
        raise ValidationError(f"occupation {occ} out of range for L={model.L}")
    lam = _continue_occupation(model, occ, opts)
    residual = float(np.abs(_residual_evb_raw(model, lam)).max())
    return EigenstateRecord(
        model=model,
        N=len(occ),
        lambdas=LambdaSet(lam, len(occ)),
        seed_occupation=_occupation_bitstring(model.L, occ),
        residual_norm=residual,
        converged=True,
    )


def _colliding_indices(records, gap_floor: float) -> set:
    bad = set()
    for a in range(len(records)):
        for b in range(a + 1, len(records)):
            gap = np.abs(records[a].lambdas.lambdas
                         - records[b].lambdas.lambdas).max()
            if gap <= gap_floor:
                bad.update((a, b))
    return bad


def refine_colliding_seeds(model: ModelParams, occupations, records,
                           opts: SolveOptions = DEFAULT_OPTIONS) -> list:
    """Re-walk seeds that collapsed onto a shared state, with capped steps.

    Generic avoided crossings (close levels at strong coupling) can turn
    sharper than the default step resolution: a predictor leg slides onto
    the neighbouring branch, and two seeds report the same state.  That
    jump is invisible to the sector-sum gate, because every state in the
    sector shares the invariant, but it is unambiguous once all records
    are in hand.  Each member of a colliding cluster is re-walked with
    the step size capped (first at 0.02, then at 0.002 in ln|g|), short
    enough for the corrector to track its branch through the turn.
    occupations and records are parallel sequences; the returned list
    keeps the input order, and clean seeds keep their original records.
    """
    records = list(records)
    gap_floor = 1e6 * opts.newton_tol
    for cap in (0.02, 0.002):
        bad = _colliding_indices(records, gap_floor)
        if not bad:
            break
        fine = replace(opts, max_step=cap)
        for idx in sorted(bad):
            records[idx] = solve_evb_seed(model, occupations[idx], fine)
    return records


def solve_evb_all(model: ModelParams, N: int,
                  opts: SolveOptions = DEFAULT_OPTIONS) -> list:
    """All C(L,N) eigenstates of the N-pair sector, one per seed occupation.

    Records come back in lexicographic seed order, each converged to
    opts.newton_tol and pairwise distinct.  Seeds that collapse onto a
    shared state are re-walked with finer steps before the collapse is
    reported as an error.
    """
    require_valid_model(model)
    if not (0 <= N <= model.L):
        raise ValidationError(f"N={N} out of range for L={model.L}")
    occupations = list(combinations(range(model.L), N))
    records = [solve_evb_seed(model, occupation, opts)
               for occupation in occupations]
    records = refine_colliding_seeds(model, occupations, records, opts)
    gap_floor = 1e6 * opts.newton_tol
    for a in range(len(records)):
        for b in range(a + 1, len(records)):
            gap = np.abs(records[a].lambdas.lambdas - records[b].lambdas.lambdas).max()
            if gap <= gap_floor:
                raise DuplicateSolutionError(
                    f"seeds {records[a].seed_occupation} and {records[b].seed_occupation} "
                    f"converged to the same state (gap {gap:.3e})")
    return records


# ----------------------------------------------------------------------
# Representation conversion
# ----------------------------------------------------------------------

def lambda_values(eps: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Complex Lambda_i = sum_a 1/(eps_i - v_a) for an arbitrary value set."""
    if len(vs) == 0:
        return np.zeros(len(eps), dtype=complex)
    return (1.0 / (eps[:, None] - vs[None, :])).sum(axis=1)


def lambdas_from_rapidities(model: ModelParams, rapidities: SpectralSet,
                            imag_tol: float = 1e-9) -> LambdaSet:
    """LambdaSet of a conjugation-closed rapidity set (imaginary parts drop)."""
    eps = model.epsilons
    vs = rapidities.values
    scale = max(1.0, float(np.max(np.abs(eps))))
    if len(vs) and np.min(np.abs(vs[:, None] - eps[None, :])) <= 1e-12 * scale:
        raise PoleError("rapidity coincides with a level eps_i")
    lam = lambda_values(eps, vs)
    imag_max = float(np.abs(lam.imag).max()) if len(lam) else 0.0
    lam_scale = max(1.0, float(np.abs(lam).max())) if len(lam) else 1.0
    if imag_max > imag_tol * lam_scale:
        raise ValidationError(
            f"Lambda values are not real (max imag {imag_max:.3e}); "
            "the rapidity set is not closed under conjugation")
    return LambdaSet(lam.real, len(vs))


def rapidities_from_lambdas(model: ModelParams, lambdas: LambdaSet, N: int,
                            lstsq_tol: float = 1e-8) -> BethePolynomial:
    """Recover the monic degree-N polynomial with the rapidities as roots.

    The residue of the framework-linking differential equation at each
    eps_i forces P'(eps_i) = Lambda_i P(eps_i); those L conditions are
    linear in the N unknown coefficients.  The system is solved in the
    variable t = (z - mu)/sigma to keep powers O(1).
    """
    if len(lambdas) != model.L:
        raise ValidationError("LambdaSet length must equal L")
    if N == 0:
        return BethePolynomial(0, make_spectral_set([], OFF_SHELL))
    eps = model.epsilons
    lam = lambdas.lambdas
    mu = float(eps.mean())
    sigma = max(1.0, float(eps.max() - eps.min()) / 2.0)
    t = (eps - mu) / sigma
    slam = sigma * lam
    # columns k = 0..N-1 of  Q'(t_i) - sigma Lambda_i Q(t_i)  in coefficients d_k
    A = np.zeros((model.L, N))
    powers = np.vstack([t ** k for k in range(N + 1)])  # powers[k] = t^k
    for k in range(N):
        deriv = k * powers[k - 1] if k >= 1 else np.zeros(model.L)
        A[:, k] = deriv - slam * powers[k]
    b = -(N * powers[N - 1] - slam * powers[N])
    d, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.abs(A @ d - b).max())
    if resid > lstsq_tol * max(1.0, float(np.abs(b).max())):
        raise ValidationError(
            f"Lambda set inconsistent with an N={N} rapidity polynomial "
            f"(residue-matching residual {resid:.3e})")
    coeffs = np.concatenate([[1.0], d[::-1]])  # highest power first
    roots_t = np.roots(coeffs)
    roots = mu + sigma * roots_t
    roots = _polish_roots(eps, lam, roots)
    order = np.lexsort((roots.imag, roots.real))
    return BethePolynomial(N, make_spectral_set(roots[order], OFF_SHELL))


def _polish_roots(eps: np.ndarray, lam: np.ndarray, roots: np.ndarray,
                  iters: int = 6) -> np.ndarray:
    """Gauss-Newton on R_i = Lambda_i - sum_a 1/(eps_i - v_a)."""
    vs = roots.astype(complex)
    target = lam.astype(complex)
    scale = max(1.0, float(np.abs(lam).max()))
    best = None
    for _ in range(iters):
        diff = eps[:, None] - vs[None, :]
        if np.min(np.abs(diff)) < 1e-13 * max(1.0, np.abs(eps).max()):
            break  # root parked on a level; polishing the rest is meaningless
        R = target - (1.0 / diff).sum(axis=1)
        norm = float(np.abs(R).max())
        if best is not None and norm >= best:
            break
        best = norm
        if norm < 1e-13 * scale:
            break
        J = -1.0 / diff ** 2
        step, *_ = np.linalg.lstsq(J, -R, rcond=None)
        vs = vs + step
    return vs


def solve_bethe_direct(model: ModelParams, seed: SpectralSet,
                       opts: SolveOptions = DEFAULT_OPTIONS) -> SpectralSet:
    """Damped complex Newton on the Bethe equations from a given seed."""
    require_valid_model(model)
    vs = seed.values.astype(complex).copy()
    if len(vs) == 0:
        return make_spectral_set([], ON_SHELL)
    current = residual_bethe(model, make_spectral_set(vs))
    best = np.abs(current).max()
    for _ in range(opts.max_iter):
        if best < opts.newton_tol:
            break
        J = bethe_jacobian(model, vs)
        try:
            step = np.linalg.solve(J, -current)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Jacobian in Bethe-equation Newton")
        damp = 1.0
        for _ in range(40):
            trial = vs + damp * step
            try:
                trial_res = residual_bethe(model, make_spectral_set(trial))
            except PoleError:
                damp *= 0.5
                continue
            trial_norm = np.abs(trial_res).max()
            if trial_norm < best:
                vs, current, best = trial, trial_res, trial_norm
                break
            damp *= 0.5
        else:
            raise ConvergenceError("Bethe Newton line search stalled")
    if best >= opts.newton_tol:
        raise ConvergenceError(f"Bethe Newton did not converge (residual {best:.3e})")
    result = make_spectral_set(vs, ON_SHELL)
    if result.degenerate:
        raise CollisionError("rapidities collapsed onto a Degenerate (coinciding) set")
    return result


# ----------------------------------------------------------------------
# Dual representation
# ----------------------------------------------------------------------

def dual_lambdas(model: ModelParams, lambdas: LambdaSet) -> LambdaSet:
    """Lambda set of the dual representation (L - N lowering rapidities).

    Rational shift 2/g per level; hyperbolic shift 1/(g eps_i).
    """
    if len(lambdas) != model.L:
        raise ValidationError("LambdaSet length must equal L")
    if model.kind == RATIONAL:
        shifted = lambdas.lambdas + 2.0 / model.g
    else:
        shifted = lambdas.lambdas + 1.0 / (model.g * model.epsilons)
    return LambdaSet(shifted, model.L - lambdas.particle_number)


def read_green_integer(model: ModelParams, N: int, tol: float = 1e-6) -> Optional[int]:
    """The singular integer 1/g sits on, if any, for the (L, N) sector.

    Dual rapidities diverge for 1/g = p with 0 <= p <= L-2N-1 and collapse
    to zero for 1/g = -p with 1 <= p <= N.
    """
    if model.kind != HYPERBOLIC:
        return None
    g_inv = 1.0 / model.g
    nearest = round(g_inv)
    if abs(g_inv - nearest) > tol:
        return None
    if 0 <= nearest <= model.L - 2 * N - 1 or -N <= nearest <= -1:
        return int(nearest)
    return None


def dual_rapidities(model: ModelParams, record: EigenstateRecord,
                    residual_tol: float = 1e-8) -> SpectralSet:
    """The L - N dual rapidities of a converged record."""
    if not record.converged:
        raise ValidationError("dual_rapidities needs a converged record")
    singular = read_green_integer(model, record.N)
    if singular is not None:
        raise SingularPointError(
            f"1/g = {singular} is a Read-Green point for the (L={model.L}, N={record.N}) "
            "sector: dual rapidities diverge or collapse there", integer=singular)
    shifted = dual_lambdas(model, record.lambdas)
    poly = rapidities_from_lambdas(model, shifted, model.L - record.N)
    roots = poly.roots
    flipped = model.flipped()
    if len(roots):
        try:
            # the duals satisfy the sign-flipped equations exactly, so
            # re-converge them there before gating on the residual
            roots = solve_bethe_direct(flipped, roots)
        except (ConvergenceError, ValidationError):
            pass
    duals = SpectralSet(roots.values, DUAL, roots.degenerate)
    resid = np.abs(residual_bethe(flipped, duals)).max() if len(duals) else 0.0
    if resid > residual_tol:
        raise ConvergenceError(f"dual rapidities fail the sign-flipped equations "
                               f"(residual {resid:.3e})")
    return duals
