"""Determinant formulas for inner products of Bethe states.

Every inner product here has at least two independent determinant routes:

* an L x L route whose matrix depends on the rapidities only through the
  per-level variables Lambda_i (natural in the eigenvalue-based framework),
* a 2N x 2N route whose matrix depends on the levels only through sums
  over eps (natural in the rapidity framework),
* for an on-shell bra, the classic N x N kernel determinant,
* for a product-state ket, a Cauchy-permanent reduction.

The routes must agree to full precision; keeping all of them alive is the
point, since their cross-agreement is the strongest internal consistency
check available without a brute-force oracle.

Conventions: the bra functional is the transpose (not conjugate) pairing.
For conjugation-closed on-shell bra sets the amplitudes are real, so this
matches the Hermitian inner product used by the brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cauchy import (CauchyPair, borchardt_permanent, det_extended_rcond,
                     det_lu_rcond, j_eps_matrix, j_x_matrix)
from .errors import CollisionError, SingularPointError, ValidationError
from .model import (HYPERBOLIC, RATIONAL, LambdaSet, ModelParams,
                    SpectralSet)
from .solvers import bethe_jacobian

_COLLISION_RTOL = 1e-10


@dataclass(frozen=True)
class OverlapResult:
    """Value of one determinant route, with its conditioning diagnostics.

    rcond is the LU diagonal ratio of the determinant factor; prefactor
    times determinant equals value.
    """

    value: complex
    method: str
    rcond: float
    prefactor: complex
    determinant: complex


def _values(s) -> np.ndarray:
    if isinstance(s, SpectralSet):
        return s.values
    return np.asarray(list(s), dtype=complex)


def _check_disjoint(v: np.ndarray, w: np.ndarray, what: str) -> None:
    if len(v) == 0 or len(w) == 0:
        return
    scale = max(1.0, float(np.abs(v).max()), float(np.abs(w).max()))
    if np.min(np.abs(v[:, None] - w[None, :])) < _COLLISION_RTOL * scale:
        raise CollisionError(f"{what} requires the two rapidity sets to be disjoint")


def _check_distinct(v: np.ndarray, what: str) -> None:
    n = len(v)
    if n < 2:
        return
    scale = max(1.0, float(np.abs(v).max()))
    d = np.abs(v[:, None] - v[None, :]) + np.eye(n) * scale
    if d.min() < _COLLISION_RTOL * scale:
        raise CollisionError(f"{what} has a pole at coinciding rapidities")


def pochhammer_descending(g_inv: float, M: int) -> float:
    """T(M) = prod_{k=1..M} (1/g + 1 - k), extended to M <= 0.

    T(0) = 1 and T(M) for M < 0 is 1 / prod_{k=M+1..0} (1/g + 1 - k), so
    that T(M+1) = T(M) (1/g - M) holds for every integer M.  A vanishing
    factor means 1/g sits on one of the integers where dual rapidities
    diverge or collapse; that is a singular point of the formula.
    """
    if M >= 0:
        factors = [g_inv + 1.0 - k for k in range(1, M + 1)]
        inverted = False
    else:
        factors = [g_inv + 1.0 - k for k in range(M + 1, 1)]
        inverted = True
    out = 1.0
    for f in factors:
        if abs(f) < 1e-9 * max(1.0, abs(g_inv)):
            raise SingularPointError(
                f"1/g = {round(g_inv)} makes the coupling-dependent prefactor "
                "vanish or diverge", integer=round(g_inv))
        out *= f
    return 1.0 / out if inverted else out


# ----------------------------------------------------------------------
# L x L route (eigenvalue-based)
# ----------------------------------------------------------------------

def det_j_overlap(model: ModelParams, N: int,
                  lambdas_bra: np.ndarray, lambdas_ket: np.ndarray,
                  bra_rapidity_product: Optional[complex] = None) -> OverlapResult:
    """<v|w> from the L x L matrix built out of Lambda(v) and Lambda(w).

    The bra must be on-shell.  The matrix diagonal carries Lambda_i(v) +
    Lambda_i(w) plus the coupling column of the quadratic equations; the
    prefactor is (-1)^N (g/2)^(L-2N) for the rational model and
    (-1)^N (prod eps / prod v) / T(L-2N) for the hyperbolic one, which
    needs the product of the bra rapidities.

    Close level pairs make this matrix cancellation-heavy (off-diagonal
    entries are inverse level spacings), so it is formed and eliminated
    in extended precision; Lambda arrays handed in as clongdouble keep
    their extra digits.
    """
    L = model.L
    lv = np.asarray(lambdas_bra).astype(np.clongdouble)
    lw = np.asarray(lambdas_ket).astype(np.clongdouble)
    if len(lv) != L or len(lw) != L:
        raise ValidationError("Lambda arrays must have length L")
    eps = model.epsilons.astype(np.longdouble)
    de = eps[:, None] - eps[None, :]
    np.fill_diagonal(de, 1.0)
    inv = 1.0 / de
    np.fill_diagonal(inv, 0.0)
    J = (-inv).astype(np.clongdouble)
    if model.kind == RATIONAL:
        diag = 2.0 / np.clongdouble(model.g) + lv + lw - inv.sum(axis=1)
        prefactor = complex((-1.0) ** N * (model.g / 2.0) ** (L - 2 * N))
    else:
        diag = lv + lw + 1.0 / (np.clongdouble(model.g) * eps) - inv.sum(axis=1)
        if bra_rapidity_product is None:
            if N == 0:
                bra_rapidity_product = 1.0
            else:
                raise ValidationError(
                    "the hyperbolic L x L route needs the product of the "
                    "bra rapidities")
        T = pochhammer_descending(1.0 / model.g, L - 2 * N)
        prefactor = ((-1.0) ** N * complex(np.prod(eps))
                     / complex(bra_rapidity_product) / T)
    np.fill_diagonal(J, diag)
    det, rcond = det_extended_rcond(J)
    return OverlapResult(prefactor * det, "detj", rcond, prefactor, det)


# ----------------------------------------------------------------------
# 2N x 2N route (rapidity-based)
# ----------------------------------------------------------------------

def det_k_overlap(model: ModelParams, bra, ket) -> OverlapResult:
    """<v|w> from the 2N x 2N matrix over the union {v} cup {w}.

    Diverges at v_a = w_b, so the two sets must be disjoint (use the norm
    routes for coinciding sets).  The bra must be on-shell.
    """
    v, w = _values(bra), _values(ket)
    if len(v) != len(w):
        raise ValidationError("bra and ket must have the same number of rapidities")
    N = len(v)
    _check_disjoint(v, w, "the 2N x 2N determinant")
    _check_distinct(v, "the 2N x 2N determinant")
    _check_distinct(w, "the 2N x 2N determinant")
    x = np.concatenate([v, w])
    eps = model.epsilons
    if N == 0:
        return OverlapResult(1.0 + 0.0j, "detk", 1.0, 1.0 + 0.0j, 1.0 + 0.0j)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    inv = 1.0 / dx
    np.fill_diagonal(inv, 0.0)
    level_sum = (1.0 / (x[:, None] - eps[None, :])).sum(axis=1)
    K = -inv
    if model.kind == RATIONAL:
        diag = 2.0 / model.g - level_sum + inv.sum(axis=1)
        prefactor = complex((-1.0) ** N)
    else:
        diag = -level_sum + inv.sum(axis=1) + (1.0 / model.g + 1.0) / x
        prefactor = complex((-1.0) ** N * np.prod(w))
    np.fill_diagonal(K, diag)
    det, rcond = det_lu_rcond(K)
    return OverlapResult(prefactor * det, "detk", rcond, prefactor, det)


# ----------------------------------------------------------------------
# N x N kernels (classic on-shell / off-shell inner product)
# ----------------------------------------------------------------------

def slavnov_overlap(model: ModelParams, bra, ket,
                    reduced: bool = False) -> OverlapResult:
    """<v|w> from the N x N kernel determinant; the bra must be on-shell.

    The rational kernel comes in two equivalent shapes: the classic one
    and a reduced one obtained by inserting the on-shell equations
    (reduced=True).  The hyperbolic model has the reduced shape only.
    """
    v, w = _values(bra), _values(ket)
    if len(v) != len(w):
        raise ValidationError("bra and ket must have the same number of rapidities")
    N = len(v)
    if N == 0:
        return OverlapResult(1.0 + 0.0j, "slavnov", 1.0, 1.0 + 0.0j, 1.0 + 0.0j)
    _check_disjoint(v, w, "the kernel determinant")
    _check_distinct(v, "the kernel determinant")
    _check_distinct(w, "the kernel determinant")
    eps = model.epsilons
    vw = v[:, None] - w[None, :]
    dv = v[:, None] - v[None, :]
    dw = w[:, None] - w[None, :]
    if model.kind == RATIONAL and not reduced:
        # prod_b prod_{a != b} (v_a - w_b)
        off = vw.astype(complex).copy()
        np.fill_diagonal(off, 1.0)
        numerator = complex(np.prod(off))
        lvl = 1.0 / ((v[:, None] - eps[None, :])[:, None, :]
                     * (w[None, :, None] - eps[None, None, :]))
        lvl_sum = lvl.sum(axis=2)
        pair = np.zeros((N, N), dtype=complex)
        for a in range(N):
            mask = np.arange(N) != a
            if mask.any():
                pair[a, :] = (1.0 / ((v[a] - v[mask])[:, None]
                                     * (w[None, :] - v[mask][:, None]))).sum(axis=0)
        S = (np.diag(vw).reshape(1, N) / vw) * (lvl_sum - 2.0 * pair)
    else:
        numerator = np.prod(vw.astype(complex))
        if model.kind == RATIONAL:
            bracket = ((1.0 / (w[:, None] - eps[None, :])).sum(axis=1)[None, :]
                       - 2.0 / model.g)
        else:
            bracket = ((1.0 / (w[:, None] - eps[None, :])).sum(axis=1)[None, :]
                       - (1.0 / model.g + 1.0) / w[None, :])
        cross = np.zeros((N, N), dtype=complex)
        for a in range(N):
            mask = np.arange(N) != a
            if mask.any():
                cross[a, :] = (1.0 / (w[None, :] - v[mask][:, None])).sum(axis=0)
        if model.kind == RATIONAL:
            S = (bracket - 2.0 * cross) / vw ** 2
        else:
            S = w[None, :] * (bracket - 2.0 * cross) / vw ** 2
    # prod_{a<b} (v_b - v_a): triu collects v_row - v_col with row < col,
    # which is the negative of each wanted factor.
    denom_v = (complex(np.prod(dv[np.triu_indices(N, 1)]))
               * (-1.0) ** (N * (N - 1) // 2))
    # prod_{b<a} (w_b - w_a): triu collects exactly w_b - w_a for b < a.
    denom_w = complex(np.prod(dw[np.triu_indices(N, 1)]))
    prefactor = numerator / (denom_v * denom_w)
    det, rcond = det_lu_rcond(S)
    name = "slavnov-reduced" if (reduced and model.kind == RATIONAL) else "slavnov"
    return OverlapResult(prefactor * det, name, rcond, prefactor, det)


# ----------------------------------------------------------------------
# Normalizations
# ----------------------------------------------------------------------

def gaudin_norm(model: ModelParams, rapidities) -> OverlapResult:
    """<v|v> of an on-shell state from the N x N rapidity-space matrix.

    Rational: the classic matrix with squared differences.  Hyperbolic:
    (prod v_a) times the determinant of the Jacobian of the on-shell
    equations, which is the same reduction applied to that model.
    """
    v = _values(rapidities)
    N = len(v)
    if N == 0:
        return OverlapResult(1.0 + 0.0j, "gaudin", 1.0, 1.0 + 0.0j, 1.0 + 0.0j)
    _check_distinct(v, "the norm determinant")
    eps = model.epsilons
    if model.kind == RATIONAL:
        dv = v[:, None] - v[None, :]
        np.fill_diagonal(dv, 1.0)
        inv_sq = 1.0 / dv ** 2
        np.fill_diagonal(inv_sq, 0.0)
        lvl = (1.0 / (eps[None, :] - v[:, None]) ** 2).sum(axis=1)
        G = 2.0 * inv_sq
        np.fill_diagonal(G, lvl - 2.0 * inv_sq.sum(axis=1))
        prefactor = 1.0 + 0.0j
        det, rcond = det_lu_rcond(G.astype(complex))
    else:
        J = bethe_jacobian(model, v)
        prefactor = complex(np.prod(v))
        det, rcond = det_lu_rcond(J)
    return OverlapResult(prefactor * det, "gaudin", rcond, prefactor, det)


def evb_norm(model: ModelParams, lambdas: LambdaSet,
             rapidity_product: Optional[complex] = None) -> OverlapResult:
    """<v|v> from the L x L route evaluated at coinciding sets."""
    lam = lambdas.lambdas.astype(complex)
    return det_j_overlap(model, lambdas.particle_number, lam, lam,
                         bra_rapidity_product=rapidity_product)


# ----------------------------------------------------------------------
# Product-state overlaps
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceOverlap:
    """<occupation|v> with the agreement spread of its independent routes."""

    value: complex
    routes: dict
    spread: float


def izergin_borchardt(model: ModelParams, rapidities, occupation) -> ReferenceOverlap:
    """Overlap of a Bethe state with one occupation-basis product state.

    Four routes are evaluated: the squared-Cauchy determinant with its
    double-alternant prefactor, the permanent via the Borchardt ratio, and
    the two square Gaudin-like determinants of the (eps_occ, v) pair.  The
    hyperbolic state carries an extra sqrt(prod eps_occ) weight.
    """
    v = _values(rapidities)
    occ = tuple(occupation)
    N = len(v)
    if len(occ) != N:
        raise ValidationError("occupation size must match the number of rapidities")
    if N == 0:
        return ReferenceOverlap(1.0 + 0.0j, {"izergin": 1.0 + 0.0j}, 0.0)
    _check_distinct(v, "the reference-state overlap")
    eps_occ = model.epsilons[list(occ)].astype(complex)
    scale = max(1.0, float(np.abs(v).max()), float(np.abs(eps_occ).max()))
    if np.min(np.abs(eps_occ[:, None] - v[None, :])) < _COLLISION_RTOL * scale:
        raise CollisionError("a rapidity sits on an occupied level")
    weight = 1.0
    if model.kind == HYPERBOLIC:
        weight = float(np.sqrt(np.prod(model.epsilons[list(occ)])))
    # route 1: squared-Cauchy determinant with double-alternant prefactor
    diff = eps_occ[:, None] - v[None, :]     # rows: levels, cols: rapidities
    num = complex(np.prod(diff))
    den_e = 1.0 + 0.0j
    for b in range(N):
        for c in range(b + 1, N):
            den_e *= eps_occ[b] - eps_occ[c]
    den_v = 1.0 + 0.0j
    for a in range(N):
        for c in range(a):
            den_v *= v[a] - v[c]
    det_sq, _ = det_lu_rcond(1.0 / diff ** 2)
    izergin = num / (den_e * den_v) * det_sq
    # routes 2-4: permanent of the Cauchy matrix and the two square
    # Gaudin-like determinants of the same pair
    pair = CauchyPair(eps_occ, v)
    perm = borchardt_permanent(pair)
    je, _ = det_lu_rcond(j_eps_matrix(pair))
    jx, _ = det_lu_rcond(j_x_matrix(pair))
    routes = {"izergin": weight * izergin, "borchardt": weight * perm,
              "j_eps": weight * je, "j_x": weight * jx}
    vals = list(routes.values())
    ref = max(1.0, max(abs(x) for x in vals))
    spread = max(abs(a - b) for a in vals for b in vals) / ref
    return ReferenceOverlap(routes["izergin"], routes, spread)


# ----------------------------------------------------------------------
# Duality ratio
# ----------------------------------------------------------------------

def dual_state_ratio(model: ModelParams, N: int,
                     rapidity_product: Optional[complex] = None) -> complex:
    """The constant c with (dual product state) = c * (original state).

    Rational: c = (-1)^N (2/g)^(L-2N).  Hyperbolic: c = (-1)^N
    (prod v_a / prod sqrt(eps_i)) T(L-2N), needing the original state's
    rapidity product.  At integer 1/g inside the singular window the
    hyperbolic ratio vanishes or diverges and this raises instead.
    """
    L = model.L
    if model.kind == RATIONAL:
        return complex((-1.0) ** N * (2.0 / model.g) ** (L - 2 * N))
    if rapidity_product is None:
        if N == 0:
            rapidity_product = 1.0
        else:
            raise ValidationError(
                "the hyperbolic duality ratio needs the product of the "
                "original rapidities")
    T = pochhammer_descending(1.0 / model.g, L - 2 * N)
    sqrt_eps = float(np.sqrt(np.prod(model.epsilons)))
    return complex((-1.0) ** N * complex(rapidity_product) / sqrt_eps * T)
