"""Cauchy-matrix machinery: inverses, permanents and determinant identities.

A Cauchy pair is two value sets {eps_i} (size m) and {x_alpha} (size n)
with C_{i,alpha} = 1/(eps_i - x_alpha).  Everything a determinant formula
in this package needs reduces to structure of such matrices:

  * explicit inverse and explicit determinant,
  * Borchardt's identity  per[C] = det[C*C]/det[C]  (entrywise product *),
  * the J-matrix factorizations  per[C] = det[J_eps] = det[J_x],
  * a mixed-size Sylvester identity  det[1_n + J_x] = det[1_m + J_eps],
  * a second-order entrywise-product identity, and
  * a matrix-determinant-lemma identity with a mixed-size prefactor.

Products such as p'(eps_i) = prod_{k != i}(eps_i - eps_k) are evaluated as
running products per point; expanded polynomial coefficients are never
formed (they are catastrophically ill-conditioned).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CollisionError, PoleError, ValidationError

# Hard-pole tolerance: entries 1/(eps - x) are refused below this relative gap.
POLE_RTOL = 1e-12


@dataclass(frozen=True)
class CauchyPair:
    """Value sets {eps_i} and {x_alpha}; sizes may differ."""

    eps: np.ndarray
    xs: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=complex)
        xs = np.asarray(self.xs, dtype=complex)
        eps.flags.writeable = False
        xs.flags.writeable = False
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "xs", xs)

    @property
    def m(self) -> int:
        return len(self.eps)

    @property
    def n(self) -> int:
        return len(self.xs)


def _scale(pair: CauchyPair) -> float:
    vals = np.concatenate([pair.eps, pair.xs]) if pair.m + pair.n else np.array([1.0])
    return max(1.0, float(np.max(np.abs(vals))))


def _require_no_cross_pole(pair: CauchyPair) -> None:
    if pair.m == 0 or pair.n == 0:
        return
    gap = np.abs(pair.eps[:, None] - pair.xs[None, :]).min()
    if gap <= POLE_RTOL * _scale(pair):
        raise PoleError("eps_i = x_alpha within tolerance: Cauchy entry has a pole")


def _require_distinct(values: np.ndarray, what: str, scale: float) -> None:
    if len(values) < 2:
        return
    gaps = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() <= POLE_RTOL * scale:
        raise CollisionError(f"coinciding {what} values: diagonal formulas have a pole")


def cauchy_matrix(pair: CauchyPair) -> np.ndarray:
    """Entries C_{i,alpha} = 1/(eps_i - x_alpha), shape (m, n)."""
    _require_no_cross_pole(pair)
    if pair.m == 0 or pair.n == 0:
        return np.zeros((pair.m, pair.n), dtype=complex)
    return 1.0 / (pair.eps[:, None] - pair.xs[None, :])


def cauchy_inverse(pair: CauchyPair) -> np.ndarray:
    """Explicit inverse of a square Cauchy matrix, shape (n, m).

    Entry (alpha, i) = -1/(eps_i - x_alpha) * p(x_alpha) q(eps_i)
                        / (p'(eps_i) q'(x_alpha)),
    with p(z) = prod_i (z - eps_i) and q(z) = prod_alpha (z - x_alpha).
    """
    if pair.m != pair.n:
        raise ValidationError("cauchy_inverse requires a square pair")
    _require_no_cross_pole(pair)
    s = _scale(pair)
    _require_distinct(pair.eps, "eps", s)
    _require_distinct(pair.xs, "x", s)
    n = pair.n
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    eps, xs = pair.eps, pair.xs
    diff_xe = xs[:, None] - eps[None, :]          # x_alpha - eps_i
    p_at_x = np.prod(diff_xe, axis=1)             # p(x_alpha)
    q_at_e = np.prod(eps[:, None] - xs[None, :], axis=1)  # q(eps_i)
    de = eps[:, None] - eps[None, :]
    np.fill_diagonal(de, 1.0)
    dp_at_e = np.prod(de, axis=1)                 # p'(eps_i)
    dx = xs[:, None] - xs[None, :]
    np.fill_diagonal(dx, 1.0)
    dq_at_x = np.prod(dx, axis=1)                 # q'(x_alpha)
    inv = -(1.0 / (eps[None, :] - xs[:, None]))
    inv *= (p_at_x[:, None] / dq_at_x[:, None]) * (q_at_e[None, :] / dp_at_e[None, :])
    return inv


def cauchy_det_explicit(pair: CauchyPair) -> complex:
    """Closed-form determinant of a square Cauchy matrix.

    det C = prod_{j<i}(eps_i - eps_j) prod_{a<b}(x_a - x_b)
            / prod_{i,a}(eps_i - x_a).
    """
    if pair.m != pair.n:
        raise ValidationError("determinant requires a square pair")
    _require_no_cross_pole(pair)
    eps, xs = pair.eps, pair.xs
    num = complex(1.0)
    for i in range(len(eps)):
        for j in range(i):
            num *= eps[i] - eps[j]
    for a in range(len(xs)):
        for b in range(a + 1, len(xs)):
            num *= xs[a] - xs[b]
    den = np.prod(eps[:, None] - xs[None, :]) if len(eps) else complex(1.0)
    return complex(num / den)


def det_lu(M: np.ndarray) -> complex:
    """Determinant via pivoted LU; the 0 x 0 matrix has determinant 1."""
    det, _ = det_lu_rcond(M)
    return det


def det_extended_rcond(M: np.ndarray):
    """(determinant, pivot-ratio estimate) by extended-precision elimination.

    The input is promoted entry-wise to clongdouble (64-bit mantissa on
    x86, so roughly three extra decimal digits; on platforms where long
    double is plain double this degrades gracefully to the standard
    factorization) and eliminated with partial pivoting.  Entries handed
    in as clongdouble keep their extra digits, which matters for the
    structurally cancellation-heavy kernels built from inverse level
    spacings.  The advisory rcond is min|pivot| / max|pivot|.
    """
    A = np.asarray(M)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("det_lu requires a square matrix")
    n = A.shape[0]
    if n == 0:
        return complex(1.0), 1.0
    if not np.all(np.isfinite(A)):
        raise ValidationError("det_lu requires finite entries")
    A = A.astype(np.clongdouble)
    det = np.clongdouble(1.0)
    pivots = np.zeros(n, dtype=np.longdouble)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0.0:
            det = np.clongdouble(0.0)
            break
        if p != k:
            A[[k, p]] = A[[p, k]]
            det = -det
        pivots[k] = np.abs(A[k, k])
        det = det * A[k, k]
        A[k + 1:, k:] -= (A[k + 1:, k] / A[k, k])[:, None] * A[k, k:][None, :]
    mx = float(pivots.max())
    rcond = float(pivots.min() / mx) if mx > 0.0 else 0.0
    return complex(det), rcond


def det_lu_rcond(M: np.ndarray):
    """(determinant, reciprocal-condition estimate) from one factorization.

    The condition estimate is min|U_ii| / max|U_ii|, a cheap advisory
    number, not a rigorous condition number.  When it signals heavy
    cancellation (below 1e-3) the determinant is recomputed by extended-
    precision elimination, which keeps the relative error of small
    determinants of large-entry kernels near the double rounding floor.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError("det_lu requires a square matrix")
    n = M.shape[0]
    if n == 0:
        return complex(1.0), 1.0
    if not np.all(np.isfinite(M)):
        raise ValidationError("det_lu requires finite entries")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    diag = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(n)))
    det = complex((-1.0) ** swaps * np.prod(diag))
    absd = np.abs(diag)
    rcond = float(absd.min() / absd.max()) if absd.max() > 0.0 else 0.0
    if rcond < 1e-3:
        det, _ = det_extended_rcond(M)
    return det, rcond


def borchardt_permanent(pair: CauchyPair) -> complex:
    """Permanent of a square Cauchy matrix as det[C*C]/det[C]."""
    if pair.m != pair.n:
        raise ValidationError("permanent requires a square pair")
    if pair.n == 0:
        return complex(1.0)
    C = cauchy_matrix(pair)
    det_c = det_lu(C)
    if det_c == 0.0:
        raise CollisionError("singular Cauchy matrix: values inside a set coincide")
    return complex(det_lu(C * C) / det_c)


def permanent_direct(A: np.ndarray) -> complex:
    """Permanent by Ryser's inclusion-exclusion; exponential, n <= ~12."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValidationError("permanent requires a square matrix")
    if n == 0:
        return complex(1.0)
    total = complex(0.0)
    for mask in range(1, 1 << n):
        cols = [j for j in range(n) if mask >> j & 1]
        rowsums = A[:, cols].sum(axis=1)
        total += (-1.0) ** len(cols) * np.prod(rowsums)
    return complex((-1.0) ** n * total)


def j_eps_matrix(pair: CauchyPair) -> np.ndarray:
    """m x m matrix J_eps:

    diagonal  sum_alpha 1/(eps_i - x_alpha) - sum_{k != i} 1/(eps_i - eps_k),
    off-diagonal  -1/(eps_i - eps_j).
    """
    _require_no_cross_pole(pair)
    s = _scale(pair)
    _require_distinct(pair.eps, "eps", s)
    eps, xs = pair.eps, pair.xs
    m = pair.m
    if m == 0:
        return np.zeros((0, 0), dtype=complex)
    de = eps[:, None] - eps[None, :]
    np.fill_diagonal(de, 1.0)               # placeholder, masked right after
    inv = 1.0 / de
    np.fill_diagonal(inv, 0.0)
    sum_pairs = inv.sum(axis=1)             # sum_{k != i} 1/(eps_i - eps_k)
    cross = (1.0 / (eps[:, None] - xs[None, :])).sum(axis=1) if pair.n else np.zeros(m, dtype=complex)
    J = -inv
    np.fill_diagonal(J, cross - sum_pairs)
    return J


def j_x_matrix(pair: CauchyPair) -> np.ndarray:
    """n x n matrix J_x:

    diagonal  -sum_i 1/(x_alpha - eps_i) + sum_{kappa != alpha} 1/(x_alpha - x_kappa),
    off-diagonal  -1/(x_alpha - x_beta).
    """
    _require_no_cross_pole(pair)
    s = _scale(pair)
    _require_distinct(pair.xs, "x", s)
    eps, xs = pair.eps, pair.xs
    n = pair.n
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    dx = xs[:, None] - xs[None, :]
    np.fill_diagonal(dx, 1.0)
    inv = 1.0 / dx
    np.fill_diagonal(inv, 0.0)
    sum_pairs = inv.sum(axis=1)             # sum_{kappa != alpha} 1/(x_alpha - x_kappa)
    cross = (1.0 / (xs[:, None] - eps[None, :])).sum(axis=1) if pair.m else np.zeros(n, dtype=complex)
    J = -inv
    np.fill_diagonal(J, -cross + sum_pairs)
    return J


def check_sylvester_mixed(pair: CauchyPair):
    """(lhs, rhs) of the mixed-size identity det[1_n + J_x] = det[1_m + J_eps]."""
    lhs = det_lu(np.eye(pair.n, dtype=complex) + j_x_matrix(pair))
    rhs = det_lu(np.eye(pair.m, dtype=complex) + j_eps_matrix(pair))
    return lhs, rhs


def check_hadamard3(pair: CauchyPair):
    """(lhs, rhs) of det[2(C*C*C)]/det[C*C] = det[J_x + C^T J_eps^{-1} C]."""
    if pair.m != pair.n:
        raise ValidationError("check_hadamard3 requires a square pair")
    if pair.n == 0:
        return complex(1.0), complex(1.0)
    C = cauchy_matrix(pair)
    C2 = C * C
    det_c2 = det_lu(C2)
    if det_c2 == 0.0:
        raise CollisionError("singular C*C in check_hadamard3")
    lhs = det_lu(2.0 * (C2 * C)) / det_c2
    Je = j_eps_matrix(pair)
    Jx = j_x_matrix(pair)
    rhs = det_lu(Jx + C.T @ np.linalg.solve(Je, C))
    return complex(lhs), complex(rhs)


def check_matrix_det_lemma(pair: CauchyPair, G: complex):
    """(lhs, rhs) of the matrix-determinant-lemma identity.

    lhs = (prod eps_i) det[(G-1)/(2 eps) + J_eps]
    rhs = (prod x_a)  det[(G+1)/(2 x)  + J_x]
          * prod_{k=1}^{m-n} ((G+1)/2 - k)   when m > n.

    Requires all eps_i, x_a nonzero and m >= n.
    """
    if pair.m < pair.n:
        raise ValidationError("check_matrix_det_lemma requires len(eps) >= len(xs)")
    s = _scale(pair)
    if (pair.m and np.min(np.abs(pair.eps)) <= POLE_RTOL * s) or \
       (pair.n and np.min(np.abs(pair.xs)) <= POLE_RTOL * s):
        raise ValidationError("check_matrix_det_lemma requires nonzero eps and x values")
    G = complex(G)
    Je = j_eps_matrix(pair)
    Jx = j_x_matrix(pair)
    lhs_mat = Je + np.diag((G - 1.0) / (2.0 * pair.eps)) if pair.m else Je
    rhs_mat = Jx + np.diag((G + 1.0) / (2.0 * pair.xs)) if pair.n else Jx
    lhs = np.prod(pair.eps) * det_lu(lhs_mat)
    rhs = np.prod(pair.xs) * det_lu(rhs_mat)
    for k in range(1, pair.m - pair.n + 1):
        rhs *= (G + 1.0) / 2.0 - k
    return complex(lhs), complex(rhs)
