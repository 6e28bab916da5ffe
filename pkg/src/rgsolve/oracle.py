"""Brute-force ground truth in the fixed-N sector of the 2^L Hilbert space.

Dense conserved-charge matrices and explicit Bethe-state amplitude vectors
at desk scale (C(L,N) <= 70 for L <= 8).  Every determinant formula in the
package is cross-validated against inner products taken here.

Basis convention: the sector basis enumerates occupations by
itertools.combinations(range(L), N), i.e. lexicographically increasing
index tuples of the up-spin positions; position 0 of a bitstring is level 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

import numpy as np

from .cauchy import CauchyPair, borchardt_permanent, cauchy_matrix, permanent_direct
from .errors import CollisionError, PoleError, ValidationError
from .model import (HYPERBOLIC, RATIONAL, EigenstateRecord, ModelParams,
                    SpectralSet, require_valid_model)

# Direct (Ryser) permanents up to this size; Borchardt determinant ratio beyond.
_DIRECT_PERMANENT_MAX = 6


@dataclass(frozen=True)
class SectorBasis:
    """Ordered list of the C(L,N) occupations of the N-up sector."""

    L: int
    N: int
    occupations: tuple  # tuple of index tuples, lexicographic

    @property
    def dim(self) -> int:
        return len(self.occupations)

    def index_of(self, occupation) -> int:
        return _basis_lookup(self.L, self.N)[tuple(occupation)]


@lru_cache(maxsize=None)
def sector_basis(L: int, N: int) -> SectorBasis:
    if not (0 <= N <= L):
        raise ValidationError(f"sector N={N} out of range for L={L}")
    return SectorBasis(L, N, tuple(combinations(range(L), N)))


@lru_cache(maxsize=None)
def _basis_lookup(L: int, N: int) -> dict:
    return {occ: k for k, occ in enumerate(sector_basis(L, N).occupations)}


@dataclass(frozen=True)
class SectorAmplitudes:
    """Dense complex amplitudes over one sector basis."""

    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if len(amps) != self.basis.dim:
            raise ValidationError("amplitude array length must equal the sector dimension")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _cauchy_permanent(eps_sub: np.ndarray, vs: np.ndarray) -> complex:
    """Permanent of [1/(eps_b - v_a)]; Borchardt ratio with Ryser fallback."""
    n = len(vs)
    if n == 0:
        return complex(1.0)
    pair = CauchyPair(eps_sub, vs)
    if n <= _DIRECT_PERMANENT_MAX:
        return permanent_direct(cauchy_matrix(pair))
    try:
        return borchardt_permanent(pair)
    except CollisionError:
        return permanent_direct(cauchy_matrix(pair))


def build_bethe_state(model: ModelParams, rapidities: SpectralSet,
                      dual: bool = False) -> SectorAmplitudes:
    """Amplitude vector of a (possibly off-shell) Bethe product state.

    With dual=False the state is built by raising operators on the all-down
    reference; the amplitude on occupation {i_1..i_N} is the permanent of
    [w(i_b, v_a)] with w = 1/(eps-v) (rational) or sqrt(eps)/(eps-v)
    (hyperbolic).  With dual=True the same weights act through lowering
    operators on the all-up reference and the permanent runs over the
    complementary (down-spin) positions; the result lives in the sector
    with N = L - len(rapidities) up spins.
    """
    require_valid_model(model)
    eps = model.epsilons
    L = model.L
    vs = rapidities.values
    if len(vs) > L:
        raise ValidationError("more rapidities than levels")
    scale = max(1.0, float(np.max(np.abs(eps))))
    if len(vs) and np.min(np.abs(vs[:, None] - eps[None, :])) <= 1e-12 * scale:
        raise PoleError("rapidity coincides with a level eps_i")
    N = L - len(vs) if dual else len(vs)
    basis = sector_basis(L, N)
    sqrt_eps = np.sqrt(eps) if model.kind == HYPERBOLIC else None
    amps = np.empty(basis.dim, dtype=complex)
    for k, occ in enumerate(basis.occupations):
        positions = tuple(i for i in range(L) if i not in occ) if dual else occ
        idx = np.fromiter(positions, dtype=int, count=len(positions))
        value = _cauchy_permanent(eps[idx], vs)
        if model.kind == HYPERBOLIC and len(idx):
            value *= np.prod(sqrt_eps[idx])
        amps[k] = value
    return SectorAmplitudes(basis, amps)


def product_state(L: int, occupied) -> SectorAmplitudes:
    """Unit amplitude on a single occupation."""
    occ = tuple(sorted(int(i) for i in occupied))
    basis = sector_basis(L, len(occ))
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index_of(occ)] = 1.0
    return SectorAmplitudes(basis, amps)


def conserved_charge(model: ModelParams, i: int, N: int) -> np.ndarray:
    """Dense matrix of the conserved charge R_i on the N-up sector.

    Rational:   R_i = (Sz_i + 1/2)
                      + g sum_{j!=i} [ (1/2)(S+_i S-_j + S-_i S+_j)
                                       + (Sz_i Sz_j - 1/4) ] / (eps_i - eps_j)
    Hyperbolic: exchange weight sqrt(eps_i eps_j), Ising weight 2 eps_i.
    """
    require_valid_model(model)
    L = model.L
    if not (0 <= i < L):
        raise ValidationError(f"level index {i} out of range")
    eps = model.epsilons
    g = model.g
    basis = sector_basis(L, N)
    lookup = _basis_lookup(L, N)
    dim = basis.dim
    R = np.zeros((dim, dim), dtype=float)
    hyper = model.kind == HYPERBOLIC
    sqrt_eps = np.sqrt(eps) if hyper else None
    for k, occ in enumerate(basis.occupations):
        occ_set = set(occ)
        diag = 1.0 if i in occ_set else 0.0
        for j in range(L):
            if j == i:
                continue
            denom = eps[i] - eps[j]
            # Ising part: (Sz_i Sz_j - 1/4) is -1/2 when exactly one of i, j is up
            if (i in occ_set) != (j in occ_set):
                w_ising = 2.0 * eps[i] if hyper else 1.0
                diag += g * w_ising * (-0.5) / denom
            # exchange part moves one up spin between i and j (both hop directions)
            if (j in occ_set) != (i in occ_set):
                if j in occ_set:
                    target = tuple(sorted(occ_set - {j} | {i}))
                else:
                    target = tuple(sorted(occ_set - {i} | {j}))
                w_exch = sqrt_eps[i] * sqrt_eps[j] if hyper else 0.5
                R[lookup[target], k] += g * w_exch / denom
        R[k, k] += diag
    return R


def all_charges(model: ModelParams, N: int) -> list:
    return [conserved_charge(model, i, N) for i in range(model.L)]


def exact_inner_product(a: SectorAmplitudes, b: SectorAmplitudes) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.basis.L != b.basis.L or a.basis.N != b.basis.N:
        raise ValidationError("inner product requires matching sector bases")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


@dataclass(frozen=True)
class Report:
    ok: bool
    worst: float
    messages: tuple

    def __bool__(self) -> bool:
        return self.ok


def charge_eigenvalue(model: ModelParams, lambdas: np.ndarray) -> np.ndarray:
    """Eigenvalues r_i of every R_i on the state with the given Lambda set."""
    if model.kind == RATIONAL:
        return -(model.g / 2.0) * np.asarray(lambdas, dtype=float)
    return -model.g * model.epsilons * np.asarray(lambdas, dtype=float)


def verify_eigenstate(model: ModelParams, record: EigenstateRecord,
                      tol: float = 1e-9) -> Report:
    """Check R_i |psi> = r_i |psi> for every i, relative to ||psi||."""
    if record.rapidities is None:
        raise ValidationError("verify_eigenstate needs a record with rapidities")
    psi = build_bethe_state(model, record.rapidities)
    norm = psi.norm()
    if norm == 0.0:
        raise ValidationError("zero-norm state")
    rs = charge_eigenvalue(model, record.lambdas.lambdas)
    residuals = []
    for i in range(model.L):
        R = conserved_charge(model, i, record.N)
        resid = np.linalg.norm(R @ psi.amplitudes - rs[i] * psi.amplitudes) / norm
        residuals.append(float(resid))
    worst = max(residuals)
    msgs = tuple(f"R_{i + 1}: |R psi - r psi|/|psi| = {r:.3e}" for i, r in enumerate(residuals))
    return Report(worst < tol, worst, msgs)


def verify_quadratic_identity(model: ModelParams, N: int, tol: float = 1e-10) -> Report:
    """Operator identity R_i^2 = R_i - c_i sum_{j != i} (R_i - R_j)/(eps_i - eps_j).

    c_i = g/2 for the rational kind and g eps_i for the hyperbolic kind.
    """
    require_valid_model(model)
    charges = all_charges(model, N)
    eps = model.epsilons
    worst = 0.0
    msgs = []
    for i in range(model.L):
        ci = model.g / 2.0 if model.kind == RATIONAL else model.g * eps[i]
        rhs = charges[i].copy()
        for j in range(model.L):
            if j == i:
                continue
            rhs -= ci * (charges[i] - charges[j]) / (eps[i] - eps[j])
        resid = float(np.abs(charges[i] @ charges[i] - rhs).max())
        worst = max(worst, resid)
        msgs.append(f"R_{i + 1} quadratic identity residual {resid:.3e}")
    return Report(worst < tol, worst, tuple(msgs))


def verify_commutators(model: ModelParams, N: int, tol: float = 1e-12) -> Report:
    """Max-norm of [R_i, R_j] over all pairs in the sector."""
    charges = all_charges(model, N)
    worst = 0.0
    for i in range(model.L):
        for j in range(i + 1, model.L):
            comm = charges[i] @ charges[j] - charges[j] @ charges[i]
            worst = max(worst, float(np.abs(comm).max()))
    return Report(worst < tol, worst, (f"max |[R_i, R_j]| = {worst:.3e}",))
