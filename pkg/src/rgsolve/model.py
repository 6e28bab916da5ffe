"""Model parameters, state representations, validation and serialization.

The arena for everything in this package is a spin-1/2 Richardson-Gaudin
model: a kind (rational XXX or hyperbolic XXZ), a coupling g != 0 and L
distinct single-particle levels epsilon_i (real; strictly positive for the
hyperbolic kind).  Eigenstates are represented either by N complex
rapidities {v_a} or by L real eigenvalue-based variables

    Lambda_i = sum_a 1/(epsilon_i - v_a),

and records bundle both together with the seed occupation and convergence
metadata.

Documents are canonical JSON with every float printed to 17 significant
digits, which round-trips IEEE doubles exactly and keeps output files
byte-identical across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DocumentError, ValidationError

RATIONAL = "rational"
HYPERBOLIC = "hyperbolic"

ON_SHELL = "on-shell"
DUAL = "dual"
OFF_SHELL = "off-shell"

# Relative tolerance below which two levels / two set members count as
# coinciding.  All determinant formulas have simple poles at collisions.
SEPARATION_RTOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Model kind, coupling and level set; immutable after construction."""

    kind: str
    g: float
    epsilons: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=float)
        eps.flags.writeable = False
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "g", float(self.g))

    @property
    def L(self) -> int:
        return len(self.epsilons)

    def flipped(self) -> "ModelParams":
        """Same model with the sign of g reversed (dual-state equations)."""
        return ModelParams(self.kind, -self.g, np.array(self.epsilons))


def validate_model(model: ModelParams, separation_rtol: float = SEPARATION_RTOL) -> list:
    """Return the list of violated invariants (empty when valid)."""
    report = []
    if model.kind not in (RATIONAL, HYPERBOLIC):
        report.append(f"unknown kind {model.kind!r}")
        return report
    if not np.isfinite(model.g) or model.g == 0.0:
        report.append("coupling g must be finite and nonzero")
    eps = model.epsilons
    if eps.ndim != 1 or len(eps) == 0:
        report.append("epsilon must be a nonempty 1-d array")
        return report
    if not np.all(np.isfinite(eps)):
        report.append("epsilon entries must be finite")
        return report
    scale = np.max(np.abs(eps))
    if scale == 0.0:
        scale = 1.0
    if len(eps) > 1:
        gaps = np.abs(eps[:, None] - eps[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() <= separation_rtol * scale:
            report.append("levels too close: min |eps_i - eps_j| below separation tolerance")
    if model.kind == HYPERBOLIC and np.any(eps <= 0.0):
        report.append("eps_i > 0 required for the hyperbolic kind")
    return report


def require_valid_model(model: ModelParams) -> None:
    report = validate_model(model)
    if report:
        raise ValidationError("invalid model: " + "; ".join(report))


@dataclass(frozen=True)
class SpectralSet:
    """Ordered multiset of complex rapidities (or dual/off-shell parameters)."""

    values: np.ndarray
    role: str = OFF_SHELL
    degenerate: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.role not in (ON_SHELL, DUAL, OFF_SHELL):
            raise ValidationError(f"unknown spectral role {self.role!r}")

    def __len__(self) -> int:
        return len(self.values)

    def sorted(self) -> "SpectralSet":
        """Values ordered by (real part, imaginary part).

        Determinant prefactors with sign-sensitive pair products are
        evaluated in this order; results are order-invariant and tested
        as such, the convention only pins down intermediate quantities.
        """
        if len(self.values) == 0:
            return self
        order = np.lexsort((self.values.imag, self.values.real))
        return SpectralSet(self.values[order], self.role, self.degenerate)

    def conjugation_closed(self, rtol: float = 1e-9) -> bool:
        vals = np.sort_complex(self.values)
        conj = np.sort_complex(np.conj(self.values))
        if len(vals) == 0:
            return True
        scale = max(1.0, float(np.max(np.abs(vals))))
        return bool(np.max(np.abs(vals - conj)) <= rtol * scale)


def make_spectral_set(values: Sequence[complex], role: str = OFF_SHELL,
                      collision_rtol: float = SEPARATION_RTOL) -> SpectralSet:
    """Build a SpectralSet, flagging it Degenerate on internal collisions."""
    vals = np.asarray(list(values), dtype=complex)
    degenerate = False
    if len(vals) > 1:
        scale = max(1.0, float(np.max(np.abs(vals))))
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        degenerate = bool(gaps.min() <= collision_rtol * scale)
    return SpectralSet(vals, role, degenerate)


def validate_spectral_set(model: ModelParams, sset: SpectralSet,
                          rtol: float = SEPARATION_RTOL) -> list:
    """Invariant report for a spectral set against a model."""
    report = []
    vals = sset.values
    if not np.all(np.isfinite(vals)):
        report.append("non-finite value in spectral set")
        return report
    if len(vals) > 0:
        eps = model.epsilons
        scale = max(1.0, float(np.max(np.abs(eps))))
        if np.min(np.abs(vals[:, None] - eps[None, :])) <= rtol * scale:
            report.append("value coincides with a level eps_i")
    if sset.role in (ON_SHELL, DUAL) and not sset.conjugation_closed():
        report.append("on-shell/dual set must be closed under complex conjugation")
    if sset.degenerate:
        report.append("set flagged Degenerate (internal collision)")
    return report


@dataclass(frozen=True)
class LambdaSet:
    """The L eigenvalue-based variables of one state, all real and finite."""

    lambdas: np.ndarray
    particle_number: int

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        if not np.all(np.isfinite(lam)):
            raise ValidationError("Lambda entries must be finite")
        if self.particle_number < 0:
            raise ValidationError("particle number must be >= 0")

    def __len__(self) -> int:
        return len(self.lambdas)


@dataclass(frozen=True)
class OccupationState:
    """Product state |i_1 ... i_N>: sorted distinct 0-based level indices."""

    occupied: tuple

    def __post_init__(self):
        occ = tuple(int(i) for i in self.occupied)
        object.__setattr__(self, "occupied", occ)
        if any(b <= a for a, b in zip(occ, occ[1:])):
            raise ValidationError("occupation indices must be strictly increasing")
        if occ and occ[0] < 0:
            raise ValidationError("occupation indices must be >= 0")

    def __len__(self) -> int:
        return len(self.occupied)

    def check_range(self, L: int) -> None:
        if self.occupied and self.occupied[-1] >= L:
            raise ValidationError(f"occupation index {self.occupied[-1]} out of range for L={L}")

    def bitstring(self, L: int) -> str:
        self.check_range(L)
        bits = ["0"] * L
        for i in self.occupied:
            bits[i] = "1"
        return "".join(bits)


def occupation_from_bitstring(bits: str) -> OccupationState:
    if not all(c in "01" for c in bits):
        raise ValidationError(f"bad occupation bitstring {bits!r}")
    return OccupationState(tuple(i for i, c in enumerate(bits) if c == "1"))


@dataclass(frozen=True)
class EigenstateRecord:
    """A solved eigenstate: Lambda variables + optional rapidities + metadata.

    seed_occupation is the L-character bitstring of the weak-coupling
    occupation the solution was continued from (leftmost character =
    level 1); residual_norm is the max-norm of the quadratic-equation
    residual at the stored Lambda values.
    """

    model: ModelParams
    N: int
    lambdas: LambdaSet
    seed_occupation: str
    residual_norm: float
    converged: bool
    rapidities: Optional[SpectralSet] = None
    dual_rapidities: Optional[SpectralSet] = None

    def __post_init__(self):
        if len(self.lambdas) != self.model.L:
            raise ValidationError("LambdaSet length must equal L")
        if self.lambdas.particle_number != self.N:
            raise ValidationError("LambdaSet particle number mismatch")
        if len(self.seed_occupation) != self.model.L or self.seed_occupation.count("1") != self.N:
            raise ValidationError("seed_occupation must have L bits with N set")

    def with_rapidities(self, rapidities: SpectralSet) -> "EigenstateRecord":
        return replace(self, rapidities=rapidities)

    def with_dual_rapidities(self, dual: SpectralSet) -> "EigenstateRecord":
        return replace(self, dual_rapidities=dual)


# ----------------------------------------------------------------------
# Canonical documents
# ----------------------------------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits, '.' decimal point, no locale dependence."""
    if isinstance(x, float) and math.isnan(x):
        raise DocumentError("cannot serialize NaN")
    return format(float(x), ".17g")


def _emit(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for k, item in enumerate(obj.items()):
            key, val = item
            if k:
                out.append(", ")
            out.append(json.dumps(key))
            out.append(": ")
            _emit(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _emit(val, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, np.floating):
        out.append(format_float(float(obj)))
    else:
        raise DocumentError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """JSON text with floats at 17 significant digits, stable key order."""
    out: list = []
    _emit(obj, out)
    out.append("\n")
    return "".join(out)


def model_to_doc(model: ModelParams) -> dict:
    return {
        "kind": model.kind,
        "g": float(model.g),
        "epsilon": [float(e) for e in model.epsilons],
    }


def model_from_doc(doc: dict) -> ModelParams:
    if not isinstance(doc, dict):
        raise DocumentError("model document must be an object")
    for fld in ("kind", "g", "epsilon"):
        if fld not in doc:
            raise DocumentError(f"model document missing field {fld!r}")
    kind = doc["kind"]
    if kind not in (RATIONAL, HYPERBOLIC):
        raise DocumentError(f"model field 'kind' must be 'rational' or 'hyperbolic', got {kind!r}")
    try:
        g = float(doc["g"])
        eps = np.asarray([float(e) for e in doc["epsilon"]], dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"model document has non-numeric entries: {exc}") from None
    model = ModelParams(kind, g, eps)
    report = validate_model(model)
    if report:
        raise DocumentError("invalid model document: " + "; ".join(report))
    return model


def _spectral_to_pairs(sset: SpectralSet) -> list:
    return [[float(v.real), float(v.imag)] for v in sset.values]


def _spectral_from_pairs(pairs, role: str) -> SpectralSet:
    try:
        vals = [complex(float(p[0]), float(p[1])) for p in pairs]
    except (TypeError, ValueError, IndexError) as exc:
        raise DocumentError(f"bad rapidity pair array: {exc}") from None
    return make_spectral_set(vals, role)


def record_to_doc(record: EigenstateRecord) -> dict:
    doc = {
        "n": int(record.N),
        "lambda": [float(x) for x in record.lambdas.lambdas],
        "seed_occupation": record.seed_occupation,
        "residual": float(record.residual_norm),
        "converged": bool(record.converged),
    }
    if record.rapidities is not None:
        doc["rapidities"] = _spectral_to_pairs(record.rapidities)
    if record.dual_rapidities is not None:
        doc["dual_rapidities"] = _spectral_to_pairs(record.dual_rapidities)
    return doc


def record_from_doc(doc: dict, model: ModelParams, index: int = 0) -> EigenstateRecord:
    if not isinstance(doc, dict):
        raise DocumentError(f"record {index}: must be an object")
    for fld in ("n", "lambda", "seed_occupation", "residual"):
        if fld not in doc:
            raise DocumentError(f"record {index}: missing field {fld!r}")
    try:
        n = int(doc["n"])
        lambdas = np.asarray([float(x) for x in doc["lambda"]], dtype=float)
        residual = float(doc["residual"])
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"record {index}: non-numeric entries: {exc}") from None
    converged = bool(doc.get("converged", residual <= 1e-9))
    rapidities = None
    if "rapidities" in doc:
        rapidities = _spectral_from_pairs(doc["rapidities"], ON_SHELL)
    dual = None
    if "dual_rapidities" in doc:
        dual = _spectral_from_pairs(doc["dual_rapidities"], DUAL)
    return EigenstateRecord(
        model=model,
        N=n,
        lambdas=LambdaSet(lambdas, n),
        seed_occupation=str(doc["seed_occupation"]),
        residual_norm=residual,
        converged=converged,
        rapidities=rapidities,
        dual_rapidities=dual,
    )


def records_to_doc(records: Sequence[EigenstateRecord]) -> list:
    return [record_to_doc(r) for r in records]


def records_from_doc(doc, model: ModelParams) -> list:
    if not isinstance(doc, list):
        raise DocumentError("state document must be an array of records")
    return [record_from_doc(d, model, i) for i, d in enumerate(doc)]


def loads_document(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def default_model() -> ModelParams:
    """The model shipped as the CLI default for verification runs."""
    return ModelParams(RATIONAL, 1.0, np.array([0.3, 1.0, 1.8, 2.7]))
