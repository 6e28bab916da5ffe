"""Batch front end: solve spectra, evaluate overlaps, run verification suites.

Four subcommands share a common flag vocabulary (--model, --out, --format,
--tol, --seed):

  solve       all C(L, N) eigenstates of one sector, written as a record array
  overlap     one inner product, evaluated by every requested route
  verify      property suites: cauchy | duality | orthogonality | charges | all
  identities  the kernel-identity suite alone (same checks as --suite cauchy)

Machine-readable artifacts go to --out (or stdout when --out is omitted);
progress and summary lines go to stderr for solve/overlap and to stdout for
the verification commands.  Exit codes: 0 success; 1 a verified property
failed or a cross-route spread exceeded the tolerance; 2 unreadable
documents and I/O problems; 3 invalid inputs; 4 convergence failures and
singular coupling points.

Output is deterministic: floats print at 17 significant digits with a '.'
decimal point, randomized fixtures derive from --seed alone, and no
timestamps or environment details ever enter an artifact, so identical
invocations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import math
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from .cauchy import (CauchyPair, borchardt_permanent, cauchy_det_explicit,
                     cauchy_inverse, cauchy_matrix, check_hadamard3,
                     check_matrix_det_lemma, check_sylvester_mixed, det_lu,
                     permanent_direct)
from .errors import (ConvergenceError, DocumentError, RGSolveError,
                     SingularPointError, ValidationError)
from .model import (HYPERBOLIC, ON_SHELL, SpectralSet, default_model,
                    dumps_canonical, format_float, loads_document,
                    make_spectral_set, model_from_doc, occupation_from_bitstring,
                    records_from_doc, records_to_doc)
from .oracle import (build_bethe_state, exact_inner_product, product_state,
                     verify_commutators, verify_quadratic_identity)
from .overlaps import (det_j_overlap, det_k_overlap, dual_state_ratio,
                       evb_norm, gaudin_norm, izergin_borchardt,
                       slavnov_overlap)
from .solvers import (DEFAULT_OPTIONS, SolveOptions, dual_rapidities,
                      lambda_values, rapidities_from_lambdas,
                      read_green_integer, refine_colliding_seeds,
                      solve_bethe_direct, solve_evb_all, solve_evb_seed)

DEFAULT_LMAX = 8


# ----------------------------------------------------------------------
# Shared plumbing
# ----------------------------------------------------------------------

def _load_model(args):
    """Model from --model, or the shipped default when the flag is omitted."""
    if args.model is None:
        return default_model()
    doc = loads_document(Path(args.model).read_text())
    return model_from_doc(doc)


def _parse_state_ref(ref: str):
    """Split 'FILE#IDX' into (path, index); a bare FILE means index 0."""
    path, sep, idx = ref.rpartition("#")
    if not sep:
        return ref, 0
    if not path:
        raise DocumentError(f"bad state reference {ref!r}: empty file path")
    try:
        return path, int(idx)
    except ValueError:
        raise DocumentError(
            f"bad state reference {ref!r}: index must be an integer") from None


def _load_record(path: str, index: int, model):
    doc = loads_document(Path(path).read_text())
    records = records_from_doc(doc, model)
    if not (0 <= index < len(records)):
        raise DocumentError(
            f"record index {index} out of range: {path} holds {len(records)} records")
    return records[index]


def _record_rapidities(model, record) -> SpectralSet:
    """Stored rapidities, or the ones recovered from the Lambda variables."""
    if record.rapidities is not None:
        return record.rapidities
    poly = rapidities_from_lambdas(model, record.lambdas, record.N)
    return SpectralSet(poly.roots.values, ON_SHELL, poly.roots.degenerate)


def _rapidity_product(values: np.ndarray) -> complex:
    return complex(np.prod(values)) if len(values) else complex(1.0)


def _parse_rapidity_list(text: str) -> np.ndarray:
    items = [s.strip() for s in text.split(",") if s.strip()]
    values = []
    for item in items:
        try:
            values.append(complex(item.replace(" ", "")))
        except ValueError:
            raise ValidationError(
                f"bad rapidity literal {item!r}; use forms like 1.5 or 0.3+0.2j") from None
    return np.asarray(values, dtype=complex)


def _emit_artifact(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _solve_options(args) -> SolveOptions:
    if args.tol is None:
        return DEFAULT_OPTIONS
    return SolveOptions(newton_tol=args.tol)


# ----------------------------------------------------------------------
# solve
# ----------------------------------------------------------------------

def _recover_rapidities(model, record, opts: SolveOptions) -> SpectralSet:
    """Rapidities of a converged record, re-converged in their own framework.

    The polynomial roots match the record's Lambda values, but near a
    level that leaves the rapidity-based equations satisfied only loosely
    (the residual scales with the local pole strength).  A damped Newton
    pass on those equations drives the residual to opts.newton_tol in
    absolute terms, which the determinant formulas assume; a collision
    there is reported as a convergence failure of this seed.
    """
    vs = _record_rapidities(model, record)
    if len(vs):
        try:
            vs = solve_bethe_direct(model, vs, opts)
        except ValidationError as exc:
            raise ConvergenceError(
                f"rapidity polish failed: {exc}",
                seed_occupation=record.seed_occupation) from None
    return vs


def _records_csv(model, records, N: int) -> str:
    L = model.L
    has_v = any(r.rapidities is not None for r in records)
    has_d = any(r.dual_rapidities is not None for r in records)
    cols = ["seed_occupation", "n", "converged", "residual"]
    cols += [f"lambda_{i + 1}" for i in range(L)]
    if has_v:
        for a in range(N):
            cols += [f"v_{a + 1}_re", f"v_{a + 1}_im"]
    if has_d:
        for a in range(L - N):
            cols += [f"dual_{a + 1}_re", f"dual_{a + 1}_im"]
    lines = [",".join(cols)]
    for rec in records:
        row = [rec.seed_occupation, str(int(rec.N)),
               "true" if rec.converged else "false",
               format_float(rec.residual_norm)]
        row += [format_float(x) for x in rec.lambdas.lambdas]
        if has_v:
            vals = rec.rapidities.values if rec.rapidities is not None else []
            for a in range(N):
                v = vals[a] if a < len(vals) else complex("nan")
                row += [format_float(v.real), format_float(v.imag)]
        if has_d:
            vals = rec.dual_rapidities.values if rec.dual_rapidities is not None else []
            for a in range(L - N):
                v = vals[a] if a < len(vals) else complex("nan")
                row += [format_float(v.real), format_float(v.imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    model = _load_model(args)
    N = args.n
    if not (0 <= N <= model.L):
        raise ValidationError(f"N={N} out of range for L={model.L} levels")
    opts = _solve_options(args)
    if args.duals:
        singular = read_green_integer(model, N)
        if singular is not None:
            raise SingularPointError(
                f"1/g = {singular} is a Read-Green point for the (L={model.L}, "
                f"N={N}) sector: dual rapidities diverge or collapse there",
                integer=singular)
    want_rapidities = args.with_rapidities or args.duals or args.method == "bethe"
    solved, occupations, failures = [], [], []
    for occupation in combinations(range(model.L), N):
        seed_bits = "".join("1" if i in occupation else "0" for i in range(model.L))
        try:
            solved.append(solve_evb_seed(model, occupation, opts))
            occupations.append(occupation)
        except ConvergenceError as exc:
            failures.append((seed_bits, str(exc)))
    try:
        solved = refine_colliding_seeds(model, occupations, solved, opts)
    except ConvergenceError:
        pass  # keep the originals; the collapse is reported seed by seed below
    records = []
    for record in solved:
        seed_bits = record.seed_occupation
        try:
            if want_rapidities:
                try:
                    vs = _recover_rapidities(model, record, opts=opts)
                except ValidationError as exc:
                    raise ConvergenceError(
                        f"rapidity extraction failed: {exc}",
                        seed_occupation=seed_bits) from None
                record = record.with_rapidities(vs)
            if args.duals:
                record = record.with_dual_rapidities(dual_rapidities(model, record))
            records.append(record)
        except ConvergenceError as exc:
            failures.append((seed_bits, str(exc)))
    # the seeds must enumerate distinct states; collapse onto one state is a
    # failure of the later seed
    gap_floor = 1e6 * opts.newton_tol
    duplicate_seeds = set()
    for a in range(len(records)):
        for b in range(a + 1, len(records)):
            gap = float(np.abs(records[a].lambdas.lambdas
                               - records[b].lambdas.lambdas).max())
            if gap <= gap_floor and records[b].seed_occupation not in duplicate_seeds:
                duplicate_seeds.add(records[b].seed_occupation)
                failures.append((records[b].seed_occupation,
                                 f"duplicate of seed {records[a].seed_occupation} "
                                 f"(gap {gap:.3e})"))
    if duplicate_seeds:
        records = [r for r in records if r.seed_occupation not in duplicate_seeds]
    if args.format == "json":
        text = dumps_canonical(records_to_doc(records))
    else:
        text = _records_csv(model, records, N)
    _emit_artifact(text, args.out)
    total = math.comb(model.L, N)
    if failures:
        listing = "; ".join(f"{seed} ({reason})" for seed, reason in failures)
        print(f"FAILED {len(failures)}/{total} seeds: {listing}", file=sys.stderr)
        return 4
    print(f"solved {model.kind} L={model.L} N={N}: "
          f"{len(records)}/{total} seeds converged", file=sys.stderr)
    return 0


# ----------------------------------------------------------------------
# overlap
# ----------------------------------------------------------------------

def _overlap_rows_product_state(args, model, bra, bra_v):
    """Rows for a product-state ket given as an occupation bitstring."""
    bits = args.ket_occ
    if len(bits) != model.L:
        raise ValidationError(
            f"ket occupation needs {model.L} bits, got {len(bits)}")
    occ = occupation_from_bitstring(bits)
    if len(occ) != bra.N:
        raise ValidationError(
            f"ket occupation has {len(occ)} pairs but the bra has N={bra.N}")
    if args.method in ("slavnov", "detj", "detk"):
        raise ValidationError(
            "product-state kets go through the reference routes; "
            "use --method all or --method oracle")
    rows = []
    if args.method == "all":
        ref = izergin_borchardt(model, bra_v, occ.occupied)
        for name in ("izergin", "borchardt", "j_eps", "j_x"):
            rows.append((name, complex(ref.routes[name])))
    value = exact_inner_product(build_bethe_state(model, bra_v),
                                product_state(model.L, occ.occupied))
    rows.append(("oracle", complex(value)))
    return rows, f"occupation {bits}"


def _overlap_rows_state(args, model, bra, bra_v):
    """Rows for a ket given as a stored record or a raw rapidity list."""
    if args.ket is not None:
        ket_path, ket_idx = _parse_state_ref(args.ket)
        ket_rec = _load_record(ket_path, ket_idx, model)
        if ket_rec.N != bra.N:
            raise ValidationError(
                f"bra sector N={bra.N} and ket sector N={ket_rec.N} differ")
        ket_v = _record_rapidities(model, ket_rec)
        ket_lam = ket_rec.lambdas.lambdas.astype(complex)
        ket_desc = f"{ket_path}#{ket_idx}"
    else:
        values = _parse_rapidity_list(args.ket_rapidities)
        if len(values) != bra.N:
            raise ValidationError(
                f"{len(values)} ket rapidities for a bra with N={bra.N}")
        ket_v = make_spectral_set(values)
        ket_lam = lambda_values(model.epsilons, ket_v.values)
        ket_desc = "rapidities " + " ".join(str(v) for v in ket_v.values)
    bra_prod = _rapidity_product(bra_v.values) if model.kind == HYPERBOLIC else None
    methods = ("slavnov", "detj", "detk", "oracle") \
        if args.method == "all" else (args.method,)
    rows = []
    for method in methods:
        if method == "slavnov":
            value = slavnov_overlap(model, bra_v, ket_v).value
        elif method == "detj":
            value = det_j_overlap(model, bra.N, bra.lambdas.lambdas.astype(complex),
                                  ket_lam, bra_rapidity_product=bra_prod).value
        elif method == "detk":
            value = det_k_overlap(model, bra_v, ket_v).value
        else:
            value = exact_inner_product(build_bethe_state(model, bra_v),
                                        build_bethe_state(model, ket_v))
        rows.append((method, complex(value)))
    return rows, ket_desc


def cmd_overlap(args) -> int:
    model = _load_model(args)
    bra_path, bra_idx = _parse_state_ref(args.bra)
    bra = _load_record(bra_path, bra_idx, model)
    if not bra.converged and args.method != "oracle":
        raise ValidationError(
            "bra record is not converged; the determinant routes need an "
            "on-shell bra (only --method oracle accepts off-shell records)")
    bra_v = _record_rapidities(model, bra)
    if args.ket_occ is not None:
        rows, ket_desc = _overlap_rows_product_state(args, model, bra, bra_v)
    else:
        rows, ket_desc = _overlap_rows_state(args, model, bra, bra_v)
    deviation = None
    if args.method == "all":
        values = [v for _, v in rows]
        scale = max(1.0, max(abs(v) for v in values))
        deviation = max(abs(a - b) for a in values for b in values) / scale
    if args.format == "json":
        doc = {
            "bra": f"{bra_path}#{bra_idx}",
            "ket": ket_desc,
            "n": int(bra.N),
            "rows": [{"method": m, "re": v.real, "im": v.imag, "abs": abs(v)}
                     for m, v in rows],
        }
        if deviation is not None:
            doc["max_deviation"] = deviation
        text = dumps_canonical(doc)
    else:
        lines = ["method,re,im,abs"]
        lines += [f"{m},{format_float(v.real)},{format_float(v.imag)},"
                  f"{format_float(abs(v))}" for m, v in rows]
        if deviation is not None:
            lines.append(f"max_deviation,{format_float(deviation)},,")
        text = "\n".join(lines) + "\n"
    _emit_artifact(text, args.out)
    if deviation is not None:
        tol = args.tol if args.tol is not None else 1e-9
        print(f"{len(rows)} routes, max cross-route deviation {deviation:.3e} "
              f"(tol {tol:.1e})", file=sys.stderr)
        if deviation > tol:
            print("FAIL: routes disagree beyond tolerance", file=sys.stderr)
            return 1
    return 0


# ----------------------------------------------------------------------
# verify / identities
# ----------------------------------------------------------------------

def _row(suite: str, prop: str, passed: bool, worst: float, tol: float,
         detail: str) -> dict:
    return {"suite": suite, "property": prop, "passed": bool(passed),
            "worst": float(worst), "tol": float(tol), "detail": detail}


_CAUCHY_SHAPES = ((1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (6, 6),
                  (2, 1), (3, 1), (4, 2), (5, 3), (6, 4))
_CAUCHY_TRIALS = 40


def _draw_pair(rng, m: int, n: int, low: float, high: float,
               imag: float) -> CauchyPair:
    """Well-separated random value sets; imag > 0 tilts xs off the real axis."""
    while True:
        eps = rng.uniform(low, high, m).astype(complex)
        xs = rng.uniform(low, high, n).astype(complex)
        if imag > 0.0 and n:
            xs = xs + 1j * rng.uniform(-imag, imag, n)
        both = np.concatenate([eps, xs])
        if len(both) > 1:
            gaps = np.abs(both[:, None] - both[None, :])
            np.fill_diagonal(gaps, np.inf)
            if gaps.min() < 0.05:
                continue
        return CauchyPair(eps, xs)


def _rel(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def _suite_cauchy(rng, tol: float) -> list:
    worst = {"inverse": 0.0, "determinant": 0.0, "permanent": 0.0,
             "sylvester": 0.0, "hadamard3": 0.0, "det-lemma": 0.0}
    counts = dict.fromkeys(worst, 0)

    def note(prop, dev):
        worst[prop] = max(worst[prop], float(dev))
        counts[prop] += 1

    for m, n in _CAUCHY_SHAPES:
        for _ in range(_CAUCHY_TRIALS):
            pair = _draw_pair(rng, m, n, -4.0, 4.0, imag=0.5)
            lhs, rhs = check_sylvester_mixed(pair)
            note("sylvester", _rel(lhs, rhs))
            square = CauchyPair(pair.eps[:n], pair.xs)
            C = cauchy_matrix(square)
            resid = np.abs(C @ cauchy_inverse(square) - np.eye(n)).max() if n else 0.0
            note("inverse", resid)
            note("determinant", _rel(det_lu(C), cauchy_det_explicit(square)))
            note("permanent", _rel(borchardt_permanent(square),
                                   permanent_direct(C)))
            lhs, rhs = check_hadamard3(square)
            note("hadamard3", _rel(lhs, rhs))
            # the mixed-size lemma needs nonzero values: draw a positive pair
            pos = _draw_pair(rng, m, n, 0.3, 8.0, imag=0.0)
            while True:
                G = complex(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
                shifts = [(G + 1.0) / 2.0 - k for k in range(0, m - n + 1)]
                if min(abs(s) for s in shifts) > 0.05:
                    break
            lhs, rhs = check_matrix_det_lemma(pos, G)
            note("det-lemma", _rel(lhs, rhs))
    return [_row("cauchy", prop, worst[prop] <= tol, worst[prop], tol,
                 f"{counts[prop]} instances") for prop in
            ("inverse", "determinant", "permanent", "sylvester",
             "hadamard3", "det-lemma")]


def _require_oracle_size(model, lmax: int, suite: str) -> None:
    if model.L > lmax:
        raise ValidationError(
            f"the {suite} suite builds 2^L-cost exact states; model has "
            f"L={model.L} > --lmax={lmax}; raise --lmax to allow it")


def _suite_duality(model, tol: float, lmax: int) -> list:
    _require_oracle_size(model, lmax, "duality")
    worst, checked, skipped = 0.0, 0, []
    for N in range(model.L + 1):
        if model.kind == HYPERBOLIC and read_green_integer(model, N) is not None:
            skipped.append(N)
            continue
        for record in solve_evb_all(model, N):
            vs = _record_rapidities(model, record)
            record = record.with_rapidities(vs)
            duals = dual_rapidities(model, record)
            psi = build_bethe_state(model, vs)
            phi = build_bethe_state(model, duals, dual=True)
            ratio = dual_state_ratio(model, N,
                                     rapidity_product=_rapidity_product(vs.values))
            scale = max(1.0, float(np.abs(phi.amplitudes).max()))
            dev = float(np.abs(phi.amplitudes - ratio * psi.amplitudes).max()) / scale
            worst = max(worst, dev)
            checked += 1
    detail = f"{checked} states"
    if skipped:
        detail += "; sectors " + " ".join(str(n) for n in skipped) \
            + " skipped (singular 1/g)"
    return [_row("duality", "state-ratio", worst <= tol, worst, tol, detail)]


def _suite_orthogonality(model, tol: float, lmax: int) -> list:
    _require_oracle_size(model, lmax, "orthogonality")
    worst_off, worst_norm, pairs, states = 0.0, 0.0, 0, 0
    for N in range(model.L + 1):
        records = solve_evb_all(model, N)
        vsets = [_record_rapidities(model, r) for r in records]
        prods = [_rapidity_product(v.values) if model.kind == HYPERBOLIC else None
                 for v in vsets]
        norms = []
        for record, vs, prod in zip(records, vsets, prods):
            nv = evb_norm(model, record.lambdas, rapidity_product=prod).value
            ng = gaudin_norm(model, vs).value
            psi = build_bethe_state(model, vs)
            no = exact_inner_product(psi, psi)
            scale = max(1.0, abs(nv), abs(ng), abs(no))
            dev = max(abs(nv - ng), abs(nv - no), abs(ng - no)) / scale
            worst_norm = max(worst_norm, dev)
            norms.append(abs(nv))
            states += 1
        for a in range(len(records)):
            for b in range(a + 1, len(records)):
                overlap = det_j_overlap(
                    model, N, records[a].lambdas.lambdas.astype(complex),
                    records[b].lambdas.lambdas.astype(complex),
                    bra_rapidity_product=prods[a]).value
                worst_off = max(worst_off,
                                abs(overlap) / math.sqrt(norms[a] * norms[b]))
                pairs += 1
    return [
        _row("orthogonality", "pairwise", worst_off <= tol, worst_off, tol,
             f"{pairs} pairs"),
        _row("orthogonality", "norm-agreement", worst_norm <= tol, worst_norm,
             tol, f"{states} states; 3 routes each"),
    ]


def _suite_charges(model, tol_comm: float, tol_quad: float, lmax: int) -> list:
    _require_oracle_size(model, lmax, "charges")
    worst_c, worst_q = 0.0, 0.0
    for N in range(model.L + 1):
        worst_c = max(worst_c, verify_commutators(model, N).worst)
        worst_q = max(worst_q, verify_quadratic_identity(model, N).worst)
    detail = f"L={model.L}; all sectors"
    return [
        _row("charges", "commutators", worst_c <= tol_comm, worst_c,
             tol_comm, detail),
        _row("charges", "quadratic-identity", worst_q <= tol_quad, worst_q,
             tol_quad, detail),
    ]


def _print_rows(rows) -> bool:
    all_passed = True
    for row in rows:
        status = "PASS" if row["passed"] else "FAIL"
        all_passed &= row["passed"]
        name = f"{row['suite']}.{row['property']}"
        print(f"{status} {name:<28} worst {row['worst']:.3e}  "
              f"tol {row['tol']:.1e}  ({row['detail']})")
    npass = sum(1 for r in rows if r["passed"])
    print(f"{npass}/{len(rows)} properties passed")
    return all_passed


def _rows_artifact(rows, fmt: str) -> str:
    if fmt == "json":
        return dumps_canonical(rows)
    lines = ["suite,property,passed,worst,tol,detail"]
    lines += [f"{r['suite']},{r['property']},"
              f"{'true' if r['passed'] else 'false'},"
              f"{format_float(r['worst'])},{format_float(r['tol'])},{r['detail']}"
              for r in rows]
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    model = _load_model(args)
    rng = np.random.default_rng(args.seed)
    lmax = args.lmax if args.lmax is not None else DEFAULT_LMAX
    if lmax < 1:
        raise ValidationError("--lmax must be >= 1")
    tol = args.tol
    rows = []
    if args.suite in ("cauchy", "all"):
        rows += _suite_cauchy(rng, tol if tol is not None else 1e-8)
    if args.suite in ("duality", "all"):
        rows += _suite_duality(model, tol if tol is not None else 1e-9, lmax)
    if args.suite in ("orthogonality", "all"):
        rows += _suite_orthogonality(model, tol if tol is not None else 1e-9, lmax)
    if args.suite in ("charges", "all"):
        rows += _suite_charges(model, tol if tol is not None else 1e-12,
                               tol if tol is not None else 1e-10, lmax)
    all_passed = _print_rows(rows)
    if args.out is not None:
        Path(args.out).write_text(_rows_artifact(rows, args.format))
    return 0 if all_passed else 1


def cmd_identities(args) -> int:
    rng = np.random.default_rng(args.seed)
    tol = args.tol if args.tol is not None else 1e-8
    rows = _suite_cauchy(rng, tol)
    all_passed = _print_rows(rows)
    if args.out is not None:
        Path(args.out).write_text(_rows_artifact(rows, args.format))
    return 0 if all_passed else 1


# ----------------------------------------------------------------------
# Argument parsing and dispatch
# ----------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", metavar="PATH", default=None,
                        help="model document (JSON); omitted = the shipped "
                             "default model")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="write the artifact here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json",
                        help="artifact format (default json)")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the command's default tolerance")
    parser.add_argument("--seed", type=int, default=0,
                        help="RNG seed for randomized fixtures (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rgsolve",
        description="Solve pairing-model spectra, evaluate determinant inner "
                    "products, and run the verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser(
        "solve", help="all C(L, N) eigenstates of one sector")
    _add_common(p_solve)
    p_solve.add_argument("--n", type=int, required=True, metavar="N",
                         help="number of pairs (sector)")
    p_solve.add_argument("--method", choices=("evb", "bethe"), default="evb",
                         help="evb: eigenvalue-based variables only; bethe: "
                              "also solve the rapidity-based equations and "
                              "store the rapidities")
    p_solve.add_argument("--with-rapidities", action="store_true",
                         help="store the recovered rapidities in each record")
    p_solve.add_argument("--duals", action="store_true",
                         help="also store the L-N dual rapidities")
    p_solve.set_defaults(func=cmd_solve)

    p_overlap = sub.add_parser(
        "overlap", help="one inner product by every requested route")
    _add_common(p_overlap)
    p_overlap.add_argument("--bra", required=True, metavar="FILE#IDX",
                           help="bra record (solve artifact and record index)")
    ket = p_overlap.add_mutually_exclusive_group(required=True)
    ket.add_argument("--ket", metavar="FILE#IDX",
                     help="ket record (solve artifact and record index)")
    ket.add_argument("--ket-rapidities", metavar="LIST",
                     help="comma-separated ket rapidities, e.g. "
                          "'0.3+0.2j,0.3-0.2j'")
    ket.add_argument("--ket-occ", metavar="BITS",
                     help="occupation bitstring of a product-state ket")
    p_overlap.add_argument("--method",
                           choices=("all", "slavnov", "detj", "detk", "oracle"),
                           default="all")
    p_overlap.set_defaults(func=cmd_overlap)

    p_verify = sub.add_parser(
        "verify", help="run a verification suite against the model")
    _add_common(p_verify)
    p_verify.add_argument("--suite",
                          choices=("cauchy", "duality", "orthogonality",
                                   "charges", "all"),
                          default="all")
    p_verify.add_argument("--lmax", type=int, default=None,
                          help="largest L the exact-diagonalization suites "
                               f"accept (default {DEFAULT_LMAX})")
    p_verify.set_defaults(func=cmd_verify)

    p_ident = sub.add_parser(
        "identities", help="kernel-identity suite on randomized value sets")
    _add_common(p_ident)
    p_ident.set_defaults(func=cmd_identities)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ConvergenceError, SingularPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except RGSolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
