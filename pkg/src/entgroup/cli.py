"""Command-line entry point: ``entgroup <verb> ...``.

Every verb reads a JSON file (``-`` for stdin) and writes JSON with ``--json``
or a plain table otherwise. ``catalog`` and ``purify`` always emit state files
so they can feed other verbs through a pipe.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import os
import sys

import numpy as np

from . import io
from .analysis import (
    analyze_mixed,
    analyze_pure,
    candidate_dict,
    quotient_witness,
    theorem_checks,
)
from .catalog import catalog_entry
from .discrete import pauli_search, verify_candidate
from .errors import EntgroupError, MetadataMissingError, NotAStabilizerError, ParseError, ValidationError
from .separable import (
    Ensemble,
    EnsemblePurification,
    decompose_two_party_stabilizer,
    disentangle,
    purify_ensemble,
)
from .stabilizer import DEFAULT_TOL
from .tensor_core import DensityMatrix, PureState, merge_parties, minimal_purification

TOL_ENV = "ENTGROUP_TOL"


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise ParseError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not np.isfinite(tol) or tol <= 0:
        raise ParseError(f"{TOL_ENV}={raw!r} must be a positive finite number")
    return tol


def _read_bytes(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load_state(path: str):
    data = _read_bytes(path)
    return io.read_state_bytes(data), data


def _load_obj(path: str):
    return io.loads(_read_bytes(path))


def _as_analyzable(state):
    if isinstance(state, EnsemblePurification):
        return state.state
    if isinstance(state, Ensemble):
        return state.density()
    return state


class Emitter:
    def __init__(self, args, data: bytes | None):
        self.args = args
        self.data = data

    def envelope(self, command: str, result: dict) -> dict:
        env = {"format_version": io.FORMAT_VERSION, "command": command, "result": result}
        if self.data is not None:
            env["input_digest"] = io.digest(self.data)
        tol = getattr(self.args, "tol", None)
        if tol is not None:
            env["tolerance"] = tol
        if getattr(self.args, "timestamp", False):
            env["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        return env

    def write(self, text: str):
        out = getattr(self.args, "out", None)
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    def report(self, command: str, result: dict, lines: list[str]):
        if getattr(self.args, "json", False):
            self.write(io.dumps(self.envelope(command, result)))
        else:
            self.write("\n".join(lines) + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if x == float("inf") else f"{x:.3g}"
    return str(x)


def _table(title: str, rows: dict) -> list[str]:
    if not rows:
        return [title, "  (none)"]
    width = max(len(str(k)) for k in rows)
    return [title] + [f"  {str(k):<{width}}  {_fmt(v)}" for k, v in rows.items()]


# -- verbs ------------------------------------------------------------------------------

def _parse_grouping(text: str, labels):
    groups = [g for g in text.split("|")]
    out = []
    multi = any(len(lab) > 1 for lab in labels)
    for g in groups:
        g = g.strip()
        if not g:
            raise ValidationError(f"empty group in --parties {text!r}")
        out.append([x.strip() for x in g.split(",")] if multi or "," in g else list(g))
    return out


def cmd_analyze(args) -> int:
    state, data = _load_state(args.path)
    state = _as_analyzable(state)
    if args.parties:
        state = merge_parties(state, _parse_grouping(args.parties, state.spec.labels))
    if isinstance(state, PureState):
        rep = analyze_pure(state, args.tol)
    else:
        rep = analyze_mixed(state, args.tol)
    d = rep.to_dict()
    lines = [f"{rep.kind} state, parties " + " ".join(f"{lab}:{dim}" for lab, dim in rep.spec.parties),
             f"tolerance {rep.tol:g}"]
    lines += _table("stabilizer dims", rep.stabilizer_dims)
    lines += _table("entanglement dims", {k: f"{q.dim}  ({q.hint})" for k, q in rep.quotients.items()})
    lines += _table("spectral gaps", rep.gaps)
    lines += ["warnings:"] + [f"  {w}" for w in rep.warnings] if rep.warnings else []
    Emitter(args, data).report("analyze", d, lines)
    return 0


def cmd_catalog(args) -> int:
    params = {}
    for key in ("p", "a", "b", "L"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.seed is not None:
        params["seed"] = args.seed
    if args.dims:
        params["dims"] = [int(x) for x in args.dims.split(",")]
    if args.name == "werner" and "p" not in params:
        raise ValidationError("catalog werner needs --p")
    entry = catalog_entry(args.name, form=args.form, **params)
    Emitter(args, None).write(io.serialize_state(entry.output))
    return 0


def cmd_purify(args) -> int:
    state, _ = _load_state(args.path)
    if isinstance(state, Ensemble):
        out = purify_ensemble(state)
    elif isinstance(state, DensityMatrix):
        out = minimal_purification(state)
    else:
        raise ValidationError("input is already a pure state")
    Emitter(args, None).write(io.serialize_state(out))
    return 0


def _purification(state) -> EnsemblePurification:
    if isinstance(state, Ensemble):
        return purify_ensemble(state)
    if isinstance(state, EnsemblePurification):
        return state
    raise MetadataMissingError("this command needs an ensemble or an ensemble purification with line metadata")


def cmd_disentangle(args) -> int:
    state, data = _load_state(args.path)
    purif = _purification(state)
    chi = io.vector_from_obj(_load_obj(args.chi)) if args.chi else None
    cu, fact = disentangle(purif, args.target, chi)
    result = {
        "target": args.target,
        "control": cu.control,
        "chi": io.encode_vector(fact.chi),
        "residual": fact.residual,
        "blocks": [io.encode_matrix(b) for b in cu.blocks],
        "rest": io.encode_vector(fact.rest),
        "state": io.state_to_obj(fact.state),
    }
    lines = [f"disentangled party {args.target} (control {cu.control}, {len(cu.blocks)} blocks)",
             f"factorization residual {fact.residual:.3g}"]
    Emitter(args, data).report("disentangle", result, lines)
    return 0


def cmd_decompose(args) -> int:
    state, data = _load_state(args.path)
    purif = _purification(state)
    u = io.unitary_from_obj(_load_obj(args.stabilizer))
    if u.spec == purif.spec:
        cand = verify_candidate(purif.state, u)
    else:
        from .tensor_core import LocalUnitary

        full = LocalUnitary.from_factors(purif.spec, {lab: u.factor(lab) for lab in u.spec.labels},
                                         u.global_phase)
        cand = verify_candidate(purif.state, full)
    if not cand.verified:
        raise NotAStabilizerError(f"unitary does not stabilize the purification (residual {cand.residual:.3g})")
    dec = decompose_two_party_stabilizer(purif, cand)
    result = {
        "theta": dec.theta,
        "alphas": dec.alphas, "betas": dec.betas,
        "clusters": list(dec.clusters),
        "s_ac": io.unitary_to_obj(dec.s_ac), "s_bc": io.unitary_to_obj(dec.s_bc),
        "residual_ac": dec.residual_ac, "residual_bc": dec.residual_bc,
        "product_residual": dec.product_residual,
        "notes": list(dec.notes),
    }
    lines = [f"theta {dec.theta:.6g}, {len(dec.cluster_phases)} phase clusters",
             f"residuals: s_AC {dec.residual_ac:.3g}, s_BC {dec.residual_bc:.3g}, product {dec.product_residual:.3g}"]
    Emitter(args, data).report("decompose", result, lines)
    return 0


def cmd_pauli_search(args) -> int:
    state, data = _load_state(args.path)
    found = pauli_search(_as_analyzable(state))
    result = {"count": len(found), "candidates": [candidate_dict(c) for c in found]}
    lines = [f"{len(found)} Pauli stabilizers"] + [
        f"  {c.name}  phase {_fmt(c.phase) if c.phase is not None else '-'}  residual {c.residual:.2g}" for c in found]
    Emitter(args, data).report("pauli-search", result, lines)
    return 0


def cmd_verify(args) -> int:
    state, data = _load_state(args.path)
    target = _as_analyzable(state)
    u = io.unitary_from_obj(_load_obj(args.unitary), target.spec)
    cand = verify_candidate(target, u)
    result = {"candidate": candidate_dict(cand)}
    lines = [f"verified: {cand.verified}", f"phase: {_fmt(cand.phase) if cand.phase is not None else '-'}",
             f"residual: {cand.residual:.3g}"]
    if cand.verified and isinstance(state, (Ensemble, EnsemblePurification)):
        w = quotient_witness(_purification(state), cand)
        result["witness"] = {"verdict": w.verdict, "permutation": w.permutation, "reason": w.reason}
        lines.append(f"witness: {w.verdict} {w.permutation or ''} ({w.reason})")
    Emitter(args, data).report("verify", result, lines)
    return 0 if cand.verified else NotAStabilizerError.exit_code


def cmd_check_theorems(args) -> int:
    state, data = _load_state(args.path)
    rep = theorem_checks(_as_analyzable(state), args.tol)
    lines = [f"all passed: {rep.passed}"] + [f"  {'PASS' if c.passed else 'FAIL'}  {c.name}" for c in rep.checks]
    Emitter(args, data).report("check-theorems", rep.to_dict(), lines)
    return 0


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entgroup", description="Stabilizer and entanglement-group analysis.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, path=True):
        if path:
            sp.add_argument("path", help="input JSON file, or - for stdin")
        sp.add_argument("--json", action="store_true", help="emit a JSON report")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        sp.add_argument("--tol", type=float, default=None, help="rank tolerance (default 1e-9 or $ENTGROUP_TOL)")
        sp.add_argument("--timestamp", action="store_true", help="include a timestamp in JSON reports")
        return sp

    sp = common(sub.add_parser("analyze", help="stabilizer and entanglement dimensions"))
    sp.add_argument("--parties", help='regroup parties before analysis, e.g. "A|BC"')
    sp.set_defaults(func=cmd_analyze)

    sp = common(sub.add_parser("catalog", help="emit a named state"), path=False)
    sp.add_argument("name", choices=["ghz", "bell", "werner", "random"])
    sp.add_argument("--p", type=float)
    sp.add_argument("--a", type=complex)
    sp.add_argument("--b", type=complex)
    sp.add_argument("--form", default="auto",
                    help="werner: auto|density|ensemble|purification|min-purification; random: pure|density|ensemble")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--dims", help="random: comma-separated party dimensions")
    sp.add_argument("--L", type=int, help="random ensemble: number of terms")
    sp.set_defaults(func=cmd_catalog)

    sp = common(sub.add_parser("purify", help="purify an ensemble or density matrix"))
    sp.set_defaults(func=cmd_purify)

    sp = common(sub.add_parser("disentangle", help="controlled-unitary disentangler for an ensemble"))
    sp.add_argument("--target", required=True)
    sp.add_argument("--chi", help="vector file with the target state (default |0>)")
    sp.set_defaults(func=cmd_disentangle)

    sp = common(sub.add_parser("decompose", help="split a two-party stabilizer of an ensemble purification"))
    sp.add_argument("--stabilizer", required=True, help="local-unitary file")
    sp.set_defaults(func=cmd_decompose)

    sp = common(sub.add_parser("pauli-search", help="Pauli-string stabilizers of a qubit state"))
    sp.set_defaults(func=cmd_pauli_search)

    sp = common(sub.add_parser("verify", help="check whether a local unitary stabilizes a state"))
    sp.add_argument("--unitary", required=True, help="local-unitary file")
    sp.set_defaults(func=cmd_verify)

    sp = common(sub.add_parser("check-theorems", help="structural checks on a three-party pure state"))
    sp.set_defaults(func=cmd_check_theorems)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = default_tol()
        elif not np.isfinite(args.tol) or args.tol <= 0:
            raise ParseError("--tol must be a positive finite number")
        return args.func(args)
    except EntgroupError as exc:
        print(f"entgroup {args.verb}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
