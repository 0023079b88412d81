"""Command-line front end.

Subcommands: parse, canon, reduce, enumerate, basis, model, integrate,
classify, rules.  All reports are emitted as JSON with floats printed to
17 significant digits; identical configuration and seed give
byte-identical output.  Exit status 0 when every requested check passes
its tolerance, 1 on check failure, 2 on configuration errors.
"""

from __future__ import annotations

import os
import sys

if "CRLAB_THREADS" in os.environ:  # cap BLAS/OpenMP parallelism before numpy loads
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, os.environ["CRLAB_THREADS"])

import click
import numpy as np

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# deterministic JSON rendering (floats at 17 significant digits)
# ---------------------------------------------------------------------------

def _render(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{k}": {_render(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_render(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return format(obj, ".17g")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    import json as _json
    return _json.dumps(str(obj))


def emit(obj, fmt: str = "json") -> None:
    if fmt == "json":
        click.echo(_render(obj))
    elif fmt == "pretty":
        def walk(o, depth=0):
            if isinstance(o, dict):
                for k, v in o.items():
                    if isinstance(v, (dict, list)):
                        click.echo("  " * depth + str(k) + ":")
                        walk(v, depth + 1)
                    else:
                        click.echo("  " * depth + f"{k}: {v}")
            elif isinstance(o, list):
                for v in o:
                    walk(v, depth)
            else:
                click.echo("  " * depth + str(o))
        walk(obj)
    else:
        raise click.UsageError(f"unknown format {fmt!r}")


@click.group()
def main() -> None:
    """Weight (-3,-3) pseudo-hermitian invariants on CR 5-manifolds."""


_FMT = click.option("--format", "fmt", default="json",
                    type=click.Choice(["json", "pretty"]), help="output format")


@main.command()
@click.argument("expression")
@_FMT
def parse(expression: str, fmt: str) -> None:
    """Parse and canonicalize an expression."""
    from .errors import CrlabError
    from .parser import parse_expression
    try:
        e = parse_expression(expression)
        w = e.weight()
        free = sorted(str(lab) + ("!" if bt == "a" else "") + ("^" if pos == "up" else "_")
                      for lab, bt, pos in e.free_signature())
    except CrlabError as exc:
        emit({"schema": SCHEMA_VERSION, "error": str(exc)}, fmt)
        sys.exit(1)
    emit({"schema": SCHEMA_VERSION, "input": expression, "canonical": str(e),
          "weight": [w, w], "free_indices": free, "terms": len(e.terms)}, fmt)


@main.command()
@click.argument("expression")
@_FMT
def canon(expression: str, fmt: str) -> None:
    """Canonical form of an expression (alias of parse)."""
    from .errors import CrlabError
    from .parser import parse_expression
    try:
        e = parse_expression(expression)
    except CrlabError as exc:
        emit({"schema": SCHEMA_VERSION, "error": str(exc)}, fmt)
        sys.exit(1)
    emit({"schema": SCHEMA_VERSION, "canonical": str(e)}, fmt)


@main.command()
@click.argument("expression")
@_FMT
def reduce(expression: str, fmt: str) -> None:
    """Coordinates of an expression on the seven quotient classes."""
    from .errors import CrlabError
    from .parser import parse_expression
    from .quotient import CLASS_NAMES, build_quotient
    try:
        e = parse_expression(expression)
        q = build_quotient()
        coords = q.coordinates(e)
    except CrlabError as exc:
        emit({"schema": SCHEMA_VERSION, "error": str(exc)}, fmt)
        sys.exit(1)
    emit({"schema": SCHEMA_VERSION, "classes": list(CLASS_NAMES),
          "coordinates": [str(c) for c in coords]}, fmt)


@main.command()
@click.option("--weight", default=-3, type=int, help="diagonal CR weight (only -3)")
@click.option("--pseudo-einstein/--no-pseudo-einstein", default=True)
@_FMT
def enumerate(weight: int, pseudo_einstein: bool, fmt: str) -> None:
    """Cases 1-7, their contractions and quotient coordinates."""
    if weight != -3 or not pseudo_einstein:
        raise click.UsageError("only the pseudo-Einstein weight (-3,-3) case is implemented")
    from .casework import case_report
    from .quotient import CLASS_NAMES, build_quotient
    q = build_quotient()
    emit({"schema": SCHEMA_VERSION, "weight": [-3, -3],
          "classes": list(CLASS_NAMES), "cases": case_report(q)}, fmt)


@main.command()
@_FMT
def basis(fmt: str) -> None:
    """The divergence quotient: dimensions, basis, named coordinates."""
    from .expr import mono_str
    from .quotient import (CLASS_NAMES, build_quotient, i_prime_expression,
                           q_prime_expression)
    q = build_quotient()
    named = {"Q'": q.coordinates(q_prime_expression()),
             "I'": q.coordinates(i_prime_expression())}
    emit({
        "schema": SCHEMA_VERSION,
        "ambient_dim": q.ambient_dim,
        "relation_count": q.relation_count,
        "rank": q.rref.rank,
        "quotient_dim": q.dim,
        "classes": list(CLASS_NAMES),
        "basis": [mono_str(m) for m in q.basis_monos()],
        "coordinates_of_named_invariants": {k: [str(c) for c in v]
                                            for k, v in named.items()},
    }, fmt)


@main.command()
@click.argument("model", type=click.Choice(["sphere", "reinhardt"]))
@click.option("--check", "check", default="identities",
              type=click.Choice(["identities", "structure", "pseudo-einstein"]))
@click.option("--seed", default=0, type=int)
@click.option("--points", default=5, type=int)
@click.option("--tol-fd", default=1e-6, type=float)
@click.option("--tol-sym", default=1e-9, type=float)
@_FMT
def model(model: str, check: str, seed: int, points: int,
          tol_fd: float, tol_sym: float, fmt: str) -> None:
    """Numeric residual reports for the model geometries."""
    from .checks import model_check_report
    rep = model_check_report(model, check, seed=seed, points=points,
                             tol_fd=tol_fd, tol_sym=tol_sym)
    rep = {"schema": SCHEMA_VERSION, **rep}
    emit(rep, fmt)
    if not rep["pass"]:
        sys.exit(1)


@main.command()
@click.option("--model", "model", default="sphere",
              type=click.Choice(["sphere", "reinhardt"]))
@click.option("--k", default=None, type=int, help="moment |z1|^{2k} on the sphere")
@click.option("--family", default=None, help="pluriharmonic family, e.g. m=3")
@click.option("--quantity", default=None,
              type=click.Choice(["uab2", "delta2-pdp", "vol", "j2", "j4"]))
@click.option("--nodes", default=48, type=int)
@click.option("--tol", default=1e-6, type=float)
@_FMT
def integrate(model: str, k: int | None, family: str | None, quantity: str | None,
              nodes: int, tol: float, fmt: str) -> None:
    """Model integrals against their closed-form targets."""
    from .checks import integrate_report
    try:
        m = None
        if family is not None:
            if not family.startswith("m="):
                raise click.UsageError("--family takes the form m=<int>")
            m = int(family[2:])
        rep = integrate_report(model, k=k, m=m, quantity=quantity,
                               nodes=nodes, tol=tol)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    rep = {"schema": SCHEMA_VERSION, **rep}
    emit(rep, fmt)
    if not rep["pass"]:
        sys.exit(1)


@main.command()
@click.option("--m-max", default=6, type=int)
@click.option("--nodes", default=48, type=int)
@click.option("--tol", default=1e-6, type=float)
@click.option("--with-quotient/--no-quotient", default=True)
@_FMT
def classify(m_max: int, nodes: int, tol: float, with_quotient: bool, fmt: str) -> None:
    """Assemble and solve the classification constraints."""
    from .errors import CrlabError
    from .models.quadrature import QuadratureSpec, ReinhardtQuadrature, SphereQuadrature
    from .variation import classify as run_classify
    try:
        spec = QuadratureSpec(n_compact=nodes, n_periodic=nodes)
        q = None
        if with_quotient:
            from .quotient import build_quotient
            q = build_quotient()
        rep = run_classify(m_max=m_max, sphere_quad=SphereQuadrature(spec),
                           reinhardt_quad=ReinhardtQuadrature(spec),
                           quotient=q, tol=tol)
    except CrlabError as exc:
        emit({"schema": SCHEMA_VERSION, "error": str(exc)}, fmt)
        sys.exit(1)
    rep = {"schema": SCHEMA_VERSION, **rep}
    emit(rep, fmt)
    if rep["kernel_dim"] != 0:
        sys.exit(1)


@main.command()
@click.option("--out", default=None, type=click.Path(), help="write ruleset.json here")
@_FMT
def rules(out: str | None, fmt: str) -> None:
    """The rewrite-rule catalog (ruleset.json)."""
    from .rewrite import RULESET
    payload = {"schema": SCHEMA_VERSION, "rules": RULESET}
    if out:
        with open(out, "w") as fh:
            fh.write(_render(payload) + "\n")
        click.echo(f"wrote {out}")
    else:
        emit(payload, fmt)


if __name__ == "__main__":
    main()
