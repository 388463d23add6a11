"""Command line interface: ``crystk <command> ...``.

Exit codes: 0 on success, 1 when ``verify`` finds a golden mismatch, 2 on usage errors.
"""

from __future__ import annotations

import json
import sys

import click

from crystk.crystal_classes import NotInCatalog, catalog, integral_representation, invariant_tuple, lookup


def _emit(ctx: click.Context, as_json: bool, payload, text_lines) -> None:
    if as_json or (ctx.obj or {}).get("json"):
        click.echo(json.dumps(payload, indent=2, sort_keys=False))
    else:
        for line in text_lines:
            click.echo(line)


def _group(label: str):
    try:
        return lookup(label)
    except NotInCatalog:
        raise click.BadParameter(f"{label!r} is not a catalog label (try `crystk catalog`)", param_hint="LABEL")


json_flag = click.option("--json", "as_json", is_flag=True, help="Print JSON instead of text.")


@click.group()
@click.option("--json", "as_json", is_flag=True, help="Print JSON for every command.")
@click.pass_context
def main(ctx: click.Context, as_json: bool) -> None:
    """Exact computations for the split three-dimensional crystallographic groups."""
    ctx.obj = {"json": as_json}


@main.command("catalog")
@json_flag
@click.pass_context
def catalog_cmd(ctx, as_json):
    """List the 73 groups, one label per line."""
    groups = catalog()
    payload = [{"label": G.label, "lattice": G.lattice.name, "order": len(G.point_group)} for G in groups]
    _emit(ctx, as_json, payload, [f"{G.label:16s} {G.lattice.name}  |H| = {len(G.point_group)}" for G in groups])


@main.command()
@click.argument("label")
@json_flag
@click.pass_context
def classify(ctx, label, as_json):
    """Lattice, point group and integral representation of one group."""
    G = _group(label)
    rep = sorted(integral_representation(G).matrices)
    inv = invariant_tuple(G)
    payload = G.to_json() | {
        "iso_type": inv[0],
        "contains_minus_identity": inv[2],
        "covolume": str(inv[3]),
        "integral_representation": [[list(r) for r in m] for m in rep],
    }
    text = [
        f"group     {G.label}",
        f"lattice   {G.lattice!r}",
        f"point grp {G.name} (order {len(G.point_group)}, type {inv[0]})",
        f"integral representation ({len(rep)} matrices):",
    ] + [f"  {m}" for m in rep]
    _emit(ctx, as_json, payload, text)


@main.command()
@click.argument("index", type=click.IntRange(1, 7))
@json_flag
@click.pass_context
def domain(ctx, index, as_json):
    """Fundamental polyhedron of the i-th maximal group and its ridge-cycle report."""
    from crystk.cell_geometry import domain_report

    rep = domain_report(index)
    text = [f"group {rep['group']}", "sides:"]
    text += [f"  S{k + 1}: n = {s['normal']}, offset {s['offset']}" for k, s in enumerate(rep["sides"])]
    text.append("ridge cycles:")
    for c in rep["cycles"]:
        ridges = " ".join(f"S{a}/S{b}" for a, b in c["ridges"])
        text.append(f"  {c['kind']:8s} {ridges:24s} sum = {c['angle_sum']}  {'ok' if c['ok'] else 'FAIL'}")
    text.append(f"subdivision vertices: {rep['subdivision_vertices']}")
    text.append(f"pairings generate the group: {rep['generates_group']}")
    _emit(ctx, as_json, rep, text)


@main.command()
@click.argument("label")
@json_flag
@click.pass_context
def stabilizers(ctx, label, as_json):
    """Non-negligible cell orbits with their stabilizers."""
    from crystk.cell_geometry import cell_complex

    G = _group(label)
    cx = cell_complex(G.label)
    text = [f"{G.label}: {len(cx.of_dim(0))} vertices, {len(cx.of_dim(1))} edges"]
    for e in cx.cells:
        kind = "vertex" if e.cell.dim == 0 else "edge  "
        text.append(f"  {kind} {str(e.cell):40s} {e.stabilizer_name or '-':14s} {e.iso_type}")
    _emit(ctx, as_json, cx.to_json(), text)


@main.command()
@click.argument("label")
@json_flag
@click.pass_context
def lines(ctx, label, as_json):
    """Non-negligible line orbits, their stabilizer structure and cokernels."""
    from crystk.lines import line_entries

    G = _group(label)
    entries = line_entries(G.label)
    data = [e.to_json() for e in entries]
    text = [f"{G.label}: {len(data)} line orbits"]
    for e, d in zip(entries, data):
        text.append(
            f"  {str(e.line):28s} {d['strict_stabilizer_name'] or '-':8s} {d['structure']:20s}"
            f" n=0: {d['cokernel_n0']}; n=1: {d['cokernel_n1']}"
        )
    _emit(ctx, as_json, data, text)


@main.command()
@click.argument("label", required=False)
@click.option("--all", "all_groups", is_flag=True, help="Every catalog group, in catalog order.")
@json_flag
@click.pass_context
def ktheory(ctx, label, all_groups, as_json):
    """K_-1, reduced K_0 and Wh of one group (or all of them)."""
    from crystk.assembly import k_theory

    if all_groups == (label is not None):
        raise click.UsageError("give exactly one of LABEL or --all")
    groups = catalog() if all_groups else (_group(label),)
    results = [k_theory(G) for G in groups]
    if all_groups:
        payload = [r.to_json() for r in results]
        text = [f"{r.group_label:16s} {r}" for r in results]
    else:
        payload = results[0].to_json()
        text = [str(results[0])]
    _emit(ctx, as_json, payload, text)


@main.command()
@json_flag
@click.pass_context
def verify(ctx, as_json):
    """Recompute every stored table and compare; exit 1 on any mismatch."""
    from crystk.assembly import run_goldens

    rep = run_goldens()
    _emit(ctx, as_json, {"ok": rep.ok, "sections": rep.sections}, rep.lines())
    ctx.exit(0 if rep.ok else 1)


if __name__ == "__main__":
    sys.exit(main())
