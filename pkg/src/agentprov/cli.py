"""Command-line entry point: simulate, ingest, query, export, validate,
stats.

Exit codes: 0 success, 1 usage error, 2 data error (violations found,
unknown ids, malformed stores).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import export as export_mod
from . import query as query_mod
from .ingest import ingest_listen, ingest_stream, send_lines
from .model import validate_graph
from .simulator import SimConfig, SimConfigError, generate_lines
from .store import ProvGraph, StoreError, UnknownNodeError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def _parse_endpoint(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"expected HOST:PORT, got {value!r}")
    return host, int(port)


def build_parser() -> _Parser:
    parser = _Parser(prog="agentprov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_store(p):
        p.add_argument(
            "--store",
            default=os.environ.get("AGENTPROV_STORE"),
            help="store log path (default: $AGENTPROV_STORE)",
        )

    p = sub.add_parser("simulate", help="generate a synthetic workflow event stream")
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fault-layer", type=int, default=None)
    p.add_argument("--telemetry", action="store_true")
    p.add_argument("--locations", action="store_true")
    p.add_argument("--id-prefix", default="")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--out", help="write stream to a file (default: stdout)")
    group.add_argument("--connect", help="send stream to a live listener HOST:PORT")

    p = sub.add_parser("ingest", help="consolidate an event stream into a store")
    add_store(p)
    p.add_argument("--lenient", action="store_true", help="skip corrupt log lines")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--file")
    group.add_argument("--stdin", action="store_true")
    group.add_argument("--listen", help="HOST:PORT to listen on")

    p = sub.add_parser("query", help="run a lineage query")
    add_store(p)
    p.add_argument("--max-depth", type=int, default=None)
    p.add_argument("--max-paths", type=int, default=100)
    p.add_argument("--format", choices=["text", "prov-json", "dot"], default="text")
    qsub = p.add_subparsers(dest="query_kind", required=True)
    for name in ("lineage", "impact", "context", "root-cause"):
        qp = qsub.add_parser(name)
        qp.add_argument("id")
    qp = qsub.add_parser("path")
    qp.add_argument("from_id")
    qp.add_argument("to_id")

    p = sub.add_parser("export", help="export the whole store")
    add_store(p)
    p.add_argument("--format", choices=["prov-json", "dot"], required=True)
    p.add_argument("--out")
    p.add_argument(
        "--reverse-arrows",
        action="store_true",
        help="DOT only: draw used/wasGeneratedBy reversed for top-down reading",
    )

    p = sub.add_parser("validate", help="check the store against the model constraints")
    add_store(p)

    p = sub.add_parser("stats", help="print store counters")
    add_store(p)
    return parser


def _open_store(args, out) -> ProvGraph:
    if not args.store:
        raise UsageError("--store is required (or set AGENTPROV_STORE)")
    return ProvGraph.open(args.store, lenient=getattr(args, "lenient", False))


def _emit(text: str, out_path: Optional[str], stdout) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def cmd_simulate(args, stdout) -> int:
    try:
        config = SimConfig(
            layers=args.layers,
            seed=args.seed,
            fault_layer=args.fault_layer,
            emit_telemetry=args.telemetry,
            emit_locations=args.locations,
            id_prefix=args.id_prefix,
        )
        lines = generate_lines(config)
        if args.connect:
            host, port = _parse_endpoint(args.connect)
            sent = send_lines(host, port, lines)
            stdout.write(f"sent {sent} events to {args.connect}\n")
        else:
            _emit("".join(line + "\n" for line in lines), args.out, stdout)
    except SimConfigError as exc:
        raise UsageError(str(exc)) from exc
    return EXIT_OK


def cmd_ingest(args, stdout) -> int:
    with _open_store(args, stdout) as graph:
        if args.listen:
            host, port = _parse_endpoint(args.listen)
            stats = ingest_listen(host, port, graph)
        elif args.stdin:
            stats = ingest_stream("-", graph)
        else:
            stats = ingest_stream(args.file, graph)
        stdout.write(json.dumps(stats.as_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def _subgraph_output(graph, subgraph, fmt) -> str:
    if fmt == "prov-json":
        return export_mod.to_prov_json(subgraph, graph=graph)
    if fmt == "dot":
        return export_mod.to_dot(subgraph, graph=graph)
    lines = [f"start: {subgraph.start}"]
    for node_id in sorted(subgraph.nodes):
        node = graph.node(node_id)
        lines.append(f"  node {node_id} [{node.kind.value}]")
    for src, kind, dst in sorted(subgraph.edges, key=lambda t: (t[0], t[1].value, t[2])):
        lines.append(f"  edge {src} -{kind.value}-> {dst}")
    if subgraph.frontier_reached:
        lines.append("  (truncated by --max-depth)")
    return "\n".join(lines) + "\n"


def cmd_query(args, stdout) -> int:
    with _open_store(args, stdout) as graph:
        if args.query_kind == "lineage":
            sub = query_mod.backward_lineage(graph, args.id, args.max_depth)
            stdout.write(_subgraph_output(graph, sub, args.format))
        elif args.query_kind == "impact":
            sub = query_mod.forward_impact(graph, args.id, args.max_depth)
            stdout.write(_subgraph_output(graph, sub, args.format))
        elif args.query_kind == "context":
            ctx = query_mod.decision_context(graph, args.id)
            if args.format == "text":
                stdout.write(f"decision: {ctx.decision_id}\n")
                stdout.write(f"tool: {ctx.tool_id}\n")
                stdout.write(f"agent: {ctx.agent_id}\n")
                stdout.write(f"inputs: {', '.join(ctx.inputs)}\n")
                stdout.write(f"model: {json.dumps(ctx.model, sort_keys=True)}\n")
                stdout.write(f"prompt [{ctx.prompt_id}]: {ctx.prompt_text}\n")
                stdout.write(f"response [{ctx.response_id}]: {ctx.response_text}\n")
                if ctx.missing_invocation:
                    stdout.write("warning: no model invocation recorded\n")
            else:
                stdout.write(json.dumps(ctx.as_dict(), indent=2, sort_keys=True) + "\n")
        elif args.query_kind == "root-cause":
            rc = query_mod.root_cause(graph, args.id)
            stdout.write("== upstream ==\n")
            stdout.write(_subgraph_output(graph, rc.upstream, args.format))
            stdout.write("== downstream ==\n")
            stdout.write(_subgraph_output(graph, rc.downstream, args.format))
        elif args.query_kind == "path":
            result = query_mod.paths(graph, args.from_id, args.to_id, args.max_paths)
            for path in result.paths:
                hops = [path.nodes[0]]
                for kind, node in zip(path.kinds, path.nodes[1:]):
                    hops.append(f"-{kind.value}-> {node}")
                stdout.write(" ".join(hops) + "\n")
            if result.truncated:
                stdout.write("(truncated by --max-paths)\n")
    return EXIT_OK


def cmd_export(args, stdout) -> int:
    with _open_store(args, stdout) as graph:
        if args.format == "prov-json":
            text = export_mod.to_prov_json(graph)
        else:
            text = export_mod.to_dot(
                graph, reverse_dataflow_arrows=args.reverse_arrows
            )
        _emit(text if text.endswith("\n") else text + "\n", args.out, stdout)
    return EXIT_OK


def cmd_validate(args, stdout) -> int:
    with _open_store(args, stdout) as graph:
        violations = validate_graph(graph)
        stdout.write(f"{len(violations)} violations\n")
        for violation in violations:
            stdout.write(f"  {violation}\n")
        return EXIT_OK if not violations else EXIT_DATA


def cmd_stats(args, stdout) -> int:
    with _open_store(args, stdout) as graph:
        stdout.write(
            json.dumps(
                {
                    "nodes": len(graph.nodes),
                    "edges": graph.edge_count(),
                    "events": len(graph.seen_event_ids),
                    "placeholders": len(graph.placeholder_ids()),
                    "skipped_records": graph.skipped_records,
                },
                sort_keys=True,
            )
            + "\n"
        )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "ingest": cmd_ingest,
    "query": cmd_query,
    "export": cmd_export,
    "validate": cmd_validate,
    "stats": cmd_stats,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        parser.print_usage(stderr)
        return EXIT_USAGE
    except (
        UnknownNodeError,
        StoreError,
        query_mod.QueryError,
        export_mod.ExportError,
    ) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except OSError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
