import logging
from typing import Optional

import anyio
import click

from . import cli
from .core.query.render import parse_id_list
from .config import config
from .consts import consts

logger = logging.getLogger(consts.LOGGER_NAME)

_EVIDENCE_HELP = (
    "Observed values as id=v1,v2;id2=v, vector entries comma-separated, "
    "items separated by ';' (quote it in the shell), e.g. 'a2=2.0;b1=0.5,1.5'."
)


@click.group(invoke_without_command=True)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Logger verbosity (default from SPIC_LOG_LEVEL, else ERROR)",
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice([consts.OUTPUT_HUMAN, consts.OUTPUT_MACHINE]),
    default=consts.OUTPUT_HUMAN,
    help="human tables or a machine-readable JSON document",
)
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str], output_format: str):
    """Continuous SPI inference for linear-Gaussian networks; without a subcommand, serve MCP over stdio."""
    cfg = config.load_config()
    level = log_level or cfg.log_level
    if level:
        logger.setLevel(level.upper())
    ctx.obj = {"config": cfg, "format": output_format}
    if ctx.invoked_subcommand is None:
        ctx.invoke(serve)


def _run(ctx: click.Context, **fields) -> None:
    cfg: config.Config = ctx.obj["config"]
    if fields.get("mode") is None:
        fields["mode"] = cfg.tree_mode
    check_tol = fields.pop("check_tol", None)
    run_config = cli.RunConfig(
        tolerances=cfg.tolerances,
        check_tol=check_tol if check_tol is not None else cfg.check_tol,
        fast_path=cfg.substitution_fast_path,
        workers=cfg.workers,
        output_format=ctx.obj["format"],
        **fields,
    )
    outcome = cli.run(run_config)
    click.echo(outcome.document, err=outcome.error)
    ctx.exit(outcome.status)


_mode_option = click.option(
    "--mode",
    type=click.Choice([consts.TREE_MODE_BUSHY, consts.TREE_MODE_CHAIN]),
    default=None,
    help="SPI tree layout (default from SPIC_TREE_MODE, else bushy)",
)


@main.command()
@click.argument("network", type=click.Path(dir_okay=False))
@click.pass_context
def validate(ctx: click.Context, network: str):
    """Parse and validate a network document."""
    _run(ctx, subcommand="validate", network=network)


@main.command()
@click.argument("network", type=click.Path(dir_okay=False))
@_mode_option
@click.pass_context
def tree(ctx: click.Context, network: str, mode: Optional[str]):
    """Show the SPI tree of every skeleton component."""
    _run(ctx, subcommand="tree", network=network, mode=mode)


@main.command()
@click.argument("network", type=click.Path(dir_okay=False))
@click.option("--target", required=True, help="Comma-separated target ids, e.g. a1,c2")
@click.option("--given", default="", help="Comma-separated ids to condition on symbolically")
@click.option("--evidence", default="", help=_EVIDENCE_HELP)
@_mode_option
@click.pass_context
def query(ctx: click.Context, network: str, target: str, given: str, evidence: str, mode: Optional[str]):
    """Answer P(target | given, evidence)."""
    _run(
        ctx,
        subcommand="query",
        network=network,
        targets=parse_id_list(target),
        given=parse_id_list(given),
        evidence=evidence,
        mode=mode,
    )


@main.command()
@click.option("--seeds", default=100, show_default=True, help="Number of random networks")
@click.option("--nodes", default=12, show_default=True, help="Nodes per network")
@click.option("--queries", default=5, show_default=True, help="Random queries per network")
@click.option("--tol", type=float, default=None, help="Accepted deviation (default from SPIC_TOLERANCE)")
@_mode_option
@click.pass_context
def check(ctx: click.Context, seeds: int, nodes: int, queries: int, tol: Optional[float], mode: Optional[str]):
    """Compare engine answers with dense joint-Gaussian algebra; exit 2 on any deviation."""
    _run(ctx, subcommand="check", seeds=seeds, nodes=nodes, queries=queries, check_tol=tol, mode=mode)


@main.command()
@click.argument("network", type=click.Path(dir_okay=False))
@click.option("--queries", "queries_file", type=click.Path(dir_okay=False), default=None,
              help="JSON list of {target, given?, evidence?} queries")
@click.option("--random", "random_count", type=int, default=None, help="Replay K random queries instead")
@click.option("--seed", default=0, show_default=True, help="Seed for --random")
@_mode_option
@click.pass_context
def bench(ctx: click.Context, network: str, queries_file: Optional[str], random_count: Optional[int],
          seed: int, mode: Optional[str]):
    """Replay queries in one session and report per-query operation counts."""
    _run(ctx, subcommand="bench", network=network, queries_file=queries_file, random=random_count,
         seed=seed, mode=mode)


@main.command()
@click.option("--port", default=8000, help="Port to listen on for SSE")
@click.option(
    "--transport",
    type=click.Choice(["stdio", "sse"]),
    default="stdio",
    help="Transport type",
)
@click.pass_context
def serve(ctx: click.Context, port: int = 8000, transport: str = "stdio") -> int:
    """Run the MCP server."""
    from . import application

    logger.info(f"Starting MCP server over {transport}")
    app = application.create_server(ctx.obj["config"])

    if transport == "sse":
        from mcp.server.sse import SseServerTransport
        from starlette.applications import Starlette
        from starlette.routing import Mount, Route

        sse = SseServerTransport("/messages/")

        async def handle_sse(request):
            async with sse.connect_sse(
                request.scope, request.receive, request._send
            ) as streams:
                await app.run(
                    streams[0], streams[1], app.create_initialization_options()
                )

        starlette_app = Starlette(
            debug=True,
            routes=[
                Route("/sse", endpoint=handle_sse),
                Mount("/messages/", app=sse.handle_post_message),
            ],
        )

        import uvicorn

        uvicorn.run(starlette_app, host="0.0.0.0", port=port)
    else:
        from mcp.server.stdio import stdio_server

        async def arun():
            async with stdio_server() as streams:
                await app.run(
                    streams[0], streams[1], app.create_initialization_options()
                )

        anyio.run(arun)

    return 0


if __name__ == "__main__":
    main()
