#!/usr/bin/env python3
"""
rlcpart - streaming graph partitioning with a compressed partition index
"""

import os
import sys
from enum import Enum
from pathlib import Path
from typing import Optional

import psutil
import typer
from rich import print
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from rlcpart import __version__
from rlcpart.config import Config, get_config
from rlcpart.core.errors import RlcPartError
from rlcpart.core.generator import GenConfig, GraphModel, generate_stream, radius_for_average_degree
from rlcpart.core.graph_io import NodeStream, open_metis_stream, write_metis
from rlcpart.core.metrics import (
    PartitionReport,
    build_report,
    compare_runs,
    comparisons_to_json,
    evaluate_partition,
    format_key_values,
)
from rlcpart.core.partitioner import BackendKind, PartitionParams, run_partition
from rlcpart.utils.log import setup_logging

# Human-readable output goes to stderr; stdout carries key=value lines and METIS data
console = Console(stderr=True)

# Create the main CLI app
app = typer.Typer(
    name="rlcpart",
    help="Streaming graph partitioning with a run-length compressed partition index",
    add_completion=False,
    rich_markup_mode="rich",
    context_settings={"help_option_names": ["-h", "--help"]},
)


class LogLevel(str, Enum):
    """Log levels"""
    debug = "debug"
    info = "info"
    warning = "warning"
    error = "error"


def version_callback(value: bool):
    """Show version and exit"""
    if value:
        print(f"[bold green]rlcpart[/bold green] v{__version__}")
        raise typer.Exit()


@app.callback()
def common(
    version: Optional[bool] = typer.Option(
        None,
        "--version", "-v",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
):
    """rlcpart - streaming graph partitioning"""
    pass


def _init_logging(log_level: Optional[LogLevel], config: Config) -> None:
    setup_logging(log_level.value if log_level else config.log_level)


def _fail(e: BaseException) -> None:
    console.print(f"[red]Error: {e}[/red]")
    raise typer.Exit(1)


def _rss_bytes() -> Optional[int]:
    try:
        return psutil.Process().memory_info().rss
    except psutil.Error:
        return None


def _partition_stream(
    stream: NodeStream,
    graph_name: str,
    config: Config,
    k: int,
    backend: BackendKind,
    epsilon: Optional[float],
    gamma: Optional[float],
    kappa: Optional[float],
    beta: Optional[int],
    output: Optional[Path],
    report_path: Optional[Path],
) -> PartitionReport:
    """Run one partition pass and print its report"""
    params = PartitionParams(
        k=k,
        epsilon=config.epsilon if epsilon is None else epsilon,
        gamma=config.gamma if gamma is None else gamma,
        kappa=config.kappa if kappa is None else kappa,
    )
    if backend == BackendKind.cpi_batch and not beta:
        raise ValueError("backend cpi-batch requires --beta > 0")
    backend_config = config.backend_config(beta=beta)
    if backend == BackendKind.extpq and config.spill_dir is not None:
        spill = config.spill_dir
        if not spill.is_dir() or not os.access(spill, os.W_OK):
            raise ValueError(f"spill directory {spill} is not a writable directory")

    console.print(Panel(
        f"[cyan]Graph:[/cyan] {graph_name} (n={stream.header.n}, m={stream.header.m})\n"
        f"[cyan]Blocks:[/cyan] {params.k}  [cyan]epsilon:[/cyan] {params.epsilon}  "
        f"[cyan]gamma:[/cyan] {params.gamma}  [cyan]kappa:[/cyan] {params.kappa}\n"
        f"[cyan]Backend:[/cyan] {backend.value}" + (f" (beta={beta})" if backend == BackendKind.cpi_batch else ""),
        title=f"rlcpart v{__version__}",
        border_style="green",
    ))

    result = run_partition(stream, params, backend, backend_config, output=output)
    report = build_report(result, params, backend_config, graph=graph_name, rss_bytes=_rss_bytes())
    if report_path is not None:
        report.save(report_path)

    typer.echo(format_key_values(report))
    console.print(
        f"[green]cut {report.edge_cut} ({report.rel_cut:.4%}), {report.run_count} runs, "
        f"index {report.index_bytes} bytes, {report.elapsed_seconds:.2f}s[/green]"
    )
    return report


@app.command()
def partition(
    graph: Path = typer.Argument(..., exists=True, dir_okay=False, help="METIS graph file"),
    k: int = typer.Option(..., "-k", "--blocks", min=2, help="Number of blocks"),
    backend: BackendKind = typer.Option(BackendKind.cpi, "--backend", "-b", help="Assignment store"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", "-e", min=0.0, help="Allowed imbalance"),
    gamma: Optional[float] = typer.Option(None, "--gamma", min=1.0, help="Fennel exponent"),
    kappa: Optional[float] = typer.Option(None, "--kappa", min=1.0, help="Run elongation scale (1 = off)"),
    beta: Optional[int] = typer.Option(None, "--beta", min=1, help="Batch size for cpi-batch"),
    delta: Optional[int] = typer.Option(None, "--delta", min=1, help="Buffered run starts before compression"),
    correction_bits: Optional[int] = typer.Option(None, "--correction-bits", min=1, max=32, help="PLA correction width"),
    extpq_buffer_bytes: Optional[int] = typer.Option(None, "--extpq-buffer-bytes", help="External queue memory budget"),
    spill_dir: Optional[Path] = typer.Option(
        None, "--spill-dir", envvar="RLCPART_SPILL_DIR", file_okay=False, help="Directory for queue run files"
    ),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Partition file to write"),
    report: Optional[Path] = typer.Option(None, "--report", "-r", help="JSON report to write"),
    log_level: Optional[LogLevel] = typer.Option(None, "--log-level", "-l", help="Set logging level"),
):
    """
    Partition a METIS graph in one streaming pass

    Examples:
    \b
        rlcpart partition graph.metis -k 4
        rlcpart partition graph.metis -k 2 --kappa 20 -o graph.part
        rlcpart partition graph.metis -k 8 --backend cpi-batch --beta 10000
        rlcpart partition graph.metis -k 4 --backend extpq --spill-dir /tmp
        rlcpart partition graph.metis -k 4 --backend hashing -r report.json
    """
    try:
        config = get_config().model_copy()
        for key, value in (
            ("delta", delta),
            ("correction_bits", correction_bits),
            ("extpq_buffer_bytes", extpq_buffer_bytes),
            ("spill_dir", spill_dir),
        ):
            if value is not None:
                setattr(config, key, value)
        _init_logging(log_level, config)

        with open_metis_stream(graph) as stream:
            _partition_stream(
                stream, str(graph), config, k, backend, epsilon, gamma, kappa, beta, output, report
            )
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(130)
    except (RlcPartError, ValueError, OSError) as e:
        _fail(e)


@app.command()
def generate(
    model: GraphModel = typer.Option(..., "--model", "-m", help="Graph model"),
    n: int = typer.Option(..., "-n", "--nodes", min=1, help="Number of nodes"),
    degree: int = typer.Option(1, "--degree", "-d", min=1, help="BA: edges attached per new node"),
    radius: Optional[float] = typer.Option(None, "--radius", help="RGG: connection radius"),
    avg_degree: Optional[float] = typer.Option(None, "--avg-degree", help="RGG: pick the radius for this average degree"),
    chunks: int = typer.Option(16, "--chunks", min=1, help="Generation chunks"),
    seed: int = typer.Option(0, "--seed", "-s", min=0, help="Random seed"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="METIS file to write (stdout if omitted)"),
    do_partition: bool = typer.Option(False, "--partition", help="Partition the generated stream instead of writing it"),
    k: int = typer.Option(2, "-k", "--blocks", min=2, help="Number of blocks (with --partition)"),
    backend: BackendKind = typer.Option(BackendKind.cpi, "--backend", "-b", help="Assignment store (with --partition)"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", "-e", min=0.0, help="Allowed imbalance"),
    gamma: Optional[float] = typer.Option(None, "--gamma", min=1.0, help="Fennel exponent"),
    kappa: Optional[float] = typer.Option(None, "--kappa", min=1.0, help="Run elongation scale (with --partition)"),
    beta: Optional[int] = typer.Option(None, "--beta", min=1, help="Batch size for cpi-batch (with --partition)"),
    partition_output: Optional[Path] = typer.Option(None, "--partition-output", help="Partition file (with --partition)"),
    report: Optional[Path] = typer.Option(None, "--report", "-r", help="JSON report (with --partition)"),
    spill_dir: Optional[Path] = typer.Option(
        None, "--spill-dir", envvar="RLCPART_SPILL_DIR", file_okay=False, help="Directory for queue run files"
    ),
    log_level: Optional[LogLevel] = typer.Option(None, "--log-level", "-l", help="Set logging level"),
):
    """
    Generate a BA or RGG graph as a node stream

    Examples:
    \b
        rlcpart generate --model rgg -n 1000 --radius 0.05 --seed 1 -o g.metis
        rlcpart generate --model rgg -n 100000 --avg-degree 20 -o rgg.metis
        rlcpart generate --model ba -n 100 --degree 3 > ba.metis
        rlcpart generate --model rgg -n 100000 --avg-degree 20 --partition -k 4
    """
    try:
        config = get_config().model_copy()
        if spill_dir is not None:
            config.spill_dir = spill_dir
        _init_logging(log_level, config)

        if model == GraphModel.rgg:
            if avg_degree is not None:
                radius = radius_for_average_degree(n, avg_degree)
            if radius is None:
                raise ValueError("rgg needs --radius or --avg-degree")
        gen = GenConfig(
            model=model,
            n=n,
            ba_degree=degree,
            rgg_radius=radius if radius is not None else GenConfig.model_fields["rgg_radius"].default,
            chunks=chunks,
            seed=seed,
        )
        stream = generate_stream(gen, spill_dir=config.spill_dir)
        name = stream.source

        if do_partition:
            _partition_stream(
                stream, name, config, k, backend, epsilon, gamma, kappa, beta, partition_output, report
            )
            return

        if output is None:
            write_metis(sys.stdout, stream)
            sys.stdout.flush()
        else:
            header = write_metis(output, stream)
            console.print(f"[green]Wrote {name} to {output} (n={header.n}, m={header.m})[/green]")
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(130)
    except (RlcPartError, ValueError, OSError) as e:
        _fail(e)


@app.command()
def evaluate(
    graph: Path = typer.Argument(..., exists=True, dir_okay=False, help="METIS graph file"),
    partition_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Partition file"),
    k: Optional[int] = typer.Option(None, "-k", "--blocks", min=1, help="Number of blocks (default: max id + 1)"),
    epsilon: Optional[float] = typer.Option(None, "--epsilon", "-e", min=0.0, help="Imbalance for the balance check"),
    log_level: Optional[LogLevel] = typer.Option(None, "--log-level", "-l", help="Set logging level"),
):
    """
    Compute edge cut and balance of a partition file

    Examples:
    \b
        rlcpart evaluate graph.metis graph.part
        rlcpart evaluate graph.metis graph.part -k 4 --epsilon 0.03
    """
    try:
        config = get_config()
        _init_logging(log_level, config)
        ev = evaluate_partition(graph, partition_file, k=k, epsilon=config.epsilon if epsilon is None else epsilon)
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        raise typer.Exit(130)
    except (RlcPartError, ValueError, OSError) as e:
        _fail(e)

    table = Table(title=f"{graph.name} / {partition_file.name}")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("nodes", str(ev.n))
    table.add_row("edges", str(ev.m))
    table.add_row("blocks", str(ev.k))
    table.add_row("edge cut", f"{ev.edge_cut} ({ev.rel_cut:.4%})")
    table.add_row("imbalance", f"{ev.imbalance:.4f}")
    table.add_row("L_max", str(ev.l_max))
    table.add_row("balanced", "yes" if ev.balanced else "[red]no[/red]")
    console.print(table)

    typer.echo(f"n={ev.n}\nm={ev.m}\nk={ev.k}\nedge_cut={ev.edge_cut}\nrel_cut={ev.rel_cut:.6g}")
    typer.echo(f"imbalance={ev.imbalance:.6g}\nl_max={ev.l_max}\nbalanced={str(ev.balanced).lower()}")
    typer.echo("block_weights=" + ",".join(str(w) for w in ev.block_weights))


@app.command()
def compare(
    report_a: Path = typer.Argument(..., exists=True, dir_okay=False, help="Report of run A"),
    report_b: Path = typer.Argument(..., exists=True, dir_okay=False, help="Report of run B (baseline)"),
    as_json: bool = typer.Option(False, "--json", help="Print the comparison as JSON"),
):
    """
    Compare two partition reports (relative value A/B and improvement)

    Examples:
    \b
        rlcpart compare kappa20.json kappa1.json
        rlcpart compare cpi.json array.json --json
    """
    try:
        a = PartitionReport.load(report_a)
        b = PartitionReport.load(report_b)
    except (ValueError, OSError) as e:
        _fail(e)

    comparisons = compare_runs(a, b)
    if as_json:
        typer.echo(comparisons_to_json(comparisons))
        return

    table = Table(title=f"{report_a.name} vs {report_b.name}")
    table.add_column("Metric", style="cyan")
    table.add_column("A", justify="right")
    table.add_column("B", justify="right")
    table.add_column("A/B", justify="right", style="green")
    table.add_column("Improvement", justify="right")
    for c in comparisons:
        table.add_row(c.name, f"{c.a:.6g}", f"{c.b:.6g}", f"{c.relative:.4f}", f"{c.improvement_pct:+.2f}%")
    Console().print(table)


@app.command()
def config(
    show: bool = typer.Option(False, "--show", help="Show current configuration"),
    save: bool = typer.Option(False, "--save", help="Write the effective settings to the config file"),
):
    """
    Show or persist rlcpart defaults

    Examples:
    \b
        rlcpart config --show
        RLCPART_KAPPA=20 rlcpart config --save
    """
    try:
        config_obj = get_config()
        if save:
            config_obj.save_to_file()
            console.print(f"[green]Saved configuration to {config_obj.config_file}[/green]")
    except (ValueError, OSError) as e:
        _fail(e)

    if show or not save:
        config_obj.show()


if __name__ == "__main__":
    app()
