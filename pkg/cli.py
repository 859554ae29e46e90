"""
Command-line pipeline: generate -> tokenize -> encode -> run -> verify, plus bench

Every command reads and writes plain files under --out-dir; with a fixed
seed (and no --timing) reruns produce byte-identical outputs.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import click
import pandas as pd
from pydantic import BaseModel, ValidationError

from config import DEFAULT_OUT_DIR, DEFAULT_SEED, MOT_CANDIDATES
from middleware import command_middleware
from models import EncoderSpec, PipelineConfig
from services.bench_service import DEFAULT_SIZES, bench
from services.errors import ConfigError, PropertyFailure
from services.graph_core import color_connectivity_instance, generate, labels_for
from services.hac import bfs_tokenize, build_hac, dfs_tokenize, hierarchical_pe_matrix
from services.local_encoder import EncodedSequence, encode_tokens, node_features, random_encoder_params
from services.pipeline_service import execute_pipeline, hac_costs, mot_encode, run_embedding
from services.tokenizers import (
    edge_node_tokenize,
    edge_tokenize,
    khop_tokenize,
    mot_route,
    node_tokenize,
    random_walk_tokenize,
)
from services.verify_service import run_suites
from storage import (
    pe_frame,
    read_graph,
    read_pipeline_config,
    read_router_weights,
    read_tokenization,
    rows_frame,
    write_encoded,
    write_frame,
    write_graph,
    write_hac_tree,
    write_json,
    write_labels,
    write_layers,
    write_mot_assignment,
    write_tokenization,
    write_vector,
)
from utils.naming import require_name
from utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

TOKENIZE_METHODS = ("node", "edge", "edge-node", "khop", "random-walk", "hac-bfs", "hac-dfs", "mot")

seed_option = click.option("--seed", type=int, default=None, help="Overrides the global --seed")


def _seed(ctx: click.Context, seed: Optional[int]) -> int:
    return ctx.obj["seed"] if seed is None else seed


def _out(ctx: click.Context, name: str) -> Path:
    return Path(ctx.obj["out_dir"]) / name


def _write_rows(ctx: click.Context, stem: str, rows: Sequence[BaseModel], drop_empty: Sequence[str] = ()) -> Path:
    """Report rows as CSV or JSON depending on --format"""
    if ctx.obj["format"] == "json":
        data = [row.model_dump(mode="json") for row in rows]
        for column in drop_empty:
            if all(item.get(column) is None for item in data):
                for item in data:
                    item.pop(column, None)
        return write_json(_out(ctx, f"{stem}.json"), data)
    return write_frame(_out(ctx, f"{stem}.csv"), rows_frame(rows, drop_empty))


def _write_table(ctx: click.Context, stem: str, frame: pd.DataFrame) -> Path:
    if ctx.obj["format"] == "json":
        return write_json(_out(ctx, f"{stem}.json"), frame.to_dict(orient="records"))
    return write_frame(_out(ctx, f"{stem}.csv"), frame)


@click.group()
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Base RNG seed")
@click.option("--out-dir", type=click.Path(file_okay=False), default=DEFAULT_OUT_DIR, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True,
              help="Format of reports (metrics, verify, bench)")
@click.pass_context
def cli(ctx: click.Context, seed: int, out_dir: str, fmt: str):
    """Graph sequence toolkit: tokenizers, encoders and verified constructive models."""
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed, out_dir=out_dir, format=fmt)


@cli.command("generate")
@click.option("--kind", default="er", show_default=True, help="er | regular | cycles | path | grid")
@click.option("--n", "n", type=int, default=10, show_default=True)
@click.option("--p", "p", type=float, default=0.5, show_default=True)
@click.option("--d", "d", type=int, default=3, show_default=True, help="Degree for regular graphs")
@click.option("--split", is_flag=True, help="cycles: two disjoint cycles instead of one")
@click.option("--rows", type=int, default=4, show_default=True)
@click.option("--cols", type=int, default=4, show_default=True)
@click.option("--coordinates", is_flag=True, help="path/grid: attach coordinate features")
@click.option("--color-connectivity", is_flag=True, help="Color half the nodes red with two random walks")
@click.option("--colors", type=int, default=None, help="Attach uniformly random colors from this palette")
@seed_option
@click.pass_context
@command_middleware
def cmd_generate(ctx, kind, n, p, d, split, rows, cols, coordinates, color_connectivity, colors, seed):
    """Write graph.json and labels.json"""
    seed = _seed(ctx, seed)
    g = generate(kind, seed, n=n, p=p, d=d, split=split, rows=rows, cols=cols, coordinates=coordinates)
    if color_connectivity:
        g = color_connectivity_instance(g, derive_seed(seed, 1))
    elif colors is not None:
        if colors < 1:
            raise ConfigError(f"--colors must be >= 1, got {colors}")
        g = g.with_colors(make_rng(derive_seed(seed, 2)).integers(colors, size=g.n))
    write_graph(_out(ctx, "graph.json"), g)
    write_labels(_out(ctx, "labels.json"), labels_for(g))
    logger.info(f"✅ {kind} graph: n={g.n}, {g.num_edges} edges")


@cli.command("tokenize")
@click.option("--graph", "graph_path", type=click.Path(dir_okay=False), required=True)
@click.option("--method", default="node", show_default=True, help=" | ".join(TOKENIZE_METHODS))
@click.option("--k", "k", type=int, default=2, show_default=True, help="Hop count for khop")
@click.option("--walk-len", type=int, default=8, show_default=True)
@click.option("--walks-per-node", type=int, default=1, show_default=True)
@click.option("--metric", default="euclidean", show_default=True, help="HAC edge cost: euclidean | neg_cosine")
@click.option("--pe", "with_pe", is_flag=True, help="HAC variants: also write the hierarchical PE table")
@click.option("--weights", type=click.Path(dir_okay=False), default=None, help="mot: router weights JSON")
@click.option("--candidates", default=",".join(MOT_CANDIDATES), show_default=True, help="mot: candidate tokenizers")
@click.option("--d-local", type=int, default=8, show_default=True, help="mot: local encoder width")
@click.option("--depth", type=int, default=1, show_default=True, help="mot: local encoder rounds")
@seed_option
@click.pass_context
@command_middleware
def cmd_tokenize(ctx, graph_path, method, k, walk_len, walks_per_node, metric, with_pe, weights, candidates, d_local,
                 depth, seed):
    """Write tokenization.json (HAC variants add hac_tree.json; mot writes mot.json and mot_encoded.bin)"""
    require_name(method, TOKENIZE_METHODS, "tokenizer")
    g = read_graph(graph_path)

    if method == "mot":
        if weights is None:
            raise ConfigError("mot needs --weights")
        names = [c.strip() for c in candidates.split(",") if c.strip()]
        for name in names:
            require_name(name, MOT_CANDIDATES, "mot candidate")
        assignment = mot_route(node_features(g), read_router_weights(weights), names)
        write_mot_assignment(_out(ctx, "mot.json"), assignment)
        vectors = mot_encode(g, assignment, d_local, depth, _seed(ctx, seed), k=k, metric=metric)
        write_encoded(_out(ctx, "mot_encoded.bin"), [EncodedSequence(vectors=vectors, provenance=g.fingerprint())])
        logger.info(f"✅ routed {len(assignment.top2)} nodes over {len(names)} candidates")
        return

    if method in ("hac-bfs", "hac-dfs"):
        tree = build_hac(g, hac_costs(g, metric))
        tok = (bfs_tokenize if method == "hac-bfs" else dfs_tokenize)(tree, g.fingerprint())
        write_hac_tree(_out(ctx, "hac_tree.json"), tree)
        if with_pe:
            write_frame(_out(ctx, "pe.csv"), pe_frame(hierarchical_pe_matrix(tree, g)))
    elif method == "node":
        tok = node_tokenize(g)
    elif method == "edge":
        tok = edge_tokenize(g)
    elif method == "edge-node":
        tok = edge_node_tokenize(g)
    elif method == "khop":
        tok = khop_tokenize(g, k)
    else:
        tok = random_walk_tokenize(g, walk_len, walks_per_node, _seed(ctx, seed))
    write_tokenization(_out(ctx, "tokenization.json"), tok)
    logger.info(f"✅ {method}: {tok.num_sequences} sequences")


@cli.command("encode")
@click.option("--graph", "graph_path", type=click.Path(dir_okay=False), required=True)
@click.option("--tokenization", "tok_path", type=click.Path(dir_okay=False), required=True)
@click.option("--d-local", type=int, default=8, show_default=True)
@click.option("--depth", type=int, default=1, show_default=True)
@seed_option
@click.pass_context
@command_middleware
def cmd_encode(ctx, graph_path, tok_path, d_local, depth, seed):
    """Write encoded.bin: one f64 matrix per token sequence"""
    g = read_graph(graph_path)
    tok = read_tokenization(tok_path)
    d_in = node_features(g).shape[1]
    params = random_encoder_params(d_in, d_local, depth, _seed(ctx, seed))
    encoded = encode_tokens(g, tok, params)
    write_encoded(_out(ctx, "encoded.bin"), encoded)
    logger.info(f"✅ encoded {len(encoded)} sequences into {d_local} dims")


@cli.command("run")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="PipelineConfig JSON; other flags are ignored when given")
@click.option("--task", default="color_counts", show_default=True)
@click.option("--instances", type=int, default=100, show_default=True)
@click.option("--generator", default="er", show_default=True)
@click.option("--n", "n", type=int, default=None)
@click.option("--p", "p", type=float, default=None)
@click.option("--pattern", default="triangle", show_default=True)
@click.option("--colors", type=int, default=4, show_default=True)
@click.option("--d-local", type=int, default=8, show_default=True)
@click.option("--timing", is_flag=True, help="Add wall_time_s (makes the output non-reproducible)")
@seed_option
@click.pass_context
@command_middleware
def cmd_run(ctx, config_path, task, instances, generator, n, p, pattern, colors, d_local, timing, seed):
    """Write metrics (connectivity adds stream_reports.json; embedding writes embedding.bin + model.bin)"""
    if config_path is not None:
        config = read_pipeline_config(config_path)
    else:
        params = {key: value for key, value in (("n", n), ("p", p)) if value is not None}
        try:
            config = PipelineConfig(
                seed=_seed(ctx, seed),
                task=task,
                instances=instances,
                generator=generator,
                generator_params=params,
                pattern=pattern,
                colors=colors,
                encoder=EncoderSpec(d_local=d_local),
                timing=timing,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid run configuration: {e.error_count()} errors") from e

    if config.task == "embedding":
        result = run_embedding(config)
        write_vector(_out(ctx, "embedding.bin"), result.vector, result.provenance)
        write_layers(_out(ctx, "model.bin"), result.layers)
        return

    result = execute_pipeline(config)
    _write_rows(ctx, "metrics", result.rows, drop_empty=("wall_time_s",))
    if result.stream_reports:
        reports = [{"instance": i, **report.model_dump(mode="json")} for i, report in enumerate(result.stream_reports)]
        write_json(_out(ctx, "stream_reports.json"), reports)


@cli.command("verify")
@click.option("--suite", required=True, help="Suite name, or 'all'")
@seed_option
@click.pass_context
@command_middleware
def cmd_verify(ctx, suite, seed):
    """Run property suites; exit 1 if any property fails"""
    outcome = run_suites(suite, _seed(ctx, seed))
    _write_rows(ctx, "verify_report", outcome.results)
    for name, frame in outcome.frames.items():
        write_frame(_out(ctx, f"{name}.csv"), frame)
    if outcome.failed:
        raise PropertyFailure(outcome.failed, len(outcome.results))
    logger.info(f"✅ all {len(outcome.results)} properties passed")


@cli.command("bench")
@click.option("--sizes", default=",".join(str(n) for n in DEFAULT_SIZES), show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@seed_option
@click.pass_context
@command_middleware
def cmd_bench(ctx, sizes, repeats, seed):
    """Write bench timings (never reproducible byte-for-byte)"""
    try:
        parsed = [int(x) for x in sizes.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigError(f"--sizes must be comma-separated integers, got '{sizes}'") from e
    _write_table(ctx, "bench", bench(parsed, seed=_seed(ctx, seed), repeats=repeats))
