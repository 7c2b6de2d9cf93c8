"""Command-line entry point.

Subcommands: score, correlate, fit-ensemble, overall, render-prompts,
judge, report. Every run writes a manifest (config hash, seed, input
digests) next to its outputs; identical config + inputs + seed give
byte-identical outputs.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 success with
null cells emitted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .corpus import DIMENSIONS, DataError, ScoreTable, load_dataset
from .engine import (
    ConfigError,
    RunConfig,
    compute_scores,
    config_digest,
    load_run_inputs,
    registry_from_config,
    write_manifest,
)
from .ensemble import (
    HybridModel,
    apply_hybrid,
    fit_hybrid_learned,
    fit_hybrid_simulation,
    fit_random_forest,
    overall_score,
    resolve_overall_preset,
)
from .judge import (
    TEMPLATES,
    HttpEndpoint,
    JudgeConfig,
    judge_batch,
    render_prompt,
    responses_to_columns,
)
from .metaeval import build_report, histogram_export, pairwise_matrix
from .registry import orient_and_normalize
from .structural import ConlluError, PenmanError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_PARTIAL = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the run config JSON")
    parser.add_argument("--mode", choices=["reference-free", "reference-based"])
    parser.add_argument("--dimension", choices=list(DIMENSIONS))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out-dir", dest="out_dir")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "mode": args.mode.replace("-", "_") if args.mode else None,
        "dimension": args.dimension,
        "seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out_dir,
    }
    return RunConfig.from_file(args.config, overrides)


def _human_map(dataset, dimension: str) -> dict[str, float]:
    return {
        inst.instance_id: inst.human_ratings[dimension]
        for inst in dataset.instances
        if dimension in inst.human_ratings
    }


def cmd_score(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    inputs = load_run_inputs(cfg)
    table, warnings = compute_scores(cfg, inputs, registry_from_config(cfg))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = cfg.out_dir / "scores.jsonl"
    table.save(scores_path, extra_header={"config_sha256": config_digest(cfg)})
    write_manifest(cfg, cfg.out_dir, "score", ["scores.jsonl"], {"warnings": warnings})
    print(f"wrote {scores_path} ({len(table)} instances x {len(table.metric_ids)} metrics)")
    has_nulls = any(any(v is None for v in table.column(m)) for m in table.metric_ids)
    return EXIT_PARTIAL if has_nulls else EXIT_OK


def _dimensions_to_report(cfg: RunConfig, dataset, table: ScoreTable) -> list[str]:
    if cfg.dimension:
        return [cfg.dimension]
    present = {meta.dimension for meta in table.meta.values()}
    rated = {
        dim
        for dim in DIMENSIONS
        if any(dim in inst.human_ratings for inst in dataset.instances)
    }
    return [d for d in DIMENSIONS if d in present and d in rated]


def cmd_correlate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    dataset = load_dataset(cfg.dataset)
    scores_path = Path(args.scores) if args.scores else cfg.out_dir / "scores.jsonl"
    table = ScoreTable.load(scores_path)
    dims = _dimensions_to_report(cfg, dataset, table)
    if not dims:
        raise DataError("no dimension has both human ratings and metric columns")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    digest = config_digest(cfg)
    for dim in dims:
        report = build_report(table, dataset, dim, cfg.mode)
        for suffix, body in (
            ("jsonl", json.dumps({"config_sha256": digest}) + "\n" + report.to_jsonl()),
            ("tsv", f"# config_sha256 = {digest}\n" + report.to_delimited()),
            ("txt", f"# config_sha256 = {digest}\n" + report.to_text()),
        ):
            name = f"report_{dim}.{suffix}"
            (cfg.out_dir / name).write_text(body, encoding="utf-8")
            outputs.append(name)
    write_manifest(cfg, cfg.out_dir, "correlate", outputs, {"dimensions": dims})
    print(f"wrote {len(outputs)} report files to {cfg.out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    scores_path = Path(args.scores) if args.scores else cfg.out_dir / "scores.jsonl"
    table = ScoreTable.load(scores_path)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    metrics, matrix = pairwise_matrix(table, cfg.dimension)
    payload = {
        "config_sha256": config_digest(cfg),
        "metric_ids": metrics,
        "pearson": matrix,
    }
    (cfg.out_dir / "pairwise_matrix.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    outputs.append("pairwise_matrix.json")
    hist_lines = [json.dumps({"config_sha256": config_digest(cfg)})]
    hist_lines += [json.dumps(rec, sort_keys=True) for rec in histogram_export(table)]
    (cfg.out_dir / "histograms.jsonl").write_text(
        "\n".join(hist_lines) + "\n", encoding="utf-8"
    )
    outputs.append("histograms.jsonl")
    write_manifest(cfg, cfg.out_dir, "report", outputs)
    print(f"wrote plot-data exports to {cfg.out_dir}")
    return EXIT_OK


def cmd_fit_ensemble(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    dataset = load_dataset(cfg.dataset)
    scores_path = Path(args.scores) if args.scores else cfg.out_dir / "scores.jsonl"
    table = ScoreTable.load(scores_path)
    dimension = cfg.dimension or cfg.ensemble.get("dimension")
    if not dimension:
        raise ConfigError("fit-ensemble needs a dimension")
    registry = registry_from_config(cfg)
    for metric in table.metric_ids:
        if metric not in registry:
            raise ConfigError(f"score table has unregistered metric {metric!r}")
    oriented = orient_and_normalize(table, registry)
    human = _human_map(dataset, dimension)
    if not human:
        raise DataError(f"no human ratings for dimension {dimension!r}")
    grid_step = float(cfg.ensemble.get("grid_step", 0.05))
    split = cfg.ensemble.get("split", "sha256_mod2")
    n_trees = int(cfg.ensemble.get("n_trees", 200))

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    sim = fit_hybrid_simulation(
        oriented, human, dimension, grid_step=grid_step, split=split
    )
    sim_path = cfg.out_dir / f"hybrid_simulation_{dimension}.model"
    sim.save(sim_path, comment=f"config_sha256 = {config_digest(cfg)}")
    outputs.append(sim_path.name)

    forest = fit_random_forest(oriented, human, dimension, n_trees=n_trees, seed=cfg.seed)
    learned = fit_hybrid_learned(forest, dimension)
    learned_path = cfg.out_dir / f"hybrid_learned_{dimension}.model"
    learned.save(learned_path, comment=f"config_sha256 = {config_digest(cfg)}")
    outputs.append(learned_path.name)

    importances_path = cfg.out_dir / f"forest_importances_{dimension}.json"
    importances_path.write_text(
        json.dumps(
            {
                "config_sha256": config_digest(cfg),
                "importances": dict(
                    zip(forest.feature_names, map(float, forest.importances))
                ),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    outputs.append(importances_path.name)

    write_manifest(
        cfg,
        cfg.out_dir,
        "fit_ensemble",
        outputs,
        {
            "dimension": dimension,
            "simulation": {"metrics": sim.metric_ids, "weights": sim.weights},
            "learned": {"metrics": learned.metric_ids, "weights": learned.weights},
        },
    )
    print(f"fitted hybrids for {dimension}: sim={sim.metric_ids} learned={learned.metric_ids}")
    return EXIT_OK


def _apply_models_to_table(
    oriented: ScoreTable, model_paths: dict[str, str], base: Path
) -> None:
    from .corpus import ColumnMeta

    for column_name, rel_path in model_paths.items():
        model = HybridModel.load(base / rel_path)
        values = [
            apply_hybrid(model, oriented.row(iid)) for iid in oriented.instance_ids
        ]
        mode = next(iter(oriented.meta.values())).mode
        oriented.add_column(
            column_name, values, ColumnMeta(model.dimension, "higher_better", mode)
        )


def cmd_overall(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    dataset = load_dataset(cfg.dataset)
    scores_path = Path(args.scores) if args.scores else cfg.out_dir / "scores.jsonl"
    table = ScoreTable.load(scores_path)
    registry = registry_from_config(cfg)
    oriented = orient_and_normalize(table, registry)
    models = cfg.overall.get("models", {})
    if models:
        _apply_models_to_table(oriented, models, Path(args.config).parent)

    preset = args.preset or cfg.overall.get("preset")
    task = cfg.overall.get("task")
    language = cfg.overall.get("language")
    presets_path = cfg.overall.get("presets_path")
    presets = None
    if presets_path:
        raw = json.loads((Path(args.config).parent / presets_path).read_text())
        presets = {
            (entry["task"], entry["language"]): entry["presets"] for entry in raw
        }
    if preset in ("existing", "ours1", "ours2"):
        if not task or not language:
            raise ConfigError("overall presets need task and language")
        triple = resolve_overall_preset(task, language, preset, presets)
        column_id = f"overall_{preset}"
    elif cfg.overall.get("triple"):
        triple = dict(cfg.overall["triple"])
        column_id = cfg.overall.get("column_id", "overall_custom")
        if column_id not in registry:
            from .registry import MetricDescriptor

            registry.register(MetricDescriptor(column_id, "overall", "higher_better"))
    else:
        raise ConfigError("overall needs a preset name or an explicit metric triple")

    for role in ("style", "content", "fluency"):
        if triple[role] not in oriented.columns:
            raise DataError(
                f"overall preset needs column {triple[role]!r} which is not in the score table"
            )
    values = []
    for iid in oriented.instance_ids:
        row = oriented.row(iid)
        components = [row[triple[r]] for r in ("style", "content", "fluency")]
        values.append(
            None if any(c is None for c in components) else overall_score(*components)
        )
    out = ScoreTable(oriented.instance_ids)
    out.add_column(column_id, values, registry.get(column_id).column_meta(cfg.mode))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / f"{column_id}_scores.jsonl"
    out.save(out_path, extra_header={"config_sha256": config_digest(cfg)})
    write_manifest(
        cfg,
        cfg.out_dir,
        f"overall_{column_id}",
        [out_path.name],
        {"preset": preset, "task": task, "language": language, "triple": triple},
    )
    print(f"wrote {out_path} using triple {triple}")
    has_nulls = any(v is None for v in values)
    return EXIT_PARTIAL if has_nulls else EXIT_OK


def _selected_templates(cfg: RunConfig):
    names = cfg.judge.get("templates") or [
        "style_likert",
        "style_binary",
        "content_likert",
        "fluency_likert",
    ]
    unknown = [n for n in names if n not in TEMPLATES]
    if unknown:
        raise ConfigError(f"unknown judge templates: {unknown}")
    return [TEMPLATES[n] for n in names]


def cmd_render_prompts(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    dataset = load_dataset(cfg.dataset)
    templates = _selected_templates(cfg)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for inst in dataset.instances:
        for tmpl in templates:
            name = f"{inst.instance_id}__{tmpl.template_id}.txt"
            (cfg.out_dir / name).write_text(
                render_prompt(tmpl, inst), encoding="utf-8"
            )
            outputs.append(name)
    write_manifest(cfg, cfg.out_dir, "render_prompts", outputs)
    print(f"rendered {len(outputs)} prompts to {cfg.out_dir}")
    return EXIT_OK


def cmd_judge(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    dataset = load_dataset(cfg.dataset)
    templates = _selected_templates(cfg)
    judge_cfg = JudgeConfig(
        cache_path=Path(args.config).parent / cfg.judge.get("cache", "judge_cache.jsonl"),
        max_in_flight=int(cfg.judge.get("max_in_flight", 4)),
        max_retries=int(cfg.judge.get("max_retries", 3)),
        backoff_s=float(cfg.judge.get("backoff_s", 0.5)),
        min_interval_s=float(cfg.judge.get("min_interval_s", 0.0)),
    )
    endpoint = None
    endpoint_cfg = cfg.judge.get("endpoint")
    if endpoint_cfg:
        endpoint = HttpEndpoint(
            base_url=endpoint_cfg["base_url"],
            model_id=endpoint_cfg["model_id"],
            auth_env=endpoint_cfg.get("auth_env"),
            timeout=float(endpoint_cfg.get("timeout", 30.0)),
        )
    model_id = cfg.judge.get("model_id") or (endpoint.model_id if endpoint else None)
    if model_id is None:
        raise ConfigError("judge needs an endpoint block or a model_id for replay")
    model_key = cfg.judge.get("model_key", "judge")
    responses = judge_batch(
        dataset.instances, templates, judge_cfg, endpoint=endpoint, model_id=model_id
    )
    columns = responses_to_columns(responses, model_key)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / "judged_scores.jsonl"
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"config_sha256": config_digest(cfg)}) + "\n")
        for metric_id in sorted(columns):
            for iid in dataset.instance_ids:
                if iid in columns[metric_id]:
                    fh.write(
                        json.dumps(
                            {
                                "instance_id": iid,
                                "metric_id": metric_id,
                                "value": columns[metric_id][iid],
                            }
                        )
                        + "\n"
                    )
    failures = sum(resp.parsed is None for resp in responses)
    write_manifest(
        cfg,
        cfg.out_dir,
        "judge",
        [out_path.name],
        {"model_id": model_id, "model_key": model_key, "parse_failures": failures},
    )
    print(f"judged {len(responses)} prompts ({failures} null); wrote {out_path}")
    return EXIT_PARTIAL if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsteval",
        description="Style-transfer evaluation engine and meta-evaluation harness",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "score": (cmd_score, "compute metric columns over a dataset"),
        "correlate": (cmd_correlate, "correlate metric columns with human ratings"),
        "fit-ensemble": (cmd_fit_ensemble, "fit hybrid ensembles for a dimension"),
        "overall": (cmd_overall, "compute geometric-mean overall scores"),
        "render-prompts": (cmd_render_prompts, "write judge prompts to files"),
        "judge": (cmd_judge, "run or replay LLM judging"),
        "report": (cmd_report, "export pairwise-correlation and histogram data"),
    }
    for name, (fn, help_text) in commands.items():
        cmd = sub.add_parser(name, help=help_text)
        _add_common(cmd)
        if name in ("correlate", "fit-ensemble", "overall", "report"):
            cmd.add_argument("--scores", help="path to a scores.jsonl file")
        if name == "overall":
            cmd.add_argument("--preset", choices=["existing", "ours1", "ours2"])
        cmd.set_defaults(func=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ConlluError, PenmanError, FileNotFoundError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
