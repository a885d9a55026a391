"""
Linha de comando do motor 2-opt.

Uso:
  python -m app gen --n 20 --count 1000
  python -m app train --n 10 --epochs 30 --out runs/tsp10
  python -m app eval --ckpt runs/tsp10/checkpoints/last.o2rl --n 10 --count 256 --steps 200
  python -m app bench --n 20 --count 1000 --methods farthest,held-karp
  python -m app bench --tsplib tests/fixtures/eil51.tsp --methods farthest,bi
  python -m app oracle --instances runs/instances_n10_s1234.npz
  python -m app inspect-ckpt runs/tsp10/checkpoints/last.o2rl
"""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import dotenv_values

from app.config.settings import settings
from app.schemas.config import BenchmarkConfig, NetConfig, TrainConfig
from app.schemas.report import InstanceSetDescriptor, format_number
from app.services import oracle_service
from app.services.benchmark_service import run_benchmark, run_tsplib_benchmark
from app.services.checkpoint_service import describe_checkpoint, load_checkpoint
from app.services.evaluation_service import evaluate_policy, evaluate_random_policy, evaluate_trials
from app.services.instance_service import generate_instances, load_instances, save_instances
from app.services.training_service import train
from app.services.tsplib_service import load_tsplib
from app.utils.errors import TourEngineError

logger = logging.getLogger("app.cli")

NET_FIELDS = set(NetConfig.model_fields)


def _add_instance_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instances", help="arquivo .npz gerado por 'gen'")
    parser.add_argument("--n", dest="n", type=int, help="tamanho das instâncias geradas")
    parser.add_argument("--count", type=int, help="quantidade de instâncias geradas")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app", description="Motor de melhoria 2-opt por RL profundo")
    parser.add_argument("--seed", type=int, help=f"seed global (padrão {settings.SEED})")
    parser.add_argument("--out", help=f"diretório de saída (padrão {settings.OUT_DIR})")
    parser.add_argument("--threads", type=int, help="threads para paralelismo por instância")
    parser.add_argument("--config", help="arquivo chave=valor; flags têm precedência")
    parser.add_argument("--log-level", dest="log_level", help="nível de log (DEBUG, INFO, ...)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="gera instâncias uniformes em .npz")
    gen.add_argument("--n", dest="n", type=int, required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--name", help="nome do arquivo (sem extensão)")

    tr = sub.add_parser("train", help="treina uma política")
    tr.add_argument("--preset", type=int, choices=[20, 50, 100], help="hiperparâmetros publicados")
    tr.add_argument("--n", dest="n_nodes", type=int)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--batches", dest="batches_per_epoch", type=int)
    tr.add_argument("--batch-size", dest="batch_size", type=int)
    tr.add_argument("--total-steps", dest="total_steps", type=int)
    tr.add_argument("--schedule", dest="episode_schedule", help='ex.: "1:4,10:8"')
    tr.add_argument("--gamma", type=float)
    tr.add_argument("--lr", dest="learning_rate", type=float)
    tr.add_argument("--beta-h", dest="beta_h", type=float)
    tr.add_argument("--beta-v", dest="beta_v", type=float)
    tr.add_argument("--weight-decay", dest="weight_decay", type=float)
    tr.add_argument("--val-size", dest="val_size", type=int)
    tr.add_argument("--val-steps", dest="val_steps", type=int)
    tr.add_argument("--d", dest="d", type=int)
    tr.add_argument("--layers", dest="n_layers", type=int)
    tr.add_argument("--clip", type=float)
    tr.add_argument("--no-gcn", dest="use_gcn", action="store_const", const=False)
    tr.add_argument("--no-lstm", dest="use_lstm", action="store_const", const=False)
    tr.add_argument("--unidirectional", dest="use_bidirectional", action="store_const", const=False)
    tr.add_argument("--no-best", dest="use_best_solution", action="store_const", const=False)
    tr.add_argument("--share-encoders", dest="share_encoders", action="store_const", const=True)
    tr.add_argument("--record-wallclock", dest="record_wallclock", action="store_const", const=True)

    ev = sub.add_parser("eval", help="avalia um checkpoint")
    ev.add_argument("--ckpt", required=True)
    _add_instance_source(ev)
    ev.add_argument("--tsplib", nargs="+", help="arquivos .tsp")
    ev.add_argument("--steps", type=int, default=200)
    ev.add_argument("--mode", choices=["sample", "greedy"], default="sample")
    ev.add_argument("--trials", type=int, default=1)
    ev.add_argument("--report-steps", dest="report_steps", help='orçamentos extras, ex.: "500,1000"')
    ev.add_argument("--random-baseline", dest="random_baseline", action="store_true", help="compara com a política uniforme")

    be = sub.add_parser("bench", help="compara métodos num conjunto compartilhado")
    _add_instance_source(be)
    be.add_argument("--tsplib", nargs="+", help="arquivos .tsp")
    be.add_argument("--methods", help="lista separada por vírgulas")
    be.add_argument("--steps", type=int)
    be.add_argument("--record-wallclock", dest="record_wallclock", action="store_const", const=True)

    orc = sub.add_parser("oracle", help="ótimos exatos (Held-Karp ou força bruta)")
    _add_instance_source(orc)
    orc.add_argument("--solver", choices=["held-karp", "brute-force"], default="held-karp")

    ins = sub.add_parser("inspect-ckpt", help="mostra o conteúdo de um checkpoint")
    ins.add_argument("path")
    return parser


def _merge(file_values: Dict[str, Any], args: argparse.Namespace, keys) -> Dict[str, Any]:
    merged = {key: value for key, value in file_values.items() if key in keys}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _instances(args, file_values: Dict[str, Any], seed: int):
    if getattr(args, "instances", None):
        return load_instances(args.instances)
    n = args.n or int(file_values.get("n", 20))
    count = args.count or int(file_values.get("count", 100))
    return generate_instances(n, count, seed), InstanceSetDescriptor(n=n, count=count, seed=seed, name="uniform")


def cmd_gen(args, file_values, seed: int, out: Path) -> int:
    instances = generate_instances(args.n, args.count, seed)
    name = args.name or f"instances_n{args.n}_s{seed}"
    path = save_instances(out / f"{name}.npz", instances, seed)
    print(f"✅ {len(instances)} instâncias em {path}")
    return 0


def cmd_train(args, file_values, seed: int, out: Path, threads: int) -> int:
    keys = set(TrainConfig.model_fields) - {"net"}
    values = _merge(file_values, args, keys)
    net_values = _merge(file_values, args, NET_FIELDS)
    values["seed"] = seed
    if args.preset:
        base = TrainConfig.published_preset(args.preset)
        net = NetConfig(**{**base.net.model_dump(), **net_values})
        values = {**base.model_dump(exclude={"net"}), **values, "net": net}
    elif net_values:
        values["net"] = NetConfig(**{**NetConfig(d=32, n_layers=2).model_dump(), **net_values})
    config = TrainConfig(**values)
    result = train(config, out, threads=threads)
    print(f"✅ {result.updates} atualizações; métricas em {result.metrics_path}")
    if result.checkpoints:
        print(f"💾 último checkpoint: {result.checkpoints[-1]}")
    return 0


def cmd_eval(args, file_values, seed: int, out: Path, threads: int) -> int:
    params, config = load_checkpoint(args.ckpt)
    if args.tsplib:
        for path in args.tsplib:
            parsed = load_tsplib(path)
            evaluation = evaluate_policy(params, [parsed.instance], args.steps, args.mode, seed=seed)
            cost = parsed.cost(evaluation.best_tours[0].order)
            gap = parsed.gap(evaluation.best_tours[0].order)
            print(f"📊 {parsed.name}: custo {cost}, ótimo {parsed.optimum}, gap {format_number(gap)}%")
        return 0

    instances, descriptor = _instances(args, file_values, seed)
    budgets = [args.steps]
    if args.report_steps:
        budgets += [int(b) for b in args.report_steps.split(",") if b.strip()]
    longest = max(budgets)
    evaluation = evaluate_policy(params, instances, longest, args.mode, seed=seed)

    optima: Optional[List[float]] = None
    if descriptor.n <= settings.ORACLE_MAX_NODES:
        optima = oracle_service.solve_many(instances, threads=threads)

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "eval.csv", "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["steps", "mean_cost", "median_cost", "mean_gap_pct"])
        for budget in sorted(set(budgets)):
            costs = evaluation.costs_at(budget)
            gap = oracle_service.mean_gap(costs, optima) if optima is not None else None
            writer.writerow([budget, format_number(costs.mean()), format_number(np.median(costs)), format_number(gap)])
            print(f"📊 {budget} passos: custo médio {costs.mean():.4f}, gap {format_number(gap)}%")

    if args.random_baseline:
        uniform = evaluate_random_policy(instances, args.steps, seed=seed)
        gap = oracle_service.mean_gap(uniform.best_costs, optima) if optima is not None else None
        print(f"📊 política uniforme, {args.steps} passos: custo médio {uniform.mean_cost:.4f}, gap {format_number(gap)}%")

    if args.trials > 1:
        summary = evaluate_trials(params, instances, args.steps, args.trials, seed, args.mode)
        print(f"📊 {args.trials} repetições: {summary['mean']:.4f} ± {summary['std']:.4f}")
    return 0


def cmd_bench(args, file_values, seed: int, out: Path, threads: int) -> int:
    values = _merge(file_values, args, {"steps", "record_wallclock"})
    methods = args.methods or file_values.get("methods")
    if methods:
        values["methods"] = [m.strip() for m in methods.split(",") if m.strip()]
    values.update(seed=seed, threads=threads)

    out.mkdir(parents=True, exist_ok=True)
    if args.tsplib:
        config = BenchmarkConfig(**values)
        for report in run_tsplib_benchmark(args.tsplib, config):
            path = out / f"bench_{report.instances.name}.csv"
            path.write_text(report.to_csv())
            print(report.to_table())
        return 0

    instances, descriptor = _instances(args, file_values, seed)
    config = BenchmarkConfig(n=descriptor.n, count=descriptor.count, **values)
    report = run_benchmark(config, instances, descriptor)
    (out / "bench.csv").write_text(report.to_csv())
    print(report.to_table())
    return 0


def cmd_oracle(args, file_values, seed: int, out: Path, threads: int) -> int:
    instances, descriptor = _instances(args, file_values, seed)
    tours = None
    if args.solver == "held-karp":
        lengths = oracle_service.solve_many(instances, threads=threads)
    else:
        results = [oracle_service.brute_force(inst) for inst in instances]
        lengths = [length for _, length in results]
        tours = [tour for tour, _ in results]
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "oracle.csv", "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["instance", "optimal_cost"] + (["tour"] if tours else []))
        for k, length in enumerate(lengths):
            row = [k, format_number(length)]
            if tours:
                row.append(" ".join(str(v) for v in tours[k].order))
            writer.writerow(row)
    print(f"📊 {args.solver}: {len(lengths)} instâncias n={descriptor.n}, ótimo médio {np.mean(lengths):.4f}")
    return 0


def cmd_inspect(args) -> int:
    print(json.dumps(describe_checkpoint(args.path), indent=2, ensure_ascii=False))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    file_values: Dict[str, Any] = {}
    if args.config:
        if not Path(args.config).exists():
            parser.error(f"arquivo de configuração não encontrado: {args.config}")
        file_values = {k.lower(): v for k, v in dotenv_values(args.config).items() if v is not None}

    level = (args.log_level or file_values.get("log_level") or settings.LOG_LEVEL).upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    seed = args.seed if args.seed is not None else int(file_values.get("seed", settings.SEED))
    out = Path(args.out or file_values.get("out") or settings.OUT_DIR)
    threads = args.threads or int(file_values.get("threads", settings.THREADS))

    try:
        if args.command == "gen":
            return cmd_gen(args, file_values, seed, out)
        if args.command == "train":
            return cmd_train(args, file_values, seed, out, threads)
        if args.command == "eval":
            return cmd_eval(args, file_values, seed, out, threads)
        if args.command == "bench":
            return cmd_bench(args, file_values, seed, out, threads)
        if args.command == "oracle":
            return cmd_oracle(args, file_values, seed, out, threads)
        return cmd_inspect(args)
    except (TourEngineError, ValueError) as exc:
        logger.error(f"❌ {exc}")
        print(f"❌ {exc}", file=sys.stderr)
        return 1
