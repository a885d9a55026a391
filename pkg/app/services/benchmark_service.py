"""
Benchmark de métodos (construtivos, busca local, políticas, oráculo) sobre
um conjunto compartilhado de instâncias e tours iniciais.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config.settings import settings
from app.models.tsp import Instance, Tour
from app.schemas.config import (
    CONSTRUCTION_METHODS,
    IMPROVEMENT_METHODS,
    ORACLE_METHOD,
    POLICY_PREFIX,
    BenchmarkConfig,
    LocalSearchConfig,
    SearchRule,
)
from app.schemas.report import BenchmarkReport, BenchmarkRow, InstanceSetDescriptor
from app.services.checkpoint_service import load_checkpoint
from app.services.evaluation_service import evaluate_policy
from app.services.heuristics_service import construct, local_search_2opt
from app.services.instance_service import generate_instances, initial_tours, tours_digest
from app.services.oracle_service import held_karp, mean_gap
from app.services.tsplib_service import TsplibInstance, load_tsplib
from app.utils.errors import InstanceTooLargeError, OracleInconsistencyError
from app.utils.reference import reference_optimum

logger = logging.getLogger(__name__)


@dataclass
class MethodOutcome:
    tours: Optional[List[Tour]]
    steps: Optional[int] = None
    note: str = ""


def _parallel_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _local_search_config(method: str, steps: int, seed: int) -> LocalSearchConfig:
    rule = SearchRule.FIRST_IMPROVEMENT if method.startswith("fi") else SearchRule.BEST_IMPROVEMENT
    return LocalSearchConfig(rule=rule, restarts=method.endswith("+restarts"), max_steps=steps, rng_seed=seed)


class BenchmarkRunner:
    """Executa cada método e monta as linhas do relatório."""

    def __init__(self, config: BenchmarkConfig):
        self.config = config

    def _run_method(self, method: str, instances: List[Instance], starts: List[Tour]) -> MethodOutcome:
        config = self.config

        if method in CONSTRUCTION_METHODS:
            seeds = range(config.seed, config.seed + len(instances))
            tours = _parallel_map(lambda pair: construct(pair[0], method, pair[1]), list(zip(instances, seeds)),
                                  config.threads)
            return MethodOutcome(tours=tours)

        if method in IMPROVEMENT_METHODS:
            logger.debug(f"Tours iniciais de {method}: {tours_digest(starts)}")

            def improve(index: int) -> Tuple[Tour, int]:
                search = _local_search_config(method, config.steps, config.seed + index)
                best, used, _ = local_search_2opt(instances[index], starts[index], search)
                return best, used

            results = _parallel_map(improve, range(len(instances)), config.threads)
            used = [steps for _, steps in results]
            return MethodOutcome(tours=[tour for tour, _ in results], steps=int(round(np.mean(used))))

        if method.startswith(POLICY_PREFIX):
            logger.debug(f"Tours iniciais de {method}: {tours_digest(starts)}")
            params, _ = load_checkpoint(method[len(POLICY_PREFIX):])
            evaluation = evaluate_policy(
                params, instances, config.steps, "sample", seed=config.seed,
                starts=starts, batch_size=config.policy_batch_size,
            )
            return MethodOutcome(tours=evaluation.best_tours, steps=config.steps)

        if method == ORACLE_METHOD:
            try:
                results = _parallel_map(held_karp, instances, config.threads)
            except InstanceTooLargeError as exc:
                logger.warning(f"⚠️ {method} recusado: {exc}")
                return MethodOutcome(tours=None, note=f"recusado: {exc}")
            return MethodOutcome(tours=[tour for tour, _ in results])

        raise ValueError(f"método desconhecido: {method}")

    def run(
        self,
        instances: List[Instance],
        descriptor: InstanceSetDescriptor,
        cost_fn: Callable[[Tour, int], float],
        optima: Optional[List[float]] = None,
        reference_cost: Optional[float] = None,
    ) -> BenchmarkReport:
        """
        ``cost_fn(tour, índice)`` define o custo reportado; ``optima`` fixa o denominador do gap.
        Sem ótimos por instância, ``reference_cost`` (custo ótimo médio publicado) dá o gap das médias.
        """
        config = self.config
        starts = initial_tours(instances, config.start_seed)
        outcomes: Dict[str, MethodOutcome] = {}
        timings: Dict[str, float] = {}

        # o oráculo primeiro, para que os gaps estejam disponíveis
        ordered = sorted(config.methods, key=lambda m: m != ORACLE_METHOD)
        for method in ordered:
            started = time.perf_counter()
            outcomes[method] = self._run_method(method, instances, starts)
            timings[method] = time.perf_counter() - started if config.record_wallclock else 0.0
            logger.info(f"✅ {method} concluído")

        oracle = outcomes.get(ORACLE_METHOD)
        if optima is None and oracle is not None and oracle.tours is not None:
            optima = [cost_fn(tour, k) for k, tour in enumerate(oracle.tours)]

        rows = []
        for method in config.methods:
            outcome = outcomes[method]
            if outcome.tours is None:
                rows.append(BenchmarkRow(method=method, wallclock_s=timings[method], note=outcome.note))
                continue
            costs = np.array([cost_fn(tour, k) for k, tour in enumerate(outcome.tours)])
            gap = None
            note = outcome.note
            if optima is not None:
                try:
                    gap = mean_gap(costs.tolist(), optima)
                except OracleInconsistencyError:
                    logger.error(f"❌ {method}: custo abaixo do ótimo informado")
                    raise
            elif reference_cost is not None:
                gap = max(0.0, 100.0 * (float(costs.mean()) - reference_cost) / reference_cost)
                note = note or "gap vs custo ótimo médio publicado"
            rows.append(BenchmarkRow(
                method=method,
                mean_cost=float(costs.mean()),
                median_cost=float(np.median(costs)),
                mean_gap_pct=gap,
                steps=outcome.steps,
                wallclock_s=timings[method],
                note=note,
            ))
        return BenchmarkReport(instances=descriptor, rows=rows)


def run_benchmark(config: BenchmarkConfig, instances: Optional[List[Instance]] = None,
                  descriptor: Optional[InstanceSetDescriptor] = None) -> BenchmarkReport:
    """Instâncias uniformes geradas por seed (ou fornecidas) e custo euclidiano real."""
    if instances is None:
        instances = generate_instances(config.n, config.count, config.seed)
        descriptor = InstanceSetDescriptor(n=config.n, count=config.count, seed=config.seed, name="uniform")
    elif descriptor is None:
        descriptor = InstanceSetDescriptor(n=instances[0].n, count=len(instances), seed=config.seed)
    logger.info("=" * 60)
    logger.info(f"🚀 Benchmark n={descriptor.n} instâncias={descriptor.count} métodos={','.join(config.methods)}")
    logger.info("=" * 60)
    reference = None
    if descriptor.n > settings.ORACLE_MAX_NODES:
        if ORACLE_METHOD in config.methods:
            logger.warning(f"⚠️ n={descriptor.n} acima do limite do oráculo ({settings.ORACLE_MAX_NODES})")
        if descriptor.name == "uniform":
            reference = reference_optimum(descriptor.n)
    return BenchmarkRunner(config).run(instances, descriptor, lambda tour, _: tour.length, reference_cost=reference)


def run_tsplib_benchmark(paths: Sequence[Union[str, Path]], config: BenchmarkConfig) -> List[BenchmarkReport]:
    """Um relatório por arquivo; custos TSPLIB arredondados e gap contra o ótimo conhecido."""
    reports = []
    for path in paths:
        parsed: TsplibInstance = load_tsplib(path)
        descriptor = InstanceSetDescriptor(n=parsed.dimension, count=1, seed=config.seed, name=parsed.name)
        optima = [float(parsed.optimum)] if parsed.optimum is not None else None
        report = BenchmarkRunner(config).run(
            [parsed.instance], descriptor, lambda tour, _: float(parsed.cost(tour.order)), optima
        )
        reports.append(report)
    return reports
