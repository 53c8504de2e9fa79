"""
Replicate execution.

Replicate r always draws from the stream keyed (master_seed, r, ...), and
results come back in replicate order, so every aggregate is identical for
any worker count.
"""

import logging
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List

from tqdm import tqdm

from src.simharness.experiments import ExperimentConfig

logger = logging.getLogger(__name__)

ReplicateFn = Callable[[ExperimentConfig, int], Any]

_WORKER_CONFIG: ExperimentConfig | None = None
_WORKER_FN: ReplicateFn | None = None


def _pool_worker_init(config: ExperimentConfig, replicate_fn: ReplicateFn) -> None:
    """Initializer for ProcessPool workers: the config is shipped once per worker."""
    global _WORKER_CONFIG, _WORKER_FN
    _WORKER_CONFIG = config
    _WORKER_FN = replicate_fn


def _pool_run_one(replicate: int) -> Any:
    if _WORKER_FN is None or _WORKER_CONFIG is None:
        raise RuntimeError("Pool worker is not initialized. Use initializer=_pool_worker_init.")
    return _WORKER_FN(_WORKER_CONFIG, replicate)


def run_replicates(
    config: ExperimentConfig,
    replicate_fn: ReplicateFn,
    workers: int = 1,
    mp_start: str = "spawn",
    progress: bool = False,
) -> List[Any]:
    """Run replicate_fn(config, r) for r = 0..replicates-1; results in replicate order."""
    indices = range(config.replicates)
    desc = f"{config.name} [{config.functional}]"
    if workers <= 1 or config.replicates == 1:
        return [replicate_fn(config, r) for r in tqdm(indices, desc=desc, disable=not progress)]

    chunksize = max(1, config.replicates // (workers * 8))
    logger.info("%s: %d replicates on %d workers (chunksize %d)", config.name, config.replicates, workers, chunksize)
    ctx = mp.get_context(mp_start)
    with ProcessPoolExecutor(
        max_workers=workers,
        mp_context=ctx,
        initializer=_pool_worker_init,
        initargs=(config, replicate_fn),
    ) as pool:
        results = list(
            tqdm(
                pool.map(_pool_run_one, indices, chunksize=chunksize),
                total=config.replicates,
                desc=desc,
                disable=not progress,
            )
        )
    return results
