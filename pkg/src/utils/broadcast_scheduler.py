import logging
from datetime import datetime
from typing import Callable, List, Optional

from apscheduler.schedulers.blocking import BlockingScheduler

from src.utils.lanet_graph import LANetGraph
from src.utils.recommender import BroadcastDigest, broadcast_digest

logger = logging.getLogger(__name__)


class BroadcastScheduler:
    """Re-emits the digest of a fixed area every `interval` seconds, `count` times."""

    def __init__(self, graph: LANetGraph, center, radius: float, k: int, sink: Callable[[BroadcastDigest], None], count: Optional[int] = None):
        self.graph = graph
        self.center = center
        self.radius = radius
        self.k = k
        self.sink = sink
        self.count = count
        self.emitted: List[int] = []
        self.scheduler = BlockingScheduler()

    def emit(self):
        digest = broadcast_digest(self.graph, self.center, self.radius, self.k)
        self.sink(digest)
        self.emitted.append(len(digest.entries))
        logger.info(f"Broadcast #{len(self.emitted)}: {len(digest.entries)} locations")
        if self.count is not None and len(self.emitted) >= self.count and self.scheduler.running:
            self.scheduler.shutdown(wait=False)

    def run(self, interval: float):
        self.scheduler.remove_all_jobs()
        self.scheduler.add_job(
            self.emit,
            'interval',
            seconds=interval,
            next_run_time=datetime.now(),
            max_instances=1,
            name="broadcast_digest",
        )
        logger.info(f"Broadcasting every {interval}s" + (f", {self.count} times" if self.count else ""))
        try:
            self.scheduler.start()
        except (KeyboardInterrupt, SystemExit):
            logger.info("Broadcast stopped")
