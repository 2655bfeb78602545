import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List

from tqdm.asyncio import tqdm_asyncio


class PathPool:
    """Worker pool for independent W-path cells.

    Results always come back in submission order, so the number of workers
    never changes what a pipeline computes.
    """

    def __init__(self, threads: int = 1, progress: bool = False):
        if threads < 1:
            raise ValueError(f"threads must be at least 1, got {threads}")
        self.threads = threads
        self.progress = progress
        self.executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix="mfsim")

    async def gather(self, fn: Callable[[Any], Any], items: Iterable[Any],
                     desc: str = "paths") -> List[Any]:
        """Run ``fn`` on every item in the pool; ordered results."""
        loop = asyncio.get_running_loop()
        futures = [loop.run_in_executor(self.executor, fn, item) for item in items]
        return list(await tqdm_asyncio.gather(*futures, desc=desc, leave=False,
                                              disable=not self.progress))

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """Blocking ordered map; must not be called from a pool worker."""
        return list(self.executor.map(fn, items))

    async def call(self, fn: Callable[[], Any]) -> Any:
        """Run a blocking driver (that may itself use ``map``) off the event loop."""
        return await asyncio.get_running_loop().run_in_executor(None, fn)

    def shutdown(self) -> None:
        self.executor.shutdown(wait=True)

    def __enter__(self) -> "PathPool":
        return self

    def __exit__(self, *exc) -> None:
        self.shutdown()
