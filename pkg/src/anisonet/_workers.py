import os

from .errors import InvalidArgumentError

WORKERS_ENV = "ANISONET_WORKERS"


def resolve_workers(workers=None):
    """Worker count: explicit value, else ``$ANISONET_WORKERS``, else all cores."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise InvalidArgumentError(f"{WORKERS_ENV}={env!r} is not an integer") from None
        else:
            workers = os.cpu_count() or 1
    if int(workers) != workers or workers < 1:
        raise InvalidArgumentError(f"worker count must be a positive integer, got {workers!r}")
    return int(workers)
