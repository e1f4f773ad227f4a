import os


def _available_cpus() -> int:
    if hasattr(os, "sched_getaffinity"):
        return len(os.sched_getaffinity(0))
    return os.cpu_count() or 1


threads = int(os.getenv("GFEXTRACT_THREADS", min(_available_cpus(), 16)))
term_ceiling = int(os.getenv("GFEXTRACT_TERM_CEILING", 2**26))
executor = os.getenv("GFEXTRACT_EXECUTOR", "process")
log_level = os.getenv("GFEXTRACT_LOG_LEVEL", "WARNING")

if os.getenv("PRODUCTION"):
    db = "/var/lib/gfextract/bench.sqlite"
else:
    db = "data/bench.sqlite"
