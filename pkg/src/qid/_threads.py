import os


def workers():
    """Worker cap from ``QID_THREADS`` (default 1; results never depend on it)."""
    try:
        n = int(os.environ.get("QID_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)
