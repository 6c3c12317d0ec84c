"""One-call library surface (placeholder, filled in after task modules)."""


def init(*args, **kwargs):
    raise NotImplementedError


class TouchProcessor:
    pass
