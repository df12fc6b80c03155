"""Cooperative cancellation for long exact computations and searches."""
import threading


class Cancelled(Exception):
    pass


class CancelToken:
    def __init__(self):
        self._event = threading.Event()

    def cancel(self):
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()

    def check(self):
        if self._event.is_set():
            raise Cancelled()


class _Never(CancelToken):
    def cancel(self):
        raise RuntimeError("the shared NEVER token cannot be cancelled")


NEVER = _Never()
