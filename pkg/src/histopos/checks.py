from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class Check:
    """Outcome of an exhaustive verification; falsy on failure.

    ``witness`` holds a counterexample when ``ok`` is False.
    """

    ok: bool
    witness: Any = None
    message: str = ""

    def __bool__(self):
        return self.ok


PASS = Check(True)


def fail(witness, message=""):
    return Check(False, witness, message)
