"""Error type shared by every module; the CLI maps ``code`` to exit statuses."""

from __future__ import annotations

from typing import Any


class ScoringError(Exception):
    """A diagnosable failure carrying a stable machine-readable ``code``.

    Codes used across the package:

    ``SELF_COMPARISON``, ``DUPLICATE_PAIR``, ``UNKNOWN_ALTERNATIVE``, ``EMPTY``,
    ``MALFORMED`` (profile ingestion); ``NO_CONVERGENCE``, ``SINGULAR``,
    ``DOMAIN_EXIT`` (numerics); ``NOT_INDIVISIBLE``, ``DISCONNECTED``,
    ``ISOLATED_ALTERNATIVE``, ``EPSILON_OUT_OF_RANGE``, ``DIVIDE_BY_ZERO``,
    ``UNKNOWN_METHOD`` (procedures); ``TOO_LARGE``, ``NOT_A_MACROVERTEX``
    (axioms); ``UNKNOWN_FIXTURE``.
    """

    def __init__(self, code: str, message: str = "", **detail: Any) -> None:
        self.code = code
        self.message = message or code
        self.detail = detail
        super().__init__(f"{code}: {self.message}")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"error": self.code, "message": self.message}
        for key, value in self.detail.items():
            if hasattr(value, "to_dict"):
                value = value.to_dict()
            out[key] = value
        return out
