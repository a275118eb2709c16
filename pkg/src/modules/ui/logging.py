"""Root logging setup through rich."""

import logging

from rich.console import Console
from rich.logging import RichHandler

_FORMAT = "%(name)s: %(message)s"


def setup_logging(level: str = "INFO", console: Console | None = None) -> None:
    """Install one RichHandler on the root logger; repeated calls only change the level."""
    root = logging.getLogger()
    root.setLevel(level.upper())
    if any(isinstance(handler, RichHandler) for handler in root.handlers):
        return
    handler = RichHandler(console=console or Console(stderr=True), show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter(_FORMAT))
    root.addHandler(handler)
