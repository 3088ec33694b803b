"""Private working directories for solver runs."""

import logging
import shutil
import tempfile

from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

logger = logging.getLogger(__name__)


@contextmanager
def solver_workspace(root: Optional[Path] = None, keep: bool = False) -> Iterator[Path]:
    """Provide a fresh directory for one solver run.

    :param root: Parent directory; the system temporary directory when None.
    :param keep: Leave the directory behind for inspection.
    """
    if root is not None:
        root.mkdir(parents=True, exist_ok=True)
    workspace = Path(tempfile.mkdtemp(prefix="oosplan-", dir=root))
    logger.debug("Solver workspace %s", workspace)
    try:
        yield workspace
    except Exception:
        logger.debug("Solver run in %s failed", workspace)
        raise
    finally:
        if not keep:
            shutil.rmtree(workspace, ignore_errors=True)
