"""
Run manifests: what a command was asked to do and which bytes it read and
wrote. A manifest holds no timestamps, so two identical runs write identical
manifests.
"""
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, Optional

from seroclass.utils.exceptions import InvalidConfigException, MissingInputException, ReplayMismatchException

_logger = logging.getLogger(__name__)

_CHUNK_SIZE = 8 * 1024 * 1024


def file_digest(path: str) -> str:
    if not os.path.exists(path):
        raise MissingInputException(f"Cannot digest '{path}': file does not exist")
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while True:
            chunk = f.read(_CHUNK_SIZE)
            if not chunk:
                break
            h.update(chunk)
    return h.hexdigest()


def digests(paths: Iterable[str]) -> Dict[str, str]:
    return {path: file_digest(path) for path in sorted(set(paths))}


@dataclass(frozen=True)
class RunManifest:
    """
    Parameters
    ----------
    command:
        Subcommand name, e.g. ``fit`` or ``simulate``.
    config:
        Fully resolved configuration the command ran with.
    seed:
        Root seed of every random stream of the run, if the command draws any.
    inputs:
        SHA-256 digest of every file read, keyed by path.
    outputs:
        SHA-256 digest of every file written, keyed by path.
    version:
        Version of the package that produced the run.
    """
    command: str
    config: Dict[str, Any]
    seed: Optional[int]
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    version: str = "unknown"

    def asdict(self) -> Dict[str, Any]:
        return asdict(self)

    def verify_inputs(self) -> None:
        _verify(self.inputs, "input")

    def verify_outputs(self) -> None:
        _verify(self.outputs, "output")


def _verify(recorded: Dict[str, str], what: str) -> None:
    """Raises if any recorded file no longer has its recorded digest."""
    mismatched = [
        path for path, digest in sorted(recorded.items())
        if not os.path.exists(path) or file_digest(path) != digest
    ]
    if mismatched:
        raise ReplayMismatchException(
            f"{len(mismatched)} {what}(s) differ from the manifest: {', '.join(mismatched)}", mismatched
        )


def write_manifest(manifest: RunManifest, path: str) -> None:
    with open(path, "w") as f:
        json.dump(manifest.asdict(), f, indent=2, sort_keys=True)
        f.write("\n")
    _logger.info("Wrote run manifest to %s", path)


def read_manifest(path: str) -> RunManifest:
    if not os.path.exists(path):
        raise MissingInputException(f"Manifest '{path}' does not exist")
    with open(path) as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidConfigException(f"Manifest '{path}' is not valid JSON: {e}") from e
    try:
        return RunManifest(**document)
    except TypeError as e:
        raise InvalidConfigException(f"Malformed manifest '{path}': {e}") from e


def default_manifest_path(output: str) -> str:
    return f"{os.path.splitext(output)[0]}.manifest.json"
