"""
ABOUTME: JSON run manifests stored alongside forecast outputs
ABOUTME: Records argv, input checksum and resolved config so a run can be replayed
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .exceptions import ConfigError, DataError

MANIFEST_NAME = "manifest.json"


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """
    Everything needed to reproduce one CLI run.

    ``argv`` holds the arguments without ``--output-dir``; ``outputs`` are
    file names relative to the output directory. No timestamps are stored so
    identical runs write identical manifests.
    """

    subcommand: str
    argv: list[str]
    version: str
    config: dict = field(default_factory=dict)
    input_path: str | None = None
    input_sha256: str | None = None
    outputs: list[str] = field(default_factory=list)

    @classmethod
    def for_input(cls, subcommand: str, argv: list[str], version: str, input_path: Path | None):
        manifest = cls(subcommand=subcommand, argv=list(argv), version=version)
        if input_path is not None:
            manifest.input_path = str(input_path)
            manifest.input_sha256 = file_digest(input_path)
        return manifest

    def save(self, output_dir: Path) -> Path:
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / MANIFEST_NAME
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write("\n")
        logging.debug(f"Wrote manifest to {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        """
        Read a manifest file.

        Raises:
            ConfigError: If the file is missing or malformed.
        """
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
            return cls(**data)
        except FileNotFoundError as e:
            raise ConfigError(f"Manifest not found: {path}") from e
        except (json.JSONDecodeError, TypeError) as e:
            raise ConfigError(f"Invalid manifest {path}: {e}") from e

    def verify_input(self) -> None:
        """
        Check that the recorded input file still has the recorded checksum.

        Raises:
            DataError: If the input is missing or has changed.
        """
        if self.input_path is None:
            return
        path = Path(self.input_path)
        if not path.exists():
            raise DataError(f"Manifest input {path} no longer exists")
        actual = file_digest(path)
        if actual != self.input_sha256:
            raise DataError(
                f"Manifest input {path} changed (sha256 {actual[:12]} != {self.input_sha256[:12]})"
            )
