"""
ABOUTME: Plugin base class for synthetic signal generators
ABOUTME: Handles generator discovery, loading, and lookup by name
"""

import argparse
import importlib
import logging
from abc import ABC, abstractmethod
from pathlib import Path

from rich.console import Console

from ..timeseries import SnapshotMatrix


class SignalGenerator(ABC):
    """Abstract base class for signal generator plugins."""

    def __init__(self, console: Console):
        """
        Initialize the generator with a console instance.

        The generator name is derived from the class name by removing
        'generator' and converting it to lowercase.
        """
        self.console = console
        self.name = self.__class__.__name__.lower().replace("generator", "")

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line help text for the ``generate`` subcommand."""
        pass

    @abstractmethod
    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Register generator-specific command line arguments."""
        pass

    @abstractmethod
    def generate(self, args: argparse.Namespace) -> SnapshotMatrix:
        """
        Produce a signal from parsed command line arguments.

        Raises:
            ConfigError: If the arguments describe an invalid signal.
        """
        pass


class GeneratorManager:
    """Manages loading and access to signal generator plugins."""

    def __init__(self, console: Console):
        self.console = console
        self._generators: dict[str, type[SignalGenerator]] = {}
        self._load_generators()

    def _load_generators(self) -> None:
        """
        Register SignalGenerator subclasses found in this package.

        Modules starting with an underscore and ``base.py`` are skipped; a
        generator is registered under its module name.
        """
        package_dir = Path(__file__).parent
        package = __name__.rsplit(".", 1)[0]

        for module_file in sorted(package_dir.glob("*.py")):
            if module_file.name.startswith("_") or module_file.name == "base.py":
                continue
            module_name = module_file.stem
            try:
                module = importlib.import_module(f"{package}.{module_name}")
            except ImportError as e:
                logging.warning(f"Failed to load generator {module_name}: {e}")
                continue

            for attr in vars(module).values():
                if (
                    isinstance(attr, type)
                    and issubclass(attr, SignalGenerator)
                    and attr is not SignalGenerator
                ):
                    self._generators[module_name.lower()] = attr
                    logging.debug(f"Loaded generator: {module_name}")

    def get_generator(self, name: str) -> SignalGenerator | None:
        """
        Return an instance of the named generator (case-insensitive), or None.
        """
        generator_class = self._generators.get(name.lower())
        if generator_class:
            try:
                return generator_class(self.console)
            except Exception as e:
                logging.error(f"Error instantiating generator {name}: {e}")
                return None
        return None

    def list_generators(self) -> list[str]:
        return list(self._generators.keys())
