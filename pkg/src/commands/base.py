"""
Base command class and command registry for the CLI.
"""
from abc import ABC, abstractmethod
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional

from loguru import logger
from pydantic import BaseModel, Field

from ..exceptions import InitializationError, NumericError, QMMError, SchemaError
from .config import RunConfig


class CommandCategory(str, Enum):
    """Command groups."""
    ANALYSIS = "analysis"
    SIMULATION = "simulation"


class ExitCode(IntEnum):
    """Process exit codes."""
    OK = 0
    FAILURE = 1
    SCHEMA = 2
    CONVERGENCE = 3
    NUMERIC = 4


class CommandOutput(BaseModel):
    """Outcome of a command."""
    success: bool
    result: Any = None
    error: Optional[str] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)
    exit_code: ExitCode = ExitCode.OK


class BaseCommand(ABC):
    """Base class for all commands."""

    def __init__(self, name: str):
        """
        Initialize the command.

        Args:
            name: Name used on the command line
        """
        self.name = name
        self.description = (self.__doc__ or "No description provided").strip().splitlines()[0]

    @property
    @abstractmethod
    def category(self) -> CommandCategory:
        """Return the command category."""

    @property
    def needs_data(self) -> bool:
        """Whether the command reads the input CSV."""
        return True

    @abstractmethod
    def execute(self, config: RunConfig) -> CommandOutput:
        """
        Run the command.

        Args:
            config: Resolved run configuration

        Returns:
            CommandOutput with the written files in ``result``
        """

    def validate_input(self, config: RunConfig) -> Optional[str]:
        """Problem with ``config`` for this command, or None."""
        if self.needs_data and not config.data.path:
            return f"command '{self.name}' needs --data or data.path in the config"
        return None


def exit_code_for(error: Exception) -> ExitCode:
    if isinstance(error, SchemaError):
        return ExitCode.SCHEMA
    if isinstance(error, (NumericError, InitializationError)):
        return ExitCode.NUMERIC
    return ExitCode.FAILURE


class CommandRegistry:
    """Registry of the available commands."""

    def __init__(self):
        """Initialize the command registry."""
        self._commands: Dict[str, BaseCommand] = {}

    def register(self, command: BaseCommand) -> None:
        """
        Register a command.

        Args:
            command: Command instance to register
        """
        self._commands[command.name] = command
        logger.debug(f"Registered command: {command.name} ({command.category.value})")

    def get_command(self, name: str) -> Optional[BaseCommand]:
        return self._commands.get(name)

    def list_commands(self) -> Dict[str, List[str]]:
        """Command names grouped by category."""
        result: Dict[str, List[str]] = {}
        for command in self._commands.values():
            result.setdefault(command.category.value, []).append(command.name)
        return result

    def names(self) -> List[str]:
        return list(self._commands)

    def execute_command(self, name: str, config: RunConfig) -> CommandOutput:
        """
        Execute a command by name; errors become a failed CommandOutput.

        Args:
            name: Command name
            config: Run configuration

        Returns:
            CommandOutput whose ``exit_code`` maps schema errors to 2,
            numeric and initialization failures to 4 and anything else to 1
        """
        command = self.get_command(name)
        if not command:
            return CommandOutput(
                success=False,
                error=f"Command '{name}' not found",
                exit_code=ExitCode.FAILURE,
            )

        problem = command.validate_input(config)
        if problem:
            return CommandOutput(success=False, error=problem, exit_code=ExitCode.FAILURE)

        try:
            return command.execute(config)
        except QMMError as e:
            logger.error(f"Command '{name}' failed: {e}")
            return CommandOutput(success=False, error=str(e), exit_code=exit_code_for(e))
        except Exception as e:
            logger.exception(f"Command '{name}' crashed: {e}")
            return CommandOutput(success=False, error=str(e), exit_code=ExitCode.FAILURE)


# Global command registry instance
command_registry = CommandRegistry()
