"""Command system for the CLI."""
from .analysis_commands import CompareCommand, FitCommand, ResidualsCommand, TrajectoryCommand
from .base import (
    BaseCommand,
    CommandCategory,
    CommandOutput,
    CommandRegistry,
    ExitCode,
    command_registry,
    exit_code_for,
)
from .config import (
    DataConfig,
    LoggingConfig,
    ModelConfig,
    RunConfig,
    SimulateConfig,
    TrajectoryConfig,
    kernel_choice,
)
from .simulation_commands import SimStudyCommand, SimulateCommand


def register_all_commands() -> CommandRegistry:
    """Register all available commands."""
    # Analysis commands
    command_registry.register(FitCommand())
    command_registry.register(CompareCommand())
    command_registry.register(ResidualsCommand())
    command_registry.register(TrajectoryCommand())

    # Simulation commands
    command_registry.register(SimStudyCommand())
    command_registry.register(SimulateCommand())
    return command_registry


__all__ = [
    'BaseCommand',
    'CommandCategory',
    'CommandOutput',
    'CommandRegistry',
    'CompareCommand',
    'DataConfig',
    'ExitCode',
    'FitCommand',
    'LoggingConfig',
    'ModelConfig',
    'ResidualsCommand',
    'RunConfig',
    'SimStudyCommand',
    'SimulateCommand',
    'SimulateConfig',
    'TrajectoryCommand',
    'TrajectoryConfig',
    'command_registry',
    'exit_code_for',
    'kernel_choice',
    'register_all_commands',
]
