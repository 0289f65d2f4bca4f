"""
Commands driving the simulation study.
"""
import numpy as np
from loguru import logger

from ..exceptions import DomainError
from ..simstudy import run_study, simulate
from .base import BaseCommand, CommandCategory, CommandOutput, ExitCode
from .common import command_dir, write_metadata
from .config import RunConfig


class SimStudyCommand(BaseCommand):
    """Run the scenario grid and write the bias/RMSE/length/coverage table."""

    def __init__(self):
        super().__init__("simstudy")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.SIMULATION

    @property
    def needs_data(self) -> bool:
        return False

    def execute(self, config: RunConfig) -> CommandOutput:
        out = command_dir(config, self.name)
        study = config.simstudy
        path = out / "simstudy_metrics.csv"
        table = run_study(study, workers=config.workers, out_path=path)
        meta_path = write_metadata(out, self.name, config)

        excluded = int(table.filter(like="_excluded").fillna(0).to_numpy().sum())
        if excluded:
            logger.warning(f"{excluded} replicate fit(s) were excluded for non-convergence")
        return CommandOutput(
            success=True,
            result={"files": [str(path), str(meta_path)], "table": table.to_dict(orient="records")},
            metadata={"excluded": excluded},
            exit_code=ExitCode.CONVERGENCE if excluded else ExitCode.OK,
        )


class SimulateCommand(BaseCommand):
    """Write censored datasets from one scenario of the simulation grid."""

    def __init__(self):
        super().__init__("simulate")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.SIMULATION

    @property
    def needs_data(self) -> bool:
        return False

    def execute(self, config: RunConfig) -> CommandOutput:
        scenarios = config.simstudy.resolved_scenarios()
        index = config.simulate.scenario
        if index >= len(scenarios):
            raise DomainError(f"scenario {index} does not exist; the grid has {len(scenarios)} scenarios")
        scenario = scenarios[index]
        out = command_dir(config, self.name)

        files, table = [], []
        # same per-replicate data streams as the study itself
        for rep, seq in enumerate(np.random.SeedSequence(scenario.seed).spawn(config.simulate.n_datasets)):
            data = simulate(scenario, seq.spawn(2)[0])
            path = data.to_csv(out / f"simulated_{scenario.label}_rep{rep + 1}.csv")
            files.append(str(path))
            table.append({"file": path.name, "n_obs": data.n_obs, "censored_share": data.censored_share})
        files.append(str(write_metadata(out, self.name, config)))
        return CommandOutput(success=True, result={"files": files, "table": table})
