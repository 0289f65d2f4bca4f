"""
Commands working on an observed dataset: fit, compare, residuals, trajectory.
"""
import json

import numpy as np
import pandas as pd
from loguru import logger

from ..bridge import compare_models, estimate_log_marginal_likelihood
from ..diagnostics import population_band, residual_report
from ..model import QMMPosterior
from .base import BaseCommand, CommandCategory, CommandOutput, ExitCode
from .common import command_dir, fit_models, load_dataset, write_metadata
from .config import RunConfig

FOREST_COLUMNS = ["kernel", "p0", "parameter", "median", "lower", "upper"]


def _convergence_exit(all_converged: bool) -> ExitCode:
    return ExitCode.OK if all_converged else ExitCode.CONVERGENCE


class FitCommand(BaseCommand):
    """Fit every configured kernel and quantile and write draws, summaries and diagnostics."""

    def __init__(self):
        super().__init__("fit")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.ANALYSIS

    def execute(self, config: RunConfig) -> CommandOutput:
        data = load_dataset(config)
        fits = fit_models(config, data)
        out = command_dir(config, self.name)

        files, table, forest = [], [], []
        for (kernel, p0), result in fits.items():
            label = result.spec.label
            files.append(str(result.draws.to_csv(out / f"draws_{label}.csv")))
            summary = result.summary_dict()
            summary_path = out / f"summary_{label}.json"
            summary_path.write_text(json.dumps(summary, indent=2))
            files.append(str(summary_path))
            files.append(str(result.report.write(out / f"convergence_{label}.json")))
            for name, stats in summary["parameters"].items():
                forest.append({"kernel": kernel, "p0": p0, "parameter": name, **stats})
            table.append({
                "model": label,
                "max_rhat": summary["max_rhat"],
                "converged": result.converged,
                "seconds": round(result.elapsed_seconds, 1),
            })

        forest_path = out / "forest.csv"
        pd.DataFrame(forest, columns=FOREST_COLUMNS).to_csv(forest_path, index=False)
        files.append(str(forest_path))
        files.append(str(write_metadata(out, self.name, config, data)))

        converged = all(r.converged for r in fits.values())
        if not converged:
            logger.warning("At least one fit exceeds the R-hat threshold; outputs were still written")
        return CommandOutput(
            success=True,
            result={"files": files, "table": table},
            metadata={"converged": converged},
            exit_code=_convergence_exit(converged),
        )


class CompareCommand(BaseCommand):
    """Estimate log marginal likelihoods by bridge sampling and tabulate SEP - SL gaps."""

    def __init__(self):
        super().__init__("compare")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.ANALYSIS

    def execute(self, config: RunConfig) -> CommandOutput:
        data = load_dataset(config)
        fits = fit_models(config, data)
        out = command_dir(config, self.name)
        bridge_cfg = config.bridge.model_copy(update={"workers": config.workers})

        results = {}
        for key, result in fits.items():
            posterior = QMMPosterior(data, result.spec)
            logger.info(f"Bridge sampling {result.spec.label}")
            results[key] = estimate_log_marginal_likelihood(result.draws, posterior.log_density, bridge_cfg)

        table = compare_models(results)
        csv_path = out / "log_ml.csv"
        table.to_csv(csv_path, index=False)
        json_path = out / "log_ml.json"
        json_path.write_text(json.dumps({
            "cells": [
                {"kernel": kernel, "p0": p0, **res.to_dict()}
                for (kernel, p0), res in results.items()
            ],
            "table": json.loads(table.to_json(orient="records")),
        }, indent=2))
        meta_path = write_metadata(out, self.name, config, data)

        converged = all(r.converged for r in results.values()) and all(f.converged for f in fits.values())
        return CommandOutput(
            success=True,
            result={
                "files": [str(csv_path), str(json_path), str(meta_path)],
                "table": json.loads(table.to_json(orient="records")),
            },
            metadata={"converged": converged},
            exit_code=_convergence_exit(converged),
        )


class ResidualsCommand(BaseCommand):
    """Scaled residuals, QQ points and KS uniformity tests for every fit."""

    def __init__(self):
        super().__init__("residuals")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.ANALYSIS

    def execute(self, config: RunConfig) -> CommandOutput:
        data = load_dataset(config)
        fits = fit_models(config, data)
        out = command_dir(config, self.name)
        res_cfg = config.diagnostics.model_copy(update={"workers": config.workers})

        files, table = [], []
        for result in fits.values():
            report = residual_report(result.draws, data, result.spec, res_cfg)
            files.extend(str(p) for p in report.write(out, data))
            table.append(report.summary())
        files.append(str(write_metadata(out, self.name, config, data)))
        return CommandOutput(success=True, result={"files": files, "table": table})


class TrajectoryCommand(BaseCommand):
    """Population quantile curves (random effects at zero) with pointwise bands."""

    def __init__(self):
        super().__init__("trajectory")

    @property
    def category(self) -> CommandCategory:
        return CommandCategory.ANALYSIS

    def execute(self, config: RunConfig) -> CommandOutput:
        data = load_dataset(config)
        fits = fit_models(config, data)
        out = command_dir(config, self.name)
        traj = config.trajectory

        grid, model_time, cd4 = traj.model_inputs(data.transforms, config.data.cd4_column)
        frames = []
        for (kernel, p0), result in fits.items():
            band = population_band(
                result.draws, result.spec, result.n_subjects, model_time, cd4, traj.level, traj.max_draws,
            )
            # report on the original time scale
            band = band.assign(time=grid, kernel=kernel, p0=p0)
            frames.append(band[["kernel", "p0", "time", "median", "lower", "upper"]])

        path = out / "trajectory.csv"
        frame = pd.concat(frames, ignore_index=True)
        frame.to_csv(path, index=False)
        meta_path = write_metadata(out, self.name, config, data)
        at_start = frame[np.isclose(frame["time"], grid[0])]
        return CommandOutput(
            success=True,
            result={
                "files": [str(path), str(meta_path)],
                "table": at_start.to_dict(orient="records"),
            },
        )
