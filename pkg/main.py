# main.py
import logging
import sys

import click
from pydantic import ValidationError

from app.config import LOG_LEVEL
from app.errors import ConfigError
from app.schemas import SweepConfig
from services.output_service import emit_plot_scripts
from services.sweep_service import run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILURE_BUDGET = 2


@click.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="KEY=value sweep configuration file")
@click.option("--delta-n", type=float, default=None, help="Index step height")
@click.option("--u-over-c", type=float, default=None, help="Front speed as a fraction of c")
@click.option("--omega-min", type=float, default=None)
@click.option("--omega-max", type=float, default=None)
@click.option("--points", type=int, default=None, help="Number of grid frequencies")
@click.option("--out-dir", type=str, default=None)
@click.option("--dump-modes/--no-dump-modes", default=None, help="Write modes.csv")
@click.option("--dump-smatrix/--no-dump-smatrix", default=None, help="Write smatrix.csv")
@click.option("--jobs", type=int, default=None, help="Worker processes")
@click.option("--bandwidth-ratio", type=float, default=None)
@click.option("--no-progress", is_flag=True, default=False)
def main(config_path, delta_n, u_over_c, omega_min, omega_max, points, out_dir,
         dump_modes, dump_smatrix, jobs, bandwidth_ratio, no_progress):
    """Sweep the co-moving frequency axis and write spectra, matrices and plot scripts."""
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    overrides = dict(
        delta_n=delta_n, u_over_c=u_over_c, omega_min=omega_min, omega_max=omega_max,
        points=points, out_dir=out_dir, dump_modes=dump_modes, dump_smatrix=dump_smatrix,
        jobs=jobs, bandwidth_ratio=bandwidth_ratio,
    )
    try:
        config = SweepConfig.load(config_path, overrides)
        config.medium_params()
    except (ConfigError, ValidationError) as exc:
        click.secho(f"❌ Configuration error: {exc}", fg="red", err=True)
        sys.exit(EXIT_CONFIG)

    artifacts = run_sweep(config, progress=not no_progress)
    emit_plot_scripts(artifacts)

    click.secho(f"✅ {len(artifacts.records)} frequencies, {artifacts.failed} gap row(s); "
                f"artifacts in {config.out_dir}", fg="green")
    if artifacts.failed_fraction > config.failure_budget:
        click.secho(f"⚠️  Failure budget exceeded ({artifacts.failed_fraction:.2%} > "
                    f"{config.failure_budget:.2%})", fg="yellow", err=True)
        sys.exit(EXIT_FAILURE_BUDGET)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
