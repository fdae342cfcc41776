import logging
from typing import Annotated

import typer

from hallmhd.commands import experiments, plotdata

app = typer.Typer(help="Hall-MHD with fractional magnetic diffusion: runs, audits and sweeps.")


@app.callback()
def main(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log per-step invariant drift")] = False,
) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


app.command("run")(experiments.run_command)
app.command("diagnose")(experiments.diagnose_command)
app.command("converge")(experiments.converge_command)
app.command("alpha-sweep")(experiments.alpha_sweep_command)
app.command("plotdata")(plotdata.plotdata_command)
