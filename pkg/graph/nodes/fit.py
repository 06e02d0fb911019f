"""
Node: fit_node

Fits the surrogate accuracy model to --samples and writes
  accuracy.yaml   an `accuracy:` section that can be pasted into a game config
  fit.json        parameters, rmse and refinement diagnostics
The baseline accuracy comes from --config when given, else 0.1.
"""
from game.fit import DEFAULT_BASELINE, fit_accuracy, read_samples

from ..state import RunState
from .common import EXIT_OK, finish, json_artifact, option, timed, usage_error, yaml_artifact


@timed("fit")
def fit_node(state: RunState) -> RunState:
    path = option(state, "samples")
    if not path:
        return usage_error(state, "fit needs --samples")
    spec = state.get("spec")
    baseline = spec.accuracy.baseline if spec is not None else DEFAULT_BASELINE

    samples = read_samples(path)
    result = fit_accuracy(samples, baseline=baseline)
    a = result.alpha
    lines = [
        f"fitted {len(samples)} samples from {path}",
        f"alpha = ({a[0]:.6g}, {a[1]:.6g}, {a[2]:.6g}, {a[3]:.6g}, {a[4]:.6g})  gamma = {result.gamma:.6g}",
        f"rmse {result.rmse:.3g} after {result.iterations} refinement levels"
        + ("" if result.converged else " (level cap reached)"),
    ]
    doc = result.to_dict()
    doc["baseline"] = baseline
    doc["samples_path"] = path
    return finish(
        state,
        "ok",
        EXIT_OK,
        [
            yaml_artifact("accuracy.yaml", {"accuracy": result.to_accuracy_section(baseline)}),
            json_artifact("fit.json", doc),
        ],
        lines,
        rmse=result.rmse,
    )
