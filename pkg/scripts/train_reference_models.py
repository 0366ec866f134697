"""Train and save the packaged reference tuner models.

Produces src/muntzspec/models/reference_ann.json and reference_spline.json,
then prints the prediction bands and the mu = 0.65 error ordering used by
the acceptance suite.  Runtime is about an hour on one core.
"""

import json
import pathlib
import time

import numpy as np

from muntzspec import mltune as mt
from muntzspec.assembly import ManufacturedProblem
from muntzspec.solver1d import SolverConfig, error_norms, solve_1d

MODELS = pathlib.Path(__file__).resolve().parents[1] / "src" / "muntzspec" / "models"


def train_ann():
    cfg = mt.TrainingConfig(batch_size=50, epochs=152, restarts=2, seed=7)
    t0 = time.perf_counter()
    train_ds = mt.generate_dataset("training", cfg.n_mu, cfg.n_nu, seed=cfg.seed)
    val_ds = mt.generate_dataset("validation", cfg.n_mu, cfg.n_nu)
    print(f"datasets ready in {time.perf_counter() - t0:.0f}s", flush=True)
    result = mt.train(cfg, train_ds, val_ds)
    print(
        f"trained in {time.perf_counter() - t0:.0f}s: best restart {result.best_restart}, "
        f"train {result.final_train_loss:.3e}, val {result.final_val_loss:.3e}",
        flush=True,
    )
    meta = {
        "seed": cfg.seed,
        "epochs": cfg.epochs,
        "restarts": cfg.restarts,
        "final_train_loss": result.final_train_loss,
        "final_val_loss": result.final_val_loss,
    }
    MODELS.mkdir(parents=True, exist_ok=True)
    mt.save_model(result.network, str(MODELS / "reference_ann.json"), meta)
    np.savetxt(
        MODELS.parents[2] / "scripts" / "reference_ann_history.csv",
        result.history,
        delimiter=",",
        header="restart,epoch,train_loss,val_loss",
        comments="",
        fmt="%.17g",
    )
    grid = np.arange(1, 20) * 0.05
    preds = mt.forward_batch(result.network, grid)
    print(f"band over mu grid: [{preds.min():.4f}, {preds.max():.4f}]", flush=True)
    print(f"prediction at mu=0.12: {mt.forward(result.network, 3 / 25):.4f}", flush=True)
    return result.network


def fit_spline():
    t0 = time.perf_counter()
    model = mt.spline_fit()
    print(f"spline fitted in {time.perf_counter() - t0:.0f}s", flush=True)
    mt.save_spline(model, str(MODELS / "reference_spline.json"))
    print("knots:", json.dumps([round(float(l), 4) for l in model.lambda_knots]), flush=True)
    return model


def ordering_check(net, spline):
    mu = 0.65
    nu = 1.0 - mu
    problem = ManufacturedProblem(mu=mu, nu=nu)
    errors = {}
    for label, lam in (
        ("ann", mt.forward(net, mu)),
        ("spline", mt.spline_predict(spline, mu)),
        ("one", 1.0),
    ):
        cfg = SolverConfig(mu=mu, lam=lam, m_space=20, n_time=20)
        report = error_norms(solve_1d(cfg, problem), problem.exact)
        errors[label] = report.linf
        print(f"{label:7s} lam {lam:.4f} Linf {report.linf:.3e}", flush=True)
    ok = errors["ann"] < errors["spline"] < errors["one"]
    print(f"ordering ann < spline < one: {ok}", flush=True)


if __name__ == "__main__":
    network = train_ann()
    spline_model = fit_spline()
    ordering_check(network, spline_model)
    print("reference models saved", flush=True)
