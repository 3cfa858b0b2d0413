"""Versioned JSON persistence for trained models."""

import json
from dataclasses import asdict

import numpy as np

from .dataset import atomic_write_text, from_upper_triangle, upper_triangle
from .errors import ParseError
from .kernel import GaussianPoint, KernelParams
from .solver import Diagnostics, SolverParams, TrainedModel

FORMAT_VERSION = 1


def model_to_dict(model):
    svs = []
    for p, y, c in zip(model.support_points, model.support_labels, model.coefficients):
        svs.append({
            "mean": p.mean.tolist(),
            "cov": upper_triangle(p.cov).tolist(),
            "label": int(y),
            "coefficient": float(c),
        })
    sp = model.solver_params
    diag = asdict(model.diagnostics)
    diag["flags"] = list(diag["flags"])
    return {
        "format_version": FORMAT_VERSION,
        "dim": model.dim,
        "sigma": model.kernel_params.sigma,
        "lambda": sp.lam,
        "solver": {
            "kkt_tol": sp.kkt_tol,
            "max_iter": sp.max_iter,
            "stall_iter": sp.stall_iter,
            "margin_eps": sp.margin_eps,
            "prune_rel": sp.prune_rel,
        },
        "bias": model.bias,
        "support_vectors": svs,
        "diagnostics": diag,
    }


def model_from_dict(d):
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported model format_version {version!r}")
    try:
        dim = int(d["dim"])
        solver = d.get("solver", {})
        sp = SolverParams(lam=d["lambda"], **solver)
        kp = KernelParams(d["sigma"])
        points, labels, coef = [], [], []
        for sv in d["support_vectors"]:
            points.append(GaussianPoint(sv["mean"], from_upper_triangle(np.asarray(sv["cov"], dtype=float), dim)))
            labels.append(sv["label"])
            coef.append(sv["coefficient"])
        diag = dict(d.get("diagnostics", {}))
        diag["flags"] = tuple(diag.get("flags", ()))
        return TrainedModel(points, labels, coef, d["bias"], kp, sp, Diagnostics(**diag), dim)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed model file: {exc}") from None


def save_model(model, path):
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
    return model_from_dict(d)
