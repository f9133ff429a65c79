"""
JSON configuration format.

Every object is a JSON object with a ``"variant"`` discriminator, for example::

    {"variant": "Shift",
     "base": {"variant": "Power", "scale": 1.0, "exponent": 1.0},
     "delays": [[0.0], [1.0]]}

Numbers are IEEE-754 doubles; ``json`` writes them with ``repr`` so a
serialize/parse round trip is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import gneiting as gn
from . import models as md
from .simulate import SimulationPlan

__all__ = [
    "ConfigError",
    "load_json",
    "dump_json",
    "variogram_from_config",
    "covariance_from_config",
    "cm_from_config",
    "bernstein_from_config",
    "stieltjes_from_config",
    "model_from_config",
    "gneiting_from_config",
    "plan_from_config",
    "plan_to_config",
]


class ConfigError(ValueError):
    pass


def load_json(path) -> dict:
    try:
        with open(Path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def _variant(cfg, kind: str) -> str:
    if not isinstance(cfg, dict) or "variant" not in cfg:
        raise ConfigError(f"{kind} config must be an object with a 'variant' key")
    return cfg["variant"]


def _build(kind, table, cfg):
    name = _variant(cfg, kind)
    if name not in table:
        raise ConfigError(f"unknown {kind} variant {name!r}; expected one of {sorted(table)}")
    try:
        return table[name](cfg)
    except ConfigError:
        raise
    except KeyError as exc:
        raise ConfigError(f"{kind} variant {name!r} is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} variant {name!r}: {exc}") from exc


def variogram_from_config(cfg) -> md.PowerVariogram:
    return _build("variogram", {
        "Power": lambda c: md.PowerVariogram(float(c["scale"]), float(c["exponent"])),
    }, cfg)


def covariance_from_config(cfg) -> md.ExponentialCovariance:
    return _build("covariance", {
        "Exponential": lambda c: md.ExponentialCovariance(float(c["sill"]), float(c["range"])),
    }, cfg)


def cm_from_config(cfg):
    return _build("completely monotone", {
        "Exp": lambda c: md.ExpCM(float(c["c"])),
        "InversePower": lambda c: md.InversePowerCM(float(c["c"]), float(c["lam"])),
    }, cfg)


def bernstein_from_config(cfg):
    return _build("Bernstein", {
        "Power": lambda c: md.PowerBernstein(float(c["alpha"])),
        "Log": lambda c: md.LogBernstein(),
        "BoundedExp": lambda c: md.BoundedExpBernstein(float(c["c"])),
        "Affine": lambda c: md.AffineBernstein(float(c.get("a", 0.0)), float(c.get("b", 1.0))),
    }, cfg)


def stieltjes_from_config(cfg) -> md.BoxStieltjes:
    return _build("Stieltjes", {
        "BoxDensity": lambda c: md.BoxStieltjes(float(c["order"]), np.asarray(c["B"], dtype=float),
                                                float(c["v_lo"]), float(c["v_hi"]),
                                                float(c.get("a", 0.0))),
    }, cfg)


def _lmc(c):
    factors = [md.LMCFactor(covariance_from_config(f["covariance"]), f["loadings"], f["delays"])
               for f in c["factors"]]
    return md.DelayedLMC(factors)


def model_from_config(cfg) -> md.MatrixFunction:
    """Build a matrix-valued function (catalog pseudo-variogram or Tabulated)."""
    return _build("model", {
        "Shift": lambda c: md.Shift(variogram_from_config(c["base"]), c["delays"]),
        "NoisyCommon": lambda c: md.NoisyCommon(variogram_from_config(c["base"]), c["noise"],
                                                int(c.get("dim", 1))),
        "DelayedLMC": _lmc,
        "Composed": lambda c: md.Composed(bernstein_from_config(c["g"]),
                                          model_from_config(c["base"])),
        "Tabulated": lambda c: md.Tabulated.from_expressions(c["entries"], int(c.get("dim", 1))),
        "Offset": lambda c: gn.OffsetFunction(model_from_config(c["base"]), float(c["c"])),
    }, cfg)


def gneiting_from_config(cfg):
    return _build("Gneiting model", {
        "Original": lambda c: gn.OriginalGneiting(cm_from_config(c["phi"]),
                                                  bernstein_from_config(c["psi"]), int(c["d"])),
        "MultivariateExtended": lambda c: gn.MultivariateExtendedGneiting(
            cm_from_config(c["phi"]), model_from_config(c["gamma"]), float(c["r"]), int(c["d"])),
        "Stieltjes": lambda c: gn.StieltjesGneiting(
            stieltjes_from_config(c["S"]), model_from_config(c["g"]),
            model_from_config(c["f"]), float(c["r"])),
    }, cfg)


def plan_from_config(cfg, seed=None):
    """Parse a plan file into ``(plan, gamma, phi)``.

    ``seed`` overrides the plan's ``"seed"``; one of the two is required.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("plan must be a JSON object")
    if seed is None:
        seed = cfg.get("seed")
    if seed is None:
        raise ConfigError("a seed is required: set 'seed' in the plan or pass --seed")
    try:
        plan = SimulationPlan(
            spatial=cfg["spatial"], temporal=cfg["temporal"],
            replicates=int(cfg["replicates"]), seed=int(seed),
            normalize=bool(cfg.get("normalize", False)),
            chunk_size=int(cfg.get("chunk_size", 4096)))
    except KeyError as exc:
        raise ConfigError(f"plan is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid plan: {exc}") from exc
    gamma = model_from_config(cfg["gamma"]) if "gamma" in cfg else None
    phi = cm_from_config(cfg["phi"]) if "phi" in cfg else None
    return plan, gamma, phi


def plan_to_config(plan: SimulationPlan, gamma=None, phi=None) -> dict:
    out = {"spatial": plan.spatial.tolist(), "temporal": plan.temporal.tolist(),
           "replicates": plan.replicates, "seed": plan.seed, "normalize": plan.normalize,
           "chunk_size": plan.chunk_size}
    if gamma is not None:
        out["gamma"] = gamma.to_config()
    if phi is not None:
        out["phi"] = phi.to_config()
    return out
