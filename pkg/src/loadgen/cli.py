"""Command-line orchestration: ingest, train, generate, validate, adequacy.

Every subcommand resolves its parameters as flag > config file > default,
hashes the resolved configuration, and stamps all artifacts with that
hash and the master seed.  Primary CSV outputs are byte-reproducible for
a fixed configuration and seed; timestamps only appear in JSON metadata.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import adequacy, copula, cvae, dataset, report, validation

log = logging.getLogger("loadgen")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

EPOCH = np.datetime64("2000-01-01T00:00:00", "ns")


class UsageError(ValueError):
    pass


# --- shared plumbing ---

COMMON_DEFAULTS = {"seed": 0, "out": ".", "figures": True}

DEFAULTS = {
    "ingest": {"csv": None, "drop": "", "test_fraction": 0.2, **COMMON_DEFAULTS},
    "train": {
        "train_csv": None, "normspec": None, "sigma_mode": "auto",
        "noise": "noisy", "beta": 1.0, "hidden": "24,16", "latent": 8,
        "batch_size": 64, "iterations": 20_000, "learning_rate": 1e-4,
        "conditional": True, **COMMON_DEFAULTS,
    },
    "generate": {
        "model": "cvae", "checkpoint": None, "train_csv": None, "count": None,
        "noise": None, "hour": None, "match_training_hours": False,
        "clip_negative": False, **COMMON_DEFAULTS,
    },
    "validate": {
        "historical": None, "generated": None, "fraction": 0.005,
        "ks_repetitions": 5_000, "energy_repetitions": 1_000,
        "permutations": 200, "ae_iterations": 20_000, "hidden": "24,16",
        "latent": 8, **COMMON_DEFAULTS,
    },
    "adequacy": {
        "network": None, "load_source": "historical", "loads": None,
        "checkpoint": None, "pool_size": 100_000, "samples": 1_000_000,
        "threshold": 1e-6, "threads": 1, **COMMON_DEFAULTS,
    },
}

REQUIRED = {
    "ingest": ("csv",),
    "train": ("train_csv",),
    "generate": (),
    "validate": ("historical", "generated"),
    "adequacy": ("network",),
}


def _resolve_config(command: str, ns: argparse.Namespace) -> dict:
    """flag > config file > default; unknown config keys are rejected."""
    explicit = {
        k: v for k, v in vars(ns).items() if k not in ("command", "func", "config")
    }
    resolved = dict(DEFAULTS[command])
    path = getattr(ns, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {path}: {exc}") from exc
        if not isinstance(from_file, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in from_file.items():
            key = key.replace("-", "_")
            if key not in resolved:
                raise UsageError(f"unknown config key {key!r} for {command}")
            resolved[key] = value
    resolved.update(explicit)
    for key in REQUIRED[command]:
        if resolved.get(key) is None:
            raise UsageError(f"{command}: missing required option --{key.replace('_', '-')}")
    return resolved


def _config_hash(resolved: dict) -> str:
    # the output directory is where a run lands, not what it computes
    canon = json.dumps(
        {k: v for k, v in resolved.items() if k != "out"},
        sort_keys=True, default=str,
    )
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _stamp(resolved: dict) -> str:
    return f"config={_config_hash(resolved)} seed={resolved.get('seed')}"


def write_csv(path, frame: pd.DataFrame, stamp: str) -> None:
    """CSV with a leading comment line carrying the run stamp."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# loadgen {stamp}\n")
        frame.to_csv(fh, index=False, lineterminator="\n")


def write_json(path, payload: dict, resolved: dict) -> None:
    payload = dict(payload)
    payload["metadata"] = {
        "config_hash": _config_hash(resolved),
        "seed": resolved.get("seed"),
        "resolved_config": {k: v for k, v in sorted(resolved.items())},
        "created": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _outdir(resolved: dict) -> Path:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _child_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _timestamp_strings(ts: np.ndarray) -> pd.Series:
    return pd.Series(pd.DatetimeIndex(ts).strftime("%Y-%m-%dT%H:%M:%S"))


def _dataset_frame(ds: dataset.LoadDataset) -> pd.DataFrame:
    frame = pd.DataFrame(ds.values, columns=ds.areas)
    frame.insert(0, "timestamp", _timestamp_strings(ds.timestamps))
    return frame


def synthetic_timestamps(hours: np.ndarray | None, count: int):
    """Monotone synthetic timestamps whose time of day matches the condition.

    Returns (timestamps, order): reindex the sample rows by ``order`` so
    each row keeps its conditioning hour.  Unconditioned samples get a
    plain hourly sequence; conditioned samples get day k, hour h for the
    k-th occurrence of hour h, ordered chronologically.
    """
    if hours is None:
        ts = EPOCH + np.arange(count) * np.timedelta64(3600, "s")
        return ts, np.arange(count)
    hours = np.asarray(hours, dtype=int)
    seen = np.zeros(24, dtype=int)
    offsets = np.empty(count, dtype=np.int64)
    for k, h in enumerate(hours):
        offsets[k] = (seen[h] * 24 + int(h)) * 3600
        seen[h] += 1
    order = np.argsort(offsets)
    ts = EPOCH + offsets[order].astype("timedelta64[s]")
    return ts, order


# --- ingest ---

def cmd_ingest(resolved: dict) -> int:
    stamp = _stamp(resolved)
    out = _outdir(resolved)
    drop = [c for c in (resolved["drop"] or "").split(",") if c]
    ds = dataset.load_csv(resolved["csv"], drop_columns=drop)
    train, test = dataset.split_weekly_blocks(
        ds, resolved["test_fraction"], resolved["seed"]
    )
    spec = dataset.fit_minmax(train)

    write_csv(out / "train.csv", _dataset_frame(train), stamp)
    write_csv(out / "test.csv", _dataset_frame(test), stamp)
    with open(out / "normspec.json", "w", encoding="utf-8") as fh:
        json.dump(spec.to_dict(), fh, sort_keys=True)
        fh.write("\n")
    write_json(
        out / "ingest_summary.json",
        {
            "source": str(resolved["csv"]),
            "dataset": ds.summary(),
            "train": train.summary(),
            "test": test.summary(),
        },
        resolved,
    )
    log.info("ingest: %d rows -> %d train / %d test", ds.n, train.n, test.n)
    return EXIT_OK


# --- train ---

def _parse_sigma_mode(text: str):
    if text == "auto":
        return "auto", None
    if text.startswith("fixed:"):
        try:
            s = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad --sigma-mode value {text!r}") from exc
        if s <= 0:
            raise UsageError("fixed sigma must be positive")
        return "fixed", s
    raise UsageError(f"--sigma-mode must be 'auto' or 'fixed:<s>', got {text!r}")


def _parse_widths(text: str) -> tuple[int, ...]:
    try:
        widths = tuple(int(w) for w in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad width list {text!r}") from exc
    if not widths or any(w < 1 for w in widths):
        raise UsageError("hidden widths must be positive integers")
    return widths


def cmd_train(resolved: dict) -> int:
    stamp = _stamp(resolved)
    out = _outdir(resolved)
    ds = dataset.load_csv(resolved["train_csv"])
    if resolved["normspec"]:
        with open(resolved["normspec"], encoding="utf-8") as fh:
            spec = dataset.NormalizationSpec.from_dict(json.load(fh))
    else:
        spec = dataset.fit_minmax(ds)

    sigma_mode, fixed_sigma = _parse_sigma_mode(resolved["sigma_mode"])
    strategy = cvae.StrategyConfig(
        sigma_mode=sigma_mode,
        fixed_sigma=fixed_sigma,
        noise=resolved["noise"],
        beta=resolved["beta"],
    )
    config = cvae.ModelConfig(
        input_dim=ds.d,
        cond_dim=2 if resolved["conditional"] else 0,
        encoder_hidden=_parse_widths(resolved["hidden"]),
        latent_dim=resolved["latent"],
        strategy=strategy,
        batch_size=resolved["batch_size"],
        iterations=resolved["iterations"],
        learning_rate=resolved["learning_rate"],
    )
    normed = dataset.normalize(ds, spec)
    hours = ds.hours()
    conditions = dataset.hour_conditions(hours) if config.cond_dim else None
    model = cvae.train(
        normed.values, conditions, config, resolved["seed"],
        norm_spec=spec, hours=hours, areas=ds.areas,
    )

    cvae.save_checkpoint(model, out / "checkpoint.json")
    trace = pd.DataFrame(
        {"iteration": np.arange(model.loss_trace.size), "loss": model.loss_trace}
    )
    write_csv(out / "loss_trace.csv", trace, stamp)
    if resolved["figures"]:
        report.loss_trace_figure(model.loss_trace, out / "loss_trace.png",
                                 run_stamp=stamp)
    write_json(
        out / "train_summary.json",
        {
            "model_config": config.to_dict(),
            "final_loss": float(model.loss_trace[-1]) if model.loss_trace.size else None,
            "areas": ds.areas,
            "rows": ds.n,
        },
        resolved,
    )
    log.info("train: final loss %.5f", model.loss_trace[-1])
    return EXIT_OK


# --- generate ---

def _generated_hours(model: cvae.TrainedModel, resolved: dict, count: int):
    if model.config.cond_dim == 0:
        if resolved["hour"] is not None or resolved["match_training_hours"]:
            raise UsageError("checkpoint is unconditional; hour options do not apply")
        return None
    if resolved["match_training_hours"]:
        if model.hour_histogram is None:
            raise UsageError("checkpoint lacks an hour histogram")
        return cvae.schedule_hours(model.hour_histogram, count)
    if resolved["hour"] is None:
        raise UsageError("conditional model: give --hour H or --match-training-hours")
    return np.full(count, int(resolved["hour"]))


def cmd_generate(resolved: dict) -> int:
    stamp = _stamp(resolved)
    out = _outdir(resolved)

    if resolved["model"] == "copula":
        if not resolved["train_csv"]:
            raise UsageError("--model copula requires --train-csv")
        ds = dataset.load_csv(resolved["train_csv"])
        count = resolved["count"] if resolved["count"] is not None else ds.n
        fitted = copula.fit_gaussian_copula(ds.values)
        samples_mw = copula.sample_copula(fitted, count, resolved["seed"])
        areas, hours = ds.areas, None
    else:
        if not resolved["checkpoint"]:
            raise UsageError("--model cvae requires --checkpoint")
        model = cvae.load_checkpoint(resolved["checkpoint"])
        if resolved["count"] is not None:
            count = resolved["count"]
        elif model.hour_histogram is not None:
            count = int(model.hour_histogram.sum())
        else:
            raise UsageError("give --count (checkpoint has no training volume)")
        if resolved["noise"]:
            strategy = replace(model.config.strategy, noise=resolved["noise"])
            model.config = replace(model.config, strategy=strategy)
        hours = _generated_hours(model, resolved, count)
        normed = cvae.generate(model, count, hours, seed=resolved["seed"])
        if model.norm_spec is None:
            raise UsageError("checkpoint lacks a normalization spec")
        samples_mw = dataset.denormalize(normed, model.norm_spec)
        areas = model.areas or [f"area{j}" for j in range(samples_mw.shape[1])]

    if resolved["clip_negative"]:
        samples_mw = np.maximum(samples_mw, 0.0)

    timestamps, order = synthetic_timestamps(hours, count)
    frame = pd.DataFrame(samples_mw[order], columns=areas)
    frame.insert(0, "timestamp", _timestamp_strings(timestamps))
    write_csv(out / "samples.csv", frame, stamp)
    write_json(
        out / "generate_summary.json",
        {
            "count": int(count),
            "areas": list(areas),
            "backend": resolved["model"],
            "clip_negative": bool(resolved["clip_negative"]),
        },
        resolved,
    )
    log.info("generate: %d samples x %d areas", count, len(areas))
    return EXIT_OK


# --- validate ---

def _pvalue_frame(curves: list[validation.PValueCurve]) -> pd.DataFrame:
    return pd.DataFrame({c.label: c.p_values for c in curves})


def cmd_validate(resolved: dict) -> int:
    stamp = _stamp(resolved)
    out = _outdir(resolved)
    hist = dataset.load_csv(resolved["historical"])
    gen = dataset.load_csv(resolved["generated"])
    if hist.areas != gen.areas:
        raise UsageError(
            f"area mismatch: historical {hist.areas} vs generated {gen.areas}"
        )
    spec = dataset.fit_minmax(hist)
    hist_n = dataset.normalize(hist, spec).values
    gen_n = dataset.normalize(gen, spec).values

    seed_ks, seed_ae, seed_energy = _child_seeds(resolved["seed"], 3)

    ks_curves = validation.ks_repeated(
        hist.values, gen.values, resolved["fraction"],
        resolved["ks_repetitions"], seed_ks, labels=hist.areas,
    )
    write_csv(out / "ks_pvalues.csv", _pvalue_frame(ks_curves), stamp)

    ae_config = validation.AEConfig(
        input_dim=hist.d,
        hidden=_parse_widths(resolved["hidden"]),
        bottleneck=resolved["latent"],
        iterations=resolved["ae_iterations"],
    )
    ae = validation.train_autoencoder(hist_n, ae_config, seed_ae)
    ecdf = validation.EcdfReport()
    ecdf.add("historical", validation.reconstruction_errors(ae, hist_n))
    ecdf.add("generated", validation.reconstruction_errors(ae, gen_n))
    rows = [
        {"population": label, "error": err}
        for label, errors in ecdf.populations.items()
        for err in errors
    ]
    write_csv(out / "ae_errors.csv", pd.DataFrame(rows), stamp)

    energy_curve = validation.energy_repeated(
        hist_n, gen_n, resolved["fraction"], resolved["energy_repetitions"],
        seed_energy, permutations=resolved["permutations"],
    )
    write_csv(out / "energy_pvalues.csv", _pvalue_frame([energy_curve]), stamp)

    if resolved["figures"]:
        report.pvalue_curve_figure(
            ks_curves, out / "ks_curves.png", title="K-S p-value curves",
            run_stamp=stamp,
        )
        report.pvalue_curve_figure(
            [energy_curve], out / "energy_curve.png",
            title="energy-test p-value curve", run_stamp=stamp,
        )
        report.ecdf_figure(ecdf, out / "ae_ecdf.png", run_stamp=stamp)

    write_json(
        out / "validate_summary.json",
        {
            "ks_sup_distance": {
                c.label: c.sup_distance_from_uniform() for c in ks_curves
            },
            "energy_sup_distance": energy_curve.sup_distance_from_uniform(),
            "fraction": resolved["fraction"],
            "ks_repetitions": resolved["ks_repetitions"],
            "energy_repetitions": resolved["energy_repetitions"],
            "permutations": resolved["permutations"],
            "ae_final_loss": float(ae.loss_trace[-1]) if ae.loss_trace.size else None,
        },
        resolved,
    )
    log.info("validate: wrote K-S, AE and energy reports to %s", out)
    return EXIT_OK


# --- adequacy ---

def _load_pool(resolved: dict, network: adequacy.NetworkModel) -> np.ndarray:
    source = resolved["load_source"]
    if source == "historical":
        if not resolved["loads"]:
            raise UsageError("--load-source historical requires --loads CSV")
        ds = dataset.load_csv(resolved["loads"])
        missing = [a for a in network.areas if a not in ds.areas]
        if missing:
            raise UsageError(f"load CSV lacks areas {missing}")
        cols = [ds.areas.index(a) for a in network.areas]
        return ds.values[:, cols]
    if source == "copula":
        if not resolved["loads"]:
            raise UsageError("--load-source copula requires --loads CSV")
        ds = dataset.load_csv(resolved["loads"])
        missing = [a for a in network.areas if a not in ds.areas]
        if missing:
            raise UsageError(f"load CSV lacks areas {missing}")
        cols = [ds.areas.index(a) for a in network.areas]
        fitted = copula.fit_gaussian_copula(ds.values[:, cols])
        return copula.sample_copula(fitted, resolved["pool_size"], resolved["seed"])
    if source == "checkpoint":
        if not resolved["checkpoint"]:
            raise UsageError("--load-source checkpoint requires --checkpoint")
        model = cvae.load_checkpoint(resolved["checkpoint"])
        if model.norm_spec is None:
            raise UsageError("checkpoint lacks a normalization spec")
        count = resolved["pool_size"]
        hours = None
        if model.config.cond_dim:
            if model.hour_histogram is None:
                raise UsageError("conditional checkpoint lacks an hour histogram")
            hours = cvae.schedule_hours(model.hour_histogram, count)
        normed = cvae.generate(model, count, hours, seed=resolved["seed"])
        pool = dataset.denormalize(normed, model.norm_spec)
        if model.areas:
            missing = [a for a in network.areas if a not in model.areas]
            if missing:
                raise UsageError(f"checkpoint lacks areas {missing}")
            cols = [model.areas.index(a) for a in network.areas]
            pool = pool[:, cols]
        elif pool.shape[1] != network.n_areas:
            raise UsageError("checkpoint dimension does not match the network")
        return pool
    raise UsageError(f"unknown load source {source!r}")


def cmd_adequacy(resolved: dict) -> int:
    stamp = _stamp(resolved)
    out = _outdir(resolved)
    network, fleet = adequacy.load_network_file(resolved["network"])
    seed_pool, seed_mc = _child_seeds(resolved["seed"], 2)
    pool_resolved = dict(resolved, seed=seed_pool)
    pool = _load_pool(pool_resolved, network)

    lole = adequacy.estimate_lole(
        network,
        fleet,
        pool,
        resolved["samples"],
        seed_mc,
        threshold_mw=resolved["threshold"],
        n_jobs=resolved["threads"],
    )
    lole.seed = resolved["seed"]

    frame = pd.DataFrame(
        {
            "area": lole.areas,
            "lole_hours_per_year": lole.lole,
            "std_error_hours_per_year": lole.std_error,
        }
    )
    write_csv(out / "lole.csv", frame, stamp)
    write_json(
        out / "adequacy_summary.json",
        {
            "report": lole.to_dict(),
            "load_source": resolved["load_source"],
            "pool_rows": int(pool.shape[0]),
            "fleet": [
                {
                    "area": name,
                    "unit_size_mw": a.unit_size_mw,
                    "unit_count": a.unit_count,
                    "availability": a.availability,
                }
                for name, a in zip(network.areas, fleet.areas)
            ],
        },
        resolved,
    )
    if resolved["figures"]:
        report.lole_figure(lole, out / "lole.png", run_stamp=stamp)
    log.info("adequacy: %d samples across %d areas", lole.samples, len(lole.areas))
    return EXIT_OK


# --- parser ---
# All defaults live in DEFAULTS so a config file can supply any of them;
# the parser suppresses unset attributes to keep flag > file > default.

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, help="master RNG seed (default 0)")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip PNG figure rendering")


def build_parser() -> argparse.ArgumentParser:
    kwargs = {"argument_default": argparse.SUPPRESS}
    parser = argparse.ArgumentParser(
        prog="loadgen",
        description="Multivariate load state generation, validation and adequacy",
        **kwargs,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="split a load CSV into train/test", **kwargs)
    p.add_argument("--csv", help="hourly load CSV")
    p.add_argument("--drop", help="comma-separated columns to drop")
    p.add_argument("--test-fraction", type=float, help="default 0.2")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the (C)VAE generator", **kwargs)
    p.add_argument("--train-csv")
    p.add_argument("--normspec", help="normalization spec JSON")
    p.add_argument("--sigma-mode", help="'auto' or 'fixed:<s>' (default auto)")
    p.add_argument("--noise", choices=("noisy", "noise-free"),
                   help="generation noise recorded in the checkpoint")
    p.add_argument("--beta", type=float, help="KL weight (default 1)")
    p.add_argument("--hidden", help="encoder hidden widths (default 24,16)")
    p.add_argument("--latent", type=int, help="default 8")
    p.add_argument("--batch-size", type=int, help="default 64")
    p.add_argument("--iterations", type=int, help="default 20000")
    p.add_argument("--learning-rate", type=float, help="default 1e-4")
    p.add_argument("--conditional", dest="conditional", action="store_true",
                   help="condition on the hour of day (default)")
    p.add_argument("--no-conditional", dest="conditional", action="store_false",
                   help="train a plain VAE")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="sample load states", **kwargs)
    p.add_argument("--model", choices=("cvae", "copula"))
    p.add_argument("--checkpoint")
    p.add_argument("--train-csv", help="training CSV (copula backend)")
    p.add_argument("--count", type=int,
                   help="samples to draw (default: training volume)")
    p.add_argument("--noisy", dest="noise", action="store_const", const="noisy",
                   help="sample from N(mu', sigma')")
    p.add_argument("--noise-free", dest="noise", action="store_const",
                   const="noise-free", help="return mu' directly")
    p.add_argument("--hour", type=int, help="condition every sample on this hour")
    p.add_argument("--match-training-hours", action="store_true",
                   help="replay the training hour histogram")
    p.add_argument("--clip-negative", action="store_true",
                   help="clip generated MW at zero")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="run the three statistical tests", **kwargs)
    p.add_argument("--historical")
    p.add_argument("--generated")
    p.add_argument("--fraction", type=float,
                   help="subsample fraction per repetition (default 0.005)")
    p.add_argument("--ks-repetitions", type=int, help="default 5000")
    p.add_argument("--energy-repetitions", type=int, help="default 1000")
    p.add_argument("--permutations", type=int, help="default 200")
    p.add_argument("--ae-iterations", type=int, help="default 20000")
    p.add_argument("--hidden", help="default 24,16")
    p.add_argument("--latent", type=int, help="default 8")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("adequacy", help="LOLE Monte Carlo", **kwargs)
    p.add_argument("--network", help="network+fleet JSON description")
    p.add_argument("--load-source", choices=("historical", "checkpoint", "copula"))
    p.add_argument("--loads", help="load CSV (historical/copula sources)")
    p.add_argument("--checkpoint")
    p.add_argument("--pool-size", type=int,
                   help="generated load pool size (default 100000)")
    p.add_argument("--samples", type=int, help="default 1000000")
    p.add_argument("--threshold", type=float,
                   help="curtailment counted above this many MW (default 1e-6)")
    p.add_argument("--threads", type=int, help="default 1")
    _add_common(p)
    p.set_defaults(func=cmd_adequacy)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        resolved = _resolve_config(ns.command, ns)
        return ns.func(resolved)
    except (
        UsageError,
        dataset.DatasetError,
        adequacy.AdequacyError,
        copula.CopulaError,
        validation.ValidationError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("internal failure: %s", exc)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
