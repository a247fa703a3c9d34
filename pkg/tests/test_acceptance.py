"""Acceptance suite: one test per criterion, each printing a PASS line.

Run as:  pytest tests/test_acceptance.py -v -s
"""

import json
import os
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from loadgen import adequacy, cli, cvae, dataset, nets, qp, validation

from conftest import make_load_frame, mixture_data


def report(criterion, detail):
    print(f"\n[criterion {criterion}] PASS: {detail}")


# --- criterion 1: gradient correctness ---

def test_criterion_1_gradient_correctness():
    start = time.monotonic()
    config = cvae.ModelConfig(
        input_dim=6, cond_dim=2, encoder_hidden=(24, 16), latent_dim=8,
        strategy=cvae.StrategyConfig(sigma_mode="auto", noise="noisy", beta=1.0),
    )
    ss = np.random.SeedSequence(123)
    s_enc, s_dec, s_data = ss.spawn(3)
    encoder = nets.init_params(config.encoder_specs(), s_enc)
    decoder = nets.init_params(config.decoder_specs(), s_dec)
    rng = np.random.default_rng(s_data)
    batch = 16
    x = rng.uniform(0, 1, (batch, 6))
    hours = rng.integers(0, 24, batch)
    c = dataset.hour_conditions(hours)
    eps = rng.standard_normal((batch, config.latent_dim))

    _, g_enc, g_dec = cvae.batch_loss_and_grads(encoder, decoder, config, x, c, eps)

    def loss_with(enc_vec, dec_vec):
        loss, _, _ = cvae.batch_loss_and_grads(
            nets.unpack(encoder, enc_vec), nets.unpack(decoder, dec_vec),
            config, x, c, eps,
        )
        return loss

    h = 1e-5
    results = {}
    enc_vec, dec_vec = nets.pack(encoder), nets.pack(decoder)
    for name, vec, grads, fixed in (
        ("encoder", enc_vec, g_enc, dec_vec),
        ("decoder", dec_vec, g_dec, enc_vec),
    ):
        analytic = np.concatenate(
            [np.concatenate([w.ravel(), b.ravel()])
             for w, b in zip(grads.weights, grads.biases)]
        )
        numeric = np.empty_like(vec)
        for i in range(vec.size):
            up, down = vec.copy(), vec.copy()
            up[i] += h
            down[i] -= h
            if name == "encoder":
                numeric[i] = (loss_with(up, fixed) - loss_with(down, fixed)) / (2 * h)
            else:
                numeric[i] = (loss_with(fixed, up) - loss_with(fixed, down)) / (2 * h)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        rel = np.abs(analytic - numeric) / denom
        results[name] = (float((rel <= 1e-4).mean()), float(rel.max()))

    elapsed = time.monotonic() - start
    for name, (frac, worst) in results.items():
        assert frac >= 0.95, f"{name}: only {frac:.1%} of params within 1e-4"
        assert worst <= 1e-3, f"{name}: worst relative error {worst:.2e}"
    assert elapsed < 30.0
    report(1, f"encoder {results['encoder'][0]:.1%} within 1e-4 "
              f"(worst {results['encoder'][1]:.1e}), decoder "
              f"{results['decoder'][0]:.1%} (worst {results['decoder'][1]:.1e}), "
              f"{elapsed:.1f}s")


# --- criterion 2: KL closed form vs Monte Carlo ---

def test_criterion_2_kl_closed_form():
    start = time.monotonic()
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(50):
        mu = rng.uniform(-2.0, 2.0, 8)
        sigma = rng.uniform(0.2, 3.0, 8)
        z = mu + rng.standard_normal((1_000_000, 8)) * sigma
        log_q = -0.5 * (((z - mu) / sigma) ** 2 + np.log(2 * np.pi * sigma**2))
        log_p = -0.5 * (z**2 + np.log(2 * np.pi))
        mc = float(np.mean(np.sum(log_q - log_p, axis=1)))
        closed = cvae.kl_loss(mu[None, :], sigma[None, :])
        rel = abs(closed - mc) / abs(mc)
        worst = max(worst, rel)
        assert rel <= 0.02, f"closed {closed:.4f} vs MC {mc:.4f}"
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    report(2, f"50 pairs, worst relative gap {worst:.2%}, {elapsed:.1f}s")


# --- criterion 3: QP vs brute-force oracle ---

def test_criterion_3_qp_oracle_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(42)
    worst_dc, worst_kkt = 0.0, 0.0
    for _ in range(100):
        d = rng.uniform(0, 1000, 2).round(1)
        g = rng.uniform(0, 1200, 2).round(1)
        cap = rng.uniform(0, 300, 2).round(1)
        problem = qp.build_curtailment_qp(d, g, [(0, 1)], [-cap[0]], [cap[1]])
        sol = qp.solve(problem)
        oracle = qp.brute_force_oracle(problem, 0.1)
        assert sol.status == "optimal"
        dc = float(np.abs(sol.curtailment - oracle.curtailment).max())
        worst_dc = max(worst_dc, dc)
        worst_kkt = max(worst_kkt, sol.kkt_residual)
        assert dc <= 0.2, f"curtailment gap {dc:.3f} MW"
        assert (sol.flows >= problem.flow_lo - 1e-7).all()
        assert (sol.flows <= problem.flow_hi + 1e-7).all()
        assert sol.kkt_residual <= 1e-7
    elapsed = time.monotonic() - start
    assert elapsed < 20.0
    report(3, f"100 instances, worst |dc| {worst_dc:.3f} MW, "
              f"worst KKT {worst_kkt:.1e}, {elapsed:.1f}s")


# --- criterion 4: Monte Carlo LOLE vs exact binomial tail ---

def test_criterion_4_exact_lole_oracle():
    start = time.monotonic()
    network = adequacy.NetworkModel(["A"])
    fleet = adequacy.GenerationFleet([adequacy.FleetArea(100.0, 10, 0.83)])
    pool = np.full((10, 1), 850.0)
    rep = adequacy.estimate_lole(network, fleet, pool, 200_000, seed=2024)
    exact = adequacy.exact_lole_single_node(fleet.areas[0], [(850.0, 1.0)])
    assert exact == pytest.approx(8760 * stats.binom.cdf(8, 10, 0.83))
    gap = abs(rep.lole[0] - exact)
    assert gap < 3 * rep.std_error[0], (
        f"MC {rep.lole[0]:.1f} vs exact {exact:.1f}, SE {rep.std_error[0]:.2f}"
    )
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report(4, f"MC {rep.lole[0]:.1f} h/y vs exact {exact:.1f} h/y "
              f"(gap {gap:.1f} < 3SE={3 * rep.std_error[0]:.1f}), {elapsed:.1f}s")


# --- criterion 5: test calibration under the null ---

def _correlated_factor():
    return np.linalg.cholesky(0.5 * np.eye(8) + 0.5 * np.ones((8, 8)))


def test_criterion_5_null_calibration():
    start = time.monotonic()
    L = _correlated_factor()
    pop_n, fraction, reps = 20_000, 0.1, 2000

    # K-S: each repetition draws fresh populations from the synthetic
    # distribution (n = 20,000 each) and subsamples them; a fixed pool
    # would let the test resolve that pool's own sampling noise
    p_values = np.empty((reps, 8))
    master = np.random.SeedSequence(101)
    for rep, child in enumerate(master.spawn(reps)):
        rng = np.random.default_rng(child)
        m = int(fraction * pop_n)
        pop_a = rng.standard_normal((pop_n, 8)) @ L.T
        pop_b = rng.standard_normal((pop_n, 8)) @ L.T
        rows_a = rng.choice(pop_n, m, replace=False)
        rows_b = rng.choice(pop_n, m, replace=False)
        for j in range(8):
            p_values[rep, j] = validation.ks_two_sample(
                pop_a[rows_a, j], pop_b[rows_b, j]
            )[1]
    ks_sups = [
        validation.PValueCurve(p_values[:, j], reps, fraction)
        .sup_distance_from_uniform()
        for j in range(8)
    ]
    assert max(ks_sups) < 0.05, f"K-S sup distances {np.round(ks_sups, 4)}"

    rng = np.random.default_rng(3)
    pool_a = rng.standard_normal((pop_n, 8)) @ L.T
    pool_b = rng.standard_normal((pop_n, 8)) @ L.T
    energy_curve = validation.energy_repeated(
        pool_a, pool_b, 0.005, repetitions=500, seed=43, permutations=200
    )
    energy_sup = energy_curve.sup_distance_from_uniform()
    assert energy_sup < 0.07, f"energy sup distance {energy_sup:.4f}"

    elapsed = time.monotonic() - start
    assert elapsed < 15 * 60
    report(5, f"K-S max sup {max(ks_sups):.4f} < 0.05 over {reps} reps/dim; "
              f"energy sup {energy_sup:.4f} < 0.07 over 500 reps; {elapsed:.0f}s")


# --- criteria 6 and 7 share the trained recovery model ---

@pytest.fixture(scope="module")
def recovery_setup():
    x_mw, hours = mixture_data(10_000, seed=11)
    lo, hi = x_mw.min(axis=0), x_mw.max(axis=0)
    x = (x_mw - lo) / (hi - lo)
    conds = dataset.hour_conditions(hours)
    config = cvae.ModelConfig(
        input_dim=5, cond_dim=2, encoder_hidden=(24, 16), latent_dim=8,
        strategy=cvae.StrategyConfig(sigma_mode="auto", noise="noisy", beta=1.0),
        batch_size=64, iterations=20_000, learning_rate=1e-4,
    )
    return x, hours, conds, config


def test_criterion_6_synthetic_recovery(recovery_setup):
    start = time.monotonic()
    x, hours, conds, config = recovery_setup
    model = cvae.train(x, conds, config, seed=7, hours=hours)
    gen_hours = cvae.schedule_hours(model.hour_histogram, 10_000)
    samples = cvae.generate(model, 10_000, gen_hours, seed=99)

    span = x.max(axis=0) - x.min(axis=0)
    mean_err = np.abs(samples.mean(axis=0) - x.mean(axis=0)) / span
    corr_dev = np.abs(
        np.corrcoef(samples, rowvar=False) - np.corrcoef(x, rowvar=False)
    ).max()
    elapsed = time.monotonic() - start
    assert (mean_err < 0.05).all(), f"mean errors {np.round(mean_err, 4)}"
    assert corr_dev < 0.15, f"correlation deviation {corr_dev:.3f}"
    assert elapsed < 5 * 60
    report(6, f"mean err max {mean_err.max():.2%} of range, "
              f"corr dev {corr_dev:.3f}, {elapsed:.0f}s")


def test_criterion_7_noise_ordering(recovery_setup):
    x, hours, conds, config = recovery_setup

    def mean_pairwise_corr(samples):
        corr = np.corrcoef(samples, rowvar=False)
        d = corr.shape[0]
        return (corr.sum() - d) / (d * d - d)

    wins = 0
    pairs = []
    for seed in range(1, 6):
        model = cvae.train(x, conds, config, seed=seed, hours=hours)
        gen_hours = cvae.schedule_hours(model.hour_histogram, 5_000)
        noisy = cvae.generate(model, 5_000, gen_hours, seed=500 + seed)
        quiet_model = replace(
            model,
            config=replace(
                model.config,
                strategy=replace(model.config.strategy, noise="noise-free"),
            ),
        )
        quiet = cvae.generate(quiet_model, 5_000, gen_hours, seed=500 + seed)
        c_noisy, c_quiet = mean_pairwise_corr(noisy), mean_pairwise_corr(quiet)
        pairs.append((c_quiet, c_noisy))
        wins += c_quiet >= c_noisy
    assert wins == 5, f"noise-free >= noisy in only {wins}/5 runs: {pairs}"
    report(7, "noise-free mean pairwise correlation >= noisy in 5/5 seeds "
              + str([f"{q:.3f}>={n:.3f}" for q, n in pairs]))


# --- criterion 8: strategy-objective equivalence ---

def test_criterion_8_strategy_objective_equivalence():
    s = 0.1
    config_auto = cvae.ModelConfig(
        input_dim=4, cond_dim=0, encoder_hidden=(12, 8), latent_dim=3,
        strategy=cvae.StrategyConfig(sigma_mode="auto", beta=1.0),
    )
    config_fixed = replace(
        config_auto,
        strategy=cvae.StrategyConfig(sigma_mode="fixed", fixed_sigma=s, beta=1.0),
    )
    ss = np.random.SeedSequence(55)
    s_enc, s_dec = ss.spawn(2)
    encoder = nets.init_params(config_auto.encoder_specs(), s_enc)
    decoder = nets.init_params(config_auto.decoder_specs(), s_dec)
    # pin the sigma' head to output log(s^2) so the auto objective reduces
    # to the fixed objective plus a constant
    d = config_auto.input_dim
    decoder.weights[-1][d:, :] = 0.0
    decoder.biases[-1][d:] = np.log(s**2)

    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(20):
        batch = 16
        x = rng.uniform(0, 1, (batch, 4))
        eps = rng.standard_normal((batch, 3))
        loss_a, ge_a, gd_a = cvae.batch_loss_and_grads(
            encoder, decoder, config_auto, x, None, eps
        )
        loss_f, ge_f, gd_f = cvae.batch_loss_and_grads(
            encoder, decoder, config_fixed, x, None, eps
        )
        # loss gap equals the dropped constant (B*d/2) log s^2 per batch mean
        expected_gap = 0.5 * d * np.log(s**2)
        assert loss_a - loss_f == pytest.approx(expected_gap, rel=1e-12)
        for ga, gf in zip(ge_a.weights + ge_a.biases, ge_f.weights + ge_f.biases):
            worst = max(worst, float(np.abs(ga - gf).max()))
        for layer, (ga, gf) in enumerate(zip(gd_a.weights, gd_f.weights)):
            if layer == len(gd_a.weights) - 1:
                ga, gf = ga[:d], gf[:d]  # mu' head rows; sigma' head differs by design
            worst = max(worst, float(np.abs(ga - gf).max()))
        for layer, (ga, gf) in enumerate(zip(gd_a.biases, gd_f.biases)):
            if layer == len(gd_a.biases) - 1:
                ga, gf = ga[:d], gf[:d]
            worst = max(worst, float(np.abs(ga - gf).max()))
    assert worst <= 1e-10, f"gradient gap {worst:.2e}"
    report(8, f"20 batches, max shared-parameter gradient gap {worst:.1e}")


# --- criterion 9: end-to-end reproducibility ---

def _run_pipeline(run_dir, csv_path, network_path, seed, monkeypatch):
    # identical configs (shared absolute inputs, relative inter-stage paths),
    # executed from per-run working directories
    run_dir.mkdir(parents=True, exist_ok=True)
    monkeypatch.chdir(run_dir)
    fast = ["--hidden", "8,4", "--latent", "2", "--iterations", "200",
            "--learning-rate", "1e-3", "--no-figures"]
    assert cli.main(["ingest", "--csv", str(csv_path), "--seed", str(seed),
                     "--out", "ingest"]) == 0
    assert cli.main(["train", "--train-csv", "ingest/train.csv",
                     "--normspec", "ingest/normspec.json",
                     "--seed", str(seed), "--out", "model", *fast]) == 0
    assert cli.main(["generate", "--checkpoint", "model/checkpoint.json",
                     "--match-training-hours", "--seed", str(seed),
                     "--out", "gen", "--no-figures"]) == 0
    assert cli.main(["validate", "--historical", "ingest/train.csv",
                     "--generated", "gen/samples.csv",
                     "--fraction", "0.05", "--ks-repetitions", "40",
                     "--energy-repetitions", "15", "--permutations", "40",
                     "--ae-iterations", "150", "--hidden", "8,4", "--latent", "2",
                     "--seed", str(seed), "--out", "validate",
                     "--no-figures"]) == 0
    assert cli.main(["adequacy", "--network", str(network_path),
                     "--loads", "ingest/train.csv",
                     "--samples", "20000", "--seed", str(seed),
                     "--out", "adequacy", "--no-figures"]) == 0
    return [
        run_dir / p for p in (
            "ingest/train.csv", "ingest/test.csv", "model/loss_trace.csv",
            "gen/samples.csv", "validate/ks_pvalues.csv",
            "validate/energy_pvalues.csv", "validate/ae_errors.csv",
            "adequacy/lole.csv",
        )
    ]


def test_criterion_9_reproducibility(tmp_path, monkeypatch):
    csv_path = tmp_path / "loads.csv"
    make_load_frame(6 * 168, seed=31).to_csv(csv_path, index=False)
    network_path = tmp_path / "network.json"
    network_path.write_text(json.dumps({
        "areas": ["NL", "DE"],
        "edges": [{"from": "NL", "to": "DE", "forward_mw": 60.0,
                   "backward_mw": 60.0}],
        "fleet": {
            "NL": {"conventional_mw": 470.0, "wind_nameplate_mw": 400.0},
            "DE": {"conventional_mw": 640.0, "wind_nameplate_mw": 500.0},
        },
    }))
    files_a = _run_pipeline(tmp_path / "run_a", csv_path, network_path, 77,
                            monkeypatch)
    files_b = _run_pipeline(tmp_path / "run_b", csv_path, network_path, 77,
                            monkeypatch)
    for fa, fb in zip(files_a, files_b):
        assert fa.read_bytes() == fb.read_bytes(), f"{fa.name} differs"
    report(9, f"{len(files_a)} primary CSV outputs byte-identical across two runs")


# --- criterion 10: optional replication hook (not gating) ---

@pytest.mark.skipif(
    "LOADGEN_OPSD_CSV" not in os.environ,
    reason="optional replication hook: set LOADGEN_OPSD_CSV to an OPSD-format CSV",
)
def test_criterion_10_replication_hook(tmp_path):
    csv_path = os.environ["LOADGEN_OPSD_CSV"]
    ds = dataset.load_csv(csv_path)
    train, _ = dataset.split_weekly_blocks(ds, 0.2, seed=1)
    spec = dataset.fit_minmax(train)
    normed = dataset.normalize(train, spec)
    hours = train.hours()
    conds = dataset.hour_conditions(hours)

    def sup_after_generation(model, label):
        gen_hours = cvae.schedule_hours(model.hour_histogram, train.n)
        samples = cvae.generate(model, train.n, gen_hours, seed=5) \
            if model.config.cond_dim else cvae.generate(model, train.n, None, seed=5)
        ks = validation.ks_repeated(normed.values, samples, 0.005, 500, seed=9)
        ks_sup = float(np.mean([c.sup_distance_from_uniform() for c in ks]))
        energy = validation.energy_repeated(
            normed.values, samples, 0.005, 200, seed=10, permutations=200
        )
        print(f"  {label}: mean K-S sup {ks_sup:.3f}, "
              f"energy sup {energy.sup_distance_from_uniform():.3f}")
        return ks_sup, energy.sup_distance_from_uniform()

    config = cvae.ModelConfig(input_dim=train.d, cond_dim=2)
    model = cvae.train(normed.values, conds, config, seed=3, hours=hours)
    noisy = sup_after_generation(model, "CVAE noisy")
    quiet_model = replace(
        model,
        config=replace(model.config,
                       strategy=replace(model.config.strategy, noise="noise-free")),
    )
    quiet = sup_after_generation(quiet_model, "CVAE noise-free")
    vae_config = replace(config, cond_dim=0)
    vae = cvae.train(normed.values, None, vae_config, seed=3, hours=hours)
    vae_sup = sup_after_generation(vae, "VAE noisy")

    assert noisy[0] <= quiet[0], "K-S: noisy should beat noise-free"
    assert noisy[1] <= quiet[1], "energy: noisy should beat noise-free"
    assert noisy[0] <= vae_sup[0] + 0.05, "CVAE should be at least VAE-level"
    report(10, "qualitative Fig-4 orderings reproduced on user data")
