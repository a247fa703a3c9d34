import numpy as np
import pandas as pd
import pytest

from loadgen import cvae


def make_load_frame(n_hours, areas=("NL", "DE", "FR"), seed=0, start="2015-01-01"):
    """Synthetic hourly load table with a daily profile per area."""
    rng = np.random.default_rng(seed)
    ts = pd.date_range(start, periods=n_hours, freq="h")
    hours = ts.hour.to_numpy()
    data = {}
    for k, area in enumerate(areas):
        base = 300.0 + 150.0 * k
        amp = 60.0 + 20.0 * k
        prof = base + amp * np.sin(2 * np.pi * (hours - 3 * k) / 24)
        data[area] = prof + rng.normal(0, 15.0, n_hours)
    frame = pd.DataFrame(data)
    frame.insert(0, "timestamp", ts.strftime("%Y-%m-%dT%H:%M:%S"))
    return frame


@pytest.fixture
def toy_csv(tmp_path):
    path = tmp_path / "loads.csv"
    make_load_frame(6 * 168, seed=1).to_csv(path, index=False)
    return path


def quick_model_config(d, cond_dim=2, strategy=None, iterations=400):
    """Small config for tests that need a trained model fast."""
    return cvae.ModelConfig(
        input_dim=d,
        cond_dim=cond_dim,
        encoder_hidden=(10, 6),
        latent_dim=3,
        strategy=strategy or cvae.StrategyConfig(),
        batch_size=32,
        iterations=iterations,
        learning_rate=1e-3,
    )


def mixture_data(n, seed):
    """5-dim hour-conditioned Gaussian mixture used by the recovery tests."""
    rng = np.random.default_rng(seed)
    hours = rng.integers(0, 24, n)
    base = np.array([400.0, 600.0, 300.0, 800.0, 500.0])
    amp = np.array([120.0, 150.0, 80.0, 200.0, 90.0])
    phase = np.array([0.0, 3.0, 6.0, 9.0, 12.0])
    mean = base + amp * np.sin(2 * np.pi * (hours[:, None] - phase) / 24)
    comp = rng.random(n) < 0.4
    offset = np.where(comp[:, None], 60.0, -40.0) * np.array([1.0, 0.8, 1.2, 0.9, 1.1])
    shared = rng.standard_normal((n, 1))
    noise = 25.0 * (0.8 * shared + 0.6 * rng.standard_normal((n, 5)))
    return mean + offset + noise, hours
