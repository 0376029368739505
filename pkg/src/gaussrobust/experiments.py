"""Grid sweeps with cross-validation selection and noise-resistance curves.

A sweep trains one model per grid value, scores each on the cv split, picks
the best cv accuracy (ties go to the smaller parameter value, i.e. less
smoothing/regularization) and only then touches the test split, exactly
once. Noise curves re-evaluate trained models on perturbed copies of an
evaluation split, aggregating mean/std accuracy over seeded repeats.

Grid points and noise repeats are independent jobs; a bounded thread pool
(workers > 1) may run them concurrently, and results are always gathered in
deterministic grid order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, inject_uniform_noise
from .kernels import KernelModel, KernelSpec, kernel_decision_values, train_ken_guru
from .linear import TrainConfig, train_asvc, train_baseline_svm, train_guru
from .multiclass import multiclass_predict_batch, train_m_guru, train_m_guru_s2
from .robust import LinearModel, MulticlassModel

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "NoiseCurveRow",
    "geometric_grid",
    "accuracy",
    "model_norm",
    "train_algorithm",
    "run_sweep",
    "run_noise_curve",
    "ALGORITHMS",
]

ALGORITHMS = ("guru", "ken-guru", "m-guru", "m-guru-s2", "asvc", "svm")


@dataclass(frozen=True)
class SweepSpec:
    """Geometric grid base**k for k in min_exp..max_exp over one parameter."""

    parameter: str
    base: float = 2.0
    min_exp: int = -6
    max_exp: int = 6
    selection: str = "cv_accuracy"

    def __post_init__(self):
        if self.parameter not in ("sigma", "lambda", "eta0"):
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if not self.base > 1.0:
            raise ValueError("grid base must exceed 1")
        if self.min_exp > self.max_exp:
            raise ValueError("min_exp must not exceed max_exp")
        if self.selection != "cv_accuracy":
            raise ValueError(f"unknown selection rule {self.selection!r}")

    def values(self) -> list[float]:
        return [float(self.base) ** k for k in range(self.min_exp, self.max_exp + 1)]


def geometric_grid(base: float, min_exp: int, max_exp: int) -> list[float]:
    return SweepSpec("sigma", base, min_exp, max_exp).values()


def accuracy(model, dataset: Dataset) -> float:
    """Fraction of correctly predicted labels on a dataset."""
    X = dataset.X
    if isinstance(model, LinearModel):
        predicted = model.predict(X)
    elif isinstance(model, KernelModel):
        predicted = np.where(kernel_decision_values(model, X) >= 0.0, 1, -1)
    elif isinstance(model, MulticlassModel):
        predicted = multiclass_predict_batch(model, X)
    else:
        raise TypeError(f"cannot evaluate {type(model).__name__}")
    return float(np.mean(predicted == dataset.y))


def model_norm(model) -> float:
    """Classifier norm: ||w||, the kernel-maintained nu, or the Frobenius norm."""
    if isinstance(model, LinearModel):
        return model.norm
    if isinstance(model, KernelModel):
        return float(model.nu)
    if isinstance(model, MulticlassModel):
        return float(np.linalg.norm(model.weights))
    raise TypeError(f"no norm for {type(model).__name__}")


def train_algorithm(
    algo: str,
    train: Dataset,
    cfg: TrainConfig,
    *,
    sigma: float = 0.5,
    lam: float = 0.1,
    delta: float = 0.1,
    rounds: int = 8,
    kernel: KernelSpec | None = None,
):
    """Dispatch a training run; returns the trained model."""
    if algo == "guru":
        return train_guru(train, sigma, cfg).final_model
    if algo == "ken-guru":
        if kernel is None:
            raise ValueError("ken-guru needs a kernel spec")
        return train_ken_guru(train, kernel, sigma, cfg)
    if algo == "m-guru":
        return train_m_guru(train, sigma, cfg).final_model
    if algo == "m-guru-s2":
        return train_m_guru_s2(train, sigma, cfg).final_model
    if algo == "asvc":
        return train_asvc(train, delta, lam, rounds, cfg)
    if algo == "svm":
        return train_baseline_svm(train, lam, cfg).final_model
    raise ValueError(f"unknown algorithm {algo!r}")


@dataclass(frozen=True)
class SweepRow:
    parameter: float
    cv_accuracy: float
    test_accuracy: float | None
    final_norm: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    selected_parameter: float
    selected_test_accuracy: float
    selected_model: object


def run_sweep(
    algo: str,
    spec: SweepSpec,
    train: Dataset,
    cv: Dataset,
    test: Dataset,
    cfg: TrainConfig,
    *,
    sigma: float = 0.5,
    lam: float = 0.1,
    delta: float = 0.1,
    rounds: int = 8,
    kernel: KernelSpec | None = None,
    workers: int = 1,
) -> SweepResult:
    """Train per grid value, select by cv accuracy, score the winner on test.

    The test dataset is touched exactly once, for the selected model.

    Sigma sweeps of the robust trainers retune the step size per grid point
    (eta0 / max(1, sigma)): for large sigma both the per-sample gradient and
    the optimal norm scale with sigma, so a rate that is sane at sigma ~ 1
    overshoots the optimum by orders of magnitude at the grid's upper end.
    """
    values = spec.values()

    def one(value: float):
        kwargs = dict(sigma=sigma, lam=lam, delta=delta, rounds=rounds, kernel=kernel)
        run_cfg = cfg
        if spec.parameter == "eta0":
            run_cfg = replace(cfg, eta0=value)
        else:
            kwargs[{"sigma": "sigma", "lambda": "lam"}[spec.parameter]] = value
        if spec.parameter == "sigma" and algo in ("guru", "ken-guru", "m-guru", "m-guru-s2"):
            run_cfg = replace(run_cfg, eta0=run_cfg.eta0 / max(1.0, value))
        model = train_algorithm(algo, train, run_cfg, **kwargs)
        return model, accuracy(model, cv), model_norm(model)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, values))
    else:
        outcomes = [one(v) for v in values]

    best_idx = 0
    for idx in range(1, len(values)):
        if outcomes[idx][1] > outcomes[best_idx][1]:
            best_idx = idx
    selected_model = outcomes[best_idx][0]
    test_acc = accuracy(selected_model, test)

    rows = tuple(
        SweepRow(
            parameter=values[i],
            cv_accuracy=outcomes[i][1],
            test_accuracy=test_acc if i == best_idx else None,
            final_norm=outcomes[i][2],
        )
        for i in range(len(values))
    )
    return SweepResult(
        rows=rows,
        selected_parameter=values[best_idx],
        selected_test_accuracy=test_acc,
        selected_model=selected_model,
    )


@dataclass(frozen=True)
class NoiseCurveRow:
    model_name: str
    split: str
    magnitude: float
    mean_accuracy: float
    std_accuracy: float


def _noise_seed(base_seed: int, split_idx: int, mag_idx: int, repeat: int) -> int:
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(split_idx, mag_idx, repeat))
    return int(seq.generate_state(1, dtype=np.uint64)[0] % (2**63))


def run_noise_curve(
    models: dict[str, object],
    eval_splits: dict[str, Dataset],
    magnitudes: list[float],
    repeats: int = 20,
    seed: int = 0,
    workers: int = 1,
) -> list[NoiseCurveRow]:
    """Mean/std accuracy of each model on noise-perturbed evaluation splits.

    For magnitude 0 the data is untouched, so the row reproduces the clean
    accuracy with zero std. Noise draws are independent across repeats and
    magnitudes but fully determined by (seed, split, magnitude, repeat).
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    jobs = []
    for model_name, model in models.items():
        for split_idx, (split_name, dataset) in enumerate(eval_splits.items()):
            for mag_idx, magnitude in enumerate(magnitudes):
                jobs.append((model_name, model, split_idx, split_name, dataset, mag_idx, magnitude))

    def one(job):
        model_name, model, split_idx, split_name, dataset, mag_idx, magnitude = job
        accs = np.array(
            [
                accuracy(
                    model,
                    inject_uniform_noise(
                        dataset, magnitude, _noise_seed(seed, split_idx, mag_idx, rep)
                    ),
                )
                for rep in range(repeats)
            ]
        )
        return NoiseCurveRow(
            model_name=model_name,
            split=split_name,
            magnitude=magnitude,
            mean_accuracy=float(accs.mean()),
            std_accuracy=float(accs.std()),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, jobs))
    return [one(job) for job in jobs]
