"""Training curves rendered to image files (non-interactive backend)."""
from pathlib import Path
from typing import Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.domain.exceptions import NoDataError, StorageError  # noqa: E402
from src.infrastructure.reporting.summary import EpochSummary  # noqa: E402

REWARD_PLOT = "reward_vs_epoch.png"
IG_PLOT = "ig_vs_epoch.png"


def _line_plot(xs: Sequence[int], ys: Sequence[float], ylabel: str, title: str, path: Path) -> Path:
    figure, axes = plt.subplots(figsize=(6, 4))
    try:
        axes.plot(xs, ys, marker="o", markersize=3)
        axes.set_xlabel("epoch")
        axes.set_ylabel(ylabel)
        axes.set_title(title)
        axes.grid(alpha=0.3)
        figure.tight_layout()
        figure.savefig(path, dpi=100)
    except OSError as exc:
        raise StorageError(f"cannot write plot {path}: {exc}") from exc
    finally:
        plt.close(figure)
    return path


def plot_training_curves(epochs: Sequence[EpochSummary], out_dir: Path) -> Tuple[Path, Path]:
    """Reward-vs-epoch and IG-vs-epoch curves."""
    if not epochs:
        raise NoDataError("no epochs to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xs = [e.epoch for e in epochs]
    reward = _line_plot(
        xs, [e.mean_reward for e in epochs], "mean turn reward", "Reward per epoch", out_dir / REWARD_PLOT
    )
    ig = _line_plot(
        xs, [e.mean_episode_ig for e in epochs], "mean episode IG", "Episode IG per epoch", out_dir / IG_PLOT
    )
    return reward, ig
