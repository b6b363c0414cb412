"""Online class-incremental training with and without replay.

Five tasks of two Gaussian classes each arrive one after another.  Without
replay the network forgets earlier tasks almost completely; replaying a
100-sample memory keeps most of them.
"""
import numpy as np

from aser import (
    ClassifierParams,
    RetrievalConfig,
    RetrievalStrategy,
    RngStream,
    TaskStreamSpec,
    TrainConfig,
    UpdateStrategy,
    average_accuracy,
    average_forgetting,
    generate_synthetic_stream,
    train_continual,
)

stream = generate_synthetic_stream(TaskStreamSpec(train_per_class=500), RngStream(0))
print(f"{stream.num_tasks} tasks, {stream.num_classes} classes, dim {stream.dim}")

setups = {
    "fine-tune": (UpdateStrategy.RESERVOIR, RetrievalStrategy.NONE),
    "ER": (UpdateStrategy.RESERVOIR, RetrievalStrategy.RANDOM),
    "ASER_mu": (UpdateStrategy.SV, RetrievalStrategy.ASER_MU),
}
for name, (upd, ret) in setups.items():
    cfg = TrainConfig(update_strategy=upd, retrieval_strategy=ret,
                      retrieval=RetrievalConfig(candidate_size=20))
    params = ClassifierParams.init(stream.dim, cfg.hidden_dim, stream.num_classes, RngStream(1))
    out = train_continual(stream, cfg, params, RngStream(2))
    last = np.round(out.accuracy.rows[-1], 2)
    print(f"{name:9s} A_T={average_accuracy(out.accuracy):.3f} "
          f"F_T={average_forgetting(out.accuracy):.3f}  final row {last}")
