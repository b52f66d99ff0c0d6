"""Training mechanics: the loss surface, exact gradients, Adam, checkpoints.

Gradients come from a small built-in reverse-mode tape, not a framework; this
script shows the pieces the trainer is made of, then runs the packaged loop.

Run with:  python demos/03_training_walkthrough.py  (about half a minute)
"""

import os
import tempfile

import numpy as np

import alignet as al
from alignet.graphs import message_graph
from alignet.model import init_features, init_params, iter_params
from alignet.train import AdamState, adam_step, backward, save_checkpoint, load_checkpoint

pair = al.generate_synthetic(30, 30, 1.0, al.DegreeParams(out_degree=3), 0.0, seed=5)
cfg = al.RunConfig(d_emb=8, d_hidden=8, heads=2, lr=0.01, epochs=150,
                   dropout=0.2, lam=0.8, seed=5)
split = al.make_split(pair, cfg.lam, cfg.seed)

# --- one manual optimization step ---------------------------------------------
msg = message_graph(pair, split)
feats = init_features(msg)
params = init_params(cfg, feats.net1_in.shape[1], feats.net2_in.shape[1])
state = AdamState.create(params, lr=cfg.lr)

breakdown, grads = backward(msg, split, params, cfg, rng=np.random.default_rng(0))
print("initial loss:", round(breakdown.total, 3))
print("  components: soc1=%.2f soc2=%.2f anchor=%.2f reg=%.2f"
      % (breakdown.soc1, breakdown.soc2, breakdown.anchor, breakdown.reg))
gnorm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
print("  gradient norm over %d tensors: %.3f" % (len(grads), gnorm))
adam_step(params, grads, state)
after, _ = backward(msg, split, params, cfg, rng=np.random.default_rng(0))
print("after one Adam step:", round(after.total, 3))

# --- the packaged loop -----------------------------------------------------------
params, emb, trace = al.fit(pair, split, cfg)
print(f"\nfit: {len(trace)} epochs, loss {trace[0].total:.1f} -> {trace[-1].total:.1f}")

report = al.evaluate(pair, split, emb, cfg)
print(f"test AUC: soc1={report.auc_soc1:.3f} soc2={report.auc_soc2:.3f} "
      f"anchor={report.auc_anchor:.3f}")

# --- persistence -----------------------------------------------------------------
tmp = tempfile.mkdtemp(prefix="alignet_demo_")
trace_path = os.path.join(tmp, "trace.csv")
al.write_loss_trace(trace, trace_path)
print("loss trace written to", trace_path)

sink = {}
params, emb, trace = al.fit(pair, split, cfg.with_(epochs=10), state_sink=sink)
ck = os.path.join(tmp, "model.npz")
save_checkpoint(ck, params, sink["adam"], sink["epoch"])
p2, s2, done = load_checkpoint(ck)
print(f"checkpoint round trip: epoch={done}, adam step={s2.step}")
resumed, _, more = al.fit(pair, split, cfg.with_(epochs=20), init=(p2, s2, done))
print(f"resumed for {len(more)} additional epochs")
