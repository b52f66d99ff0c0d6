"""A close look at the attention scores on a five-node toy.

Every node has two feature vectors (initiator = who it follows, recipient =
who follows it).  For one node and one role, raw scores are computed for each
same-network neighbor and each cross-network anchor partner, then normalized
together by a single softmax, so the partner competes with the social
neighbors for attention mass.

Run with:  python demos/02_attention_inspection.py
"""

import numpy as np

import alignet as al
from alignet.attention import coefficient_sets, raw_intra_initiator
from alignet.model import init_features, init_params

# network 1: node 0 follows 1, 2, 3; network 2: a small cycle; one anchor at 0
g1 = al.DirectedGraph(5, [(0, 1), (0, 2), (0, 3), (4, 0)])
g2 = al.DirectedGraph(4, [(0, 1), (1, 2), (2, 0)])
pair = al.AlignedPair(g1, g2, [(0, 0), (3, 2)])
feats = al.init_features(pair)

cfg = al.RunConfig(d_emb=4, d_hidden=4, heads=1, seed=1)
params = init_params(cfg, feats.net1_in.shape[1], feats.net2_in.shape[1], seed=1)
head = params.layer1[0][0]

# raw score of node 0 toward one followee, straight from the formula
raw = raw_intra_initiator(head, feats.net1_in[0], feats.net1_re[1])
print(f"raw initiator score of node 0 toward node 1: {raw:+.4f}")

# normalized weights over the combined neighborhood (3 followees + 1 partner)
soc, anc = coefficient_sets(pair, feats, head, al.ContributionMode(), "in", 0, 0)
print("social weights:", {k: round(v, 4) for k, v in soc.items()})
print("anchor weights:", {k: round(v, 4) for k, v in anc.items()})
print("total:", round(sum(soc.values()) + sum(anc.values()), 12))

# --- contribution modes --------------------------------------------------------
# The default pairing is social-cross + anchor-direct: a followee contributes
# its recipient features to the follower's initiator embedding, while an
# anchor partner contributes same-role features.  The other pairings are
# available for hypothesis checks and change both scores and aggregation.
for label in ("sc+ad", "sc+ac", "sd+ad", "sd+ac"):
    mode = al.ContributionMode.parse(label)
    soc, anc = coefficient_sets(pair, feats, head, mode, "in", 0, 0)
    print(f"mode {label}: partner weight = {anc[0]:.4f}")

# --- the full forward pass ------------------------------------------------------
emb = al.forward(pair, params, al.ContributionMode(), features=feats)
print("embedding table:", {"net1_in": emb.net1_in.shape, "net2_re": emb.net2_re.shape})
sim = float(emb.net1_in[0] @ emb.net2_in[0] + emb.net1_re[0] @ emb.net2_re[0])
print(f"untrained anchored-pair similarity (node 0 <-> node 0): {sim:+.4f}")
