"""
Training the flow classifier
============================

Label complete TCP flows from synthetic scenarios, fit a small CART tree and
check it on scenarios it never saw.
"""

from botnet_forensics.model import FEATURE_NAMES
from botnet_forensics.pipeline import labeled_flows
from botnet_forensics.synth import ScenarioConfig, generate_scenario
from botnet_forensics.tree import Label, Split, accuracy, train_tree


def rows(seeds):
    out = []
    for s in seeds:
        trace, truth = generate_scenario(ScenarioConfig(n_background_hosts=30, seed=s))
        out.extend(labeled_flows(trace, truth))
    return out


train, test = rows(range(4)), rows(range(100, 103))
print(len(train), "training flows,", sum(l is Label.BOT for _, l in train), "of them C&C")

model = train_tree(train, max_depth=4)
print("depth", model.depth(), "nodes", len(model.nodes))

##############################################################################
# The root split tells which feature separates the classes best.
root = model.nodes[0]
if isinstance(root, Split):
    print("root:", FEATURE_NAMES[root.feature], "<=", round(root.threshold, 3))

print("held-out accuracy:", round(accuracy(model, test), 4))
