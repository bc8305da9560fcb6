"""Writes shim_bundle/: a bundle laid out exactly as the Python capture shim
writes it (last-prompt-token policy, template hash in provenance). Checked in
as a golden fixture; rerun only if the format version changes."""
import hashlib, json, os
import numpy as np

out = os.path.join(os.path.dirname(__file__), "shim_bundle")
os.makedirs(out, exist_ok=True)
L, N, d, pairs = 3, 12, 4, 6
template = "<s>[INST] {instruction} [/INST]"
rows = np.arange(N)[:, None]
cols = np.arange(d)[None, :]
files = []
for l in range(L):
    h = np.sin(0.7 * rows + 1.3 * cols + 0.5 * l) * 0.5
    if l == 2:
        h[:pairs, 0] += 3.0
    name = f"layer_{l:02d}.f32"
    h.astype("<f4").tofile(os.path.join(out, name))
    files.append(name)
manifest = {
    "format_version": "1",
    "model_id": "tiny-test-checkpoint",
    "num_layers": L,
    "hidden_dim": d,
    "num_rows": N,
    "labels": [1] * pairs + [0] * pairs,
    "pairing": [[i, pairs + i] for i in range(pairs)],
    "token_policy": "last-prompt-token",
    "positive_means": "benign",
    "dtype": "f32le",
    "layer_files": files,
    "provenance": {
        "generator": "capture_shim",
        "template_sha256": hashlib.sha256(template.encode()).hexdigest(),
    },
}
with open(os.path.join(out, "manifest.json"), "w") as f:
    json.dump(manifest, f, indent=2)
    f.write("\n")
