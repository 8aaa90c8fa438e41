#!/usr/bin/env python3
"""Regenerates the weight-container fixtures in tests/fixtures.

  zero.dgwc             all-zero residual net (identity)
  random.dgwc           small random net, plus random_inputs.f32 / random_outputs.f32
                        computed by the PyTorch reference for the parity test
  lpp_fbp_64.dgwc       LPP net trained FBP -> ground truth at 64x64, 30 views over 180 deg

Usage: make_fixtures.py --dgct build/tools/dgct [--work /tmp/dgct_fixtures] [--epochs 30]
"""

import argparse
import json
import math
import struct
import subprocess
import time
from pathlib import Path

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

MAGIC = b"DGWC"
VERSION = 1


class ResUNet(nn.Module):
    """Same layout and tensor names as dgct::Architecture."""

    def __init__(self, depth=4, channels=(64, 128, 256, 512), convs_per_level=2, residual=True):
        super().__init__()
        self.depth, self.channels, self.cpl, self.residual = depth, list(channels), convs_per_level, residual
        self.convs = nn.ModuleDict()
        for l in range(depth):
            for j in range(convs_per_level):
                cin = channels[l] if j > 0 else (1 if l == 0 else channels[l - 1])
                self.convs[f"enc{l}_conv{j}"] = nn.Conv2d(cin, channels[l], 3, padding=1)
        for l in range(depth - 2, -1, -1):
            self.convs[f"up{l}"] = nn.Conv2d(channels[l + 1], channels[l], 3, padding=1)
            for j in range(convs_per_level):
                cin = 2 * channels[l] if j == 0 else channels[l]
                self.convs[f"dec{l}_conv{j}"] = nn.Conv2d(cin, channels[l], 3, padding=1)
        self.convs["out"] = nn.Conv2d(channels[0], 1, 1)

    def tensor_order(self):
        names = []
        for l in range(self.depth):
            names += [f"enc{l}_conv{j}" for j in range(self.cpl)]
        for l in range(self.depth - 2, -1, -1):
            names.append(f"up{l}")
            names += [f"dec{l}_conv{j}" for j in range(self.cpl)]
        names.append("out")
        return names

    def forward(self, x):
        n = x.shape[-1]
        m = 2 ** (self.depth - 1)
        pad = (-n) % m
        h = F.pad(x, (0, pad, 0, pad), mode="reflect") if pad else x
        skips = []
        for l in range(self.depth):
            if l > 0:
                h = F.max_pool2d(h, 2)
            for j in range(self.cpl):
                h = F.relu(self.convs[f"enc{l}_conv{j}"](h))
            skips.append(h)
        for l in range(self.depth - 2, -1, -1):
            up = F.relu(self.convs[f"up{l}"](F.interpolate(h, scale_factor=2, mode="nearest")))
            h = torch.cat([skips[l], up], dim=1)
            for j in range(self.cpl):
                h = F.relu(self.convs[f"dec{l}_conv{j}"](h))
        corr = self.convs["out"](h)[..., :n, :n]
        return x + corr if self.residual else corr

    def architecture_json(self):
        return {"name": "resunet", "depth": self.depth, "channels": self.channels,
                "convs_per_level": self.cpl, "activation": "relu", "downsample": "maxpool2",
                "upsample": "nearest2+conv3", "residual": self.residual, "in_channels": 1, "out_channels": 1}


def export_dgwc(net, path, metadata):
    tensors, blobs, offset = [], [], 0
    for key in net.tensor_order():
        conv = net.convs[key]
        name = key.replace("_", ".")
        for part, t in (("weight", conv.weight), ("bias", conv.bias)):
            a = t.detach().cpu().numpy().astype("<f4")
            tensors.append({"name": f"{name}.{part}", "shape": list(a.shape), "dtype": "f32", "offset": offset})
            blobs.append(a.tobytes())
            offset += a.nbytes
    manifest = {"architecture": net.architecture_json(), "metadata": metadata, "tensors": tensors,
                "blob_bytes": offset}
    text = json.dumps(manifest, separators=(",", ":")).encode()
    Path(path).write_bytes(MAGIC + struct.pack("<IQ", VERSION, len(text)) + text + b"".join(blobs))


def import_dgwc(path):
    raw = Path(path).read_bytes()
    assert raw[:4] == MAGIC
    version, n = struct.unpack("<IQ", raw[4:16])
    assert version == VERSION
    m = json.loads(raw[16:16 + n])
    a = m["architecture"]
    net = ResUNet(a["depth"], a["channels"], a["convs_per_level"], a["residual"])
    blob = raw[16 + n:]
    state = {}
    for t in m["tensors"]:
        count = int(np.prod(t["shape"]))
        arr = np.frombuffer(blob, "<f4", count, t["offset"]).reshape(t["shape"])
        key, part = t["name"].rsplit(".", 1)
        state[f"convs.{key.replace('.', '_')}.{part}"] = torch.from_numpy(arr.copy())
    net.load_state_dict(state)
    return net, m["metadata"]


def read_f32(path, side):
    return np.fromfile(path, "<f4").reshape(side, side)


def load_split(root, manifest, split, side):
    xs, ys = [], []
    for item in manifest["items"]:
        if item["split"] == split:
            xs.append(read_f32(root / item["coarse_fbp"], side))
            ys.append(read_f32(root / item["gt"], side))
    return torch.from_numpy(np.stack(xs)[:, None]), torch.from_numpy(np.stack(ys)[:, None])


def make_zero(out):
    net = ResUNet(3, (4, 8, 16))
    for p in net.parameters():
        nn.init.zeros_(p)
    export_dgwc(net, out / "zero.dgwc", {"regime": "LPP", "input": "FBP", "K": 0, "nu": 0.0,
                                          "geometry_fingerprint": ""})


def make_random(out):
    torch.manual_seed(1234)
    net = ResUNet(3, (4, 8, 16))
    with torch.no_grad():
        for p in net.parameters():
            p.normal_(0.0, 0.3)
    export_dgwc(net, out / "random.dgwc", {"regime": "LPP", "input": "FBP", "K": 0, "nu": 0.0,
                                            "geometry_fingerprint": ""})
    net, _ = import_dgwc(out / "random.dgwc")
    g = torch.Generator().manual_seed(99)
    # sides 16 (a multiple of 4), 18 and 21 (reflect padded)
    inputs, outputs = [], []
    for side in (16, 18, 21):
        x = torch.rand(1, 1, side, side, generator=g, dtype=torch.float32)
        with torch.no_grad():
            y = net(x)
        inputs.append(x.numpy().astype("<f4").ravel())
        outputs.append(y.numpy().astype("<f4").ravel())
    np.concatenate(inputs).tofile(out / "random_inputs.f32")
    np.concatenate(outputs).tofile(out / "random_outputs.f32")


def make_trained(out, dgct, work, epochs, count):
    root = work / "lpp64"
    if not (root / "manifest.json").exists():
        subprocess.run([dgct, "simulate", "--n", str(count), "--n-test", "50", "--side", "64", "--angles", "30",
                        "--range", "180", "--nu", "0.01", "--seed", "500000", "--out", str(root)], check=True)
    manifest = json.loads((root / "manifest.json").read_text())
    xtr, ytr = load_split(root, manifest, "train", 64)
    xte, yte = load_split(root, manifest, "test", 64)

    torch.manual_seed(0)
    net = ResUNet(4, (16, 32, 64, 128))
    opt = torch.optim.Adam(net.parameters(), lr=1e-3)
    batch = 16
    steps = epochs * math.ceil(len(xtr) / batch)
    sched = torch.optim.lr_scheduler.OneCycleLR(opt, max_lr=2e-3, total_steps=steps)
    t0 = time.time()
    for ep in range(epochs):
        net.train()
        perm = torch.randperm(len(xtr))
        total = 0.0
        for i in range(0, len(xtr), batch):
            idx = perm[i:i + batch]
            x, y = xtr[idx], ytr[idx]
            # flips keep the fan-beam statistics close enough for augmentation
            if torch.rand(1).item() < 0.5:
                x, y = x.flip(-1), y.flip(-1)
            loss = F.mse_loss(net(x), y)
            opt.zero_grad()
            loss.backward()
            opt.step()
            sched.step()
            total += loss.item() * len(idx)
        net.eval()
        with torch.no_grad():
            test = F.mse_loss(net(xte), yte).item()
        print(f"epoch {ep + 1}/{epochs} train {total / len(xtr):.3e} test {test:.3e} "
              f"({time.time() - t0:.0f}s)", flush=True)

    geometry = manifest["geometry"]
    export_dgwc(net, out / "lpp_fbp_64.dgwc",
                {"regime": "LPP", "input": "FBP", "K": 0, "nu": 0.01,
                 "geometry_fingerprint": geometry.get("fingerprint", "")})


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dgct", required=True, help="path to the dgct binary")
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "fixtures"))
    ap.add_argument("--work", default="/tmp/dgct_fixtures")
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--count", type=int, default=1550)
    ap.add_argument("--skip-training", action="store_true")
    args = ap.parse_args()
    torch.set_num_threads(max(1, torch.get_num_threads()))
    out, work = Path(args.out), Path(args.work)
    out.mkdir(parents=True, exist_ok=True)
    work.mkdir(parents=True, exist_ok=True)
    make_zero(out)
    make_random(out)
    if not args.skip_training:
        make_trained(out, args.dgct, work, args.epochs, args.count)


if __name__ == "__main__":
    main()
