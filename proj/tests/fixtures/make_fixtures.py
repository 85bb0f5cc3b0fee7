#!/usr/bin/env python3
# Copyright (c) 2026, The tara-toolkit Authors
# SPDX-License-Identifier: Apache-2.0
#
# Regenerates the committed split and embedding-file fixtures. Written against
# the file formats only; it shares no code with the C++ library.
import json
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))


def split_fixture():
    verbs = [("open", "close"), ("push", "pull"), ("fold", "unfold"), ("lift", "drop")]
    items = []
    for pid, names in enumerate(verbs, 1):
        for side, name in zip("ab", names):
            for v in range(3):
                items.append({"id": f"v_{name}_{v}", "kind": "video", "class_label": name, "pair_id": pid, "side": side})
            for t in range(2):
                items.append({"id": f"t_{name}_{t}", "kind": "text", "class_label": name, "pair_id": pid, "side": side})
    assert len(items) == 40
    with open(os.path.join(HERE, "splits", "items.jsonl"), "w") as f:
        for it in items:
            f.write(json.dumps(it, separators=(",", ":")) + "\n")

    for direction, qkind in (("t2v", "text"), ("v2t", "video")):
        queries = [it for it in items if it["kind"] == qkind]
        gallery = [it for it in items if it["kind"] != qkind]
        for split in ("chiral", "non_chiral", "all"):
            qs = []
            for q in queries:
                opp = [g for g in gallery if g["pair_id"] == q["pair_id"] and g["side"] != q["side"]]
                same = [g for g in gallery if g["class_label"] == q["class_label"]]
                if split == "chiral":
                    keep = same + opp
                elif split == "non_chiral":
                    keep = [g for g in gallery if g not in opp]
                else:
                    keep = list(gallery)
                keep.sort(key=gallery.index)
                qs.append({"id": q["id"], "candidates": [g["id"] for g in keep],
                           "relevant": [g["id"] for g in keep if g in same]})
            task = {"direction": direction, "split": split, "gallery": [g["id"] for g in gallery], "queries": qs}
            with open(os.path.join(HERE, "splits", f"{direction}_{split}.json"), "w") as f:
                json.dump(task, f, indent=2)
                f.write("\n")


def emb_fixture():
    rows = [[1.0, 0.0, 0.0, 0.0], [0.0, -0.5, 0.5, 0.0], [0.1, 0.2, 0.3, 0.4]]
    ids = ["alpha", "beta", "gamma"]
    payload = b"".join(struct.pack("<4f", *r) for r in rows)
    header = struct.pack("<8sIIIBB2x", b"TARAEMB1", 1, len(rows), 4, 0, 0)
    assert len(header) == 24
    with open(os.path.join(HERE, "cross.emb"), "wb") as f:
        f.write(header + payload)
    with open(os.path.join(HERE, "cross.emb.ids.jsonl"), "w") as f:
        for i, name in enumerate(ids):
            f.write(json.dumps({"row": i, "id": name}, separators=(",", ":")) + "\n")
    bits = [[struct.unpack("<I", struct.pack("<f", x))[0] for x in r] for r in rows]
    with open(os.path.join(HERE, "cross_expected.json"), "w") as f:
        json.dump({"ids": ids, "dim": 4, "normalized": False, "bits": bits}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    split_fixture()
    emb_fixture()
