"""Smoke test for the dexkit Python module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/dexkit-*.whl
"""

import os
import random
import sys
import tempfile

import dexkit


def reference_dex(values, c, h, w, c_out, h_out, w_out):
    k = -(-c_out // c)
    out = [0] * (c_out * h_out * w_out)
    for i in range(h_out):
        r0, r1 = i * h // h_out, (i + 1) * h // h_out
        for j in range(w_out):
            c0, c1 = j * w // w_out, (j + 1) * w // w_out
            pw = c1 - c0
            area = (r1 - r0) * pw
            step = 0 if k == 1 else (area - 1) // (k - 1)
            stacked = []
            for n in range(k):
                flat = n * step
                row, col = r0 + flat // pw, c0 + flat % pw
                stacked.extend(values[ch * h * w + row * w + col] for ch in range(c))
            for oc, v in enumerate(stacked[:c_out]):
                out[oc * h_out * w_out + i * w_out + j] = v
    return out


def check(cond, what):
    print(("ok    " if cond else "FAIL  ") + what)
    return cond


def main():
    results = []

    toy = dexkit.Tensor(list(range(48)), (3, 4, 4))
    out = dexkit.dex_extend(toy, (6, 2, 2))
    first_pixel = [out.get(c, 0, 0) for c in range(6)]
    results.append(check(first_pixel == [0, 16, 32, 5, 21, 37], "toy 3x4x4 -> 6x2x2 first pixel"))
    results.append(check(dexkit.patch_bounds(5, 0, 350, 350, 32, 32)[:2] == (54, 65), "patch bounds"))

    rng = random.Random(7)
    same = True
    for _ in range(200):
        c = rng.choice([1, 3])
        h, w = rng.randint(1, 10), rng.randint(1, 10)
        h_out, w_out = rng.randint(1, h), rng.randint(1, w)
        c_out = rng.randint(c, 40)
        values = [rng.randrange(256) for _ in range(c * h * w)]
        got = dexkit.transform(dexkit.Tensor(values, (c, h, w)), "dex", (c_out, h_out, w_out)).tolist()
        same &= got == reference_dex(values, c, h, w, c_out, h_out, w_out)
    results.append(check(same, "dex matches the pure Python reference on 200 cases"))

    report = dexkit.plan((3, 224, 224), "max78000")
    results.append(check(not report["fits"] and report["bytes_per_channel"] == 50176, "3x224x224 does not fit"))
    report = dexkit.plan((64, 32, 32), orig_shape=(3, 350, 350), kernel=3, layer_out=64)
    results.append(check(report["fits"] and report["processor_utilization"] == 1.0, "64x32x32 fits at full utilization"))
    results.append(check(round(report["info_ratio"], 1) == 21.3, "info ratio 21.3"))
    results.append(check(report["first_layer_param_delta"] == 35136, "parameter delta 35136"))

    q7 = dexkit.quantize_q7(dexkit.normalize(out))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "t.dext")
        dexkit.write_tensor(path, q7)
        results.append(check(os.path.getsize(path) == 20 + 24, "file size"))
        results.append(check(dexkit.read_tensor(path) == q7, "tensor file round trip"))

    try:
        dexkit.transform(toy, "zoom", (6, 2, 2))
        raised = False
    except dexkit.DexError as e:
        raised = "UnknownStrategy" in str(e)
    results.append(check(raised, "unknown strategy raises DexError"))

    print(f"{sum(results)} of {len(results)} checks passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
