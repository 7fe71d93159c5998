"""Smoke test for the pylmap extension.

Build first, either with maturin (`maturin develop -m crates/python/Cargo.toml`)
or by copying the cargo artifact next to this file:

    cargo build --release -p lmap-py --features extension-module
    cp target/release/libpylmap.so python/pylmap.so
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pylmap  # noqa: E402


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b)) and len(a) == len(b)


def main():
    code = pylmap.Code("7,5")
    assert code.m == 2 and code.states == 4, code
    spec = pylmap.synthesize(code)
    assert spec.labels_i == "({2},{1,2},{1})", spec.labels_i
    assert spec.labels_j == "({2},{1})"
    assert spec.sur == "{1,2}" and spec.d_s == 0
    assert pylmap.DecoderSpec.parse(spec.text()).text() == spec.text()

    dec = pylmap.Decoder(code)
    info, cw, sse = pylmap.simulate(code, 8, 2.0, seed=3)
    assert len(info) == 8 and len(cw) == 16 and len(sse) == 8
    for boundary in ("free", "zero"):
        got = dec.decode(sse, boundary=boundary)
        assert close(got, pylmap.bcjr(code, sse, boundary=boundary), 1e-8)
        assert close(got, pylmap.exhaustive(code, sse, boundary=boundary), 1e-8)
    assert close(dec.decode(sse, mode="forward"), pylmap.bcjr(code, sse, mode="forward"), 1e-8)

    tb = pylmap.Code("171,133", "nsc", True)
    _, _, sse = pylmap.simulate(tb, 32, 2.0, seed=4)
    got = pylmap.Decoder(tb).decode_tailbiting(sse, precision="dd")
    assert close(got, pylmap.bcjr(tb, sse, mode="tb"), 1e-6)

    pts = pylmap.ber(code, "0,2", len=64, min_bit_errors=200, seed=1, timing=False)
    assert [p["snr_db"] for p in pts] == [0.0, 2.0]
    assert pts[1]["ber"] < pts[0]["ber"]
    assert all(p["bits"] == 64 * p["frames"] for p in pts)

    try:
        pylmap.Code("5,7").m and pylmap.synthesize(pylmap.Code("5,7"))
    except ValueError:
        pass
    else:
        raise AssertionError("non-primitive code accepted")

    print("pylmap smoke: ok")


if __name__ == "__main__":
    main()
