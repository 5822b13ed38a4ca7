import os
import subprocess
import sys

from tmdtochain import _backend


def backend_in_subprocess(force):
    env = {k: v for k, v in os.environ.items() if k != "TMDTOCHAIN_PURE_PYTHON"}
    if force:
        env["TMDTOCHAIN_PURE_PYTHON"] = "1"
    out = subprocess.run(
        [sys.executable, "-c", "from tmdtochain._backend import BACKEND; print(BACKEND)"],
        capture_output=True, text=True, check=True, env=env,
    )
    return out.stdout.strip()


def test_fallback_can_be_forced():
    assert backend_in_subprocess(force=True) == "python"


def test_default_prefers_compiled():
    expected = "compiled" if _backend.compiled is not None else "python"
    assert backend_in_subprocess(force=False) == expected


def test_both_backends_share_an_interface():
    names = {"NAME", "mix64", "oneway_step", "chain_ends", "chain_image_suffixes", "prepare",
             "invert", "block_digest", "mini_pow"}
    for k in _backend.available():
        assert names <= set(dir(k)), k.NAME
