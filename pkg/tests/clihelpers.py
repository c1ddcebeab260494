import subprocess
import sys


def kap(*args, **kw):
    return subprocess.run([sys.executable, "-m", "kap", *map(str, args)], capture_output=True, text=True, **kw)


def start_server(params, seed="aa"):
    proc = subprocess.Popen(
        [sys.executable, "-m", "kap", "serve", "--params", str(params), "--port", "0", "--seed", seed],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
    )
    line = proc.stdout.readline()
    assert line.startswith("listening on "), line + proc.stderr.read()
    return proc, int(line.rsplit(":", 1)[1])


def digest_line(text):
    lines = [ln for ln in text.splitlines() if ln.startswith("key digest: ")]
    return lines[0].split(": ")[1] if lines else None
