"""Run manifests: digests of emitted files, written atomically next to them."""

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

MANIFEST = "manifest.json"
TIMING = "timing.json"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def normalized_command(argv):
    """Command line with the output directory replaced by ``<out>`` and ``--workers`` dropped.

    Neither affects the bytes of any output, so recording them would make
    manifests of identical runs differ.
    """
    out, pending = [], None
    for arg in argv:
        if pending == "--out":
            out.append("<out>")
        elif pending == "--workers":
            pass
        elif arg in ("--out", "--workers"):
            if arg == "--out":
                out.append(arg)
            pending = arg
            continue
        elif arg.startswith("--out="):
            out.append("--out=<out>")
        elif not arg.startswith("--workers="):
            out.append(arg)
        pending = None
    return out


def now_iso():
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class RunManifest:
    """Deterministic part of a run record; wall-clock data lives in ``timing.json``."""

    tool_version: str
    command: list
    config_hash: str
    seed: int
    task: str
    exit_code: int = 0
    files: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def write_outputs(out_dir, outputs, manifest, started, finished):
    """Write every ``name -> text`` output, then the manifest and the timing sidecar.

    Output writing is serialized here so concurrent producers never race.
    """
    os.makedirs(out_dir, exist_ok=True)
    for name in sorted(outputs):
        atomic_write(os.path.join(out_dir, name), outputs[name])
    manifest.files = {name: sha256_file(os.path.join(out_dir, name)) for name in sorted(outputs)}
    atomic_write(os.path.join(out_dir, MANIFEST), manifest.to_json())
    timing = {"started": started, "finished": finished}
    atomic_write(os.path.join(out_dir, TIMING), json.dumps(timing, indent=2) + "\n")
    return manifest


def verify_manifest(out_dir):
    """Names of files whose digest no longer matches the manifest (empty if all match)."""
    with open(os.path.join(out_dir, MANIFEST), encoding="utf-8") as fh:
        data = json.load(fh)
    bad = []
    for name, digest in data["files"].items():
        path = os.path.join(out_dir, name)
        if not os.path.exists(path) or sha256_file(path) != digest:
            bad.append(name)
    return bad
