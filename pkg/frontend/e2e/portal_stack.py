"""Test stack for the web portal's end-to-end session: one archive node and
one federation portal on localhost, backed by a small synthesized catalog.

The portal's job runner simulates an elapsed-quota breach for any job whose
budget is under 180 s, so the rerun-with-doubled-quota flow is deterministic:
the first run of a public-tier (90 s) job exceeds quota, the doubled rerun
succeeds for real.

Usage: python3 portal_stack.py NODE_PORT PORTAL_PORT
Prints "READY" once both servers answer.
"""

import io
import sys
import tempfile
import threading
import time

import httpx
import numpy as np
import uvicorn

from skyfed.archive import ArchiveNode, create_app
from skyfed.catalog import Catalog, load_example_schema
from skyfed.clients import LocalArchiveClient
from skyfed.portal import Portal, create_portal_app
from skyfed.query import QuotaExceededError
from skyfed.workspace import Scheduler, make_runner


def synthesize(n_photo=2_000, n_spec=200, seed=17):
    """Objects clustered around (180, 0) so small test cones always hit."""
    rng = np.random.default_rng(seed)
    spec = io.StringIO()
    spec.write("id,ra,dec,z,z_err,sn_median,class\n")
    spec_ids = np.arange(1, n_spec + 1) * 10
    for i in range(n_spec):
        spec.write(
            f"{spec_ids[i]},{rng.uniform(178, 182)!r},{rng.uniform(-2, 2)!r},"
            f"{rng.uniform(0, 3)!r},{rng.uniform(1e-5, 1e-3)!r},"
            f"{rng.uniform(1, 40)!r},GALAXY\n"
        )
    photo = io.StringIO()
    photo.write("id,ra,dec,mag_g,mag_r,mag_i,saturated,spec_id\n")
    for i in range(1, n_photo + 1):
        photo.write(
            f"{i},{rng.uniform(178, 182)!r},{rng.uniform(-2, 2)!r},"
            f"{rng.uniform(14, 24)!r},{rng.uniform(14, 24)!r},{rng.uniform(14, 24)!r},"
            f"{rng.integers(0, 2)},{rng.choice(spec_ids)}\n"
        )
    return {
        "photo_obj": io.StringIO(photo.getvalue()),
        "spec_obj": io.StringIO(spec.getvalue()),
    }


def serve(app, port):
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning")
    )
    threading.Thread(target=server.run, daemon=True).start()
    return server


def wait_http(url, timeout_s=30.0):
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            httpx.get(url, timeout=1.0)
            return
        except Exception:
            time.sleep(0.1)
    raise RuntimeError(f"server at {url} never came up")


def main():
    node_port, portal_port = int(sys.argv[1]), int(sys.argv[2])

    root = tempfile.mkdtemp(prefix="skyfed-e2e-")
    catalog = Catalog(root, load_example_schema())
    catalog.load_tables(synthesize())

    node = ArchiveNode("sky", catalog)
    serve(create_app(node), node_port)
    node_endpoint = f"http://127.0.0.1:{node_port}"
    wait_http(f"{node_endpoint}/describe")

    portal = Portal(users={"ann": "s3cret"})
    portal.registry.register(
        "sky", node_endpoint, LocalArchiveClient("sky", catalog).describe()
    )

    real_runner = make_runner(portal.clients, portal.mydb)

    def breach_below_180(job):
        if job.elapsed_s < 180.0:
            raise QuotaExceededError(
                f"elapsed budget of {job.elapsed_s:.0f} s exceeded"
            )
        return real_runner(job)

    portal.scheduler.stop()
    portal.scheduler = Scheduler(
        breach_below_180, mydb=portal.mydb, tiers=portal.tiers, workers=1
    )

    serve(create_portal_app(portal), portal_port)
    wait_http(f"http://127.0.0.1:{portal_port}/registry/list")

    print("READY", flush=True)
    threading.Event().wait()  # run until killed


if __name__ == "__main__":
    main()
