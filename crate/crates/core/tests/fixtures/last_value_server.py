"""Line-delimited JSON worker answering with the last value of feature 0.

Usage: last_value_server.py [normal|crash-once STATE|crash-always|error|sleep SECONDS|bad-id]
"""
import json
import os
import sys
import time

mode = sys.argv[1] if len(sys.argv) > 1 else "normal"

for line in sys.stdin:
    try:
        req = json.loads(line)
    except ValueError:
        print(json.dumps({"id": None, "error": "malformed request"}), flush=True)
        continue
    rid = req.get("id")
    if mode == "crash-always":
        sys.exit(1)
    if mode == "crash-once":
        state = sys.argv[2]
        if not os.path.exists(state):
            open(state, "w").close()
            sys.exit(1)
    if mode == "sleep":
        time.sleep(float(sys.argv[2]))
    if mode == "error":
        print(json.dumps({"id": rid, "error": "model exploded"}), flush=True)
        continue
    if mode == "bad-id":
        rid = rid + 1000
    preds = [w[-1][0] for w in req["windows"]]
    try:
        print(json.dumps({"id": rid, "predictions": preds}), flush=True)
    except BrokenPipeError:
        sys.exit(0)
