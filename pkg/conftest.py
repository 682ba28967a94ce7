"""Skip the trainer's test tree when the trainer package isn't installed.

The runtime package has no torch dependency; its suite must pass on its own.
"""

import importlib.util

if importlib.util.find_spec("ddd_trainer") is None:
    collect_ignore_glob = ["trainer/*"]
