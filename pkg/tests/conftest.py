import math
import sys

import numpy as np


def mc_z(draws, closed, moment="expectation"):
    """z-score of an empirical mean or SD against its exact value.

    Kept separate from the library's own checker so the two can disagree.
    """
    x = np.asarray(draws, dtype=float)
    R = x.size
    if moment == "expectation":
        return (x.mean() - closed) / (x.std(ddof=1) / math.sqrt(R))
    s = x.std(ddof=1)
    c = x - x.mean()
    var_s2 = (np.mean(c**4) - np.mean(c**2) ** 2) / R
    return (s - closed) / (math.sqrt(var_s2) / (2 * s))


def pytest_terminal_summary(terminalreporter):
    # print the acceptance lines even when output capture hides them
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
