# %% [markdown]
# # One thousand variables
#
# The wide scenario pads the small graph with 991 unrelated variables.
# Blanket discovery keeps the subset search small; exhaustive search
# refuses beyond twenty candidates.

# %%
import tempfile
import time

from sctl.bench import run_suite

suite = {
    "name": "scalability",
    "seed": 0,
    "scenarios": [{"builtin": "wide", "replicates": 1, "sample_sizes": [1000, 1000]}],
    "methods": ["sctl", "ess"],
    "mb_algorithm": "fdr_iamb",
}
start = time.perf_counter()
with tempfile.TemporaryDirectory() as out:
    paths = run_suite(suite, out)
    print(paths["results"].read_text())
    print(paths["report"].read_text())
print(f"total {time.perf_counter() - start:.1f}s")
