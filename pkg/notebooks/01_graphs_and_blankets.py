# %% [markdown]
# # Mixed graphs, m-separation and Markov blankets
#
# Two confounded context variables `C1`, `C2` (a bidirected edge stands in
# for their latent common cause) and a target `T`.

# %%
from sctl.blanket import ALGORITHMS
from sctl.citest import OracleCI
from sctl.graph import format_graph, graphical_markov_blanket, m_separated, separating_subset_exists
from sctl.reference import two_context_graph, small_graph

g = two_context_graph()
print(format_graph(g))

# %% [markdown]
# `T` and `C1` are connected through the collider `Y` only once `Y` is
# conditioned on, and through `C1 <-> C2 -> X -> T` until `X` is.

# %%
for z in [(), ("X",), ("X", "Y"), ("C2",)]:
    print(f"T _||_ C1 | {set(z) or '{}'}: {m_separated(g, {'T'}, {'C1'}, set(z))}")
print("witness:", separating_subset_exists(g, "T", "C1"))

# %% [markdown]
# The blanket of `T` contains `C1` (a spouse through `Y`), so a context
# variable sits inside it and a subset search is needed.

# %%
print("graphical blanket:", sorted(graphical_markov_blanket(g, "T")))
ci = OracleCI(small_graph())
for name, fn in ALGORITHMS.items():
    res = fn(ci, ci.variables, "T")
    print(f"{name:>10}: {sorted(res.blanket)} after {res.test_count} tests")
