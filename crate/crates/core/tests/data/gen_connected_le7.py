import itertools, networkx as nx
from networkx.generators.atlas import graph_atlas_g

def tight_counts(G):
    n = G.number_of_nodes()
    V = list(range(n))
    adj = {v: set(G[v]) for v in V}
    seps = []
    for code in itertools.product(range(3), repeat=n):  # 0: A only, 1: B only, 2: both
        A_only = [v for v in V if code[v] == 0]
        B_only = set(v for v in V if code[v] == 1)
        if any(adj[a] & B_only for a in A_only):
            continue
        S = frozenset(v for v in V if code[v] == 2)
        if len(S) > 3:
            continue
        def full_component(side):
            H = G.subgraph(side)
            for comp in nx.connected_components(H):
                nb = set().union(*(adj[c] for c in comp)) - set(comp)
                if nb == set(S):
                    return True
            return False
        if S and full_component(A_only) and full_component(B_only):
            seps.append(S)
    out = []
    for v in V:
        for k in (1, 2, 3):
            out.append(sum(1 for S in seps if v in S and len(S) <= k))
    return out

lines = []
for G in graph_atlas_g():
    n = G.number_of_nodes()
    if n == 0 or not nx.is_connected(G):
        continue
    G = nx.convert_node_labels_to_integers(G)
    edges = ",".join(f"{u}-{v}" for u, v in sorted(tuple(sorted(e)) for e in G.edges()))
    lines.append(f"{n};{edges};{' '.join(map(str, tight_counts(G)))}")
open("connected_le7.txt", "w").write("\n".join(lines) + "\n")
print(len(lines))
