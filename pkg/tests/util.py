"""Random test graphs (connected, symmetric weights, positive measure)."""

from shnol_lab.graph import graph_from_dict


def random_graph(rng, n, p=0.3, kappa_range=(-0.5, 1.0), measure=True):
    edges = {}
    for i in range(1, n):  # random spanning tree keeps the graph connected
        j = int(rng.integers(0, i))
        edges[(j, i)] = float(rng.uniform(0.1, 2.0))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges[(i, j)] = float(rng.uniform(0.1, 2.0))
    verts = [{"id": i,
              "kappa": float(rng.uniform(*kappa_range)),
              "m": float(rng.uniform(0.5, 2.0)) if measure else 1.0} for i in range(n)]
    return graph_from_dict({
        "root": 0,
        "vertices": verts,
        "edges": [{"u": a, "v": b, "b": w} for (a, b), w in edges.items()],
    })
