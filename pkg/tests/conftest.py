import pytest

from qkdnet.network import NetworkGraph, QkdLink


def _chain_links(names, **kw):
    return [QkdLink(u, v, **kw) for u, v in zip(names[:-1], names[1:])]


@pytest.fixture
def two_chains_graph():
    """Two chains of trusted nodes between alice and bob."""
    nodes = {"alice", "n1", "n2", "n3", "n4", "bob"}
    links = _chain_links(("alice", "n1", "n2", "bob")) + \
        _chain_links(("alice", "n3", "n4", "bob"))
    return NetworkGraph(nodes, links)


@pytest.fixture
def three_path_graph():
    """Three two-hop paths alice-xK-bob, K in {1,2,3}."""
    nodes = {"alice", "bob", "x1", "x2", "x3"}
    links = []
    for x in ("x1", "x2", "x3"):
        links += [QkdLink("alice", x), QkdLink(x, "bob")]
    return NetworkGraph(nodes, links)
