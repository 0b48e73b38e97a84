from .cherlin_lachlan import CLStructure, gen_cherlin_lachlan, orbit_equal, orbit_inventory
from .hypergraph import KayGraphPair, extension_deficiency, gen_hypergraph, gen_kaygraph, parity_reduct
from .johnson import JohnsonStructure, gen_johnson

__all__ = [
    "CLStructure", "JohnsonStructure", "KayGraphPair", "extension_deficiency", "gen_cherlin_lachlan",
    "gen_hypergraph", "gen_johnson", "gen_kaygraph", "orbit_equal", "orbit_inventory", "parity_reduct",
]
