"""
Ótimos conhecidos de instâncias TSPLIB EUC_2D (custos arredondados).
"""
from typing import Dict, Optional

KNOWN_OPTIMA: Dict[str, int] = {
    # até 100 nós
    "eil51": 426,
    "berlin52": 7542,
    "st70": 675,
    "eil76": 538,
    "pr76": 108159,
    "rat99": 1211,
    "rd100": 7910,
    "kroA100": 21282,
    "kroB100": 22141,
    "kroC100": 20749,
    "kroD100": 21294,
    "kroE100": 22068,

    # 101 a 200 nós
    "eil101": 629,
    "lin105": 14379,
    "pr107": 44303,
    "pr124": 59030,
    "bier127": 118282,
    "ch130": 6110,
    "pr136": 96772,
    "pr144": 58537,
    "ch150": 6528,
    "kroA150": 26524,
    "kroB150": 26130,
    "pr152": 73682,
    "u159": 42080,
    "rat195": 2323,
    "kroA200": 29368,

    # acima de 200 nós
    "ts225": 126643,
    "tsp225": 3919,
    "pr226": 80369,
    "gil262": 2378,
    "pr264": 49135,
    "a280": 2579,
    "pr299": 48191,
    "pr439": 107217,
}


def get_known_optimum(name: str) -> Optional[int]:
    """Ótimo pelo nome da instância (sem extensão), ou None."""
    if not name:
        return None
    return KNOWN_OPTIMA.get(name.strip().removesuffix(".tsp"))
